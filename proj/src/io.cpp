#include "malmixer/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <thread>

namespace malmixer {

namespace {

int env_thread_cap() {
  const char* v = std::getenv("MALMIXER_THREADS");
  if (v == nullptr) return 1;
  int n = std::atoi(v);
  return n < 1 ? 1 : n;
}

}  // namespace

int thread_cap() {
  static const int cap = env_thread_cap();
  return cap;
}

void parallel_for_rows(int n, const std::function<void(int, int)>& fn) {
  int threads = std::min(thread_cap(), n);
  if (threads <= 1) {
    if (n > 0) fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  int chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    int begin = t * chunk;
    int end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(fn, begin, end);
  }
  for (auto& th : pool) th.join();
}

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts need byte swaps");

MatXf read_f32_matrix(const std::filesystem::path& path, long rows, long cols) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) throw Error("cannot open feature file: " + path.string());
  const auto bytes = static_cast<long>(f.tellg());
  if (cols <= 0) throw Error("feature file needs a positive column count");
  if (bytes % 4 != 0) throw Error("feature file size is not a multiple of 4: " + path.string());
  const long values = bytes / 4;
  if (rows < 0) {
    if (values % cols != 0)
      throw Error("feature file size does not divide by dim=" + std::to_string(cols) + ": " +
                  path.string());
    rows = values / cols;
  } else if (values != rows * cols) {
    throw Error("feature file " + path.string() + " holds " + std::to_string(values) +
                " values, expected " + std::to_string(rows * cols) + " (" + std::to_string(rows) +
                "x" + std::to_string(cols) + ")");
  }
  MatXf m(rows, cols);
  f.seekg(0);
  f.read(reinterpret_cast<char*>(m.data()), bytes);
  if (!f) throw Error("short read on feature file: " + path.string());
  return m;
}

void write_f32_matrix(const std::filesystem::path& path, const MatXf& m) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write feature file: " + path.string());
  f.write(reinterpret_cast<const char*>(m.data()),
          static_cast<std::streamsize>(sizeof(float) * static_cast<std::size_t>(m.size())));
  if (!f) throw Error("short write on feature file: " + path.string());
}

json load_json(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path.string());
  json j;
  try {
    f >> j;
  } catch (const json::parse_error& e) {
    throw Error("malformed JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

void save_json(const std::filesystem::path& path, const json& j) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << j.dump(2) << "\n";
}

std::int64_t parse_iso8601(const std::string& s) {
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  int n = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2d%n", &year, &month, &day, &n) != 3 || n != 10)
    throw Error("malformed ISO-8601 date: '" + s + "'");
  if (s.size() > 10) {
    int m2 = 0;
    if (std::sscanf(s.c_str() + 10, "T%2d:%2d:%2d%n", &hour, &minute, &second, &m2) != 3)
      throw Error("malformed ISO-8601 time: '" + s + "'");
    const std::string rest = s.substr(10 + static_cast<std::size_t>(m2));
    if (!rest.empty() && rest != "Z") throw Error("unsupported ISO-8601 suffix: '" + s + "'");
  }
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60)
    throw Error("out-of-range ISO-8601 field: '" + s + "'");
  // Days since 1970-01-01, proleptic Gregorian (Howard Hinnant's algorithm).
  const int y = year - (month <= 2 ? 1 : 0);
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = static_cast<unsigned>((153 * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1);
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  const std::int64_t days = static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
  return days * 86400 + hour * 3600 + minute * 60 + second;
}

}  // namespace malmixer
