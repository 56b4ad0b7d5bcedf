#include "malmixer/io.hpp"
#include "malmixer/synthetic.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

using namespace malmixer;
namespace fs = std::filesystem;

namespace {

const char* cli_path() { return std::getenv("MALMIXER_CLI"); }

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(cli_path()) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

fs::path make_workdir() {
  auto dir = fs::temp_directory_path() / "malmixer_cli_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Tiny on-disk dataset shared by the command tests.
void write_bundle(const fs::path& dir) {
  SyntheticSpec spec;
  spec.families = 2;
  spec.per_family = 30;
  spec.interp_dims = 4;
  spec.code_dims = 2;
  spec.codes_per_family = 3;
  spec.seed = 5;
  auto data = generate_synthetic(spec);
  save_dataset(data.dataset, dir / "features.f32", dir / "meta.json");
  data.schema.save(dir / "schema.json");
}

const char* kTinyOverrides =
    " --set encoder.phi_i_layers=[8] --set encoder.phi_n_layers=[8]"
    " --set encoder.hidden_dim=8 --set encoder.sim_dim=4 --set encoder.dis_dim=4"
    " --set encoder.epochs=2 --set encoder.batch_size=16 --set augment.k_neighbors=3"
    " --set augment.k_candidates=3 --set classifier.stem_dim=8 --set classifier.group_dims=[8]"
    " --set classifier.blocks_per_group=1 --set ssl.epochs=2 --set ssl.pool_variants=2";

}  // namespace

TEST_CASE("cli lifecycle: ingest, train-encoder, build, train, predict") {
  if (cli_path() == nullptr) {
    MESSAGE("MALMIXER_CLI not set; skipping CLI tests");
    return;
  }
  auto dir = make_workdir();
  write_bundle(dir);
  const std::string io_flags = " --dataset " + (dir / "features.f32").string() + " --meta " +
                               (dir / "meta.json").string() + " --schema " +
                               (dir / "schema.json").string() + " --out " +
                               (dir / "out").string();

  CHECK(run_cli("ingest" + io_flags, dir / "ingest.log") == 0);
  CHECK(fs::exists(dir / "out" / "dataset.f32"));

  CHECK(run_cli("train-encoder" + io_flags + kTinyOverrides, dir / "enc.log") == 0);
  CHECK(fs::exists(dir / "out" / "encoder.json"));
  CHECK(fs::exists(dir / "out" / "encoder.json.weights"));
  CHECK(fs::exists(dir / "out" / "encoder_curve.jsonl"));

  CHECK(run_cli("build" + io_flags + kTinyOverrides, dir / "build.log") == 0);
  CHECK(fs::exists(dir / "out" / "pool.f32"));
  CHECK(fs::exists(dir / "out" / "pool_provenance.json"));
  CHECK(fs::exists(dir / "out" / "hn_index.json"));

  CHECK(run_cli("train" + io_flags + kTinyOverrides + " --labels-fraction 0.2",
                dir / "train.log") == 0);
  CHECK(fs::exists(dir / "out" / "classifier.json"));
  CHECK(fs::exists(dir / "out" / "training_log.jsonl"));

  SUBCASE("predict writes one row per sample") {
    CHECK(run_cli("predict --model " + (dir / "out").string() + " --features " +
                      (dir / "features.f32").string() + " --csv " + (dir / "preds.csv").string(),
                  dir / "pred.log") == 0);
    std::string csv = slurp(dir / "preds.csv");
    CHECK(csv.rfind("row,family,p_fam00,p_fam01", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 61);  // header + 60 rows
  }

  SUBCASE("predict on an empty feature file emits a header-only CSV, exit 0") {
    std::ofstream(dir / "empty.f32", std::ios::binary | std::ios::trunc).close();
    CHECK(run_cli("predict --model " + (dir / "out").string() + " --features " +
                      (dir / "empty.f32").string() + " --csv " + (dir / "empty.csv").string(),
                  dir / "pred0.log") == 0);
    std::string csv = slurp(dir / "empty.csv");
    CHECK(csv == "row,family,p_fam00,p_fam01\n");
  }
}

TEST_CASE("cli error contract") {
  if (cli_path() == nullptr) {
    MESSAGE("MALMIXER_CLI not set; skipping CLI tests");
    return;
  }
  auto dir = make_workdir();
  write_bundle(dir);

  SUBCASE("invalid schema path exits 2 and names the path") {
    const int code = run_cli("ingest --dataset " + (dir / "features.f32").string() + " --meta " +
                                 (dir / "meta.json").string() +
                                 " --schema /nonexistent/schema.json --out " +
                                 (dir / "out").string(),
                             dir / "badschema.log");
    CHECK(code == 2);
    CHECK(slurp(dir / "badschema.log").find("/nonexistent/schema.json") != std::string::npos);
  }

  SUBCASE("unknown experiment kind exits 2") {
    CHECK(run_cli("experiment --experiment bogus --out " + (dir / "out").string(),
                  dir / "bogus.log") == 2);
  }

  SUBCASE("usage errors exit 2") {
    CHECK(run_cli("predict", dir / "usage.log") == 2);  // missing required flags
  }
}

TEST_CASE("cli synthetic-bench smoke run writes a metrics report") {
  if (cli_path() == nullptr) {
    MESSAGE("MALMIXER_CLI not set; skipping CLI tests");
    return;
  }
  auto dir = make_workdir();
  const std::string cmd =
      std::string("experiment --experiment synthetic-bench --out ") + (dir / "out").string() +
      " --set experiment.synthetic.families=3 --set experiment.synthetic.per_family=30" +
      " --set experiment.synthetic.interp_dims=6 --set experiment.synthetic.code_dims=3" +
      " --set experiment.seeds=[17] --set experiment.fraction=0.2" + kTinyOverrides;
  CHECK(run_cli(cmd, dir / "bench.log") == 0);
  CHECK(fs::exists(dir / "out" / "synthetic-bench_report.csv"));
  CHECK(fs::exists(dir / "out" / "synthetic-bench_summary.json"));
  std::string csv = slurp(dir / "out" / "synthetic-bench_report.csv");
  CHECK(csv.find("synthetic-bench,full,") != std::string::npos);
}
