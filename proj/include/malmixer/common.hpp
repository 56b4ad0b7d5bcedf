#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace malmixer {

// Row-major so sample rows are contiguous, matching the on-disk layout.
using MatXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VecXf = Eigen::VectorXf;
using VecXd = Eigen::VectorXd;

template <typename T>
using MatX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using VecX = Eigen::Matrix<T, Eigen::Dynamic, 1>;

/// Raised for violated preconditions and malformed inputs.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised for invalid configuration (maps to CLI exit code 2).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Thread cap for row-parallel batch work. Reads MALMIXER_THREADS once;
/// defaults to 1 so every run is single-threaded unless asked otherwise.
int thread_cap();

/// Runs fn(begin, end) over [0, n) in contiguous chunks, using at most
/// thread_cap() threads. Chunks write disjoint rows, so results are identical
/// for any thread count.
void parallel_for_rows(int n, const std::function<void(int, int)>& fn);

}  // namespace malmixer
