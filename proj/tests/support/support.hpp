#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "topicreg/design.hpp"
#include "topicreg/log.hpp"

namespace testsupport {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("topicreg-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Collects warnings for the lifetime of the object.
class CaptureWarnings {
 public:
  CaptureWarnings() {
    prev_ = topicreg::set_warning_sink([this](std::string_view m) { messages.emplace_back(m); });
  }
  ~CaptureWarnings() { topicreg::set_warning_sink(prev_); }
  std::vector<std::string> messages;

 private:
  topicreg::WarningSink prev_;
};

/// NB2 pmf from the product form of the gamma ratio,
///   Γ(y+r)/(Γ(r) y!) = Π_{j<y} (r+j)/(j+1),
/// in long double. Independent of any log-gamma routine.
inline long double nb_pmf_product(int y, long double mu, long double alpha) {
  const long double r = 1.0L / alpha;
  const long double p = 1.0L / (1.0L + alpha * mu);
  long double log_coef = 0.0L;
  for (int j = 0; j < y; ++j) log_coef += std::log((r + j) / (j + 1));
  return std::exp(log_coef + r * std::log(p) + y * std::log1p(-p));
}

inline long double poisson_pmf_product(int y, long double mu) {
  long double lp = -mu;
  for (int j = 1; j <= y; ++j) lp += std::log(mu / j);
  return std::exp(lp);
}

/// Design with an intercept and standard-normal covariates, drawn with the
/// standard library only.
inline topicreg::DesignMatrix gaussian_design(int n, int ncov, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  topicreg::DesignMatrix d;
  d.X.resize(n, ncov + 1);
  d.column_names.push_back("const");
  for (int j = 0; j < ncov; ++j) d.column_names.push_back("x" + std::to_string(j + 1));
  for (int i = 0; i < n; ++i) {
    d.X(i, 0) = 1.0;
    for (int j = 0; j < ncov; ++j) d.X(i, j + 1) = nd(rng);
  }
  d.y = Eigen::VectorXd::Zero(n);
  return d;
}

}  // namespace testsupport
