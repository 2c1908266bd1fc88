#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace agghb::testing {

// Uniform in the cube [-r, r]^n.
inline std::vector<double> random_point(std::mt19937_64& gen, std::size_t n, double r) {
  std::uniform_real_distribution<double> u(-r, r);
  std::vector<double> x(n);
  for (double& e : x) e = u(gen);
  return x;
}

// Uniform in the ball of radius r.
inline std::vector<double> random_in_ball(std::mt19937_64& gen, std::size_t n, double r) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(n);
  double s = 0.0;
  for (double& e : x) {
    e = nd(gen);
    s += e * e;
  }
  const double scale = r * std::pow(u(gen), 1.0 / static_cast<double>(n)) / std::sqrt(s);
  for (double& e : x) e *= scale;
  return x;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("agghb-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
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

}  // namespace agghb::testing
