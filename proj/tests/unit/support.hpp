#ifndef NLPR_TESTS_SUPPORT_HPP
#define NLPR_TESTS_SUPPORT_HPP

#include <filesystem>
#include <string>

#include "nlpr/autodiff/tensor.hpp"
#include "nlpr/random.hpp"

namespace nlpr::testing {

inline ad::Matrix<double> random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo = -1.0,
                                        double hi = 1.0) {
  ad::Matrix<double> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

inline ad::Tensor random_parameter(Rng& rng, Eigen::Index rows, Eigen::Index cols, const std::string& name) {
  return ad::Tensor::parameter(random_matrix(rng, rows, cols), name);
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    Rng rng(std::hash<std::string>{}(tag) ^ static_cast<std::uint64_t>(reinterpret_cast<std::uintptr_t>(this)));
    path_ = std::filesystem::temp_directory_path() / ("nlpr-" + tag + "-" + std::to_string(rng.below(1u << 30)));
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

}  // namespace nlpr::testing

#endif  // NLPR_TESTS_SUPPORT_HPP
