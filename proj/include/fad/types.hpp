#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace fad {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Observations are stored contiguously by row; both matvec directions
// stream the matrix once in this layout.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class ScaleMode { correlation, covariance };

inline const char* to_string(ScaleMode m) {
  return m == ScaleMode::correlation ? "correlation" : "covariance";
}

// Numerical or contract violation surfaced to the caller.
class FadError : public std::runtime_error {
 public:
  explicit FadError(const std::string& what) : std::runtime_error(what) {}
};

inline void check(bool cond, const std::string& msg) {
  if (!cond) throw FadError(msg);
}

}  // namespace fad
