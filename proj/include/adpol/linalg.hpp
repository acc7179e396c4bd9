#pragma once

#include <complex>

#include <Eigen/Dense>

namespace adpol {

using cplx = std::complex<double>;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;

/// Largest absolute entry; 0 for empty matrices.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Smallest and largest singular values of a square matrix.
struct SingularRange {
  double smallest = 0.0;
  double largest = 0.0;
  double ratio() const { return largest > 0.0 ? smallest / largest : 0.0; }
};

template <typename Derived>
SingularRange singular_range(const Eigen::MatrixBase<Derived>& m) {
  Eigen::JacobiSVD<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return {};
  return {sv(sv.size() - 1), sv(0)};
}

/// Standard symplectic matrix [[0, I], [-I, 0]] of size 2m.
inline Mat standard_symplectic(int m) {
  Mat omega = Mat::Zero(2 * m, 2 * m);
  omega.topRightCorner(m, m) = Mat::Identity(m, m);
  omega.bottomLeftCorner(m, m) = -Mat::Identity(m, m);
  return omega;
}

}  // namespace adpol
