#pragma once

// Constant-coefficient complex differential forms on R^n (n <= 8), stored by
// increasing multi-index. Enough exterior algebra to compare top-degree wedges.

#include <bit>
#include <complex>
#include <cstdint>
#include <vector>

#include "adpol/error.hpp"
#include "adpol/linalg.hpp"

namespace adpol {

class Form {
 public:
  Form(int n, int degree) : n_(n), degree_(degree), coeff_(std::size_t{1} << n, cplx(0.0)) {
    if (n < 0 || n > 8) throw InvalidArgument("Form: dimension must be in [0, 8]");
    if (degree < 0 || degree > n) throw InvalidArgument("Form: degree out of range");
  }

  /// sum_i c_i dx^i
  static Form one_form(const CVec& c) {
    Form f(static_cast<int>(c.size()), 1);
    for (int i = 0; i < c.size(); ++i) f.coeff_[std::size_t{1} << i] = c(i);
    return f;
  }
  static Form one_form(const Vec& c) { return one_form(CVec(c.cast<cplx>())); }

  /// The 2-form with f(e_i, e_j) = M(i, j) for an antisymmetric M.
  static Form two_form(const CMat& m) {
    Form f(static_cast<int>(m.rows()), 2);
    for (int i = 0; i < m.rows(); ++i)
      for (int j = i + 1; j < m.cols(); ++j) f.coeff_[(std::size_t{1} << i) | (std::size_t{1} << j)] = m(i, j);
    return f;
  }
  static Form two_form(const Mat& m) { return two_form(CMat(m.cast<cplx>())); }

  int dim() const { return n_; }
  int degree() const { return degree_; }

  cplx coefficient(std::uint32_t mask) const { return coeff_.at(mask); }
  /// Value on the coordinate basis (e_1, ..., e_n); requires a top-degree form.
  cplx top() const {
    if (degree_ != n_) throw InvalidArgument("Form::top: not a top-degree form");
    return coeff_.back();
  }

  Form& operator+=(const Form& o) {
    check_same(o);
    for (std::size_t i = 0; i < coeff_.size(); ++i) coeff_[i] += o.coeff_[i];
    return *this;
  }
  Form& operator-=(const Form& o) {
    check_same(o);
    for (std::size_t i = 0; i < coeff_.size(); ++i) coeff_[i] -= o.coeff_[i];
    return *this;
  }
  Form& operator*=(cplx s) {
    for (auto& c : coeff_) c *= s;
    return *this;
  }
  friend Form operator+(Form a, const Form& b) { return a += b; }
  friend Form operator-(Form a, const Form& b) { return a -= b; }
  friend Form operator*(cplx s, Form a) { return a *= s; }

  friend Form wedge(const Form& a, const Form& b) {
    if (a.n_ != b.n_) throw InvalidArgument("wedge: forms on different spaces");
    if (a.degree_ + b.degree_ > a.n_) throw InvalidArgument("wedge: degree exceeds the dimension");
    Form out(a.n_, a.degree_ + b.degree_);
    for (std::uint32_t i = 0; i < a.coeff_.size(); ++i) {
      if (a.coeff_[i] == 0.0 || std::popcount(i) != a.degree_) continue;
      for (std::uint32_t j = 0; j < b.coeff_.size(); ++j) {
        if ((i & j) != 0 || b.coeff_[j] == 0.0 || std::popcount(j) != b.degree_) continue;
        out.coeff_[i | j] += merge_sign(i, j) * a.coeff_[i] * b.coeff_[j];
      }
    }
    return out;
  }

  /// k-fold wedge power (k >= 1).
  friend Form power(const Form& a, int k) {
    if (k < 1) throw InvalidArgument("power: exponent must be positive");
    Form out = a;
    for (int i = 1; i < k; ++i) out = wedge(out, a);
    return out;
  }

 private:
  /// Sign of the permutation sorting the concatenation of index sets i then j.
  static double merge_sign(std::uint32_t i, std::uint32_t j) {
    int inversions = 0;
    for (std::uint32_t bits = j; bits; bits &= bits - 1) {
      const int idx = std::countr_zero(bits);
      inversions += std::popcount(i >> (idx + 1));  // indices of i above idx come before it
    }
    return (inversions % 2) ? -1.0 : 1.0;
  }

  void check_same(const Form& o) const {
    if (o.n_ != n_ || o.degree_ != degree_) throw InvalidArgument("Form: incompatible operands");
  }

  int n_;
  int degree_;
  std::vector<cplx> coeff_;
};

}  // namespace adpol
