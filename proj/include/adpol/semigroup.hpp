#pragma once

// The affine semigroup G of maps t -> a + b t of the real line, its character,
// the sub-semigroups G^rho and the left-invariant polarizations Q(s).

#include <cmath>
#include <complex>
#include <limits>
#include <ostream>
#include <variant>

#include "adpol/error.hpp"
#include "adpol/linalg.hpp"

namespace adpol {

/// The affine map t -> a + b t. b may be zero or negative (G is only a semigroup).
struct GroupElement {
  double a = 0.0;
  double b = 1.0;

  static constexpr GroupElement identity() { return {0.0, 1.0}; }
  static constexpr GroupElement translation(double a) { return {a, 1.0}; }
  static constexpr GroupElement dilation(double b) { return {0.0, b}; }

  double operator()(double t) const { return a + b * t; }

  friend bool operator==(const GroupElement&, const GroupElement&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const GroupElement& g) {
  return os << "(" << g.a << ", " << g.b << ")";
}

/// g o h, i.e. t -> g(h(t)).
constexpr GroupElement compose(const GroupElement& g, const GroupElement& h) {
  return {g.a + g.b * h.a, g.b * h.b};
}

/// The character chi(g) = b.
constexpr double character(const GroupElement& g) { return g.b; }

/// Membership in G^rho = { |chi| <= rho }; rho may be +infinity.
inline bool in_subsemigroup(const GroupElement& g, double rho) {
  return std::abs(g.b) <= rho;
}

/// Inverse in the affine group; only defined when b != 0.
inline GroupElement invert(const GroupElement& g) {
  if (g.b == 0.0) throw InvalidArgument("invert: element with b = 0 is not invertible");
  return {-g.a / g.b, 1.0 / g.b};
}

/// Point s of C u {infinity} indexing the left-invariant polarization Q(s).
class PolarizationParam {
 public:
  struct Infinity {
    friend bool operator==(Infinity, Infinity) { return true; }
  };

  PolarizationParam(cplx s) : value_(s) {}  // NOLINT: implicit from a complex number
  PolarizationParam(double s) : value_(cplx(s, 0.0)) {}  // NOLINT
  static PolarizationParam infinity() { return PolarizationParam(Infinity{}); }

  bool is_infinite() const { return std::holds_alternative<Infinity>(value_); }
  bool is_finite() const { return !is_infinite(); }
  /// Real parameters (and infinity) give real polarizations.
  bool is_real() const { return is_infinite() || std::get<cplx>(value_).imag() == 0.0; }
  bool is_complex() const { return !is_real(); }

  cplx value() const {
    if (is_infinite()) throw InvalidArgument("PolarizationParam: infinity has no finite value");
    return std::get<cplx>(value_);
  }

  friend bool operator==(const PolarizationParam&, const PolarizationParam&) = default;

 private:
  explicit PolarizationParam(Infinity inf) : value_(inf) {}
  std::variant<cplx, Infinity> value_;
};

inline std::ostream& operator<<(std::ostream& os, const PolarizationParam& s) {
  if (s.is_infinite()) return os << "inf";
  return os << s.value();
}

/// The affine action g.s = a + b s extended to C, with g.inf = inf for b != 0.
inline PolarizationParam act_on_complex(const GroupElement& g, const PolarizationParam& s) {
  if (s.is_infinite()) {
    if (g.b == 0.0) throw InvalidArgument("act_on_complex: b = 0 collapses infinity to a point");
    return s;
  }
  return PolarizationParam(g.a + g.b * s.value());
}

/// Result of solve_transporter; `unique` is false when both parameters are real
/// and the returned element is the translation-only solution.
struct Transporter {
  GroupElement g;
  bool unique = true;
};

/// Finds g with g.s_from = s_to.
inline Transporter solve_transporter(const PolarizationParam& s_from, const PolarizationParam& s_to) {
  if (s_from.is_infinite() || s_to.is_infinite())
    throw InvalidArgument("solve_transporter: parameters must be finite");
  const cplx from = s_from.value();
  const cplx to = s_to.value();
  if (from.imag() != 0.0) {
    const double b = to.imag() / from.imag();
    return {{to.real() - b * from.real(), b}, true};
  }
  if (to.imag() != 0.0)
    throw NoSolution("solve_transporter: a real parameter cannot be moved off the real axis");
  return {{to.real() - from.real(), 1.0}, false};
}

/// Direction (da, db) of the leaf of Q(s) through id, for s real or infinite.
/// The leaf is the stabilizer H_s = { g : g.s = s } = { a = s (1 - b) }.
struct LeafDirection {
  double da = 0.0;
  double db = 0.0;
  /// Slope db/da; infinite for a vertical leaf.
  double slope() const {
    return da == 0.0 ? std::numeric_limits<double>::infinity() : db / da;
  }
};

inline LeafDirection leaf_direction(const PolarizationParam& s) {
  if (s.is_infinite()) return {1.0, 0.0};
  if (s.is_complex()) throw InvalidArgument("leaf_direction: complex polarizations have no leaves");
  return {s.value().real(), -1.0};
}

}  // namespace adpol
