#pragma once

// Second-order forward-mode differentiation over a small joint parameter
// vector. A Jet carries a value, its gradient and its Hessian with respect to
// every seeded input. Constants carry an empty gradient and mix freely with
// seeded jets.

#include <Eigen/Core>

#include <cmath>
#include <cstddef>

namespace pbos {

inline constexpr int kMaxJetDim = 16;

using JetVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxJetDim, 1>;
using JetMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxJetDim, kMaxJetDim>;

class Jet {
 public:
  Jet() = default;
  Jet(double value) : value_(value) {}  // NOLINT(google-explicit-constructor)

  static Jet variable(double value, int index, int dim) {
    Jet j(value);
    j.grad_ = JetVector::Zero(dim);
    j.grad_(index) = 1.0;
    j.hess_ = JetMatrix::Zero(dim, dim);
    return j;
  }

  double value() const { return value_; }
  const JetVector& grad() const { return grad_; }
  const JetMatrix& hess() const { return hess_; }
  bool is_constant() const { return grad_.size() == 0; }
  int dim() const { return static_cast<int>(grad_.size()); }

  // Applies a scalar function with known first and second derivatives.
  Jet chain(double f, double df, double d2f) const {
    Jet out(f);
    if (!is_constant()) {
      out.grad_ = df * grad_;
      out.hess_ = df * hess_ + d2f * (grad_ * grad_.transpose());
    }
    return out;
  }

  Jet operator-() const { return chain(-value_, -1.0, 0.0); }

  Jet& operator+=(const Jet& o) { return *this = *this + o; }
  Jet& operator-=(const Jet& o) { return *this = *this - o; }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }

  friend Jet operator+(const Jet& a, const Jet& b) {
    if (a.is_constant()) return b.chain(a.value_ + b.value_, 1.0, 0.0);
    if (b.is_constant()) return a.chain(a.value_ + b.value_, 1.0, 0.0);
    Jet out(a.value_ + b.value_);
    out.grad_ = a.grad_ + b.grad_;
    out.hess_ = a.hess_ + b.hess_;
    return out;
  }

  friend Jet operator-(const Jet& a, const Jet& b) { return a + (-b); }

  friend Jet operator*(const Jet& a, const Jet& b) {
    if (a.is_constant()) return b.chain(a.value_ * b.value_, a.value_, 0.0);
    if (b.is_constant()) return a.chain(a.value_ * b.value_, b.value_, 0.0);
    Jet out(a.value_ * b.value_);
    out.grad_ = b.value_ * a.grad_ + a.value_ * b.grad_;
    const JetMatrix cross = a.grad_ * b.grad_.transpose();
    out.hess_ = b.value_ * a.hess_ + a.value_ * b.hess_ + cross + cross.transpose();
    return out;
  }

  friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

  friend Jet reciprocal(const Jet& x) {
    const double inv = 1.0 / x.value_;
    return x.chain(inv, -inv * inv, 2.0 * inv * inv * inv);
  }

  friend Jet exp(const Jet& x) {
    const double e = std::exp(x.value_);
    return x.chain(e, e, e);
  }

  friend Jet log(const Jet& x) {
    const double inv = 1.0 / x.value_;
    return x.chain(std::log(x.value_), inv, -inv * inv);
  }

  friend Jet sigmoid(const Jet& x);

 private:
  double value_ = 0.0;
  JetVector grad_;
  JetMatrix hess_;
};

// Logistic function, stable for large |x|.
inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline Jet sigmoid(const Jet& x) {
  const double s = sigmoid(x.value_);
  const double ds = s * (1.0 - s);
  return x.chain(s, ds, ds * (1.0 - 2.0 * s));
}

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.value(); }

}  // namespace pbos
