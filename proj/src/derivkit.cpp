#include "pbos/derivkit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>

#include "pbos/errors.hpp"

namespace pbos {

LossDerivatives LossDerivatives::plus_scaled(const LossDerivatives& other, double scale) const {
  LossDerivatives out;
  out.value = value + scale * other.value;
  out.grad1 = grad1 + scale * other.grad1;
  out.grad2 = grad2 + scale * other.grad2;
  out.h11 = h11 + scale * other.h11;
  out.h12 = h12 + scale * other.h12;
  out.h21 = h21 + scale * other.h21;
  out.h22 = h22 + scale * other.h22;
  return out;
}

namespace {

void check_dims(const GameDefinition& game, const Vec& theta1, const Vec& theta2) {
  if (theta1.size() != game.d1() || theta2.size() != game.d2()) {
    throw ConfigError("parameter blocks (" + std::to_string(theta1.size()) + ", " +
                      std::to_string(theta2.size()) + ") do not match game '" + game.name() +
                      "' dimensions (" + std::to_string(game.d1()) + ", " +
                      std::to_string(game.d2()) + ")");
  }
  if (!theta1.allFinite() || !theta2.allFinite()) {
    throw ConfigError("non-finite parameters passed to game '" + game.name() + "'");
  }
}

LossDerivatives split(const Jet& loss, int d1, int d2) {
  const int d = d1 + d2;
  LossDerivatives out;
  out.value = loss.value();
  Vec grad = Vec::Zero(d);
  Mat hess = Mat::Zero(d, d);
  if (!loss.is_constant()) {
    grad = loss.grad();
    hess = loss.hess();
  }
  out.grad1 = grad.head(d1);
  out.grad2 = grad.tail(d2);
  out.h11 = hess.topLeftCorner(d1, d1);
  out.h12 = hess.topRightCorner(d1, d2);
  out.h21 = hess.bottomLeftCorner(d2, d1);
  out.h22 = hess.bottomRightCorner(d2, d2);
  return out;
}

}  // namespace

DerivativeBundle eval_bundle(const GameDefinition& game, const Vec& theta1, const Vec& theta2) {
  check_dims(game, theta1, theta2);
  const int d1 = game.d1();
  const int d2 = game.d2();
  const int d = d1 + d2;
  if (d > kMaxJetDim) {
    throw ConfigError("joint dimension " + std::to_string(d) + " exceeds " +
                      std::to_string(kMaxJetDim));
  }
  std::vector<Jet> a(d1);
  std::vector<Jet> b(d2);
  for (int i = 0; i < d1; ++i) a[i] = Jet::variable(theta1(i), i, d);
  for (int j = 0; j < d2; ++j) b[j] = Jet::variable(theta2(j), d1 + j, d);

  const LossPair<Jet> losses = game.losses(std::span<const Jet>(a), std::span<const Jet>(b));
  for (int p = 0; p < 2; ++p) {
    if (!std::isfinite(losses[p].value())) {
      throw EvaluationError("loss of player " + std::to_string(p + 1) + " in game '" +
                                game.name() + "' is not finite",
                            p + 1);
    }
  }
  return {split(losses[0], d1, d2), split(losses[1], d1, d2)};
}

DerivativeBundle eval_bundle(const GameDefinition& game, const Vec& theta) {
  if (theta.size() != game.dim()) {
    throw ConfigError("joint parameter vector has length " + std::to_string(theta.size()) +
                      ", game '" + game.name() + "' expects " + std::to_string(game.dim()));
  }
  return eval_bundle(game, Vec(theta.head(game.d1())), Vec(theta.tail(game.d2())));
}

namespace {

using JointLoss = std::function<double(const Vec&)>;

Vec fd_gradient(const JointLoss& f, const Vec& x, double h) {
  Vec g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vec up = x;
    Vec down = x;
    up(i) += h;
    down(i) -= h;
    g(i) = (f(up) - f(down)) / (2.0 * h);
  }
  return g;
}

Mat fd_hessian(const JointLoss& f, const Vec& x, double h) {
  const int n = static_cast<int>(x.size());
  Mat hess(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      auto shifted = [&](double si, double sj) {
        Vec y = x;
        y(i) += si * h;
        y(j) += sj * h;
        return f(y);
      };
      hess(i, j) = (shifted(1, 1) - shifted(1, -1) - shifted(-1, 1) + shifted(-1, -1)) /
                   (4.0 * h * h);
    }
  }
  return hess;
}

BlockError compare(std::string name, const Mat& exact, const Mat& approx, double tol) {
  BlockError err;
  err.block = std::move(name);
  const double scale = exact.size() == 0 ? 0.0 : exact.cwiseAbs().maxCoeff();
  if (exact.size() > 0) {
    err.max_abs_error = (exact - approx).cwiseAbs().maxCoeff();
  }
  err.scale = scale;
  err.max_rel_error = err.max_abs_error / std::max(scale, 1e-300);
  err.passed = err.max_abs_error < tol * std::max(1.0, scale);
  return err;
}

}  // namespace

VerificationReport fd_verify(const GameDefinition& game, const Vec& theta1, const Vec& theta2,
                             double step, double tol) {
  if (!(step > 0.0)) throw ConfigError("finite-difference step must be positive");
  if (!(tol >= 0.0)) throw ConfigError("finite-difference tolerance must be non-negative");
  const DerivativeBundle bundle = eval_bundle(game, theta1, theta2);
  const int d1 = game.d1();
  const int d2 = game.d2();
  Vec x(d1 + d2);
  x << theta1, theta2;

  // Second differences lose two digits more to rounding than first
  // differences, so the Hessian stencil never goes below 1e-4.
  const double hess_step = std::max(step, 1e-4);

  VerificationReport report;
  report.passed = true;
  for (int p = 0; p < 2; ++p) {
    const JointLoss f = [&, p](const Vec& y) {
      const Vec a = y.head(d1);
      const Vec b = y.tail(d2);
      return game.losses(std::span<const double>(a.data(), d1),
                         std::span<const double>(b.data(), d2))[p];
    };
    const LossDerivatives& exact = p == 0 ? bundle.loss1 : bundle.loss2;
    const std::string prefix = "L" + std::to_string(p + 1) + ".";
    const Vec g = fd_gradient(f, x, step);
    const Mat h = fd_hessian(f, x, hess_step);
    report.blocks.push_back(compare(prefix + "grad1", exact.grad1, g.head(d1), tol));
    report.blocks.push_back(compare(prefix + "grad2", exact.grad2, g.tail(d2), tol));
    report.blocks.push_back(compare(prefix + "h11", exact.h11, h.topLeftCorner(d1, d1), tol));
    report.blocks.push_back(compare(prefix + "h12", exact.h12, h.topRightCorner(d1, d2), tol));
    report.blocks.push_back(compare(prefix + "h21", exact.h21, h.bottomLeftCorner(d2, d1), tol));
    report.blocks.push_back(compare(prefix + "h22", exact.h22, h.bottomRightCorner(d2, d2), tol));
  }
  for (const auto& block : report.blocks) report.passed = report.passed && block.passed;
  return report;
}

}  // namespace pbos
