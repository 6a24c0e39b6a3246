#pragma once

// Exact first- and second-order derivatives of a two-player game, plus a
// central finite-difference verifier that checks them against the raw
// double-valued loss evaluator.
//
// Block convention: rows follow the first differentiation index, so
// LossDerivatives::h12 is d1 x d2 and holds d^2 L / (d theta1 d theta2).

#include <Eigen/Core>

#include <string>
#include <vector>

#include "pbos/game.hpp"

namespace pbos {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Value, gradient blocks and the four Hessian blocks of one loss.
struct LossDerivatives {
  double value = 0.0;
  Vec grad1;  // d1
  Vec grad2;  // d2
  Mat h11;    // d1 x d1
  Mat h12;    // d1 x d2
  Mat h21;    // d2 x d1
  Mat h22;    // d2 x d2

  // this + scale * other, block by block.
  LossDerivatives plus_scaled(const LossDerivatives& other, double scale) const;
};

struct DerivativeBundle {
  LossDerivatives loss1;
  LossDerivatives loss2;

  int d1() const { return static_cast<int>(loss1.grad1.size()); }
  int d2() const { return static_cast<int>(loss1.grad2.size()); }
};

DerivativeBundle eval_bundle(const GameDefinition& game, const Vec& theta1, const Vec& theta2);

// Convenience overload over the joint vector (theta1 stacked on theta2).
DerivativeBundle eval_bundle(const GameDefinition& game, const Vec& theta);

struct BlockError {
  std::string block;  // e.g. "L1.grad1", "L2.h12"
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
  double scale = 0.0;  // largest magnitude in the exact block
  bool passed = false;
};

struct VerificationReport {
  std::vector<BlockError> blocks;
  bool passed = false;
};

// Compares every gradient and Hessian block of eval_bundle against central
// differences of the double evaluator. Gradients use a first-order central
// stencil; Hessian blocks use the four-point mixed stencil with a step of at
// least 1e-4. A block passes when max_abs_error < tol * max(1, scale).
VerificationReport fd_verify(const GameDefinition& game, const Vec& theta1, const Vec& theta2,
                             double step = 1e-5, double tol = 1e-6);

}  // namespace pbos
