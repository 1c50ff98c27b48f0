#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "modspec/errors.hpp"

namespace modspec {

using Index = Eigen::Index;

/// Real symmetric embedding [[Re h, -Im h], [Im h, Re h]] of a Hermitian
/// matrix. The embedding has every eigenvalue of h with doubled
/// multiplicity, so h > 0 iff the embedding is > 0.
template <typename Derived>
Eigen::Matrix<typename Eigen::NumTraits<typename Derived::Scalar>::Real, Eigen::Dynamic,
              Eigen::Dynamic>
hermitian_embed(const Eigen::MatrixBase<Derived>& h, double tolerance = 1e-10) {
  using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
  using RealMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  if (h.rows() != h.cols()) throw NotHermitian("matrix is not square");
  const Real scale = std::max<Real>(Real(1), h.cwiseAbs().maxCoeff());
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > tolerance * scale)
    throw NotHermitian("matrix is not Hermitian");

  const Eigen::Index n = h.rows();
  const RealMatrix re = h.real();
  const RealMatrix im = h.imag();
  RealMatrix out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = re;
  out.topRightCorner(n, n) = -im;
  out.bottomLeftCorner(n, n) = im;
  out.bottomRightCorner(n, n) = re;
  return RealMatrix(0.5 * (out + out.transpose()));
}

/// F(x) = constant + sum_i x_i coefficients[i]  >= 0  (real symmetric).
struct LmiConstraint {
  Eigen::MatrixXd constant;
  std::vector<Eigen::MatrixXd> coefficients;

  Eigen::MatrixXd evaluate(const Eigen::VectorXd& x) const;
};

/// min cost' x  s.t.  every LMI holds and lower <= x <= upper.
/// Infinite bounds are ignored.
struct LinearSdp {
  Eigen::VectorXd cost;
  std::vector<LmiConstraint> lmis;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Index dimension() const { return cost.size(); }
  /// Strict interior test: Cholesky of every F(x) succeeds and bounds hold strictly.
  bool strictly_feasible(const Eigen::VectorXd& x) const;
  /// Sum of LMI orders plus the number of finite bounds.
  double barrier_degree() const;
};

struct SdpOptions {
  double rel_gap = 1e-11;
  double abs_gap = 0.0;
  double barrier_growth = 20.0;
  int max_newton_per_center = 100;
  int max_outer = 80;
  /// Centering stops once the squared Newton decrement falls below this.
  double newton_tolerance = 1e-12;
};

struct SdpResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  /// Duality-gap bound degree / t at termination.
  double gap = 0.0;
  int newton_steps = 0;
};

/// Log-barrier path following with damped Newton centering. x0 must be
/// strictly feasible. Throws SolverFailure when it is not or when
/// centering breaks down.
SdpResult solve_sdp(const LinearSdp& problem, const Eigen::VectorXd& x0,
                    const SdpOptions& options = {});

}  // namespace modspec
