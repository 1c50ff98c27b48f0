#include "modspec/lmi.hpp"

#include <algorithm>

namespace modspec {

Eigen::MatrixXd LmiConstraint::evaluate(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd f = constant;
  for (std::size_t i = 0; i < coefficients.size(); ++i) f += x(static_cast<Index>(i)) * coefficients[i];
  return f;
}

bool LinearSdp::strictly_feasible(const Eigen::VectorXd& x) const {
  if (!x.allFinite()) return false;
  for (Index i = 0; i < x.size(); ++i) {
    if (std::isfinite(lower(i)) && !(x(i) > lower(i))) return false;
    if (std::isfinite(upper(i)) && !(x(i) < upper(i))) return false;
  }
  for (const auto& lmi : lmis) {
    Eigen::LLT<Eigen::MatrixXd> llt(lmi.evaluate(x));
    if (llt.info() != Eigen::Success) return false;
  }
  return true;
}

double LinearSdp::barrier_degree() const {
  double m = 0.0;
  for (const auto& lmi : lmis) m += static_cast<double>(lmi.constant.rows());
  for (Index i = 0; i < cost.size(); ++i) {
    if (std::isfinite(lower(i))) m += 1.0;
    if (std::isfinite(upper(i))) m += 1.0;
  }
  return m;
}

namespace {

struct NewtonSystem {
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

// Gradient and Hessian of t c'x + barrier(x). Returns false if x left the
// interior.
bool newton_system(const LinearSdp& p, const Eigen::VectorXd& x, double t, NewtonSystem& out) {
  const Index n = x.size();
  out.gradient = t * p.cost;
  out.hessian = Eigen::MatrixXd::Zero(n, n);
  for (const auto& lmi : p.lmis) {
    Eigen::LLT<Eigen::MatrixXd> llt(lmi.evaluate(x));
    if (llt.info() != Eigen::Success) return false;
    const auto l = llt.matrixL();
    // G_i = L^-1 F_i L^-T; grad_i = -tr(G_i), H_ij = <G_i, G_j>.
    std::vector<Eigen::MatrixXd> g(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      Eigen::MatrixXd tmp = l.solve(lmi.coefficients[static_cast<std::size_t>(i)]);
      g[static_cast<std::size_t>(i)] = l.solve(tmp.transpose()).transpose();
      out.gradient(i) -= g[static_cast<std::size_t>(i)].trace();
    }
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j <= i; ++j) {
        const double h = (g[static_cast<std::size_t>(i)].array() *
                          g[static_cast<std::size_t>(j)].array()).sum();
        out.hessian(i, j) += h;
        if (i != j) out.hessian(j, i) += h;
      }
  }
  for (Index i = 0; i < n; ++i) {
    if (std::isfinite(p.lower(i))) {
      const double s = x(i) - p.lower(i);
      if (!(s > 0.0)) return false;
      out.gradient(i) -= 1.0 / s;
      out.hessian(i, i) += 1.0 / (s * s);
    }
    if (std::isfinite(p.upper(i))) {
      const double s = p.upper(i) - x(i);
      if (!(s > 0.0)) return false;
      out.gradient(i) += 1.0 / s;
      out.hessian(i, i) += 1.0 / (s * s);
    }
  }
  return out.gradient.allFinite() && out.hessian.allFinite();
}

// Jacobi-scaled solve of H dx = -g; the Hessian entries can span many
// orders of magnitude when variables sit near their bounds.
Eigen::VectorXd newton_direction(const NewtonSystem& sys) {
  const Eigen::VectorXd d = sys.hessian.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd hs = d.asDiagonal() * sys.hessian * d.asDiagonal();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(hs);
  return -(d.asDiagonal() * ldlt.solve(d.asDiagonal() * sys.gradient));
}

}  // namespace

SdpResult solve_sdp(const LinearSdp& p, const Eigen::VectorXd& x0, const SdpOptions& options) {
  const Index n = p.dimension();
  if (x0.size() != n || p.lower.size() != n || p.upper.size() != n)
    throw SolverFailure("SDP dimensions are inconsistent");
  for (const auto& lmi : p.lmis) {
    if (static_cast<Index>(lmi.coefficients.size()) != n)
      throw SolverFailure("LMI coefficient count does not match the variable count");
  }
  if (!p.strictly_feasible(x0)) throw SolverFailure("SDP start point is not strictly feasible");

  const double m = p.barrier_degree();
  SdpResult res;
  res.x = x0;
  const double f0 = std::abs(p.cost.dot(x0));
  double t = m / std::max({f0, options.abs_gap, 1e-300});
  t = std::max(t, 1e-300);

  NewtonSystem sys;
  for (int outer = 0; outer < options.max_outer; ++outer) {
    for (int k = 0; k < options.max_newton_per_center; ++k) {
      if (!newton_system(p, res.x, t, sys)) throw SolverFailure("iterate left the SDP interior");
      const Eigen::VectorXd dx = newton_direction(sys);
      const double lambda2 = -sys.gradient.dot(dx);
      if (!std::isfinite(lambda2)) throw SolverFailure("Newton decrement is not finite");
      if (lambda2 <= options.newton_tolerance) break;
      // Damped step 1/(1+lambda) stays inside the domain of a
      // self-concordant barrier; halve further only on rounding trouble.
      double step = lambda2 > 0.0625 ? 1.0 / (1.0 + std::sqrt(lambda2)) : 1.0;
      Eigen::VectorXd trial = res.x + step * dx;
      int halvings = 0;
      while (!p.strictly_feasible(trial)) {
        if (++halvings > 60) throw SolverFailure("line search could not stay feasible");
        step *= 0.5;
        trial = res.x + step * dx;
      }
      res.x = trial;
      ++res.newton_steps;
    }
    res.objective = p.cost.dot(res.x);
    res.gap = m / t;
    if (res.gap <= std::max(options.rel_gap * std::abs(res.objective), options.abs_gap)) return res;
    t *= options.barrier_growth;
  }
  return res;
}

}  // namespace modspec
