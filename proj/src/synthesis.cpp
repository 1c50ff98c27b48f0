#include "modspec/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "modspec/parallel.hpp"

namespace modspec {

DScaling DScaling::identity(std::size_t modules) { return DScaling{std::vector<double>(modules, 1.0), 1.0}; }

Eigen::VectorXd DScaling::column_scaling(const std::vector<ModuleDims>& dims, Index m_a) const {
  Index n = m_a;
  for (const auto& md : dims) n += md.outputs;
  Eigen::VectorXd out(n);
  Index pos = 0;
  for (std::size_t j = 0; j < dims.size(); ++j) {
    out.segment(pos, dims[j].outputs).setConstant(d.at(j));
    pos += dims[j].outputs;
  }
  out.tail(m_a).setConstant(d_a);
  return out;
}

Eigen::VectorXd DScaling::row_scaling(const std::vector<ModuleDims>& dims, Index p_a) const {
  Index n = p_a;
  for (const auto& md : dims) n += md.inputs;
  Eigen::VectorXd out(n);
  Index pos = 0;
  for (std::size_t j = 0; j < dims.size(); ++j) {
    out.segment(pos, dims[j].inputs).setConstant(d.at(j));
    pos += dims[j].inputs;
  }
  out.tail(p_a).setConstant(d_a);
  return out;
}

std::vector<ModuleDims> StackedWeights::module_dims() const {
  std::vector<ModuleDims> dims;
  dims.reserve(module_w.size());
  for (std::size_t j = 0; j < module_w.size(); ++j) dims.push_back({module_w[j].size(), module_v[j].size()});
  return dims;
}

Eigen::VectorXd StackedWeights::stacked_w() const {
  Index n = w_a.size();
  for (const auto& w : module_w) n += w.size();
  Eigen::VectorXd out(n);
  Index pos = 0;
  for (const auto& w : module_w) {
    out.segment(pos, w.size()) = w;
    pos += w.size();
  }
  out.tail(w_a.size()) = w_a;
  return out;
}

Eigen::VectorXd StackedWeights::stacked_v() const {
  Index n = v_a.size();
  for (const auto& v : module_v) n += v.size();
  Eigen::VectorXd out(n);
  Index pos = 0;
  for (const auto& v : module_v) {
    out.segment(pos, v.size()) = v;
    pos += v.size();
  }
  out.tail(v_a.size()) = v_a;
  return out;
}

CostWeights CostWeights::uniform(std::size_t modules) { return CostWeights{std::vector<double>(modules, 1.0)}; }

namespace {

void require_dims(const Eigen::MatrixXcd& n, const StackedWeights& w, const DScaling& d) {
  if (w.module_w.size() != w.module_v.size())
    throw DimensionMismatch("module W and V lists differ in length");
  if (d.d.size() != w.module_w.size())
    throw DimensionMismatch("D scaling has " + std::to_string(d.d.size()) + " module scalars for " +
                            std::to_string(w.module_w.size()) + " modules");
  const Index cols = w.stacked_w().size();
  const Index rows = w.stacked_v().size();
  if (n.rows() != rows || n.cols() != cols)
    throw DimensionMismatch("N is " + std::to_string(n.rows()) + "x" + std::to_string(n.cols()) +
                            " but the weights imply " + std::to_string(rows) + "x" +
                            std::to_string(cols));
}

}  // namespace

Eigen::MatrixXcd theorem1_lmi(const Eigen::MatrixXcd& n, const StackedWeights& weights,
                              const DScaling& d) {
  require_dims(n, weights, d);
  const auto dims = weights.module_dims();
  const Eigen::VectorXd dc = d.column_scaling(dims, weights.w_a.size());
  const Eigen::VectorXd dr = d.row_scaling(dims, weights.v_a.size());
  const Eigen::VectorXd ul = weights.stacked_w().array().square().inverse() / dc.array();
  const Eigen::VectorXd lr = weights.stacked_v().array().square().inverse() * dr.array();

  const Index c = n.cols();
  const Index r = n.rows();
  Eigen::MatrixXcd lmi = Eigen::MatrixXcd::Zero(c + r, c + r);
  lmi.topLeftCorner(c, c).diagonal() = ul.cast<Complex>();
  lmi.bottomRightCorner(r, r).diagonal() = lr.cast<Complex>();
  lmi.topRightCorner(c, r) = n.adjoint();
  lmi.bottomLeftCorner(r, c) = n;
  return lmi;
}

FeasibilityResult theorem1_feasible(const Eigen::MatrixXcd& n, const StackedWeights& weights,
                                    const DScaling& d) {
  const Eigen::MatrixXd embedded = hermitian_embed(theorem1_lmi(n, weights, d));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(embedded, Eigen::EigenvaluesOnly);
  FeasibilityResult out;
  out.min_eigenvalue = es.eigenvalues().minCoeff();
  // The verdict comes from a Cholesky factorization after unit-diagonal
  // scaling, which stays reliable when the weights span many decades.
  const Eigen::VectorXd diag = embedded.diagonal();
  if ((diag.array() > 0.0).all()) {
    const Eigen::VectorXd s = diag.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd scaled = s.asDiagonal() * embedded * s.asDiagonal();
    out.feasible = Eigen::LLT<Eigen::MatrixXd>(scaled).info() == Eigen::Success;
  }
  return out;
}

Eigen::MatrixXcd schur_residual(const Eigen::MatrixXcd& n, const StackedWeights& weights,
                                const DScaling& d) {
  require_dims(n, weights, d);
  const auto dims = weights.module_dims();
  const Eigen::VectorXd dc = d.column_scaling(dims, weights.w_a.size());
  const Eigen::VectorXd dr = d.row_scaling(dims, weights.v_a.size());
  const Eigen::VectorXd w2dc = weights.stacked_w().array().square() * dc.array();
  const Eigen::VectorXd v2dr = weights.stacked_v().array().square().inverse() * dr.array();
  Eigen::MatrixXcd s = n * w2dc.cast<Complex>().asDiagonal() * n.adjoint();
  s.diagonal() -= v2dr.cast<Complex>();
  return 0.5 * (s + s.adjoint());
}

namespace {

// Position of each LMI diagonal entry that a variable scales.
struct WeightVariable {
  Index lmi_index;       // index into the complex Hermitian LMI
  double coefficient;    // 1/dc for W entries, dr for V entries
  std::size_t module;
};

Eigen::MatrixXd diagonal_coefficient(Index n, Index index, double value) {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  f(index, index) = value;
  f(index + n, index + n) = value;
  return f;
}

}  // namespace

WeightStepResult step_weights(const Eigen::MatrixXcd& n, const StackedWeights& fixed,
                              const DScaling& d, const CostWeights& cost,
                              const WeightStepOptions& options) {
  require_dims(n, fixed, d);
  const std::size_t k = fixed.module_w.size();
  if (cost.alpha.size() != k) throw DimensionMismatch("cost weights do not match the module count");
  for (double a : cost.alpha)
    if (!(a >= 0.0)) throw InvalidParameter("cost weights must be nonnegative");

  const auto dims = fixed.module_dims();
  const Eigen::VectorXd dc = d.column_scaling(dims, fixed.w_a.size());
  const Eigen::VectorXd dr = d.row_scaling(dims, fixed.v_a.size());
  const Index cols = n.cols();
  const Index rows = n.rows();
  const Index size = cols + rows;

  // Hermitian LMI with every free entry zeroed.
  Eigen::MatrixXcd base = theorem1_lmi(n, fixed, d);
  std::vector<WeightVariable> vars;
  bool any_free = false;
  Index col_pos = 0;
  Index row_pos = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const bool free = !cost.frozen(j);
    any_free = any_free || free;
    for (Index e = 0; e < dims[j].outputs; ++e, ++col_pos) {
      if (!free) continue;
      base(col_pos, col_pos) = 0.0;
      vars.push_back({col_pos, 1.0 / dc(col_pos), j});
    }
    for (Index e = 0; e < dims[j].inputs; ++e, ++row_pos) {
      if (!free) continue;
      base(cols + row_pos, cols + row_pos) = 0.0;
      vars.push_back({cols + row_pos, dr(row_pos), j});
    }
  }
  if (!any_free) throw InvalidParameter("at least one module must be free");

  const double eps_pd = options.eps_pd_rel * spectral_norm(n);
  LinearSdp sdp;
  const Index nv = static_cast<Index>(vars.size());
  sdp.cost.resize(nv);
  sdp.lower = Eigen::VectorXd::Constant(nv, options.min_inverse_square);
  sdp.upper = Eigen::VectorXd::Constant(nv, options.max_inverse_square);
  LmiConstraint lmi;
  lmi.constant = hermitian_embed(base);
  // Margin eps_pd * diag(Dc^-1, Dr): equals eps_pd * I at D = I and keeps
  // the margin invariant under the D-step's congruence.
  Eigen::VectorXd margin(size);
  margin << dc.cwiseInverse(), dr;
  lmi.constant.diagonal() -= eps_pd * (Eigen::VectorXd(2 * size) << margin, margin).finished();
  for (Index v = 0; v < nv; ++v) {
    const auto& var = vars[static_cast<std::size_t>(v)];
    sdp.cost(v) = cost.alpha[var.module];
    lmi.coefficients.push_back(diagonal_coefficient(size, var.lmi_index, var.coefficient));
  }
  sdp.lmis.push_back(std::move(lmi));

  // Large V^-2, W^-2 (tiny weights) dominate N; grow a uniform start until
  // the LMI holds strictly.
  Eigen::VectorXd x0;
  for (double s = 1.0; s < options.max_inverse_square; s *= 4.0) {
    Eigen::VectorXd trial = Eigen::VectorXd::Constant(nv, std::max(s, 2.0 * options.min_inverse_square));
    if (sdp.strictly_feasible(trial)) {
      x0 = std::move(trial);
      break;
    }
  }
  if (x0.size() == 0)
    throw Infeasible({}, "system weights cannot be met with module weights at the lower cap");

  const SdpResult res = solve_sdp(sdp, x0, options.sdp);

  WeightStepResult out;
  out.weights = fixed;
  out.gap = res.gap;
  out.eps_pd = eps_pd;
  out.beta = res.objective;
  col_pos = 0;
  row_pos = 0;
  Index v = 0;
  for (std::size_t j = 0; j < k; ++j) {
    if (cost.frozen(j)) continue;
    for (Index e = 0; e < dims[j].outputs; ++e) out.weights.module_w[j](e) = 1.0 / std::sqrt(res.x(v++));
    for (Index e = 0; e < dims[j].inputs; ++e) out.weights.module_v[j](e) = 1.0 / std::sqrt(res.x(v++));
  }
  return out;
}

DScalingStepResult step_dscaling(const Eigen::MatrixXcd& n, const StackedWeights& weights,
                                 const DScaling& start, const DScalingStepOptions& options) {
  const std::size_t k = weights.module_w.size();
  DScaling d0 = start.d.empty() ? DScaling::identity(k) : start;
  require_dims(n, weights, d0);
  for (double& x : d0.d) x = std::clamp(x / d0.d_a, options.d_min * 2.0, options.d_max * 0.5);
  d0.d_a = 1.0;

  const auto dims = weights.module_dims();
  const Eigen::VectorXd w2 = weights.stacked_w().array().square();
  const Eigen::VectorXd v2inv = weights.stacked_v().array().square().inverse();
  const Index rows = n.rows();

  // S(d) = S_A + sum_j d_j S_j.
  auto block_term = [&](Index col0, Index ncol, Index row0, Index nrow) {
    Eigen::MatrixXcd s = n.middleCols(col0, ncol) * w2.segment(col0, ncol).cast<Complex>().asDiagonal() *
                         n.middleCols(col0, ncol).adjoint();
    s.diagonal().segment(row0, nrow) -= v2inv.segment(row0, nrow).cast<Complex>();
    return Eigen::MatrixXcd(0.5 * (s + s.adjoint()));
  };
  std::vector<Eigen::MatrixXcd> terms;
  Index col_pos = 0;
  Index row_pos = 0;
  for (std::size_t j = 0; j < k; ++j) {
    terms.push_back(block_term(col_pos, dims[j].outputs, row_pos, dims[j].inputs));
    col_pos += dims[j].outputs;
    row_pos += dims[j].inputs;
  }
  const Eigen::MatrixXcd s_a = block_term(col_pos, weights.w_a.size(), row_pos, weights.v_a.size());

  Eigen::MatrixXcd s0 = s_a;
  for (std::size_t j = 0; j < k; ++j) s0 += d0.d[j] * terms[j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s0, Eigen::EigenvaluesOnly);
  const double lam_max = es.eigenvalues().maxCoeff();
  const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);

  const Index nv = static_cast<Index>(k) + 1;
  LinearSdp sdp;
  sdp.cost = Eigen::VectorXd::Zero(nv);
  sdp.cost(nv - 1) = 1.0;
  sdp.lower = Eigen::VectorXd::Constant(nv, options.d_min);
  sdp.upper = Eigen::VectorXd::Constant(nv, options.d_max);
  sdp.lower(nv - 1) = -std::numeric_limits<double>::infinity();
  sdp.upper(nv - 1) = std::numeric_limits<double>::infinity();
  LmiConstraint lmi;
  lmi.constant = -hermitian_embed(s_a);
  for (std::size_t j = 0; j < k; ++j) lmi.coefficients.push_back(-hermitian_embed(terms[j]));
  lmi.coefficients.push_back(Eigen::MatrixXd::Identity(2 * rows, 2 * rows));
  sdp.lmis.push_back(std::move(lmi));

  Eigen::VectorXd x0(nv);
  for (std::size_t j = 0; j < k; ++j) x0(static_cast<Index>(j)) = d0.d[j];
  x0(nv - 1) = lam_max + 1e-3 * scale;

  SdpOptions sdp_options = options.sdp;
  sdp_options.abs_gap = std::max(sdp_options.abs_gap, sdp_options.rel_gap * scale);
  const SdpResult res = solve_sdp(sdp, x0, sdp_options);

  // delta is reported as the exact largest eigenvalue at the returned d; a
  // solver answer no better than the start is discarded.
  DScalingStepResult out;
  out.d = DScaling::identity(k);
  for (std::size_t j = 0; j < k; ++j) out.d.d[j] = res.x(static_cast<Index>(j));
  Eigen::MatrixXcd s1 = s_a;
  for (std::size_t j = 0; j < k; ++j) s1 += out.d.d[j] * terms[j];
  es.compute(s1, Eigen::EigenvaluesOnly);
  out.delta = es.eigenvalues().maxCoeff();
  out.gap = res.gap;
  if (out.delta > lam_max) {
    out.d = d0;
    out.delta = lam_max;
  }
  return out;
}

StackedWeights remove_margin(const StackedWeights& w, double eps_pd) {
  auto shrink = [eps_pd](const Eigen::VectorXd& x) {
    const Eigen::VectorXd inv_sq = x.array().square().inverse();
    return Eigen::VectorXd((inv_sq.array() - eps_pd).max(1e-12 * inv_sq.array()).rsqrt());
  };
  StackedWeights out = w;
  for (auto& x : out.module_w) x = shrink(x);
  for (auto& x : out.module_v) x = shrink(x);
  out.w_a = shrink(out.w_a);
  out.v_a = shrink(out.v_a);
  return out;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::MaxIterations: return "max_iterations";
    case Termination::Infeasible: return "infeasible";
    case Termination::SolverFailure: return "solver_failure";
  }
  return "unknown";
}

FrequencyTrace synthesize_at(const Eigen::MatrixXcd& n, const StackedWeights& fixed,
                             const CostWeights& cost, const SynthesisOptions& options) {
  if (!(options.eps > 0.0)) throw InvalidParameter("eps must be positive");
  if (options.max_iters < 1) throw InvalidParameter("max_iters must be at least 1");
  const std::size_t k = fixed.module_w.size();

  FrequencyTrace tr;
  tr.d = DScaling::identity(k);
  tr.weights = fixed;
  tr.reason = Termination::MaxIterations;

  DScaling d = DScaling::identity(k);
  bool have = false;
  double best_beta = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= options.max_iters; ++i) {
    WeightStepResult ws;
    try {
      ws = step_weights(n, fixed, d, cost, options.weight_step);
    } catch (const Infeasible& e) {
      if (!have) {
        tr.reason = Termination::Infeasible;
        tr.message = e.what();
        return tr;
      }
      tr.reason = Termination::Converged;
      break;
    } catch (const SolverFailure& e) {
      tr.reason = Termination::SolverFailure;
      tr.message = e.what();
      if (!have) return tr;
      break;
    }

    IterationRecord rec;
    rec.beta = ws.beta;
    rec.beta_gap = ws.gap;

    const bool improved = !have || ws.beta <= best_beta;
    const double previous = best_beta;
    if (improved) {
      tr.weights = ws.weights;
      tr.d = d;
      tr.eps_pd = ws.eps_pd;
      best_beta = ws.beta;
      have = true;
    }

    DScalingStepResult ds;
    try {
      ds = step_dscaling(n, remove_margin(ws.weights, ws.eps_pd), d, options.dscaling_step);
    } catch (const SolverFailure& e) {
      tr.iterations.push_back(rec);
      tr.reason = Termination::SolverFailure;
      tr.message = e.what();
      break;
    }
    rec.delta = ds.delta;
    rec.delta_gap = ds.gap;
    tr.iterations.push_back(rec);

    // The weights minus their margin stay feasible under the new scaling,
    // so beta cannot rise beyond solver accuracy; if it does anyway the
    // alternation stops and the best iterate is kept.
    const bool stop = std::isinf(options.eps) || (i > 1 && previous - ws.beta < options.eps);
    if (stop) {
      tr.reason = Termination::Converged;
      break;
    }
    d = ds.d;
  }

  if (have) tr.lmi_min_eigenvalue = theorem1_feasible(n, tr.weights, tr.d).min_eigenvalue;
  return tr;
}

SynthesisResult synthesize(const FrfMatrix& n, const std::vector<FrfMatrix>& module_baselines,
                           const SystemSpec& system, const CostWeights& cost,
                           const SynthesisOptions& options) {
  const std::size_t k = module_baselines.size();
  if (k == 0) throw InvalidParameter("no module baselines");
  if (n.grid().empty()) throw InvalidParameter("empty frequency grid");
  if (cost.alpha.size() != k) throw DimensionMismatch("cost weights do not match the module count");
  if (std::all_of(cost.alpha.begin(), cost.alpha.end(), [](double a) { return std::isinf(a); }))
    throw InvalidParameter("at least one module must be free");
  if (!(system.baseline().grid() == n.grid())) throw GridMismatch("system spec grid differs from N");
  for (const auto& b : module_baselines)
    if (!(b.grid() == n.grid())) throw GridMismatch("module baseline grid differs from N");

  const std::size_t points = n.size();
  std::vector<FrequencyTrace> traces(points);
  parallel_for(
      points,
      [&](std::size_t i) {
        StackedWeights fixed;
        for (std::size_t j = 0; j < k; ++j) {
          fixed.module_w.push_back(Eigen::VectorXd::Constant(module_baselines[j].rows(), options.frozen_weight));
          fixed.module_v.push_back(Eigen::VectorXd::Constant(module_baselines[j].cols(), options.frozen_weight));
        }
        fixed.w_a = system.w_a()[i];
        fixed.v_a = system.v_a()[i];
        traces[i] = synthesize_at(n[i], fixed, cost, options);
        traces[i].omega = n.grid()[i];
      },
      options.jobs);

  SynthesisResult out;
  for (std::size_t i = 0; i < points; ++i) {
    const auto& tr = traces[i];
    if (tr.reason == Termination::Infeasible || tr.reason == Termination::SolverFailure)
      out.infeasible_omegas.push_back(tr.omega);
    else if (tr.reason == Termination::MaxIterations)
      out.unconverged_omegas.push_back(tr.omega);
  }
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<Eigen::VectorXd> w(points);
    std::vector<Eigen::VectorXd> v(points);
    for (std::size_t i = 0; i < points; ++i) {
      w[i] = traces[i].weights.module_w[j];
      v[i] = traces[i].weights.module_v[j];
    }
    out.module_specs.emplace_back(module_baselines[j],
                                  DiagonalWeight(n.grid(), std::move(w), WeightSide::Output),
                                  DiagonalWeight(n.grid(), std::move(v), WeightSide::Input));
  }
  out.trace.points = std::move(traces);
  return out;
}

SynthesisResult synthesize(const ModularModel& model, const SystemSpec& system,
                           const CostWeights& cost, const SynthesisOptions& options) {
  return synthesize(model.nominal(), model.module_frfs(), system, cost, options);
}

}  // namespace modspec
