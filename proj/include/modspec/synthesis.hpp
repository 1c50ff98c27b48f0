#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "modspec/lmi.hpp"
#include "modspec/model.hpp"
#include "modspec/spec.hpp"

namespace modspec {

/// Block-scalar scaling: one positive scalar per module plus one for the
/// external (performance) block, each repeated over that block's channels.
struct DScaling {
  std::vector<double> d;  // per module
  double d_a = 1.0;

  static DScaling identity(std::size_t modules);

  /// Expansion over N's column space: d_j I_{p_j}, then d_A I_{m_A}.
  /// Divides W^-2 in the upper-left LMI block.
  Eigen::VectorXd column_scaling(const std::vector<ModuleDims>& dims, Index m_a) const;
  /// Expansion over N's row space: d_j I_{m_j}, then d_A I_{p_A}.
  /// Multiplies V^-2 in the lower-right LMI block.
  Eigen::VectorXd row_scaling(const std::vector<ModuleDims>& dims, Index p_a) const;
};

/// Module and system weights at one frequency. Stacking order follows N:
/// modules 1..k, then the external block.
struct StackedWeights {
  std::vector<Eigen::VectorXd> module_w;  // W^(j), p_j entries (output side)
  std::vector<Eigen::VectorXd> module_v;  // V^(j), m_j entries (input side)
  Eigen::VectorXd w_a;                    // W_A, m_A entries
  Eigen::VectorXd v_a;                    // V_A, p_A entries

  std::vector<ModuleDims> module_dims() const;
  /// diag(W^(1..k), W_A), length sum p_j + m_A (N's columns).
  Eigen::VectorXd stacked_w() const;
  /// diag(V^(1..k), V_A), length sum m_j + p_A (N's rows).
  Eigen::VectorXd stacked_v() const;
};

/// alpha_j >= 0 per module; +infinity freezes a module's weights.
struct CostWeights {
  std::vector<double> alpha;

  static CostWeights uniform(std::size_t modules);
  bool frozen(std::size_t j) const { return std::isinf(alpha[j]); }
};

/// Hermitian matrix [[W^-2 Dc^-1, N^H], [N, V^-2 Dr]].
Eigen::MatrixXcd theorem1_lmi(const Eigen::MatrixXcd& n, const StackedWeights& weights,
                              const DScaling& d);

struct FeasibilityResult {
  bool feasible = false;
  double min_eigenvalue = 0.0;  // of the real embedding
};

/// Sufficient condition under which module specs imply the system spec.
FeasibilityResult theorem1_feasible(const Eigen::MatrixXcd& n, const StackedWeights& weights,
                                    const DScaling& d);

/// N W^2 Dc N^H - V^-2 Dr; its largest eigenvalue is negative iff the
/// LMI above holds.
Eigen::MatrixXcd schur_residual(const Eigen::MatrixXcd& n, const StackedWeights& weights,
                                const DScaling& d);

struct WeightStepOptions {
  /// LMI imposed as >= eps_pd * diag(Dc^-1, Dr), eps_pd = eps_pd_rel * ||N||.
  double eps_pd_rel = 1e-9;
  /// Bounds on the entries of V^-2 and W^-2; weights live in [1e-6, 1e6].
  double min_inverse_square = 1e-12;
  double max_inverse_square = 1e12;
  SdpOptions sdp{};
};

struct WeightStepResult {
  StackedWeights weights;
  double beta = 0.0;
  double gap = 0.0;
  double eps_pd = 0.0;
};

/// Minimizes sum_j alpha_j (tr V^(j)^-2 + tr W^(j)^-2) over the free modules'
/// weights with the system weights, frozen modules, and D held fixed.
/// `fixed` supplies the system weights and the frozen modules' weights.
WeightStepResult step_weights(const Eigen::MatrixXcd& n, const StackedWeights& fixed,
                              const DScaling& d, const CostWeights& cost,
                              const WeightStepOptions& options = {});

/// Weights whose inverse squares are reduced by eps_pd: the LMI margin
/// eps_pd * diag(Dc^-1, Dr) expressed as a weight change.
StackedWeights remove_margin(const StackedWeights& weights, double eps_pd);

struct DScalingStepOptions {
  double d_min = 1e-8;
  double d_max = 1e8;
  SdpOptions sdp{};
};

struct DScalingStepResult {
  DScaling d;
  double delta = 0.0;
  double gap = 0.0;
};

/// Minimizes delta s.t. N W^2 Dc N^H - V^-2 Dr <= delta I over the module
/// scalars with d_A = 1.
DScalingStepResult step_dscaling(const Eigen::MatrixXcd& n, const StackedWeights& weights,
                                 const DScaling& start = {},
                                 const DScalingStepOptions& options = {});

enum class Termination { Converged, MaxIterations, Infeasible, SolverFailure };

std::string to_string(Termination t);

struct IterationRecord {
  double beta = 0.0;
  double delta = 0.0;
  double beta_gap = 0.0;
  double delta_gap = 0.0;
};

struct FrequencyTrace {
  double omega = 0.0;
  std::vector<IterationRecord> iterations;
  Termination reason = Termination::Converged;
  StackedWeights weights;
  DScaling d;  // scaling the final weights were computed under
  double lmi_min_eigenvalue = 0.0;
  double eps_pd = 0.0;
  std::string message;
};

struct SynthesisTrace {
  std::vector<FrequencyTrace> points;  // one per grid point, in grid order
};

struct SynthesisOptions {
  double eps = 1e-4;
  int max_iters = 50;
  WeightStepOptions weight_step{};
  DScalingStepOptions dscaling_step{};
  /// Weight value assigned to frozen modules (W = V = value * I).
  double frozen_weight = 1e-6;
  std::size_t jobs = 0;
};

struct SynthesisResult {
  std::vector<ModuleSpec> module_specs;
  SynthesisTrace trace;
  std::vector<double> infeasible_omegas;
  std::vector<double> unconverged_omegas;

  bool feasible() const { return infeasible_omegas.empty(); }
};

/// Alternates step_weights / step_dscaling independently at every grid
/// point of N until beta stops decreasing by eps.
SynthesisResult synthesize(const FrfMatrix& n, const std::vector<FrfMatrix>& module_baselines,
                           const SystemSpec& system, const CostWeights& cost,
                           const SynthesisOptions& options = {});

SynthesisResult synthesize(const ModularModel& model, const SystemSpec& system,
                           const CostWeights& cost, const SynthesisOptions& options = {});

/// The per-frequency body of synthesize.
FrequencyTrace synthesize_at(const Eigen::MatrixXcd& n, const StackedWeights& fixed,
                             const CostWeights& cost, const SynthesisOptions& options);

}  // namespace modspec
