#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "modspec/models.hpp"
#include "modspec/spec.hpp"
#include "modspec/synthesis.hpp"

namespace modspec {

/// One random redesign: per module an error FRF E^(j) whose module-spec
/// margin equals target_margin[j] at every grid point.
struct PerturbationSample {
  std::vector<FrfMatrix> errors;
  std::vector<double> target_margin;
};

/// Random complex errors, normalized in each module's weighted norm and
/// scaled to the requested margins.
PerturbationSample draw_perturbation(const std::vector<ModuleSpec>& specs,
                                     std::span<const double> margins, std::mt19937_64& rng);

struct GuaranteeOptions {
  std::size_t samples = 1000;
  std::uint64_t seed = 42;
  /// Margins are drawn uniformly from [0, max_module_margin]. Values above
  /// 1 leave the module specs' contract.
  double max_module_margin = 1.0;
};

struct GuaranteeReport {
  std::size_t samples = 0;
  std::size_t passed = 0;
  double worst_system_margin = 0.0;
  /// Failing samples whose module margins exceeded 1.
  std::size_t out_of_contract_failures = 0;
};

/// Draws redesigns that satisfy the module specs, assembles each redesigned
/// system and checks the system spec. Throws GuaranteeViolated for a
/// failing in-contract sample.
GuaranteeReport sample_guarantee(const ModularModel& model, const SystemSpec& system,
                                 const std::vector<ModuleSpec>& module_specs,
                                 const GuaranteeOptions& options = {});

/// One axis of a parameter grid.
struct RegionAxis {
  std::size_t param = 0;
  std::vector<double> values;
};

/// `steps` evenly spaced values over nominal * (1 +- rel_half_width).
RegionAxis axis_around_nominal(const ModelFamily& family, const std::string& param,
                               double rel_half_width, std::size_t steps);

/// Acceptance per cell, stored with the x index varying slowest.
struct RegionGrid {
  RegionAxis x;
  RegionAxis y;
  std::vector<char> brute_pass;
  std::vector<char> modular_pass;

  std::size_t cells() const { return x.values.size() * y.values.size(); }
  std::size_t cell(std::size_t ix, std::size_t iy) const { return ix * y.values.size() + iy; }
  std::size_t brute_count() const;
  std::size_t modular_count() const;
  /// Cells accepted by the modular check but rejected by brute force.
  std::size_t inclusion_violations() const;
  /// modular_count / brute_count.
  double area_ratio() const;
};

/// Builds each cell, assembles the redesigned system and checks the
/// system spec at every grid point.
std::vector<char> brute_force_region(const ModelFamily& family, const RegionAxis& x,
                                     const RegionAxis& y, const SystemSpec& system);

/// A cell is accepted iff every module passes its module spec for at least
/// one of the supplied spec sets (one set per cost distribution).
std::vector<char> modular_region(const ModelFamily& family, const RegionAxis& x,
                                 const RegionAxis& y,
                                 const std::vector<std::vector<ModuleSpec>>& spec_sets);

RegionGrid sweep_region(const ModelFamily& family, const RegionAxis& x, const RegionAxis& y,
                        const SystemSpec& system,
                        const std::vector<std::vector<ModuleSpec>>& spec_sets);

/// A scalar design parameter moved in `direction` (-1 to decrease, +1 to
/// increase) but never past `limit`.
struct DesignVariable {
  std::size_t param = 0;
  double direction = -1.0;
  double limit = 0.0;
};

struct IncrementalOptions {
  double gamma_total = 0.5;
  std::size_t iterations = 1;
  SynthesisOptions synthesis{};
  /// Empty means uniform.
  std::vector<double> alpha;
  int bisection_steps = 60;
};

struct IncrementalStep {
  std::size_t iteration = 0;
  std::vector<double> params;
  /// sum_i direction_i * (p_i - p_i(start)).
  double cumulative_objective = 0.0;
  /// Against the spec of this step (gamma_step about the step's baseline).
  double step_system_margin = 0.0;
  /// Against gamma_total about the original baseline.
  double original_system_margin = 0.0;
};

struct IncrementalResult {
  std::vector<IncrementalStep> steps;
  bool completed = true;
  std::string message;

  double final_objective() const { return steps.empty() ? 0.0 : steps.back().cumulative_objective; }
};

/// Repeats: relative spec with gamma_step = gamma_total / iterations about
/// the current design, synthesize module specs, move every design variable
/// as far as its module spec allows (bisection), commit.
IncrementalResult incremental_redesign(const ModelFamily& family,
                                       std::span<const DesignVariable> variables,
                                       const IncrementalOptions& options);

struct BruteForceOptions {
  double gamma_total = 0.5;
  std::size_t iterations = 1;
  std::size_t rays = 91;
  int bisection_steps = 50;
};

/// Same loop using the assembled system only: at each step the best design
/// along a fan of rays from the current design (two design variables)
/// satisfying the step's system spec. Upper-bounds the modular result per
/// step up to the ray resolution.
IncrementalResult incremental_brute_force(const ModelFamily& family,
                                          std::span<const DesignVariable> variables,
                                          const BruteForceOptions& options);

}  // namespace modspec
