#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modspec/model.hpp"

namespace modspec {

struct LogspaceRange {
  double f_min_hz = 0.0;
  double f_max_hz = 0.0;
  std::size_t n = 0;
  FrequencyGrid grid() const { return FrequencyGrid::logspace_hz(f_min_hz, f_max_hz, n); }
  friend bool operator==(const LogspaceRange&, const LogspaceRange&) = default;
};

/// Two masses on ground springs joined by a coupling spring; u_A acts on
/// mass 1 and y_A reads mass 1.
struct TwoDofParams {
  double m1 = 1.0;
  double m2 = 2.0;
  double d1 = 0.3;
  double d2 = 0.3;
  double k1 = 100.0;
  double k2 = 100.0;
  double k = 90.0;  // coupling
};

ModularModel build_two_dof(const TwoDofParams& params, FrequencyGrid grid);

/// 1000 log-spaced points, 0.5 to 5 Hz.
FrequencyGrid two_dof_default_grid(std::size_t points = 1000);

/// A named parameter vector and the builder that turns it into a model.
/// `param_module[i]` names the module parameter i lives in, if any.
struct ModelFamily {
  std::string name;
  std::vector<std::string> param_names;
  std::vector<double> nominal;
  std::vector<std::optional<std::size_t>> param_module;
  std::function<ModularModel(std::span<const double>)> build;

  std::size_t index(const std::string& param) const;
  ModularModel build_nominal() const { return build(nominal); }
};

/// Parameters in order m1, m2, d1, d2, k1, k2, k.
ModelFamily two_dof_family(FrequencyGrid grid, const TwoDofParams& nominal = {});

/// Serial chain of lumped modules. Module j has `dofs` masses in a line,
/// the first one grounded; its boundary DOFs (first and last) are its
/// channels. Neighbouring modules are joined last-to-first by a stiff spring.
struct ChainModuleParams {
  Index dofs = 1;
  double m = 1.0;
  double d = 0.3;
  double k = 100.0;
};

struct ChainParams {
  std::vector<ChainModuleParams> modules;
  double coupling_stiffness = 1e5;
};

ModularModel build_chain(const ChainParams& params, FrequencyGrid grid);

/// Lumped stand-in for a two-plate, four-pillar structure: two 3-DOF
/// plates and four 1-DOF pillars, each pillar tied to both plates by stiff
/// springs. Modules: top plate, bottom plate, pillars 1..4.
struct PlatePillarParams {
  double plate_mass = 2.0;
  double plate_stiffness = 4e4;
  double pillar_mass = 0.2;
  double pillar_stiffness = 10.0;
  double damping_ratio = 0.01;
  double coupling_stiffness = 2e4;
  double ground_stiffness = 4e4;
};

ModularModel build_plate_pillar(const PlatePillarParams& params, FrequencyGrid grid);

/// Parameters m1..mn, d1..dn, k1..kn (module j holds m_j, d_j, k_j), then
/// coupling. Module DOF counts are fixed by `nominal`.
ModelFamily chain_family(FrequencyGrid grid, const ChainParams& nominal);

/// Parameters plate_mass, plate_stiffness, pillar_mass, pillar_stiffness,
/// damping_ratio, coupling_stiffness, ground_stiffness; all shared.
ModelFamily plate_pillar_family(FrequencyGrid grid, const PlatePillarParams& nominal = {});

/// Names accepted by make_family.
std::vector<std::string> builder_names();

struct BuilderShape {
  std::size_t chain_modules = 3;
  Index chain_dofs = 2;
};

LogspaceRange default_builder_range(const std::string& builder);
ModelFamily make_family(const std::string& builder, FrequencyGrid grid, const BuilderShape& shape = {});

enum class PerturbationKind { AddedMass, StiffnessScale, DampingScale };

/// For the scale kinds `magnitude` is the fractional change: the matrix is
/// multiplied by (1 + magnitude).
struct Perturbation {
  PerturbationKind kind = PerturbationKind::AddedMass;
  std::size_t module = 0;
  Index dof = 0;
  double magnitude = 0.0;

  static Perturbation added_mass(std::size_t module, Index dof, double kg);
  static Perturbation stiffness_scale(std::size_t module, double factor);
  static Perturbation damping_scale(std::size_t module, double factor);
};

SecondOrderModel apply_perturbation(const SecondOrderModel& model, const Perturbation& p);
ModularModel apply_perturbation(const ModularModel& model, const Perturbation& p);

}  // namespace modspec
