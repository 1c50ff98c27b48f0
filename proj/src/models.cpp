#include "modspec/models.hpp"

#include <cmath>

namespace modspec {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidParameter(std::string(name) + " must be positive");
}

InterconnectionStructure make_coupling(std::vector<ModuleDims> dims, const Eigen::MatrixXd& k_bb,
                                       Index input_channel, Index output_channel) {
  Index channels = 0;
  for (const auto& d : dims) channels += d.outputs;
  Eigen::MatrixXd k_ba = Eigen::MatrixXd::Zero(channels, 1);
  Eigen::MatrixXd k_ab = Eigen::MatrixXd::Zero(1, channels);
  k_ba(input_channel, 0) = 1.0;
  k_ab(0, output_channel) = 1.0;
  return InterconnectionStructure(k_bb, k_ba, k_ab, std::move(dims));
}

// Springs of stiffness k between consecutive DOFs, plus ground springs
// given per DOF.
Eigen::MatrixXd line_matrix(Index n, double k, const Eigen::VectorXd& ground) {
  Eigen::MatrixXd out = ground.asDiagonal();
  for (Index i = 0; i + 1 < n; ++i) {
    out(i, i) += k;
    out(i + 1, i + 1) += k;
    out(i, i + 1) -= k;
    out(i + 1, i) -= k;
  }
  return out;
}

}  // namespace

ModularModel build_two_dof(const TwoDofParams& p, FrequencyGrid grid) {
  require_positive(p.m1, "m1");
  require_positive(p.m2, "m2");
  require_positive(p.d1, "d1");
  require_positive(p.d2, "d2");
  require_positive(p.k1, "k1");
  require_positive(p.k2, "k2");
  if (!(p.k >= 0.0)) throw InvalidParameter("coupling stiffness must be nonnegative");

  std::vector<Module> modules;
  modules.push_back({"module1", SecondOrderModel::scalar(p.m1, p.d1, p.k1)});
  modules.push_back({"module2", SecondOrderModel::scalar(p.m2, p.d2, p.k2)});
  const std::pair<Index, Index> pair{0, 1};
  const Eigen::MatrixXd k_bb = stiff_coupling(p.k, std::span(&pair, 1), 2);
  return ModularModel(std::move(grid), std::move(modules),
                      make_coupling({{1, 1}, {1, 1}}, k_bb, 0, 0));
}

FrequencyGrid two_dof_default_grid(std::size_t points) {
  return FrequencyGrid::logspace_hz(0.5, 5.0, points);
}

std::size_t ModelFamily::index(const std::string& param) const {
  for (std::size_t i = 0; i < param_names.size(); ++i)
    if (param_names[i] == param) return i;
  throw IndexOutOfRange("family '" + name + "' has no parameter '" + param + "'");
}

ModelFamily two_dof_family(FrequencyGrid grid, const TwoDofParams& nominal) {
  ModelFamily f;
  f.name = "two_dof";
  f.param_names = {"m1", "m2", "d1", "d2", "k1", "k2", "k"};
  f.nominal = {nominal.m1, nominal.m2, nominal.d1, nominal.d2, nominal.k1, nominal.k2, nominal.k};
  f.param_module = {0, 1, 0, 1, 0, 1, std::nullopt};
  f.build = [grid = std::move(grid)](std::span<const double> v) {
    if (v.size() != 7) throw InvalidParameter("two_dof family takes 7 parameters");
    return build_two_dof(TwoDofParams{v[0], v[1], v[2], v[3], v[4], v[5], v[6]}, grid);
  };
  return f;
}

ModularModel build_chain(const ChainParams& params, FrequencyGrid grid) {
  if (params.modules.empty()) throw InvalidParameter("chain needs at least one module");
  require_positive(params.coupling_stiffness, "coupling stiffness");

  std::vector<Module> modules;
  std::vector<ModuleDims> dims;
  std::vector<std::pair<Index, Index>> pairs;
  Index channel = 0;
  for (std::size_t j = 0; j < params.modules.size(); ++j) {
    const auto& mp = params.modules[j];
    if (mp.dofs < 1) throw InvalidParameter("chain module needs at least one DOF");
    require_positive(mp.m, "chain mass");
    require_positive(mp.k, "chain stiffness");
    if (!(mp.d >= 0.0)) throw InvalidParameter("chain damping must be nonnegative");
    const Index n = mp.dofs;
    Eigen::VectorXd ground = Eigen::VectorXd::Zero(n);
    ground(0) = 1.0;
    const Eigen::MatrixXd pattern = line_matrix(n, 1.0, ground);
    const Index channels = n == 1 ? 1 : 2;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, channels);
    b(0, 0) = 1.0;
    if (channels == 2) b(n - 1, 1) = 1.0;
    modules.push_back({"chain" + std::to_string(j + 1),
                       SecondOrderModel(mp.m * Eigen::MatrixXd::Identity(n, n), mp.d * pattern,
                                        mp.k * pattern, b, b.transpose())});
    dims.push_back({channels, channels});
    if (j > 0) pairs.emplace_back(channel - 1, channel);
    channel += channels;
  }
  const Eigen::MatrixXd k_bb = stiff_coupling(params.coupling_stiffness, pairs, channel);
  return ModularModel(std::move(grid), std::move(modules),
                      make_coupling(std::move(dims), k_bb, 0, channel - 1));
}

ModularModel build_plate_pillar(const PlatePillarParams& p, FrequencyGrid grid) {
  require_positive(p.plate_mass, "plate mass");
  require_positive(p.plate_stiffness, "plate stiffness");
  require_positive(p.pillar_mass, "pillar mass");
  require_positive(p.pillar_stiffness, "pillar stiffness");
  require_positive(p.coupling_stiffness, "coupling stiffness");
  require_positive(p.ground_stiffness, "ground stiffness");
  if (!(p.damping_ratio >= 0.0)) throw InvalidParameter("damping ratio must be nonnegative");

  auto module = [&](std::string name, double m, const Eigen::MatrixXd& k) {
    const Index n = k.rows();
    const double omega0 = std::sqrt(k.diagonal().maxCoeff() / m);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    return Module{std::move(name),
                  SecondOrderModel(m / static_cast<double>(n) * id,
                                   (2.0 * p.damping_ratio / omega0) * k, k, id, id)};
  };

  std::vector<Module> modules;
  modules.push_back(module("top_plate", p.plate_mass,
                           line_matrix(3, p.plate_stiffness, Eigen::VectorXd::Zero(3))));
  modules.push_back(module("bottom_plate", p.plate_mass,
                           line_matrix(3, p.plate_stiffness, Eigen::VectorXd::Constant(3, p.ground_stiffness))));
  for (int i = 1; i <= 4; ++i)
    modules.push_back(module("pillar" + std::to_string(i), p.pillar_mass,
                             Eigen::MatrixXd::Constant(1, 1, p.pillar_stiffness)));

  // Channels: top plate 0..2, bottom plate 3..5, pillars 6..9.
  const std::vector<std::pair<Index, Index>> pairs = {
      {6, 0}, {6, 3}, {7, 2}, {7, 5}, {8, 1}, {8, 3}, {9, 1}, {9, 5}};
  const Eigen::MatrixXd k_bb = stiff_coupling(p.coupling_stiffness, pairs, 10);
  return ModularModel(std::move(grid), std::move(modules),
                      make_coupling({{3, 3}, {3, 3}, {1, 1}, {1, 1}, {1, 1}, {1, 1}}, k_bb, 0, 2));
}

ModelFamily chain_family(FrequencyGrid grid, const ChainParams& nominal) {
  const std::size_t n = nominal.modules.size();
  if (n == 0) throw InvalidParameter("chain needs at least one module");
  ModelFamily f;
  f.name = "chain";
  f.nominal.resize(3 * n + 1);
  f.param_names.resize(3 * n + 1);
  f.param_module.resize(3 * n + 1);
  const char* prefix[] = {"m", "d", "k"};
  for (std::size_t j = 0; j < n; ++j) {
    const auto& mp = nominal.modules[j];
    const double value[] = {mp.m, mp.d, mp.k};
    for (std::size_t q = 0; q < 3; ++q) {
      f.param_names[q * n + j] = prefix[q] + std::to_string(j + 1);
      f.nominal[q * n + j] = value[q];
      f.param_module[q * n + j] = j;
    }
  }
  f.param_names[3 * n] = "coupling";
  f.nominal[3 * n] = nominal.coupling_stiffness;
  f.build = [grid = std::move(grid), shape = nominal](std::span<const double> v) {
    const std::size_t n = shape.modules.size();
    if (v.size() != 3 * n + 1) throw InvalidParameter("chain family parameter count mismatch");
    ChainParams p = shape;
    for (std::size_t j = 0; j < n; ++j) {
      p.modules[j].m = v[j];
      p.modules[j].d = v[n + j];
      p.modules[j].k = v[2 * n + j];
    }
    p.coupling_stiffness = v[3 * n];
    return build_chain(p, grid);
  };
  return f;
}

ModelFamily plate_pillar_family(FrequencyGrid grid, const PlatePillarParams& nominal) {
  ModelFamily f;
  f.name = "plate_pillar";
  f.param_names = {"plate_mass",    "plate_stiffness",    "pillar_mass",     "pillar_stiffness",
                   "damping_ratio", "coupling_stiffness", "ground_stiffness"};
  f.nominal = {nominal.plate_mass,    nominal.plate_stiffness,    nominal.pillar_mass,
               nominal.pillar_stiffness, nominal.damping_ratio, nominal.coupling_stiffness,
               nominal.ground_stiffness};
  f.param_module.assign(7, std::nullopt);
  f.build = [grid = std::move(grid)](std::span<const double> v) {
    if (v.size() != 7) throw InvalidParameter("plate_pillar family takes 7 parameters");
    return build_plate_pillar(PlatePillarParams{v[0], v[1], v[2], v[3], v[4], v[5], v[6]}, grid);
  };
  return f;
}

std::vector<std::string> builder_names() { return {"two_dof", "chain", "plate_pillar"}; }

LogspaceRange default_builder_range(const std::string& builder) {
  if (builder == "two_dof") return {0.5, 5.0, 1000};
  if (builder == "chain") return {0.1, 10.0, 400};
  if (builder == "plate_pillar") return {0.5, 50.0, 400};
  throw InvalidParameter("unknown builder '" + builder + "'");
}

ModelFamily make_family(const std::string& builder, FrequencyGrid grid, const BuilderShape& shape) {
  if (builder == "two_dof") return two_dof_family(std::move(grid));
  if (builder == "chain") {
    if (shape.chain_modules == 0 || shape.chain_dofs < 1)
      throw InvalidParameter("chain needs at least one module of at least one DOF");
    ChainParams p;
    p.modules.assign(shape.chain_modules, ChainModuleParams{shape.chain_dofs});
    return chain_family(std::move(grid), p);
  }
  if (builder == "plate_pillar") return plate_pillar_family(std::move(grid));
  throw InvalidParameter("unknown builder '" + builder + "'");
}

Perturbation Perturbation::added_mass(std::size_t module, Index dof, double kg) {
  return {PerturbationKind::AddedMass, module, dof, kg};
}

Perturbation Perturbation::stiffness_scale(std::size_t module, double factor) {
  return {PerturbationKind::StiffnessScale, module, 0, factor - 1.0};
}

Perturbation Perturbation::damping_scale(std::size_t module, double factor) {
  return {PerturbationKind::DampingScale, module, 0, factor - 1.0};
}

SecondOrderModel apply_perturbation(const SecondOrderModel& model, const Perturbation& p) {
  if (!std::isfinite(p.magnitude)) throw InvalidParameter("perturbation magnitude must be finite");
  Eigen::MatrixXd m = model.mass();
  Eigen::MatrixXd d = model.damping();
  Eigen::MatrixXd k = model.stiffness();
  switch (p.kind) {
    case PerturbationKind::AddedMass:
      if (p.dof < 0 || p.dof >= model.dofs()) throw InvalidParameter("perturbation DOF does not exist");
      m(p.dof, p.dof) += p.magnitude;
      if (!(m(p.dof, p.dof) > 0.0)) throw InvalidParameter("added mass leaves a nonpositive mass");
      break;
    case PerturbationKind::StiffnessScale:
      if (!(1.0 + p.magnitude >= 0.0)) throw InvalidParameter("stiffness scale must be nonnegative");
      if (p.magnitude != 0.0) k *= 1.0 + p.magnitude;
      break;
    case PerturbationKind::DampingScale:
      if (!(1.0 + p.magnitude >= 0.0)) throw InvalidParameter("damping scale must be nonnegative");
      if (p.magnitude != 0.0) d *= 1.0 + p.magnitude;
      break;
  }
  return SecondOrderModel(std::move(m), std::move(d), std::move(k), model.input_map(), model.output_map());
}

ModularModel apply_perturbation(const ModularModel& model, const Perturbation& p) {
  if (p.module >= model.modules().size()) throw InvalidParameter("perturbation targets a missing module");
  const Module& target = model.modules()[p.module];
  const SecondOrderModel* so = target.second_order();
  if (so == nullptr) throw InvalidParameter("only second-order modules can be perturbed");
  return model.with_module(p.module, Module{target.name, apply_perturbation(*so, p)});
}

}  // namespace modspec
