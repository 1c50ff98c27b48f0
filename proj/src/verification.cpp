#include "modspec/verification.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "modspec/parallel.hpp"

namespace modspec {

PerturbationSample draw_perturbation(const std::vector<ModuleSpec>& specs,
                                     std::span<const double> margins, std::mt19937_64& rng) {
  if (margins.size() != specs.size()) throw DimensionMismatch("one margin per module is required");
  std::normal_distribution<double> normal(0.0, 1.0);
  PerturbationSample out;
  out.target_margin.assign(margins.begin(), margins.end());
  for (std::size_t j = 0; j < specs.size(); ++j) {
    const auto& spec = specs[j];
    const auto& base = spec.baseline();
    std::vector<Eigen::MatrixXcd> e(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      Eigen::MatrixXcd r(base.rows(), base.cols());
      for (Index a = 0; a < r.rows(); ++a)
        for (Index b = 0; b < r.cols(); ++b) r(a, b) = Complex(normal(rng), normal(rng));
      const double m = spec.margin(i, r);
      e[i] = m > 0.0 ? Eigen::MatrixXcd(r * (margins[j] / m)) : Eigen::MatrixXcd::Zero(r.rows(), r.cols());
    }
    out.errors.emplace_back(base.grid(), std::move(e));
  }
  return out;
}

GuaranteeReport sample_guarantee(const ModularModel& model, const SystemSpec& system,
                                 const std::vector<ModuleSpec>& module_specs,
                                 const GuaranteeOptions& options) {
  if (module_specs.size() != model.modules().size())
    throw DimensionMismatch("one module spec per module is required");
  if (!(options.max_module_margin >= 0.0)) throw InvalidParameter("margin bound must be nonnegative");

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  GuaranteeReport report;
  report.samples = options.samples;
  const auto& k = model.coupling();
  for (std::size_t s = 0; s < options.samples; ++s) {
    std::vector<double> margins(module_specs.size());
    for (double& m : margins) m = options.max_module_margin * uniform(rng);
    const auto sample = draw_perturbation(module_specs, margins, rng);

    std::vector<FrfMatrix> redesigned;
    redesigned.reserve(module_specs.size());
    for (std::size_t j = 0; j < module_specs.size(); ++j) {
      const auto& base = module_specs[j].baseline();
      std::vector<Eigen::MatrixXcd> g(base.size());
      for (std::size_t i = 0; i < base.size(); ++i) g[i] = base[i] + sample.errors[j][i];
      redesigned.emplace_back(base.grid(), std::move(g));
    }
    const FrfMatrix g_a_hat = assemble_system_frf(block_diag(redesigned), k);
    const SpecCheck check = check_system_spec(system, g_a_hat);
    const double worst = check.max_margin();
    report.worst_system_margin = std::max(report.worst_system_margin, worst);
    if (check.all_pass()) {
      ++report.passed;
      continue;
    }
    const bool in_contract =
        std::all_of(margins.begin(), margins.end(), [](double m) { return m <= 1.0; });
    if (!in_contract) {
      ++report.out_of_contract_failures;
      continue;
    }
    const auto it = std::find(check.pass.begin(), check.pass.end(), false);
    const std::size_t i = static_cast<std::size_t>(it - check.pass.begin());
    std::ostringstream os;
    os << "sample " << s << " satisfies every module spec but violates the system spec at omega = "
       << g_a_hat.grid()[i] << " rad/s (margin " << check.margin[i] << ")";
    throw GuaranteeViolated(s, g_a_hat.grid()[i], check.margin[i], os.str());
  }
  return report;
}

RegionAxis axis_around_nominal(const ModelFamily& family, const std::string& param,
                               double rel_half_width, std::size_t steps) {
  if (steps == 0) throw InvalidParameter("axis needs at least one step");
  RegionAxis axis;
  axis.param = family.index(param);
  const double c = family.nominal[axis.param];
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = steps == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(steps - 1);
    axis.values.push_back(c * (1.0 + rel_half_width * t));
  }
  if (steps % 2 == 1) axis.values[steps / 2] = c;
  return axis;
}

std::size_t RegionGrid::brute_count() const {
  return static_cast<std::size_t>(std::count(brute_pass.begin(), brute_pass.end(), 1));
}

std::size_t RegionGrid::modular_count() const {
  return static_cast<std::size_t>(std::count(modular_pass.begin(), modular_pass.end(), 1));
}

std::size_t RegionGrid::inclusion_violations() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < modular_pass.size() && i < brute_pass.size(); ++i)
    if (modular_pass[i] && !brute_pass[i]) ++n;
  return n;
}

double RegionGrid::area_ratio() const {
  const auto b = brute_count();
  return b == 0 ? 0.0 : static_cast<double>(modular_count()) / static_cast<double>(b);
}

namespace {

std::vector<double> cell_params(const ModelFamily& family, const RegionAxis& x, const RegionAxis& y,
                                std::size_t ix, std::size_t iy) {
  std::vector<double> p = family.nominal;
  p.at(x.param) = x.values[ix];
  p.at(y.param) = y.values[iy];
  return p;
}

std::string cell_context(std::size_t ix, std::size_t iy) {
  return " (cell " + std::to_string(ix) + ", " + std::to_string(iy) + ")";
}

}  // namespace

std::vector<char> brute_force_region(const ModelFamily& family, const RegionAxis& x,
                                     const RegionAxis& y, const SystemSpec& system) {
  const std::size_t ny = y.values.size();
  std::vector<char> pass(x.values.size() * ny, 0);
  parallel_for(pass.size(), [&](std::size_t c) {
    const std::size_t ix = c / ny;
    const std::size_t iy = c % ny;
    const auto model = family.build(cell_params(family, x, y, ix, iy));
    try {
      pass[c] = check_system_spec(system, model.system_frf()).all_pass() ? 1 : 0;
    } catch (const IllPosedInterconnection& e) {
      throw IllPosedInterconnection(e.omega(), e.rcond(), e.what() + cell_context(ix, iy));
    }
  });
  return pass;
}

std::vector<char> modular_region(const ModelFamily& family, const RegionAxis& x,
                                 const RegionAxis& y,
                                 const std::vector<std::vector<ModuleSpec>>& spec_sets) {
  if (spec_sets.empty()) throw InvalidParameter("at least one module spec set is required");
  const std::size_t ny = y.values.size();
  std::vector<char> pass(x.values.size() * ny, 0);
  parallel_for(pass.size(), [&](std::size_t c) {
    const std::size_t ix = c / ny;
    const std::size_t iy = c % ny;
    const auto model = family.build(cell_params(family, x, y, ix, iy));
    if (spec_sets.front().size() != model.modules().size())
      throw DimensionMismatch("module spec set does not match the module count");
    std::vector<FrfMatrix> frfs;
    for (const auto& m : model.modules()) frfs.push_back(m.frf(spec_sets.front().front().baseline().grid()));
    for (const auto& set : spec_sets) {
      bool all = true;
      for (std::size_t j = 0; j < set.size() && all; ++j) all = check_module_spec(set[j], frfs[j]).all_pass();
      if (all) {
        pass[c] = 1;
        return;
      }
    }
  });
  return pass;
}

RegionGrid sweep_region(const ModelFamily& family, const RegionAxis& x, const RegionAxis& y,
                        const SystemSpec& system,
                        const std::vector<std::vector<ModuleSpec>>& spec_sets) {
  RegionGrid out;
  out.x = x;
  out.y = y;
  out.brute_pass = brute_force_region(family, x, y, system);
  out.modular_pass = modular_region(family, x, y, spec_sets);
  return out;
}

namespace {

double objective(std::span<const DesignVariable> vars, const std::vector<double>& start,
                 const std::vector<double>& now) {
  double f = 0.0;
  for (const auto& v : vars) f += v.direction * (now[v.param] - start[v.param]);
  return f;
}

void check_variables(const ModelFamily& family, std::span<const DesignVariable> vars) {
  if (vars.empty()) throw InvalidParameter("at least one design variable is required");
  for (const auto& v : vars) {
    if (v.param >= family.nominal.size()) throw IndexOutOfRange("design variable parameter out of range");
    if (v.direction != 1.0 && v.direction != -1.0) throw InvalidParameter("direction must be +1 or -1");
  }
}

// Largest t in [0, 1] with pass(t), given pass(0); assumes one crossing.
template <typename Pred>
double bisect_boundary(Pred pass, int steps) {
  if (pass(1.0)) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int s = 0; s < steps; ++s) {
    const double mid = 0.5 * (lo + hi);
    if (pass(mid)) lo = mid;
    else hi = mid;
  }
  return lo;
}

}  // namespace

IncrementalResult incremental_redesign(const ModelFamily& family,
                                       std::span<const DesignVariable> variables,
                                       const IncrementalOptions& options) {
  check_variables(family, variables);
  if (options.iterations == 0) throw InvalidParameter("at least one iteration is required");
  if (!(options.gamma_total > 0.0)) throw InvalidParameter("gamma_total must be positive");
  for (const auto& v : variables)
    if (!family.param_module.at(v.param))
      throw InvalidParameter("design variable '" + family.param_names[v.param] + "' belongs to no module");

  const double gamma_step = options.gamma_total / static_cast<double>(options.iterations);
  const std::vector<double> start = family.nominal;
  const SystemSpec original =
      system_spec_from_relative_gamma(family.build(start).system_frf(), std::span(&options.gamma_total, 1));

  IncrementalResult out;
  std::vector<double> params = start;
  for (std::size_t it = 1; it <= options.iterations; ++it) {
    const ModularModel model = family.build(params);
    const SystemSpec spec = system_spec_from_relative_gamma(model.system_frf(), std::span(&gamma_step, 1));
    const CostWeights cost = options.alpha.empty() ? CostWeights::uniform(model.modules().size())
                                                   : CostWeights{options.alpha};
    const SynthesisResult synth = synthesize(model, spec, cost, options.synthesis);
    if (!synth.feasible()) {
      out.completed = false;
      out.message = "module specs infeasible at iteration " + std::to_string(it);
      return out;
    }

    std::vector<double> next = params;
    for (const auto& var : variables) {
      const std::size_t mod = *family.param_module[var.param];
      const ModuleSpec& mspec = synth.module_specs[mod];
      const double from = next[var.param];
      const double span = var.limit - from;
      if (var.direction * span <= 0.0) continue;
      auto pass = [&](double t) {
        std::vector<double> trial = next;
        trial[var.param] = from + t * span;
        const auto frf = family.build(trial).modules()[mod].frf(model.grid());
        return check_module_spec(mspec, frf).all_pass();
      };
      next[var.param] = from + bisect_boundary(pass, options.bisection_steps) * span;
    }
    params = next;

    const FrfMatrix g_a_hat = family.build(params).system_frf();
    IncrementalStep step;
    step.iteration = it;
    step.params = params;
    step.cumulative_objective = objective(variables, start, params);
    step.step_system_margin = check_system_spec(spec, g_a_hat).max_margin();
    step.original_system_margin = check_system_spec(original, g_a_hat).max_margin();
    if (!(step.step_system_margin < 1.0))
      throw GuaranteeViolated(it, 0.0, step.step_system_margin,
                              "committed design violates the step's system spec");
    out.steps.push_back(std::move(step));
  }
  return out;
}

IncrementalResult incremental_brute_force(const ModelFamily& family,
                                          std::span<const DesignVariable> variables,
                                          const BruteForceOptions& options) {
  check_variables(family, variables);
  if (variables.size() > 2) throw InvalidParameter("brute-force search supports one or two variables");
  if (options.iterations == 0) throw InvalidParameter("at least one iteration is required");
  if (options.rays < 2) throw InvalidParameter("at least two rays are required");

  const double gamma_step = options.gamma_total / static_cast<double>(options.iterations);
  const std::vector<double> start = family.nominal;
  const SystemSpec original =
      system_spec_from_relative_gamma(family.build(start).system_frf(), std::span(&options.gamma_total, 1));

  IncrementalResult out;
  std::vector<double> params = start;
  for (std::size_t it = 1; it <= options.iterations; ++it) {
    const SystemSpec spec =
        system_spec_from_relative_gamma(family.build(params).system_frf(), std::span(&gamma_step, 1));
    std::vector<double> spans;
    for (const auto& v : variables) {
      const double s = v.limit - params[v.param];
      spans.push_back(v.direction * s > 0.0 ? s : 0.0);
    }
    const std::size_t rays = variables.size() == 1 ? 1 : options.rays;
    std::vector<std::vector<double>> best_per_ray(rays);
    parallel_for(rays, [&](std::size_t r) {
      const double theta = rays == 1 ? 0.0
                                     : 0.5 * std::numbers::pi * static_cast<double>(r) /
                                           static_cast<double>(rays - 1);
      const double c[2] = {std::cos(theta), std::sin(theta)};
      auto at = [&](double t) {
        std::vector<double> trial = params;
        for (std::size_t i = 0; i < variables.size(); ++i)
          trial[variables[i].param] += t * (variables.size() == 1 ? 1.0 : c[i]) * spans[i];
        return trial;
      };
      auto pass = [&](double t) { return check_system_spec(spec, family.build(at(t)).system_frf()).all_pass(); };
      best_per_ray[r] = at(bisect_boundary(pass, options.bisection_steps));
    });
    std::vector<double> best = params;
    double best_f = objective(variables, start, params);
    for (const auto& cand : best_per_ray) {
      const double f = objective(variables, start, cand);
      if (f > best_f) {
        best_f = f;
        best = cand;
      }
    }
    params = best;

    const FrfMatrix g_a_hat = family.build(params).system_frf();
    IncrementalStep step;
    step.iteration = it;
    step.params = params;
    step.cumulative_objective = best_f;
    step.step_system_margin = check_system_spec(spec, g_a_hat).max_margin();
    step.original_system_margin = check_system_spec(original, g_a_hat).max_margin();
    out.steps.push_back(std::move(step));
  }
  return out;
}

}  // namespace modspec
