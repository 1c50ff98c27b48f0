// Command-line front end: synthesize module specs, verify candidates,
// sweep parameter regions and run incremental redesign.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "modspec/io.hpp"
#include "modspec/models.hpp"
#include "modspec/parallel.hpp"
#include "modspec/synthesis.hpp"
#include "modspec/verification.hpp"

namespace fs = std::filesystem;
using namespace modspec;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_error = 1;
constexpr int exit_fail = 2;

double parse_number(const std::string& text, const std::string& what) {
  std::string t = text;
  for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (t == "inf" || t == "+inf" || t == "infinity") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw InvalidParameter("cannot parse " + what + " '" + text + "'");
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

// "a=1,b=2" in order of appearance.
std::vector<std::pair<std::string, double>> parse_assignments(const std::string& text) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& item : split(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidParameter("expected name=value, got '" + item + "'");
    out.emplace_back(item.substr(0, eq), parse_number(item.substr(eq + 1), item.substr(0, eq)));
  }
  return out;
}

struct ModelSource {
  std::string model_file;
  std::string builder;
  std::string params;
  double f_min = 0.0;
  double f_max = 0.0;
  std::size_t points = 0;
  bool grid_override = false;

  void add_options(CLI::App* app) {
    app->add_option("--model", model_file, "model JSON file");
    app->add_option("--builder", builder, "built-in model: two_dof, chain, plate_pillar");
    app->add_option("--params", params, "builder parameters, e.g. k=90,m1=1 (chain also takes n, dofs)");
    auto* a = app->add_option("--f-min", f_min, "grid lower frequency [Hz]");
    auto* b = app->add_option("--f-max", f_max, "grid upper frequency [Hz]");
    auto* c = app->add_option("--points", points, "grid size");
    a->needs(b)->needs(c);
    b->needs(a)->needs(c);
    c->needs(a)->needs(b);
  }
};

struct LoadedModel {
  GridDescriptor grid;
  std::optional<ModelFamily> family;  // set for builders
  std::vector<double> params;
  std::optional<ModularModel> model;
};

LoadedModel load(const ModelSource& src) {
  if (src.model_file.empty() == src.builder.empty())
    throw InvalidParameter("give exactly one of --model or --builder");
  LoadedModel out;
  std::optional<LogspaceRange> override_range;
  if (src.points > 0 || src.f_min != 0.0 || src.f_max != 0.0)
    override_range = LogspaceRange{src.f_min, src.f_max, src.points};

  if (!src.model_file.empty()) {
    if (!src.params.empty()) throw InvalidParameter("--params needs --builder");
    ModelDocument doc = load_model(src.model_file);
    out.grid = doc.grid;
    out.model = doc.model;
    if (override_range) {
      out.grid = {*override_range};
      out.model = doc.model.with_grid(override_range->grid());
    }
  } else {
    BuilderShape shape;
    std::vector<std::pair<std::string, double>> values;
    for (const auto& [name, v] : parse_assignments(src.params)) {
      if (src.builder == "chain" && (name == "n" || name == "dofs")) {
        if (!(v >= 1.0) || v != std::floor(v)) throw InvalidParameter(name + " must be a positive integer");
        if (name == "n") shape.chain_modules = static_cast<std::size_t>(v);
        else shape.chain_dofs = static_cast<Index>(v);
      } else {
        values.emplace_back(name, v);
      }
    }
    const LogspaceRange range = override_range ? *override_range : default_builder_range(src.builder);
    out.grid = {range};
    out.family = make_family(src.builder, range.grid(), shape);
    out.params = out.family->nominal;
    for (const auto& [name, v] : values) out.params[out.family->index(name)] = v;
    out.family->nominal = out.params;
    out.model = out.family->build(out.params);
  }
  if (out.model->grid().empty()) throw InvalidParameter("empty frequency grid");
  return out;
}

CostWeights parse_alpha(const std::string& text, std::size_t modules) {
  if (text.empty() || text == "uniform") return CostWeights::uniform(modules);
  CostWeights c;
  for (const auto& item : split(text, ',')) c.alpha.push_back(parse_number(item, "alpha"));
  if (c.alpha.size() != modules)
    throw InvalidParameter("alpha needs " + std::to_string(modules) + " entries");
  return c;
}

struct SpecSource {
  std::string file;
  std::optional<double> gamma;

  void add_options(CLI::App* app) {
    app->add_option("--system-spec", file, "system spec JSON file");
    app->add_option("--gamma", gamma, "relative system spec ||G_A - G_A_hat|| / ||G_A|| < gamma");
  }

  SystemSpec resolve(const FrfMatrix& g_a) const {
    if (file.empty() == !gamma.has_value()) throw InvalidParameter("give exactly one of --system-spec or --gamma");
    if (gamma) return system_spec_from_relative_gamma(g_a, std::span(&*gamma, 1));
    return load_system_spec(file, g_a);
  }
};

struct SolverFlags {
  double eps = 1e-4;
  std::string eps_text;
  int max_iters = 50;
  double eps_pd_rel = 1e-9;

  void add_options(CLI::App* app) {
    app->add_option("--eps", eps_text, "stop when beta decreases by less than this (inf: one pass)");
    app->add_option("--max-iters", max_iters, "iteration cap per frequency");
    app->add_option("--eps-pd", eps_pd_rel, "LMI margin relative to ||N||");
  }

  SynthesisOptions options() const {
    SynthesisOptions o;
    o.eps = eps_text.empty() ? eps : parse_number(eps_text, "eps");
    o.max_iters = max_iters;
    o.weight_step.eps_pd_rel = eps_pd_rel;
    return o;
  }
};

fs::path prepare_dir(const std::string& dir) {
  if (dir.empty()) throw InvalidParameter("--out is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("cannot create output directory " + dir);
  const fs::path probe = fs::path(dir) / ".modspec_write_test";
  {
    std::ofstream f(probe);
    if (!f) throw Error("output directory " + dir + " is not writable");
  }
  fs::remove(probe, ec);
  return dir;
}

std::ofstream open_out(const fs::path& file) {
  std::ofstream f(file);
  if (!f) throw Error("cannot write " + file.string());
  return f;
}

void print_verdict(const FrequencyGrid& grid, const SpecCheck& check, bool all_rows) {
  std::cout << std::setw(14) << "omega_hz" << std::setw(16) << "margin" << "  pass\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!all_rows && check.pass[i]) continue;
    std::cout << std::setw(14) << grid.hz(i) << std::setw(16) << check.margin[i] << "  "
              << (check.pass[i] ? "yes" : "no") << '\n';
  }
  std::cout << "max margin " << check.max_margin() << ", " << (check.all_pass() ? "PASS" : "FAIL") << '\n';
}

FrfMatrix pick_frf(const ModularModel& model, const std::string& what) {
  if (what == "system") return model.system_frf();
  if (what == "nominal") return model.nominal();
  if (what.rfind("module:", 0) == 0) return model.modules()[model.module_index(what.substr(7))].frf(model.grid());
  throw InvalidParameter("--what must be system, nominal or module:<name>");
}

int run_synthesize(const ModelSource& src, const SpecSource& spec_src, const SolverFlags& solver,
                   const std::string& alpha, const std::string& out_dir) {
  const LoadedModel lm = load(src);
  const ModularModel& model = *lm.model;
  const fs::path dir = prepare_dir(out_dir);
  const SystemSpec system = spec_src.resolve(model.system_frf());
  const SynthesisResult r =
      synthesize(model, system, parse_alpha(alpha, model.modules().size()), solver.options());

  for (std::size_t j = 0; j < model.modules().size(); ++j) {
    const auto& name = model.modules()[j].name;
    save_module_spec(dir / (name + ".json"), name, r.module_specs[j]);
    auto table = open_out(dir / (name + "_weights.csv"));
    write_weight_table_csv(table, r.module_specs[j]);
  }
  auto trace = open_out(dir / "trace.csv");
  write_trace_csv(trace, r.trace);

  std::cout << "synthesized " << model.modules().size() << " module specs on " << model.grid().size()
            << " frequencies\n";
  if (!r.unconverged_omegas.empty())
    std::cout << r.unconverged_omegas.size() << " frequencies hit the iteration cap\n";
  if (!r.feasible()) {
    std::cerr << "infeasible at " << r.infeasible_omegas.size() << " frequencies, first "
              << rad_to_hz(r.infeasible_omegas.front()) << " Hz\n";
    return exit_fail;
  }
  return exit_ok;
}

int run_verify_module(const ModelSource& src, const std::string& spec_file, const std::string& candidate,
                      const std::string& module, const std::string& out_file, bool all_rows) {
  if (spec_file.empty()) throw InvalidParameter("--spec is required");
  FrfMatrix frf;
  std::string name = module;
  if (!candidate.empty()) {
    if (!src.builder.empty() || !src.model_file.empty())
      throw InvalidParameter("give either --candidate or a model source");
    std::ifstream probe(candidate);
    if (!probe) throw ParseError(candidate, "", "cannot open file");
    std::stringstream ss;
    ss << probe.rdbuf();
    if (ss.str().find("\"modules\"") != std::string::npos) {
      const ModelDocument doc = parse_model(ss.str(), candidate);
      if (name.empty()) throw InvalidParameter("--module is required for a model candidate");
      frf = doc.model.modules()[doc.model.module_index(name)].frf(doc.model.grid());
    } else {
      frf = load_frf(candidate);
    }
  } else {
    const LoadedModel lm = load(src);
    if (name.empty()) throw InvalidParameter("--module is required for a model candidate");
    frf = lm.model->modules()[lm.model->module_index(name)].frf(lm.model->grid());
  }
  const ModuleSpecDocument spec = load_module_spec(spec_file, std::nullopt, &frf.grid());
  if (!spec.module.empty() && !name.empty() && spec.module != name)
    throw InvalidParameter("spec is for module '" + spec.module + "', candidate is '" + name + "'");
  const SpecCheck check = check_module_spec(spec.spec, frf);
  print_verdict(frf.grid(), check, all_rows);
  if (!out_file.empty()) {
    auto f = open_out(out_file);
    write_verdict_csv(f, frf.grid(), check);
  }
  return check.all_pass() ? exit_ok : exit_fail;
}

int run_verify_system(const ModelSource& src, const SpecSource& spec_src, const std::string& redesigned,
                      const std::string& redesigned_params, const std::string& out_dir, bool all_rows) {
  const LoadedModel lm = load(src);
  const SystemSpec system = spec_src.resolve(lm.model->system_frf());
  std::optional<ModularModel> hat;
  if (!redesigned.empty() == !redesigned_params.empty())
    throw InvalidParameter("give exactly one of --redesigned or --redesigned-params");
  if (!redesigned.empty()) {
    hat = load_model(redesigned).model;
    if (!(hat->grid() == lm.model->grid())) {
      const auto& g = lm.model->grid();
      hat = hat->with_grid(g);
    }
  } else {
    if (!lm.family) throw InvalidParameter("--redesigned-params needs --builder");
    std::vector<double> p = lm.params;
    for (const auto& [name, v] : parse_assignments(redesigned_params)) p[lm.family->index(name)] = v;
    hat = lm.family->build(p);
  }
  const FrfMatrix g_a_hat = hat->system_frf();
  const SpecCheck check = check_system_spec(system, g_a_hat);
  print_verdict(g_a_hat.grid(), check, all_rows);
  if (!out_dir.empty()) {
    const fs::path dir = prepare_dir(out_dir);
    auto v = open_out(dir / "verdict.csv");
    write_verdict_csv(v, g_a_hat.grid(), check);
    auto e = open_out(dir / "spec_envelope.csv");
    write_envelope_csv(e, system, g_a_hat);
  }
  return check.all_pass() ? exit_ok : exit_fail;
}

struct SweepFlags {
  std::string x = "m1";
  std::string y = "m2";
  double range = 0.6;
  std::size_t steps = 41;
  double gamma = 0.05;
  std::vector<std::string> alpha_sets;
};

int run_sweep(const ModelSource& src, const SweepFlags& f, const SolverFlags& solver,
              const std::string& out_dir) {
  const LoadedModel lm = load(src);
  if (!lm.family) throw InvalidParameter("sweep needs --builder");
  const fs::path dir = prepare_dir(out_dir);
  const ModelFamily& fam = *lm.family;
  const ModularModel& model = *lm.model;
  const SystemSpec system = system_spec_from_relative_gamma(model.system_frf(), std::span(&f.gamma, 1));
  std::vector<std::vector<ModuleSpec>> sets;
  const std::vector<std::string> alphas = f.alpha_sets.empty() ? std::vector<std::string>{"uniform"} : f.alpha_sets;
  for (const auto& a : alphas) {
    SynthesisResult r = synthesize(model, system, parse_alpha(a, model.modules().size()), solver.options());
    if (!r.feasible()) std::cerr << "warning: alpha set '" << a << "' is infeasible at some frequencies\n";
    sets.push_back(std::move(r.module_specs));
  }
  const RegionGrid region = sweep_region(fam, axis_around_nominal(fam, f.x, f.range, f.steps),
                                         axis_around_nominal(fam, f.y, f.range, f.steps), system, sets);
  auto out = open_out(dir / "region.csv");
  write_region_csv(out, region);
  std::cout << "cells " << region.cells() << ", brute-force " << region.brute_count() << ", modular "
            << region.modular_count() << ", area ratio " << region.area_ratio() << '\n';
  if (region.inclusion_violations() > 0) {
    std::cerr << "error: " << region.inclusion_violations()
              << " cells accepted by the module specs fail the system spec\n";
    return exit_error;
  }
  return exit_ok;
}

struct IncrementalFlags {
  std::vector<std::string> vars;
  double gamma_total = 0.5;
  std::size_t iterations = 1;
  std::string alpha;
  bool brute = false;
};

int run_incremental(const ModelSource& src, const IncrementalFlags& f, const SolverFlags& solver,
                    const std::string& out_dir) {
  const LoadedModel lm = load(src);
  if (!lm.family) throw InvalidParameter("incremental needs --builder");
  if (f.vars.empty()) throw InvalidParameter("at least one --var name=limit is required");
  const fs::path dir = prepare_dir(out_dir);
  const ModelFamily& fam = *lm.family;
  std::vector<DesignVariable> vars;
  for (const auto& text : f.vars)
    for (const auto& [name, limit] : parse_assignments(text)) {
      DesignVariable v;
      v.param = fam.index(name);
      v.limit = limit;
      v.direction = limit < fam.nominal[v.param] ? -1.0 : 1.0;
      vars.push_back(v);
    }
  IncrementalOptions opts;
  opts.gamma_total = f.gamma_total;
  opts.iterations = f.iterations;
  opts.synthesis = solver.options();
  if (!f.alpha.empty() && f.alpha != "uniform")
    opts.alpha = parse_alpha(f.alpha, lm.model->modules().size()).alpha;
  const IncrementalResult r = incremental_redesign(fam, vars, opts);
  auto out = open_out(dir / "trajectory.csv");
  write_trajectory_csv(out, fam, vars, r);
  for (const auto& s : r.steps)
    std::cout << "iter " << s.iteration << ": objective " << s.cumulative_objective << ", step margin "
              << s.step_system_margin << ", margin vs original spec " << s.original_system_margin << '\n';
  if (f.brute) {
    BruteForceOptions b;
    b.gamma_total = f.gamma_total;
    b.iterations = f.iterations;
    const IncrementalResult rb = incremental_brute_force(fam, vars, b);
    auto bout = open_out(dir / "trajectory_brute.csv");
    write_trajectory_csv(bout, fam, vars, rb);
    std::cout << "brute-force objective " << rb.final_objective() << '\n';
  }
  if (!r.completed) {
    std::cerr << r.message << '\n';
    return exit_fail;
  }
  return exit_ok;
}

int run_export(const ModelSource& src, const std::string& what, const std::string& format,
               const std::string& out_file, const std::string& model_out) {
  const LoadedModel lm = load(src);
  if (!model_out.empty()) save_model(model_out, {lm.grid, *lm.model});
  if (out_file.empty()) {
    if (model_out.empty()) throw InvalidParameter("--out or --model-out is required");
    return exit_ok;
  }
  const FrfMatrix frf = pick_frf(*lm.model, what);
  if (format == "json") {
    save_frf(out_file, frf);
  } else if (format == "csv") {
    auto f = open_out(out_file);
    write_frf_csv(f, frf);
  } else {
    throw InvalidParameter("--format must be json or csv");
  }
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Modular FRF redesign: module specs from system specs"};
  app.require_subcommand(1);
  std::size_t jobs = 0;
  app.add_option("--jobs", jobs, "worker threads (0: hardware concurrency)")->envname("MODSPEC_JOBS");

  ModelSource src;
  SpecSource spec_src;
  SolverFlags solver;
  std::string out;
  std::string alpha;

  auto* syn = app.add_subcommand("synthesize", "compute module specs from a system spec");
  src.add_options(syn);
  spec_src.add_options(syn);
  solver.add_options(syn);
  syn->add_option("--alpha", alpha, "cost weights per module, comma separated, or uniform");
  syn->add_option("--out", out, "output directory")->required();

  std::string spec_file, candidate, module;
  bool all_rows = false;
  auto* vm = app.add_subcommand("verify-module", "check a module FRF against its module spec");
  src.add_options(vm);
  vm->add_option("--spec", spec_file, "module spec JSON")->required();
  vm->add_option("--candidate", candidate, "candidate FRF or model JSON");
  vm->add_option("--module", module, "module name within a model");
  vm->add_option("--out", out, "verdict CSV file");
  vm->add_flag("--all", all_rows, "print every frequency, not only failures");

  std::string redesigned, redesigned_params;
  auto* vs = app.add_subcommand("verify-system", "check a redesigned system against the system spec");
  src.add_options(vs);
  spec_src.add_options(vs);
  vs->add_option("--redesigned", redesigned, "redesigned model JSON");
  vs->add_option("--redesigned-params", redesigned_params, "builder parameters of the redesign");
  vs->add_option("--out", out, "output directory for verdict.csv and spec_envelope.csv");
  vs->add_flag("--all", all_rows, "print every frequency, not only failures");

  SweepFlags sweep;
  auto* sw = app.add_subcommand("sweep", "brute-force and modular accepted regions over two parameters");
  src.add_options(sw);
  solver.add_options(sw);
  sw->add_option("--x", sweep.x, "first parameter");
  sw->add_option("--y", sweep.y, "second parameter");
  sw->add_option("--range", sweep.range, "relative half width around nominal");
  sw->add_option("--steps", sweep.steps, "cells per axis");
  sw->add_option("--gamma", sweep.gamma, "relative system spec");
  sw->add_option("--alpha", sweep.alpha_sets, "cost weight set (repeatable; union of regions)");
  sw->add_option("--out", out, "output directory")->required();

  IncrementalFlags inc;
  auto* in = app.add_subcommand("incremental", "repeated small-step redesign");
  src.add_options(in);
  solver.add_options(in);
  in->add_option("--var", inc.vars, "design variable name=limit (repeatable)")->required();
  in->add_option("--gamma-total", inc.gamma_total, "total relative budget");
  in->add_option("--iterations", inc.iterations, "number of steps");
  in->add_option("--alpha", inc.alpha, "cost weights per module");
  in->add_flag("--brute", inc.brute, "also run the brute-force comparison");
  in->add_option("--out", out, "output directory")->required();

  std::string what = "system", format = "json", model_out;
  auto* ex = app.add_subcommand("export-frf", "write an FRF or the model itself");
  src.add_options(ex);
  ex->add_option("--what", what, "system, nominal or module:<name>");
  ex->add_option("--format", format, "json or csv");
  ex->add_option("--out", out, "FRF output file");
  ex->add_option("--model-out", model_out, "write the model JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_error;
  }

  try {
    set_default_jobs(jobs);
    if (*syn) return run_synthesize(src, spec_src, solver, alpha, out);
    if (*vm) return run_verify_module(src, spec_file, candidate, module, out, all_rows);
    if (*vs) return run_verify_system(src, spec_src, redesigned, redesigned_params, out, all_rows);
    if (*sw) return run_sweep(src, sweep, solver, out);
    if (*in) return run_incremental(src, inc, solver, out);
    if (*ex) return run_export(src, what, format, out, model_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_error;
  }
  return exit_error;
}
