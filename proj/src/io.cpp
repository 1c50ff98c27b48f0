#include "modspec/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace modspec {

using nlohmann::json;

namespace {

constexpr double grid_match_tol = 1e-9;

// A JSON node plus where it came from, for diagnostics.
struct Node {
  const json& value;
  const std::string& file;
  std::string path;

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(file, path, what); }

  bool has(const char* key) const { return value.is_object() && value.contains(key); }

  Node at(const char* key) const {
    if (!value.is_object()) fail("expected an object");
    auto it = value.find(key);
    if (it == value.end()) throw ParseError(file, path + "/" + key, "missing");
    return {*it, file, path + "/" + key};
  }

  Node at(std::size_t i) const { return {value.at(i), file, path + "/" + std::to_string(i)}; }

  std::size_t size() const {
    if (!value.is_array()) fail("expected an array");
    return value.size();
  }

  double number() const {
    if (!value.is_number()) fail("expected a number");
    return value.get<double>();
  }

  std::string string() const {
    if (!value.is_string()) fail("expected a string");
    return value.get<std::string>();
  }

  std::vector<double> vector() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i).number();
    return out;
  }

  Eigen::MatrixXd matrix() const {
    const std::size_t rows = size();
    std::size_t cols = 0;
    if (rows > 0) cols = at(std::size_t{0}).size();
    Eigen::MatrixXd out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      const Node row = at(r);
      if (row.size() != cols) row.fail("ragged matrix row");
      for (std::size_t c = 0; c < cols; ++c) out(r, c) = row.at(c).number();
    }
    return out;
  }
};

json to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError(file.string(), "", "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source, "", e.what());
  }
}

void write_file(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  out << text;
  if (!out) throw Error("cannot write " + file.string());
}

std::vector<double> grid_hz(const FrequencyGrid& g) {
  std::vector<double> hz(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) hz[i] = g.hz(i);
  return hz;
}

bool hz_match(std::span<const double> hz, const FrequencyGrid& g) {
  if (hz.size() != g.size()) return false;
  for (std::size_t i = 0; i < hz.size(); ++i)
    if (std::abs(hz[i] - g.hz(i)) > grid_match_tol * std::max(std::abs(hz[i]), 1e-300)) return false;
  return true;
}

FrequencyGrid resolve_grid(const Node& node, const FrequencyGrid* reference) {
  const std::vector<double> hz = node.vector();
  if (reference && hz_match(hz, *reference)) return *reference;
  try {
    return FrequencyGrid::from_hz(hz);
  } catch (const InvalidParameter& e) {
    node.fail(e.what());
  }
}

// {"omega":[Hz], "real":[[[...]]], "imag":[[[...]]]}
FrfMatrix parse_frf(const Node& node, const FrequencyGrid* reference) {
  const FrequencyGrid grid = resolve_grid(node.at("omega"), reference);
  const Node re = node.at("real");
  const Node im = node.at("imag");
  if (re.size() != grid.size() || im.size() != grid.size())
    node.fail("real/imag need one matrix per frequency");
  std::vector<Eigen::MatrixXcd> samples(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Eigen::MatrixXd a = re.at(i).matrix();
    const Eigen::MatrixXd b = im.at(i).matrix();
    if (a.rows() != b.rows() || a.cols() != b.cols()) im.at(i).fail("shape differs from real part");
    samples[i] = a.cast<Complex>() + Complex(0.0, 1.0) * b.cast<Complex>();
  }
  try {
    return FrfMatrix(grid, std::move(samples));
  } catch (const Error& e) {
    node.fail(e.what());
  }
}

json frf_json(const FrfMatrix& frf) {
  json re = json::array();
  json im = json::array();
  for (const auto& s : frf.samples()) {
    re.push_back(to_json(s.real()));
    im.push_back(to_json(s.imag()));
  }
  return {{"omega", grid_hz(frf.grid())}, {"real", std::move(re)}, {"imag", std::move(im)}};
}

GridDescriptor parse_grid(const Node& node) {
  const std::string type = node.at("type").string();
  if (type == "logspace") {
    LogspaceRange g;
    g.f_min_hz = node.at("f_min_hz").number();
    g.f_max_hz = node.at("f_max_hz").number();
    const double n = node.at("n").number();
    if (!(n >= 0.0) || n != std::floor(n)) node.at("n").fail("expected a nonnegative integer");
    g.n = static_cast<std::size_t>(n);
    return {g};
  }
  if (type == "list") return {node.at("omega_hz").vector()};
  node.at("type").fail("unknown grid type '" + type + "'");
}

json grid_json(const GridDescriptor& d) {
  if (const auto* g = std::get_if<LogspaceRange>(&d.form))
    return {{"type", "logspace"}, {"f_min_hz", g->f_min_hz}, {"f_max_hz", g->f_max_hz}, {"n", g->n}};
  return {{"type", "list"}, {"omega_hz", std::get<std::vector<double>>(d.form)}};
}

// Per-frequency diagonals; a single row is broadcast over the grid.
std::vector<Eigen::VectorXd> parse_diagonals(const Node& node, std::size_t grid_size) {
  const std::size_t rows = node.size();
  if (rows != grid_size && rows != 1) node.fail("need one row per frequency or a single row");
  std::vector<Eigen::VectorXd> out(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    const std::vector<double> v = node.at(rows == 1 ? 0 : i).vector();
    out[i] = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
  }
  return out;
}

json diagonals_json(const DiagonalWeight& w) {
  json out = json::array();
  for (const auto& v : w.values()) out.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  return out;
}

// Piecewise linear in Hz, constant beyond the ends.
std::vector<double> interpolate(std::span<const double> x, std::span<const double> y,
                                const FrequencyGrid& grid) {
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double f = grid.hz(i);
    if (f <= x.front()) {
      out[i] = y.front();
    } else if (f >= x.back()) {
      out[i] = y.back();
    } else {
      const auto hi = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), f) - x.begin());
      const double t = (f - x[hi - 1]) / (x[hi] - x[hi - 1]);
      out[i] = y[hi - 1] + t * (y[hi] - y[hi - 1]);
    }
  }
  return out;
}

template <typename Fn>
auto rethrow_at(const Node& node, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    node.fail(e.what());
  }
}

}  // namespace

FrequencyGrid GridDescriptor::grid() const {
  if (const auto* g = std::get_if<LogspaceRange>(&form)) return g->grid();
  return FrequencyGrid::from_hz(std::get<std::vector<double>>(form));
}

GridDescriptor describe_grid(const FrequencyGrid& grid) { return {grid_hz(grid)}; }

ModelDocument parse_model(const std::string& text, const std::string& source) {
  const json doc = parse_text(text, source);
  const Node root{doc, source, ""};
  const Node grid_node = root.at("grid");
  const GridDescriptor descriptor = parse_grid(grid_node);
  const FrequencyGrid grid = rethrow_at(grid_node, [&] { return descriptor.grid(); });

  const Node mods = root.at("modules");
  std::vector<Module> modules;
  for (std::size_t j = 0; j < mods.size(); ++j) {
    const Node m = mods.at(j);
    std::string name = m.at("name").string();
    if (m.has("frf")) {
      const Node f = m.at("frf");
      FrfMatrix frf = parse_frf(f, &grid);
      if (!(frf.grid() == grid)) f.at("omega").fail("does not match the model grid");
      modules.push_back({std::move(name), std::move(frf)});
    } else {
      modules.push_back({std::move(name), rethrow_at(m, [&] {
                           return SecondOrderModel(m.at("M").matrix(), m.at("D").matrix(), m.at("K").matrix(),
                                                   m.at("B").matrix(), m.at("C").matrix());
                         })});
    }
  }

  const Node c = root.at("coupling");
  std::vector<ModuleDims> dims;
  for (const auto& m : modules) dims.push_back(m.dims());
  InterconnectionStructure coupling = rethrow_at(c, [&] {
    return InterconnectionStructure(c.at("k_bb").matrix(), c.at("k_ba").matrix(),
                                    c.at("k_ab").matrix(), dims);
  });
  return {descriptor, rethrow_at(root, [&] {
            return ModularModel(grid, std::move(modules), std::move(coupling));
          })};
}

ModelDocument load_model(const std::filesystem::path& file) {
  return parse_model(read_file(file), file.string());
}

std::string dump_model(const ModelDocument& doc) {
  json mods = json::array();
  for (const auto& m : doc.model.modules()) {
    json j = {{"name", m.name}};
    if (const auto* so = m.second_order()) {
      j["M"] = to_json(so->mass());
      j["D"] = to_json(so->damping());
      j["K"] = to_json(so->stiffness());
      j["B"] = to_json(so->input_map());
      j["C"] = to_json(so->output_map());
    } else {
      j["frf"] = frf_json(std::get<FrfMatrix>(m.source));
    }
    mods.push_back(std::move(j));
  }
  const auto& k = doc.model.coupling();
  const json out = {{"modules", std::move(mods)},
                    {"coupling", {{"k_bb", to_json(k.k_bb())}, {"k_ba", to_json(k.k_ba())}, {"k_ab", to_json(k.k_ab())}}},
                    {"grid", grid_json(doc.grid)}};
  return out.dump(1) + "\n";
}

void save_model(const std::filesystem::path& file, const ModelDocument& doc) {
  write_file(file, dump_model(doc));
}

SystemSpec load_system_spec(const std::filesystem::path& file, const FrfMatrix& g_a) {
  const std::string name = file.string();
  const json doc = parse_text(read_file(file), name);
  const Node root{doc, name, ""};
  if (root.has("type") && root.at("type").string() != "system") root.at("type").fail("expected \"system\"");
  const FrequencyGrid& grid = g_a.grid();
  if (grid.empty()) throw InvalidParameter("empty frequency grid");

  if (root.has("relative_gamma")) {
    const Node rg = root.at("relative_gamma");
    const std::vector<double> gamma = rg.at("gamma").vector();
    std::vector<double> hz = rg.has("omega_hz") ? rg.at("omega_hz").vector() : std::vector<double>{};
    if (gamma.empty()) rg.at("gamma").fail("empty");
    if (gamma.size() == 1) return rethrow_at(rg, [&] { return system_spec_from_relative_gamma(g_a, gamma); });
    if (hz.size() != gamma.size()) rg.fail("omega_hz and gamma differ in length");
    for (std::size_t i = 1; i < hz.size(); ++i)
      if (!(hz[i] > hz[i - 1])) rg.at("omega_hz").fail("must be strictly increasing");
    const std::vector<double> g = interpolate(hz, gamma, grid);
    return rethrow_at(rg, [&] { return system_spec_from_relative_gamma(g_a, g); });
  }
  const Node w = root.at("weights");
  const Node wv = w.at("v");
  const Node ww = w.at("w");
  DiagonalWeight v_a = rethrow_at(wv, [&] {
    return DiagonalWeight(grid, parse_diagonals(wv, grid.size()), WeightSide::Output);
  });
  DiagonalWeight w_a = rethrow_at(ww, [&] {
    return DiagonalWeight(grid, parse_diagonals(ww, grid.size()), WeightSide::Input);
  });
  return rethrow_at(w, [&] { return SystemSpec(g_a, std::move(v_a), std::move(w_a)); });
}

ModuleSpecDocument load_module_spec(const std::filesystem::path& file,
                                    const std::optional<FrfMatrix>& baseline,
                                    const FrequencyGrid* reference) {
  const std::string name = file.string();
  const json doc = parse_text(read_file(file), name);
  const Node root{doc, name, ""};
  if (root.has("type") && root.at("type").string() != "module") root.at("type").fail("expected \"module\"");
  std::string module = root.has("module") ? root.at("module").string() : std::string{};

  FrfMatrix base;
  if (root.has("baseline")) {
    base = parse_frf(root.at("baseline"), reference ? reference : baseline ? &baseline->grid() : nullptr);
  } else if (baseline) {
    base = *baseline;
  } else {
    root.fail("no baseline FRF in the file and none supplied");
  }
  const FrequencyGrid& grid = base.grid();
  const Node w = root.at("weights");
  const Node wn = w.at("w");
  const Node vn = w.at("v");
  DiagonalWeight ww = rethrow_at(wn, [&] {
    return DiagonalWeight(grid, parse_diagonals(wn, grid.size()), WeightSide::Output);
  });
  DiagonalWeight vv = rethrow_at(vn, [&] {
    return DiagonalWeight(grid, parse_diagonals(vn, grid.size()), WeightSide::Input);
  });
  return {std::move(module), rethrow_at(w, [&] { return ModuleSpec(base, std::move(ww), std::move(vv)); })};
}

void save_module_spec(const std::filesystem::path& file, const std::string& module,
                      const ModuleSpec& spec) {
  const json out = {{"type", "module"},
                    {"module", module},
                    {"weights", {{"w", diagonals_json(spec.w())}, {"v", diagonals_json(spec.v())}}},
                    {"baseline", frf_json(spec.baseline())}};
  write_file(file, out.dump(1) + "\n");
}

FrfMatrix load_frf(const std::filesystem::path& file, const FrequencyGrid* reference) {
  const std::string name = file.string();
  const json doc = parse_text(read_file(file), name);
  const Node root{doc, name, ""};
  return parse_frf(root.has("frf") ? root.at("frf") : root, reference);
}

void save_frf(const std::filesystem::path& file, const FrfMatrix& frf) {
  write_file(file, json{{"frf", frf_json(frf)}}.dump(1) + "\n");
}

namespace {

struct CsvPrecision {
  explicit CsvPrecision(std::ostream& os) : os_(os), old_(os.precision(17)) {}
  ~CsvPrecision() { os_.precision(old_); }
  std::ostream& os_;
  std::streamsize old_;
};

}  // namespace

void write_verdict_csv(std::ostream& os, const FrequencyGrid& grid, const SpecCheck& check) {
  CsvPrecision p(os);
  os << "omega_hz,margin,pass\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
    os << grid.hz(i) << ',' << check.margin[i] << ',' << (check.pass[i] ? 1 : 0) << '\n';
}

void write_trace_csv(std::ostream& os, const SynthesisTrace& trace) {
  CsvPrecision p(os);
  os << "omega_hz,iter,beta,delta\n";
  for (const auto& pt : trace.points)
    for (std::size_t k = 0; k < pt.iterations.size(); ++k)
      os << rad_to_hz(pt.omega) << ',' << k + 1 << ',' << pt.iterations[k].beta << ','
         << pt.iterations[k].delta << '\n';
}

void write_weight_table_csv(std::ostream& os, const ModuleSpec& spec) {
  CsvPrecision p(os);
  os << "omega_hz";
  for (Index r = 0; r < spec.w().dim(); ++r) os << ",w" << r;
  for (Index r = 0; r < spec.v().dim(); ++r) os << ",v" << r;
  os << '\n';
  const auto& g = spec.baseline().grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    os << g.hz(i);
    for (Index r = 0; r < spec.w().dim(); ++r) os << ',' << spec.w()[i](r);
    for (Index r = 0; r < spec.v().dim(); ++r) os << ',' << spec.v()[i](r);
    os << '\n';
  }
}

void write_region_csv(std::ostream& os, const RegionGrid& region) {
  CsvPrecision p(os);
  os << "p1,p2,brute_pass,modular_pass\n";
  const std::size_t ny = region.y.values.size();
  for (std::size_t ix = 0; ix < region.x.values.size(); ++ix)
    for (std::size_t iy = 0; iy < ny; ++iy) {
      const std::size_t c = ix * ny + iy;
      os << region.x.values[ix] << ',' << region.y.values[iy] << ',' << int(region.brute_pass[c]) << ','
         << int(region.modular_pass[c]) << '\n';
    }
}

void write_trajectory_csv(std::ostream& os, const ModelFamily& family,
                          std::span<const DesignVariable> variables, const IncrementalResult& result) {
  CsvPrecision p(os);
  os << "iter,param,value,cum_objective\n";
  for (const auto& v : variables)
    os << 0 << ',' << family.param_names[v.param] << ',' << family.nominal[v.param] << ',' << 0.0 << '\n';
  for (const auto& s : result.steps)
    for (const auto& v : variables)
      os << s.iteration << ',' << family.param_names[v.param] << ',' << s.params[v.param] << ','
         << s.cumulative_objective << '\n';
}

void write_envelope_csv(std::ostream& os, const SystemSpec& spec, const FrfMatrix& g_a_hat) {
  const FrfMatrix e = error_frf(g_a_hat, spec.baseline());
  CsvPrecision p(os);
  os << "omega_hz,|G_A|,disc_radius,|G_A_hat|,|E_A|\n";
  const bool siso = spec.baseline().is_siso();
  for (std::size_t i = 0; i < e.size(); ++i) {
    os << e.grid().hz(i) << ',' << spectral_norm(spec.baseline()[i]) << ',';
    if (siso) os << spec_disc_radius(spec, i);
    else os << "nan";
    os << ',' << spectral_norm(g_a_hat[i]) << ',' << spectral_norm(e[i]) << '\n';
  }
}

void write_frf_csv(std::ostream& os, const FrfMatrix& frf) {
  CsvPrecision p(os);
  os << "omega_hz";
  for (Index r = 0; r < frf.rows(); ++r)
    for (Index c = 0; c < frf.cols(); ++c) os << ",re_" << r << '_' << c << ",im_" << r << '_' << c;
  os << '\n';
  for (std::size_t i = 0; i < frf.size(); ++i) {
    os << frf.grid().hz(i);
    for (Index r = 0; r < frf.rows(); ++r)
      for (Index c = 0; c < frf.cols(); ++c) os << ',' << frf[i](r, c).real() << ',' << frf[i](r, c).imag();
    os << '\n';
  }
}

}  // namespace modspec
