#include "modspec/spec.hpp"

#include <algorithm>
#include <cmath>


namespace modspec {

DiagonalWeight::DiagonalWeight(FrequencyGrid grid, std::vector<Eigen::VectorXd> values,
                               WeightSide side)
    : grid_(std::move(grid)), values_(std::move(values)), side_(side) {
  if (values_.size() != grid_.size())
    throw GridMismatch("weight has " + std::to_string(values_.size()) +
                       " entries for a grid of " + std::to_string(grid_.size()));
  if (!values_.empty()) dim_ = values_.front().size();
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i].size() != dim_) throw ShapeMismatch("weight dimension changes across the grid");
    if (!values_[i].allFinite() || !(values_[i].array() > 0.0).all())
      throw InvalidParameter("weight entries must be positive and finite (grid index " +
                             std::to_string(i) + ")");
  }
}

DiagonalWeight DiagonalWeight::uniform(FrequencyGrid grid, WeightSide side, Index dim,
                                       std::span<const double> value) {
  if (value.size() != grid.size()) throw GridMismatch("uniform weight needs one value per grid point");
  std::vector<Eigen::VectorXd> values;
  values.reserve(value.size());
  for (double v : value) values.push_back(Eigen::VectorXd::Constant(dim, v));
  return DiagonalWeight(std::move(grid), std::move(values), side);
}

DiagonalWeight DiagonalWeight::constant(FrequencyGrid grid, WeightSide side, Index dim,
                                        double value) {
  std::vector<double> v(grid.size(), value);
  return uniform(std::move(grid), side, dim, v);
}

bool SpecCheck::all_pass() const {
  return std::all_of(pass.begin(), pass.end(), [](bool p) { return p; });
}

double SpecCheck::max_margin() const {
  return margin.empty() ? 0.0 : *std::max_element(margin.begin(), margin.end());
}

namespace {

void require_weight(const DiagonalWeight& w, const FrfMatrix& baseline, WeightSide side,
                    Index dim, const char* what) {
  if (!(w.grid() == baseline.grid()))
    throw GridMismatch(std::string(what) + " is not sampled on the baseline grid");
  if (w.side() != side) throw ShapeMismatch(std::string(what) + " is on the wrong side");
  if (w.dim() != dim)
    throw ShapeMismatch(std::string(what) + " has dimension " + std::to_string(w.dim()) +
                        ", expected " + std::to_string(dim));
}

std::vector<double> broadcast(std::span<const double> gamma, std::size_t n) {
  if (gamma.size() == 1) return std::vector<double>(n, gamma.front());
  if (gamma.size() != n) throw GridMismatch("gamma needs one value per grid point");
  return {gamma.begin(), gamma.end()};
}

}  // namespace

SystemSpec::SystemSpec(FrfMatrix baseline, DiagonalWeight v_a, DiagonalWeight w_a)
    : baseline_(std::move(baseline)), v_a_(std::move(v_a)), w_a_(std::move(w_a)) {
  require_weight(v_a_, baseline_, WeightSide::Output, baseline_.rows(), "V_A");
  require_weight(w_a_, baseline_, WeightSide::Input, baseline_.cols(), "W_A");
}

double SystemSpec::margin(std::size_t i, const Eigen::MatrixXcd& error) const {
  return spectral_norm(v_a_[i].asDiagonal() * error * w_a_[i].asDiagonal());
}

ModuleSpec::ModuleSpec(FrfMatrix baseline, DiagonalWeight w, DiagonalWeight v)
    : baseline_(std::move(baseline)), w_(std::move(w)), v_(std::move(v)) {
  require_weight(w_, baseline_, WeightSide::Output, baseline_.rows(), "W");
  require_weight(v_, baseline_, WeightSide::Input, baseline_.cols(), "V");
}

double ModuleSpec::margin(std::size_t i, const Eigen::MatrixXcd& error) const {
  const Eigen::VectorXd w_inv = w_[i].cwiseInverse();
  const Eigen::VectorXd v_inv = v_[i].cwiseInverse();
  return spectral_norm(w_inv.asDiagonal() * error * v_inv.asDiagonal());
}

SystemSpec system_spec_from_relative_gamma(const FrfMatrix& g_a, std::span<const double> gamma) {
  const auto g = broadcast(gamma, g_a.size());
  std::vector<double> weight(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(g[i] > 0.0) || !std::isfinite(g[i])) throw InvalidParameter("gamma must be positive");
    const double norm = spectral_norm(g_a[i]);
    if (!(norm > 0.0))
      throw ZeroBaselineNorm("baseline FRF norm is zero at omega = " +
                             std::to_string(g_a.grid()[i]) + " rad/s");
    weight[i] = 1.0 / std::sqrt(g[i] * norm);
  }
  return SystemSpec(g_a, DiagonalWeight::uniform(g_a.grid(), WeightSide::Output, g_a.rows(), weight),
                    DiagonalWeight::uniform(g_a.grid(), WeightSide::Input, g_a.cols(), weight));
}

SystemSpec system_spec_from_absolute_gamma(const FrfMatrix& g_a, std::span<const double> gamma) {
  const auto g = broadcast(gamma, g_a.size());
  std::vector<double> weight(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(g[i] > 0.0) || !std::isfinite(g[i])) throw InvalidParameter("gamma must be positive");
    weight[i] = 1.0 / std::sqrt(g[i]);
  }
  return SystemSpec(g_a, DiagonalWeight::uniform(g_a.grid(), WeightSide::Output, g_a.rows(), weight),
                    DiagonalWeight::uniform(g_a.grid(), WeightSide::Input, g_a.cols(), weight));
}

SpecCheck check_system_spec(const SystemSpec& spec, const FrfMatrix& g_a_hat) {
  require_aligned(spec.baseline(), g_a_hat);
  SpecCheck out;
  out.margin.resize(g_a_hat.size());
  out.pass.resize(g_a_hat.size());
  for (std::size_t i = 0; i < g_a_hat.size(); ++i) {
    out.margin[i] = spec.margin(i, spec.baseline()[i] - g_a_hat[i]);
    out.pass[i] = out.margin[i] < 1.0;
  }
  return out;
}

SpecCheck check_module_spec(const ModuleSpec& spec, const FrfMatrix& g_j_hat) {
  require_aligned(spec.baseline(), g_j_hat);
  SpecCheck out;
  out.margin.resize(g_j_hat.size());
  out.pass.resize(g_j_hat.size());
  for (std::size_t i = 0; i < g_j_hat.size(); ++i) {
    out.margin[i] = spec.margin(i, g_j_hat[i] - spec.baseline()[i]);
    out.pass[i] = out.margin[i] <= 1.0;
  }
  return out;
}

double spec_disc_radius(const SystemSpec& spec, std::size_t grid_index) {
  if (!spec.baseline().is_siso()) throw NotSiso("disc radius is only defined for SISO specs");
  return 1.0 / (spec.v_a()[grid_index](0) * spec.w_a()[grid_index](0));
}

double spec_disc_radius(const ModuleSpec& spec, std::size_t grid_index) {
  if (!spec.baseline().is_siso()) throw NotSiso("disc radius is only defined for SISO specs");
  return spec.w()[grid_index](0) * spec.v()[grid_index](0);
}

}  // namespace modspec
