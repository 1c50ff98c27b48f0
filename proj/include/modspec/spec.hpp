#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "modspec/frf.hpp"

namespace modspec {

/// Which side of the error FRF a weight multiplies: Output weights have
/// the row dimension (left factor), Input weights the column dimension.
enum class WeightSide { Output, Input };

/// Positive diagonal matrix per grid point, stored as its diagonal.
class DiagonalWeight {
 public:
  DiagonalWeight() = default;
  DiagonalWeight(FrequencyGrid grid, std::vector<Eigen::VectorXd> values, WeightSide side);

  /// value(i) * I_dim at each grid point.
  static DiagonalWeight uniform(FrequencyGrid grid, WeightSide side, Index dim,
                                std::span<const double> value);
  static DiagonalWeight constant(FrequencyGrid grid, WeightSide side, Index dim, double value);

  const FrequencyGrid& grid() const { return grid_; }
  WeightSide side() const { return side_; }
  Index dim() const { return dim_; }
  std::size_t size() const { return values_.size(); }
  const Eigen::VectorXd& operator[](std::size_t i) const { return values_[i]; }
  const std::vector<Eigen::VectorXd>& values() const { return values_; }

 private:
  FrequencyGrid grid_;
  std::vector<Eigen::VectorXd> values_;
  WeightSide side_ = WeightSide::Output;
  Index dim_ = 0;
};

/// Per-frequency verdicts together with the weighted-norm margins.
struct SpecCheck {
  std::vector<double> margin;
  std::vector<bool> pass;

  bool all_pass() const;
  double max_margin() const;
};

/// Allowed set  || V_A (G_A - G_A_hat) W_A || < 1  at every grid point.
/// V_A is output-side (p_A), W_A input-side (m_A).
class SystemSpec {
 public:
  SystemSpec(FrfMatrix baseline, DiagonalWeight v_a, DiagonalWeight w_a);

  const FrfMatrix& baseline() const { return baseline_; }
  const DiagonalWeight& v_a() const { return v_a_; }
  const DiagonalWeight& w_a() const { return w_a_; }

  double margin(std::size_t i, const Eigen::MatrixXcd& error) const;

 private:
  FrfMatrix baseline_;
  DiagonalWeight v_a_;
  DiagonalWeight w_a_;
};

/// Allowed set  || W^-1 (G_hat - G) V^-1 || <= 1  at every grid point.
/// W is output-side (p_j), V input-side (m_j); note the inverse weights.
class ModuleSpec {
 public:
  ModuleSpec(FrfMatrix baseline, DiagonalWeight w, DiagonalWeight v);

  const FrfMatrix& baseline() const { return baseline_; }
  const DiagonalWeight& w() const { return w_; }
  const DiagonalWeight& v() const { return v_; }

  double margin(std::size_t i, const Eigen::MatrixXcd& error) const;

 private:
  FrfMatrix baseline_;
  DiagonalWeight w_;
  DiagonalWeight v_;
};

/// V_A = W_A = (gamma ||G_A||)^-1/2 I, i.e. ||G_A - G_A_hat|| / ||G_A|| < gamma.
/// `gamma` holds one value per grid point, or a single value for all.
SystemSpec system_spec_from_relative_gamma(const FrfMatrix& g_a, std::span<const double> gamma);

/// V_A = W_A = gamma^-1/2 I, i.e. ||G_A - G_A_hat|| < gamma.
SystemSpec system_spec_from_absolute_gamma(const FrfMatrix& g_a, std::span<const double> gamma);

SpecCheck check_system_spec(const SystemSpec& spec, const FrfMatrix& g_a_hat);
SpecCheck check_module_spec(const ModuleSpec& spec, const FrfMatrix& g_j_hat);

/// Radius of the allowed disc around G(i w) for SISO specs:
/// 1 / (V_A W_A) for system specs, W V for module specs.
double spec_disc_radius(const SystemSpec& spec, std::size_t grid_index);
double spec_disc_radius(const ModuleSpec& spec, std::size_t grid_index);

}  // namespace modspec
