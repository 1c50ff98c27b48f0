#pragma once

#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "modspec/errors.hpp"

namespace modspec {

using Complex = std::complex<double>;
using Index = Eigen::Index;

inline constexpr double hz_to_rad(double f_hz) { return 2.0 * std::numbers::pi * f_hz; }
inline constexpr double rad_to_hz(double omega) { return omega / (2.0 * std::numbers::pi); }

/// Ordered set of angular frequencies (rad/s), strictly increasing, >= 0.
class FrequencyGrid {
 public:
  FrequencyGrid() = default;
  explicit FrequencyGrid(std::vector<double> omega);

  /// n log-spaced points from f_min_hz to f_max_hz inclusive, stored in rad/s.
  static FrequencyGrid logspace_hz(double f_min_hz, double f_max_hz, std::size_t n);
  static FrequencyGrid from_hz(std::span<const double> f_hz);

  std::size_t size() const { return omega_.size(); }
  bool empty() const { return omega_.empty(); }
  double operator[](std::size_t i) const { return omega_[i]; }
  double hz(std::size_t i) const { return rad_to_hz(omega_[i]); }
  const std::vector<double>& omega() const { return omega_; }

  FrequencyGrid subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

 private:
  std::vector<double> omega_;
};

/// Sampled complex p x m transfer matrix over a frequency grid.
class FrfMatrix {
 public:
  FrfMatrix() = default;
  FrfMatrix(FrequencyGrid grid, std::vector<Eigen::MatrixXcd> samples,
            std::vector<std::string> output_labels = {},
            std::vector<std::string> input_labels = {});

  const FrequencyGrid& grid() const { return grid_; }
  std::size_t size() const { return samples_.size(); }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  const Eigen::MatrixXcd& operator[](std::size_t i) const { return samples_[i]; }
  const std::vector<Eigen::MatrixXcd>& samples() const { return samples_; }
  const std::vector<std::string>& output_labels() const { return output_labels_; }
  const std::vector<std::string>& input_labels() const { return input_labels_; }

  bool is_siso() const { return rows_ == 1 && cols_ == 1; }

 private:
  FrequencyGrid grid_;
  std::vector<Eigen::MatrixXcd> samples_;
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<std::string> output_labels_;
  std::vector<std::string> input_labels_;
};

/// Throws GridMismatch / ShapeMismatch unless a and b are aligned.
void require_aligned(const FrfMatrix& a, const FrfMatrix& b);

/// Grid-aligned difference `redesigned - original`.
FrfMatrix error_frf(const FrfMatrix& redesigned, const FrfMatrix& original);

/// Largest singular value.
template <typename Derived>
double spectral_norm(const Eigen::MatrixBase<Derived>& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() == 1 && a.cols() == 1) return std::abs(a(0, 0));
  return Eigen::JacobiSVD<typename Derived::PlainObject>(a).singularValues()(0);
}

/// M q'' + D q' + K q = B u,  y = C q.
class SecondOrderModel {
 public:
  SecondOrderModel(Eigen::MatrixXd mass, Eigen::MatrixXd damping,
                   Eigen::MatrixXd stiffness, Eigen::MatrixXd input_map,
                   Eigen::MatrixXd output_map);

  /// Scalar mass-spring-damper with unit force input and position output.
  static SecondOrderModel scalar(double m, double d, double k);

  const Eigen::MatrixXd& mass() const { return mass_; }
  const Eigen::MatrixXd& damping() const { return damping_; }
  const Eigen::MatrixXd& stiffness() const { return stiffness_; }
  const Eigen::MatrixXd& input_map() const { return input_map_; }
  const Eigen::MatrixXd& output_map() const { return output_map_; }

  Index dofs() const { return mass_.rows(); }
  Index inputs() const { return input_map_.cols(); }
  Index outputs() const { return output_map_.rows(); }

  friend bool operator==(const SecondOrderModel& a, const SecondOrderModel& b) {
    return a.mass_ == b.mass_ && a.damping_ == b.damping_ && a.stiffness_ == b.stiffness_ &&
           a.input_map_ == b.input_map_ && a.output_map_ == b.output_map_;
  }

 private:
  Eigen::MatrixXd mass_;
  Eigen::MatrixXd damping_;
  Eigen::MatrixXd stiffness_;
  Eigen::MatrixXd input_map_;
  Eigen::MatrixXd output_map_;
};

struct ModuleDims {
  Index outputs = 0;  // p_j
  Index inputs = 0;   // m_j
  friend bool operator==(const ModuleDims&, const ModuleDims&) = default;
};

/// K = [K_BB K_BA; K_AB 0] with
///   u_B = K_BB y_B + K_BA u_A,   y_A = K_AB y_B.
class InterconnectionStructure {
 public:
  InterconnectionStructure() = default;
  InterconnectionStructure(Eigen::MatrixXd k_bb, Eigen::MatrixXd k_ba, Eigen::MatrixXd k_ab,
                           std::vector<ModuleDims> module_dims);

  const Eigen::MatrixXd& k_bb() const { return k_bb_; }
  const Eigen::MatrixXd& k_ba() const { return k_ba_; }
  const Eigen::MatrixXd& k_ab() const { return k_ab_; }
  const std::vector<ModuleDims>& module_dims() const { return module_dims_; }

  std::size_t module_count() const { return module_dims_.size(); }
  Index total_outputs() const { return k_bb_.cols(); }  // sum p_j
  Index total_inputs() const { return k_bb_.rows(); }   // sum m_j
  Index external_inputs() const { return k_ba_.cols(); }   // m_A
  Index external_outputs() const { return k_ab_.rows(); }  // p_A

  Eigen::MatrixXd full() const;

  friend bool operator==(const InterconnectionStructure& a, const InterconnectionStructure& b) {
    return a.k_bb_ == b.k_bb_ && a.k_ba_ == b.k_ba_ && a.k_ab_ == b.k_ab_ &&
           a.module_dims_ == b.module_dims_;
  }

 private:
  Eigen::MatrixXd k_bb_;
  Eigen::MatrixXd k_ba_;
  Eigen::MatrixXd k_ab_;
  std::vector<ModuleDims> module_dims_;
};

struct ClosureOptions {
  /// Reciprocal condition number of (I - K_BB G_B) below which the
  /// interconnection is rejected.
  double min_rcond = 1e-12;
};

FrfMatrix eval_second_order_frf(const SecondOrderModel& model, const FrequencyGrid& grid);

FrfMatrix block_diag(std::span<const FrfMatrix> frfs);

/// K_AB G_B (I - K_BB G_B)^-1 K_BA at every grid point.
FrfMatrix assemble_system_frf(const FrfMatrix& g_b, const InterconnectionStructure& k,
                              const ClosureOptions& options = {});

/// The nominal operator N mapping (module error outputs, u_A) to
/// (module error inputs, y_A):
///   N = [ K_BB (I - G_B K_BB)^-1   (I - K_BB G_B)^-1 K_BA ]
///       [ K_AB (I - G_B K_BB)^-1   0                      ]
/// Shape (sum m_j + p_A) x (sum p_j + m_A).
FrfMatrix nominal_system(const FrfMatrix& g_b, const InterconnectionStructure& k,
                         const ClosureOptions& options = {});

/// Spring couplings between co-located channels: for every pair (a, b)
/// adds -k at (a,a), (b,b) and +k at (a,b), (b,a) of a channels x channels
/// K_BB contribution.
Eigen::MatrixXd stiff_coupling(double k_value, std::span<const std::pair<Index, Index>> pairs,
                               Index channels);

}  // namespace modspec
