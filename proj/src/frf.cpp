#include "modspec/frf.hpp"

#include <cmath>
#include <sstream>

#include "modspec/parallel.hpp"

namespace modspec {

namespace {

constexpr double kSymmetryTol = 1e-10;
constexpr double kMaxMassCondition = 1e14;
constexpr double kSingularRcond = 1e-14;

std::string shape_str(Index r, Index c) {
  std::ostringstream os;
  os << r << "x" << c;
  return os.str();
}

bool is_symmetric(const Eigen::MatrixXd& a) {
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= kSymmetryTol * scale;
}

void require_psd(const Eigen::MatrixXd& a, const char* name) {
  if (!is_symmetric(a)) throw InvalidParameter(std::string(name) + " matrix is not symmetric");
  if (a.size() == 0) return;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < -kSymmetryTol * scale)
    throw InvalidParameter(std::string(name) + " matrix is not positive semidefinite");
}

}  // namespace

FrequencyGrid::FrequencyGrid(std::vector<double> omega) : omega_(std::move(omega)) {
  for (std::size_t i = 0; i < omega_.size(); ++i) {
    if (!std::isfinite(omega_[i]) || omega_[i] < 0.0)
      throw InvalidParameter("frequency grid point " + std::to_string(i) +
                             " is negative or not finite");
    if (i > 0 && !(omega_[i] > omega_[i - 1]))
      throw InvalidParameter("frequency grid is not strictly increasing at index " +
                             std::to_string(i));
  }
}

FrequencyGrid FrequencyGrid::logspace_hz(double f_min_hz, double f_max_hz, std::size_t n) {
  if (n == 0) return FrequencyGrid{};
  if (!(f_min_hz > 0.0) || !(f_max_hz >= f_min_hz))
    throw InvalidParameter("logspace grid needs 0 < f_min_hz <= f_max_hz");
  if (n > 1 && f_max_hz == f_min_hz)
    throw InvalidParameter("logspace grid with n > 1 needs f_min_hz < f_max_hz");
  std::vector<double> omega(n);
  const double a = std::log10(f_min_hz);
  const double b = std::log10(f_max_hz);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    omega[i] = hz_to_rad(std::pow(10.0, a + t * (b - a)));
  }
  return FrequencyGrid(std::move(omega));
}

FrequencyGrid FrequencyGrid::from_hz(std::span<const double> f_hz) {
  std::vector<double> omega;
  omega.reserve(f_hz.size());
  for (double f : f_hz) omega.push_back(hz_to_rad(f));
  return FrequencyGrid(std::move(omega));
}

FrequencyGrid FrequencyGrid::subset(std::span<const std::size_t> indices) const {
  std::vector<double> omega;
  omega.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= omega_.size()) throw IndexOutOfRange("grid subset index out of range");
    omega.push_back(omega_[i]);
  }
  return FrequencyGrid(std::move(omega));
}

FrfMatrix::FrfMatrix(FrequencyGrid grid, std::vector<Eigen::MatrixXcd> samples,
                     std::vector<std::string> output_labels,
                     std::vector<std::string> input_labels)
    : grid_(std::move(grid)),
      samples_(std::move(samples)),
      output_labels_(std::move(output_labels)),
      input_labels_(std::move(input_labels)) {
  if (samples_.size() != grid_.size())
    throw GridMismatch("FRF has " + std::to_string(samples_.size()) + " samples for a grid of " +
                       std::to_string(grid_.size()) + " points");
  if (!samples_.empty()) {
    rows_ = samples_.front().rows();
    cols_ = samples_.front().cols();
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (samples_[i].rows() != rows_ || samples_[i].cols() != cols_)
      throw ShapeMismatch("FRF sample " + std::to_string(i) + " has shape " +
                          shape_str(samples_[i].rows(), samples_[i].cols()) + ", expected " +
                          shape_str(rows_, cols_));
    if (!samples_[i].allFinite())
      throw InvalidParameter("FRF sample " + std::to_string(i) + " has non-finite entries");
  }
  if (!output_labels_.empty() && static_cast<Index>(output_labels_.size()) != rows_)
    throw ShapeMismatch("output label count does not match FRF rows");
  if (!input_labels_.empty() && static_cast<Index>(input_labels_.size()) != cols_)
    throw ShapeMismatch("input label count does not match FRF columns");
}

void require_aligned(const FrfMatrix& a, const FrfMatrix& b) {
  if (!(a.grid() == b.grid())) throw GridMismatch("FRFs are sampled on different grids");
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeMismatch("FRF shapes differ: " + shape_str(a.rows(), a.cols()) + " vs " +
                        shape_str(b.rows(), b.cols()));
}

FrfMatrix error_frf(const FrfMatrix& redesigned, const FrfMatrix& original) {
  require_aligned(redesigned, original);
  std::vector<Eigen::MatrixXcd> diff(original.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = redesigned[i] - original[i];
  return FrfMatrix(original.grid(), std::move(diff), original.output_labels(),
                   original.input_labels());
}

SecondOrderModel::SecondOrderModel(Eigen::MatrixXd mass, Eigen::MatrixXd damping,
                                   Eigen::MatrixXd stiffness, Eigen::MatrixXd input_map,
                                   Eigen::MatrixXd output_map)
    : mass_(std::move(mass)),
      damping_(std::move(damping)),
      stiffness_(std::move(stiffness)),
      input_map_(std::move(input_map)),
      output_map_(std::move(output_map)) {
  const Index n = mass_.rows();
  if (n == 0 || mass_.cols() != n) throw DimensionMismatch("mass matrix must be square and nonempty");
  if (damping_.rows() != n || damping_.cols() != n)
    throw DimensionMismatch("damping matrix must be " + shape_str(n, n));
  if (stiffness_.rows() != n || stiffness_.cols() != n)
    throw DimensionMismatch("stiffness matrix must be " + shape_str(n, n));
  if (input_map_.rows() != n) throw DimensionMismatch("input map must have " + std::to_string(n) + " rows");
  if (output_map_.cols() != n)
    throw DimensionMismatch("output map must have " + std::to_string(n) + " columns");
  if (!mass_.allFinite() || !damping_.allFinite() || !stiffness_.allFinite() ||
      !input_map_.allFinite() || !output_map_.allFinite())
    throw InvalidParameter("model matrices must be finite");

  if (!is_symmetric(mass_)) throw InvalidParameter("mass matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mass_, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxMassCondition)
    throw InvalidParameter("mass matrix is not positive definite or is ill-conditioned");
  require_psd(damping_, "damping");
  require_psd(stiffness_, "stiffness");
}

SecondOrderModel SecondOrderModel::scalar(double m, double d, double k) {
  return SecondOrderModel(Eigen::MatrixXd::Constant(1, 1, m), Eigen::MatrixXd::Constant(1, 1, d),
                          Eigen::MatrixXd::Constant(1, 1, k), Eigen::MatrixXd::Identity(1, 1),
                          Eigen::MatrixXd::Identity(1, 1));
}

InterconnectionStructure::InterconnectionStructure(Eigen::MatrixXd k_bb, Eigen::MatrixXd k_ba,
                                                   Eigen::MatrixXd k_ab,
                                                   std::vector<ModuleDims> module_dims)
    : k_bb_(std::move(k_bb)),
      k_ba_(std::move(k_ba)),
      k_ab_(std::move(k_ab)),
      module_dims_(std::move(module_dims)) {
  Index sum_p = 0;
  Index sum_m = 0;
  for (const auto& d : module_dims_) {
    if (d.outputs <= 0 || d.inputs <= 0)
      throw DimensionMismatch("module dimensions must be positive");
    sum_p += d.outputs;
    sum_m += d.inputs;
  }
  if (k_bb_.rows() != sum_m || k_bb_.cols() != sum_p)
    throw DimensionMismatch("k_bb must be " + shape_str(sum_m, sum_p) + ", got " +
                            shape_str(k_bb_.rows(), k_bb_.cols()));
  if (k_ba_.rows() != sum_m)
    throw DimensionMismatch("k_ba must have " + std::to_string(sum_m) + " rows");
  if (k_ab_.cols() != sum_p)
    throw DimensionMismatch("k_ab must have " + std::to_string(sum_p) + " columns");
  if (k_ba_.cols() == 0 || k_ab_.rows() == 0)
    throw DimensionMismatch("at least one external input and output is required");
  if (!k_bb_.allFinite() || !k_ba_.allFinite() || !k_ab_.allFinite())
    throw InvalidParameter("interconnection matrices must be finite");
}

Eigen::MatrixXd InterconnectionStructure::full() const {
  const Index r = total_inputs() + external_outputs();
  const Index c = total_outputs() + external_inputs();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(r, c);
  k.topLeftCorner(total_inputs(), total_outputs()) = k_bb_;
  k.topRightCorner(total_inputs(), external_inputs()) = k_ba_;
  k.bottomLeftCorner(external_outputs(), total_outputs()) = k_ab_;
  return k;
}

FrfMatrix eval_second_order_frf(const SecondOrderModel& model, const FrequencyGrid& grid) {
  if (grid.empty()) throw InvalidParameter("empty frequency grid");
  const Eigen::MatrixXcd b = model.input_map().cast<Complex>();
  const Eigen::MatrixXcd c = model.output_map().cast<Complex>();
  std::vector<Eigen::MatrixXcd> samples(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const double w = grid[i];
    Eigen::MatrixXcd z = (model.stiffness() - w * w * model.mass()).cast<Complex>();
    z += Complex(0.0, w) * model.damping().cast<Complex>();
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(z);
    const double rc = lu.rcond();
    if (!(rc >= kSingularRcond)) {
      std::ostringstream os;
      os << "dynamic stiffness is singular at omega = " << w << " rad/s (rcond " << rc << ")";
      throw SingularDynamicStiffness(w, os.str());
    }
    samples[i] = c * lu.solve(b);
  });
  return FrfMatrix(grid, std::move(samples));
}

FrfMatrix block_diag(std::span<const FrfMatrix> frfs) {
  if (frfs.empty()) throw InvalidParameter("block_diag needs at least one FRF");
  Index rows = 0;
  Index cols = 0;
  for (const auto& f : frfs) {
    if (!(f.grid() == frfs.front().grid()))
      throw GridMismatch("block_diag: module FRFs are sampled on different grids");
    rows += f.rows();
    cols += f.cols();
  }
  if (frfs.size() == 1) return frfs.front();

  const FrequencyGrid& grid = frfs.front().grid();
  std::vector<Eigen::MatrixXcd> samples(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(rows, cols);
    Index r = 0;
    Index c = 0;
    for (const auto& f : frfs) {
      g.block(r, c, f.rows(), f.cols()) = f[i];
      r += f.rows();
      c += f.cols();
    }
    samples[i] = std::move(g);
  }
  std::vector<std::string> out_labels;
  std::vector<std::string> in_labels;
  for (const auto& f : frfs) {
    out_labels.insert(out_labels.end(), f.output_labels().begin(), f.output_labels().end());
    in_labels.insert(in_labels.end(), f.input_labels().begin(), f.input_labels().end());
  }
  if (static_cast<Index>(out_labels.size()) != rows) out_labels.clear();
  if (static_cast<Index>(in_labels.size()) != cols) in_labels.clear();
  return FrfMatrix(grid, std::move(samples), std::move(out_labels), std::move(in_labels));
}

namespace {

void require_closure_dims(const FrfMatrix& g_b, const InterconnectionStructure& k) {
  if (g_b.rows() != k.total_outputs() || g_b.cols() != k.total_inputs())
    throw ShapeMismatch("G_B is " + shape_str(g_b.rows(), g_b.cols()) +
                        " but the interconnection expects " +
                        shape_str(k.total_outputs(), k.total_inputs()));
  if (g_b.grid().empty()) throw InvalidParameter("empty frequency grid");
}

Eigen::PartialPivLU<Eigen::MatrixXcd> checked_lu(const Eigen::MatrixXcd& a, double omega,
                                                 const ClosureOptions& options) {
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  const double rc = lu.rcond();
  if (!(rc >= options.min_rcond)) {
    std::ostringstream os;
    os << "interconnection is ill-posed at omega = " << omega << " rad/s (rcond " << rc << ")";
    throw IllPosedInterconnection(omega, rc, os.str());
  }
  return lu;
}

}  // namespace

FrfMatrix assemble_system_frf(const FrfMatrix& g_b, const InterconnectionStructure& k,
                              const ClosureOptions& options) {
  require_closure_dims(g_b, k);
  const Eigen::MatrixXcd k_bb = k.k_bb().cast<Complex>();
  const Eigen::MatrixXcd k_ba = k.k_ba().cast<Complex>();
  const Eigen::MatrixXcd k_ab = k.k_ab().cast<Complex>();
  const Index n = k.total_inputs();
  std::vector<Eigen::MatrixXcd> samples(g_b.size());
  parallel_for(g_b.size(), [&](std::size_t i) {
    const Eigen::MatrixXcd& g = g_b[i];
    const Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(n, n) - k_bb * g;
    const auto lu = checked_lu(a, g_b.grid()[i], options);
    samples[i] = k_ab * g * lu.solve(k_ba);
  });
  return FrfMatrix(g_b.grid(), std::move(samples));
}

FrfMatrix nominal_system(const FrfMatrix& g_b, const InterconnectionStructure& k,
                         const ClosureOptions& options) {
  require_closure_dims(g_b, k);
  const Eigen::MatrixXcd k_bb = k.k_bb().cast<Complex>();
  const Eigen::MatrixXcd k_ba = k.k_ba().cast<Complex>();
  const Eigen::MatrixXcd k_ab = k.k_ab().cast<Complex>();
  const Index sum_m = k.total_inputs();
  const Index sum_p = k.total_outputs();
  const Index m_a = k.external_inputs();
  const Index p_a = k.external_outputs();

  std::vector<Eigen::MatrixXcd> samples(g_b.size());
  parallel_for(g_b.size(), [&](std::size_t i) {
    const Eigen::MatrixXcd& g = g_b[i];
    const double w = g_b.grid()[i];
    const auto lu_out = checked_lu(Eigen::MatrixXcd::Identity(sum_p, sum_p) - g * k_bb, w, options);
    const auto lu_in = checked_lu(Eigen::MatrixXcd::Identity(sum_m, sum_m) - k_bb * g, w, options);
    const Eigen::MatrixXcd inv_out = lu_out.inverse();

    Eigen::MatrixXcd n = Eigen::MatrixXcd::Zero(sum_m + p_a, sum_p + m_a);
    n.topLeftCorner(sum_m, sum_p) = k_bb * inv_out;
    n.topRightCorner(sum_m, m_a) = lu_in.solve(k_ba);
    n.bottomLeftCorner(p_a, sum_p) = k_ab * inv_out;
    samples[i] = std::move(n);
  });
  return FrfMatrix(g_b.grid(), std::move(samples));
}

Eigen::MatrixXd stiff_coupling(double k_value, std::span<const std::pair<Index, Index>> pairs,
                               Index channels) {
  if (!(k_value >= 0.0) || !std::isfinite(k_value))
    throw InvalidParameter("coupling stiffness must be finite and nonnegative");
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(channels, channels);
  for (const auto& [a, b] : pairs) {
    if (a < 0 || b < 0 || a >= channels || b >= channels)
      throw IndexOutOfRange("coupling pair (" + std::to_string(a) + ", " + std::to_string(b) +
                            ") outside " + std::to_string(channels) + " channels");
    if (a == b) throw InvalidParameter("coupling pair must join two distinct channels");
    k(a, a) -= k_value;
    k(b, b) -= k_value;
    k(a, b) += k_value;
    k(b, a) += k_value;
  }
  return k;
}

}  // namespace modspec
