#include "modspec/model.hpp"

namespace modspec {

ModuleDims Module::dims() const {
  if (const auto* m = std::get_if<SecondOrderModel>(&source)) return {m->outputs(), m->inputs()};
  const auto& f = std::get<FrfMatrix>(source);
  return {f.rows(), f.cols()};
}

FrfMatrix Module::frf(const FrequencyGrid& grid) const {
  if (const auto* m = std::get_if<SecondOrderModel>(&source)) return eval_second_order_frf(*m, grid);
  const auto& f = std::get<FrfMatrix>(source);
  if (!(f.grid() == grid))
    throw GridMismatch("module '" + name + "' FRF samples do not match the model grid");
  return f;
}

ModularModel::ModularModel(FrequencyGrid grid, std::vector<Module> modules,
                           InterconnectionStructure coupling)
    : grid_(std::move(grid)), modules_(std::move(modules)), coupling_(std::move(coupling)) {
  if (modules_.empty()) throw InvalidParameter("model has no modules");
  if (modules_.size() != coupling_.module_count())
    throw DimensionMismatch("model has " + std::to_string(modules_.size()) +
                            " modules but the coupling describes " +
                            std::to_string(coupling_.module_count()));
  for (std::size_t j = 0; j < modules_.size(); ++j) {
    if (!(modules_[j].dims() == coupling_.module_dims()[j]))
      throw DimensionMismatch("module '" + modules_[j].name +
                              "' dimensions disagree with the coupling");
  }
}

std::size_t ModularModel::module_index(const std::string& name) const {
  for (std::size_t j = 0; j < modules_.size(); ++j)
    if (modules_[j].name == name) return j;
  throw IndexOutOfRange("no module named '" + name + "'");
}

std::vector<FrfMatrix> ModularModel::module_frfs() const {
  std::vector<FrfMatrix> out;
  out.reserve(modules_.size());
  for (const auto& m : modules_) out.push_back(m.frf(grid_));
  return out;
}

FrfMatrix ModularModel::system_frf(const ClosureOptions& options) const {
  const auto frfs = module_frfs();
  return assemble_system_frf(block_diag(frfs), coupling_, options);
}

FrfMatrix ModularModel::nominal(const ClosureOptions& options) const {
  const auto frfs = module_frfs();
  return nominal_system(block_diag(frfs), coupling_, options);
}

ModularModel ModularModel::with_module(std::size_t j, Module replacement) const {
  if (j >= modules_.size()) throw IndexOutOfRange("module index out of range");
  auto modules = modules_;
  modules[j] = std::move(replacement);
  return ModularModel(grid_, std::move(modules), coupling_);
}

ModularModel ModularModel::with_grid(FrequencyGrid grid) const {
  return ModularModel(std::move(grid), modules_, coupling_);
}

}  // namespace modspec
