#pragma once

#include <string>
#include <variant>
#include <vector>

#include "modspec/frf.hpp"

namespace modspec {

/// A module is either a second-order model evaluated on demand or a raw
/// sampled FRF (measured or computed elsewhere).
struct Module {
  std::string name;
  std::variant<SecondOrderModel, FrfMatrix> source;

  ModuleDims dims() const;
  /// Raw FRFs must already be sampled on `grid`.
  FrfMatrix frf(const FrequencyGrid& grid) const;
  const SecondOrderModel* second_order() const { return std::get_if<SecondOrderModel>(&source); }
};

/// Modules, their interconnection, and the frequencies of interest.
class ModularModel {
 public:
  ModularModel(FrequencyGrid grid, std::vector<Module> modules, InterconnectionStructure coupling);

  const FrequencyGrid& grid() const { return grid_; }
  const std::vector<Module>& modules() const { return modules_; }
  const InterconnectionStructure& coupling() const { return coupling_; }

  std::size_t module_index(const std::string& name) const;

  std::vector<FrfMatrix> module_frfs() const;
  FrfMatrix system_frf(const ClosureOptions& options = {}) const;
  FrfMatrix nominal(const ClosureOptions& options = {}) const;

  ModularModel with_module(std::size_t j, Module replacement) const;
  ModularModel with_grid(FrequencyGrid grid) const;

 private:
  FrequencyGrid grid_;
  std::vector<Module> modules_;
  InterconnectionStructure coupling_;
};

}  // namespace modspec
