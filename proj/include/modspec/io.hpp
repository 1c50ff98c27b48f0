#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "modspec/model.hpp"
#include "modspec/models.hpp"
#include "modspec/spec.hpp"
#include "modspec/synthesis.hpp"
#include "modspec/verification.hpp"

namespace modspec {

/// How a grid is written to file: a log-spaced range or explicit Hz values.
struct GridDescriptor {
  std::variant<LogspaceRange, std::vector<double>> form;
  FrequencyGrid grid() const;
  friend bool operator==(const GridDescriptor&, const GridDescriptor&) = default;
};

struct ModelDocument {
  GridDescriptor grid;
  ModularModel model;
};

ModelDocument parse_model(const std::string& text, const std::string& source = "<string>");
ModelDocument load_model(const std::filesystem::path& file);
std::string dump_model(const ModelDocument& doc);
void save_model(const std::filesystem::path& file, const ModelDocument& doc);
/// Describes an existing grid by its Hz values.
GridDescriptor describe_grid(const FrequencyGrid& grid);

/// System spec file, either explicit weights (`v` output side, `w` input
/// side) or a relative gamma profile interpolated linearly in Hz.
SystemSpec load_system_spec(const std::filesystem::path& file, const FrfMatrix& g_a);

struct ModuleSpecDocument {
  std::string module;
  ModuleSpec spec;
};

/// Module spec file. If the file carries no baseline FRF, `baseline` must
/// be given. A file grid matching `reference` (1e-9 relative in Hz) is
/// replaced by it.
ModuleSpecDocument load_module_spec(const std::filesystem::path& file,
                                    const std::optional<FrfMatrix>& baseline = std::nullopt,
                                    const FrequencyGrid* reference = nullptr);
void save_module_spec(const std::filesystem::path& file, const std::string& module,
                      const ModuleSpec& spec);

/// Parses a standalone `{"frf": {...}}` document; the grid snaps to
/// `reference` when the Hz values agree.
FrfMatrix load_frf(const std::filesystem::path& file, const FrequencyGrid* reference = nullptr);
void save_frf(const std::filesystem::path& file, const FrfMatrix& frf);

void write_verdict_csv(std::ostream& os, const FrequencyGrid& grid, const SpecCheck& check);
void write_trace_csv(std::ostream& os, const SynthesisTrace& trace);
/// Module weight table: omega_hz, then the W and V diagonals.
void write_weight_table_csv(std::ostream& os, const ModuleSpec& spec);
void write_region_csv(std::ostream& os, const RegionGrid& region);
void write_trajectory_csv(std::ostream& os, const ModelFamily& family,
                          std::span<const DesignVariable> variables, const IncrementalResult& result);
/// omega_hz, |G_A|, disc_radius, |G_A_hat|, |E_A|. Norms are spectral; the
/// disc radius is only defined for SISO specs and is written as nan otherwise.
void write_envelope_csv(std::ostream& os, const SystemSpec& spec, const FrfMatrix& g_a_hat);
/// omega_hz followed by re/im columns of every entry, row-major.
void write_frf_csv(std::ostream& os, const FrfMatrix& frf);

}  // namespace modspec
