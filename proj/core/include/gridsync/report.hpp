#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gridsync/modal.hpp"
#include "gridsync/oracles.hpp"
#include "gridsync/powerflow.hpp"
#include "gridsync/simulate.hpp"

namespace gridsync {

// Fixed-width float formatting (12 significant digits) so repeated runs of
// the same inputs produce byte-identical files.
std::string format_sig(double v);

void write_solution_csv(std::ostream& os, const NetworkCase& net, const PowerFlowSolution& sol);
void write_solution_json(std::ostream& os, const NetworkCase& net, const PowerFlowSolution& sol);
void write_reduced_json(std::ostream& os, const ReducedNetwork& red);
void write_state_matrix_csv(std::ostream& os, const StateSpaceModel& model);
void write_state_matrix_json(std::ostream& os, const StateSpaceModel& model);
void write_modal_json(std::ostream& os, const StateSpaceModel& model, const ModalResult& modal);
void write_loci_csv(std::ostream& os, const std::vector<LociRow>& rows);
void write_trace_csv(std::ostream& os, const SimulationTrace& trace);
void write_metrics_json(std::ostream& os, const FrequencyMetrics& metrics,
                        const SimulationTrace& trace);
void write_oracles_json(std::ostream& os, const std::vector<OracleReport>& reports);

// 64-bit FNV-1a over the raw bytes of a file; the digest recorded in run
// manifests so outputs can be tied back to exact inputs.
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

struct RunManifest {
    std::string tool_version;
    std::string command_line;
    std::vector<std::pair<std::string, std::uint64_t>> input_digests;
    std::uint64_t seed = 0;
    std::string started_at;   // ISO 8601 UTC
    std::string finished_at;
};

void write_manifest_json(std::ostream& os, const RunManifest& manifest);

}  // namespace gridsync
