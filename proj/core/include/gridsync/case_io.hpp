#pragma once

#include <filesystem>
#include <string>

#include "gridsync/network.hpp"

namespace gridsync {

enum class CaseFormat { Json, MatpowerM };

// Loads and validates a network case.
//
// Json: self-contained schema with top-level keys base_mva, base_freq,
// buses[], branches[], generators[], loads[]; all electrical quantities in
// per-unit, all angles in radians.  Generator dynamic data is inline and
// accepts either "M" (p.u.*s^2/rad) or "H" (inertia constant, seconds).
//
// MatpowerM: reads baseMVA and the mpc.bus / mpc.gen / mpc.branch tables of
// a MATPOWER .m file; every other table is ignored with a warning.  MATPOWER
// carries no dynamic data, so a JSON sidecar (dyn_path) is mandatory and
// supplies tech/M-or-H/D/rating per generator, matched by bus id.
//
// Throws ParseError on malformed input and ValidationError when the parsed
// case violates a type invariant.
NetworkCase load_case(const std::filesystem::path& path, CaseFormat format,
                      const std::filesystem::path& dyn_path = {});

// Parses without running validation; for tooling that wants the raw case and
// the full ValidationReport rather than a thrown error.
NetworkCase parse_case(const std::filesystem::path& path, CaseFormat format,
                       const std::filesystem::path& dyn_path = {});

// Infers the format from the file extension (.m -> MatpowerM, else Json).
NetworkCase load_case_auto(const std::filesystem::path& path,
                           const std::filesystem::path& dyn_path = {});

// Serializes a case to the JSON schema; load_case(serialize(net)) == net.
std::string serialize_case(const NetworkCase& net);

// Applies a dynamic-parameter JSON sidecar to an already-loaded case.
void apply_dyn_sidecar(NetworkCase& net, const std::filesystem::path& dyn_path);

}  // namespace gridsync
