#pragma once

// JSON files for linear-combination specs and protocol scenarios.
//
// Spec file:
//   {"operation": "U2"}                       named registry entry, or
//   {"coefficients": [[re, im], ...],
//    "gates": ["A", "B"] | [[[[re, im], ...], ...], ...] | ["<matrix literal>"],
//    "input_state": ...}
// A state is an amplitude list [[re, im], ...], {"dims": [...], "amplitudes": [...]}
// or {"dims": [...], "basis": [labels]}.
//
// Scenario file:
//   {"spec": <spec object or path relative to the scenario file>,
//    "input_state": <state, overrides the spec's>,
//    "policy": {"epsilon": e, "tau": t},
//    "behavior": {"mode": "honest" | "skip_measurement" | "intercept",
//                 "intercept_fraction": f, "intercept_basis": "computational" | "hadamard"},
//    "verify": {"mode": "threshold" | "projective", "threshold": x},
//    "teleport_input": false, "teleport_output": false,
//    "rounds": R, "seed": S, "detection_curve": [R1, R2, ...]}

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rqc/lcc.hpp"
#include "rqc/protocol.hpp"

namespace rqc::io {

struct SpecFile {
  std::string name;  // registry name or empty
  lcc::LinearCombinationSpec spec;
  std::optional<QuantumState> input_state;
};

// Throw ParseError for malformed JSON or missing fields and UnknownName for
// unregistered gate or operation names.
SpecFile parse_spec_json(const std::string& text);
SpecFile read_spec_file(const std::string& path);

struct Scenario {
  SpecFile spec;
  QuantumState input_state = QuantumState::trivial();
  double epsilon = 0.0;
  double tau = 0.5;
  protocol::ServerBehavior behavior;
  protocol::SessionConfig config;
  std::optional<std::uint64_t> seed;
  std::vector<std::size_t> detection_curve;
};

// base_dir resolves a spec given as a relative path.
Scenario parse_scenario_json(const std::string& text, const std::string& base_dir = ".");
Scenario read_scenario_file(const std::string& path);

// Parses a state value in any of the accepted JSON forms.
QuantumState parse_state_json(const std::string& text);

}  // namespace rqc::io
