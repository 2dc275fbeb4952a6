#pragma once

// Named single- and two-qubit gates plus the experimentally tested
// linear-combination operations U1..U12.
//
// U1..U8 are alpha A + beta B with (alpha, beta) = (cos 2t, sin 2t) for
// half-waveplate angles t = 0, 11.25, ..., 78.75 degrees. U9..U12 combine
// (I, Z) or (X, Z). alt-U1..alt-U4 are a second numbering of U2, U3, U6
// and U12.

#include <string>
#include <string_view>
#include <vector>

#include "rqc/lcc.hpp"

namespace rqc::gates {

// I, X, Y, Z, H, S, A, B, CNOT, CZ, SWAP. Throws UnknownName.
ComplexMatrix named_gate(std::string_view name);
std::vector<std::string> gate_names();

struct NamedOperation {
  std::string name;
  // Human-readable form, e.g. "cos(22.5 deg) A + sin(22.5 deg) B".
  std::string description;
  lcc::LinearCombinationSpec spec;
};

// U1..U12 and the alt-U1..alt-U4 aliases. Throws UnknownName.
NamedOperation named_operation(std::string_view name);
std::vector<std::string> operation_names();

// Control amplitudes (cos 2t, sin 2t) produced by a half-waveplate at t degrees.
std::pair<double, double> half_waveplate_control(double degrees);

}  // namespace rqc::gates
