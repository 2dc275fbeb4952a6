#pragma once

// Plain-text matrix and state literals: one row per line, entries written as
// `re+imj` separated by whitespace. State files start with `# dims: d1 d2 ...`.
// A state file holds either one entry per line (statevector) or a square
// matrix (density). Other lines starting with '#' are comments.

#include <iosfwd>
#include <string>
#include <string_view>

#include "rqc/qcore.hpp"

namespace rqc::io {

// Parses `1`, `-0.5j`, `0.25-1e-3j`, `+1+0j` and similar.
Complex parse_complex(std::string_view token);
std::string format_complex(Complex z);

ComplexMatrix parse_matrix(std::string_view text);
std::string format_matrix(const ComplexMatrix& m);

QuantumState parse_state(std::string_view text);
std::string format_state(const QuantumState& state);

ComplexMatrix read_matrix_file(const std::string& path);
QuantumState read_state_file(const std::string& path);
std::string read_text_file(const std::string& path);

}  // namespace rqc::io
