#include "rqc/gates.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace rqc::gates {

namespace {

ComplexMatrix m2(Complex a, Complex b, Complex c, Complex d) {
  ComplexMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

ComplexMatrix permutation4(std::initializer_list<int> targets) {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  int col = 0;
  for (int row : targets) m(row, col++) = 1;
  return m;
}

const double kHalf = 1 / std::numbers::sqrt2;

std::string fmt_deg(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", t);
  return buf;
}

NamedOperation waveplate_operation(int index) {
  const double t = 11.25 * (index - 1);
  const auto [a, b] = half_waveplate_control(t);
  const std::string angle = fmt_deg(2 * t);
  return {"U" + std::to_string(index),
          "cos(" + angle + " deg) A + sin(" + angle + " deg) B",
          lcc::LinearCombinationSpec({Complex(a, 0), Complex(b, 0)},
                                     {named_gate("A"), named_gate("B")})};
}

NamedOperation pauli_pair(int index, const char* g0, const char* g1, Complex a1, const char* text) {
  return {"U" + std::to_string(index), text,
          lcc::LinearCombinationSpec({Complex(kHalf, 0), a1}, {named_gate(g0), named_gate(g1)})};
}

}  // namespace

ComplexMatrix named_gate(std::string_view name) {
  const Complex i(0, 1);
  if (name == "I") return ComplexMatrix::Identity(2, 2);
  if (name == "X") return m2(0, 1, 1, 0);
  if (name == "Y") return m2(0, -i, i, 0);
  if (name == "Z") return m2(1, 0, 0, -1);
  if (name == "H") return m2(kHalf, kHalf, kHalf, -kHalf);
  if (name == "S") return m2(1, 0, 0, i);
  if (name == "A") return m2(kHalf * (1.0 - i), 0, 0, kHalf * (-1.0 - i));
  if (name == "B") return m2(0, kHalf * (1.0 + i), kHalf * (1.0 - i), 0);
  if (name == "CNOT") return permutation4({0, 1, 3, 2});
  if (name == "SWAP") return permutation4({0, 2, 1, 3});
  if (name == "CZ") {
    ComplexMatrix m = ComplexMatrix::Identity(4, 4);
    m(3, 3) = -1;
    return m;
  }
  throw UnknownName("unknown gate '" + std::string(name) + "'");
}

std::vector<std::string> gate_names() {
  return {"I", "X", "Y", "Z", "H", "S", "A", "B", "CNOT", "CZ", "SWAP"};
}

std::pair<double, double> half_waveplate_control(double degrees) {
  const double r = 2 * degrees * std::numbers::pi / 180.0;
  return {std::cos(r), std::sin(r)};
}

NamedOperation named_operation(std::string_view name) {
  const Complex i(0, 1);
  if (name.substr(0, 4) == "alt-") {
    static const char* const kAlias[] = {"U2", "U3", "U6", "U12"};
    const std::string_view rest = name.substr(4);
    for (int j = 1; j <= 4; ++j) {
      if (rest == "U" + std::to_string(j)) {
        NamedOperation op = named_operation(kAlias[j - 1]);
        op.name = std::string(name);
        return op;
      }
    }
  } else if (name.size() >= 2 && name.front() == 'U') {
    int index = 0;
    for (char c : name.substr(1)) {
      if (c < '0' || c > '9') {
        index = -1;
        break;
      }
      index = index * 10 + (c - '0');
    }
    if (index >= 1 && index <= 8) return waveplate_operation(index);
    switch (index) {
      case 9: return pauli_pair(9, "I", "Z", kHalf * i, "(I + iZ)/sqrt2");
      case 10: return pauli_pair(10, "I", "Z", -kHalf * i, "(I - iZ)/sqrt2");
      case 11: return pauli_pair(11, "X", "Z", kHalf, "(X + Z)/sqrt2");
      case 12: return pauli_pair(12, "X", "Z", kHalf * i, "(X + iZ)/sqrt2");
      default: break;
    }
  }
  throw UnknownName("unknown operation '" + std::string(name) + "'");
}

std::vector<std::string> operation_names() {
  std::vector<std::string> out;
  for (int j = 1; j <= 12; ++j) out.push_back("U" + std::to_string(j));
  for (int j = 1; j <= 4; ++j) out.push_back("alt-U" + std::to_string(j));
  return out;
}

}  // namespace rqc::gates
