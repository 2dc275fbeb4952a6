#include "rqc/spec_io.hpp"

#include <filesystem>

#include <json.hpp>

#include "rqc/gates.hpp"
#include "rqc/literal_io.hpp"

namespace rqc::io {

namespace {

using json = nlohmann::json;

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

Complex complex_of(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  if (j.is_string()) {
    try {
      return parse_complex(j.get<std::string>());
    } catch (const ParseError&) {
    }
  }
  throw ParseError(where + ": expected a number, [re, im] or a complex literal");
}

ComplexVector vector_of(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ParseError(where + ": expected a non-empty list");
  ComplexVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_of(j[i], where);
  return v;
}

ComplexMatrix gate_of(const json& j, std::size_t index) {
  const std::string where = "gate " + std::to_string(index);
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s.find_first_of(" \t\n") == std::string::npos) return gates::named_gate(s);
    return parse_matrix(s);
  }
  if (!j.is_array() || j.empty()) throw ParseError(where + ": expected a name, literal or row list");
  const std::size_t rows = j.size();
  ComplexMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(j[0].size()));
  for (std::size_t r = 0; r < rows; ++r) {
    const ComplexVector row = vector_of(j[r], where);
    if (row.size() != m.cols()) throw ParseError(where + ": ragged rows");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

QuantumState state_of(const json& j) {
  if (j.is_array()) {
    const ComplexVector v = vector_of(j, "input_state");
    return QuantumState::pure(Dims{static_cast<std::size_t>(v.size())}, v);
  }
  if (!j.is_object() || !j.contains("dims")) throw ParseError("input_state: expected a list or an object with dims");
  Dims dims;
  try {
    dims = j.at("dims").get<Dims>();
  } catch (const json::exception&) {
    throw ParseError("input_state: dims must be a list of positive integers");
  }
  if (j.contains("basis")) {
    Indices labels;
    try {
      labels = j.at("basis").get<Indices>();
    } catch (const json::exception&) {
      throw ParseError("input_state: basis must be a list of labels");
    }
    return QuantumState::basis(dims, labels);
  }
  if (j.contains("amplitudes")) return QuantumState::pure(dims, vector_of(j.at("amplitudes"), "input_state"));
  throw ParseError("input_state: needs 'amplitudes' or 'basis'");
}

SpecFile spec_of(const json& j) {
  if (!j.is_object()) throw ParseError("spec must be a JSON object");
  std::optional<QuantumState> input;
  if (j.contains("input_state")) input = state_of(j.at("input_state"));
  if (j.contains("operation")) {
    if (!j.at("operation").is_string()) throw ParseError("operation must be a name");
    gates::NamedOperation op = gates::named_operation(j.at("operation").get<std::string>());
    return {op.name, std::move(op.spec), std::move(input)};
  }
  if (!j.contains("coefficients") || !j.contains("gates")) {
    throw ParseError("spec needs 'coefficients' and 'gates', or 'operation'");
  }
  const ComplexVector a = vector_of(j.at("coefficients"), "coefficients");
  const json& g = j.at("gates");
  if (!g.is_array()) throw ParseError("gates must be a list");
  std::vector<ComplexMatrix> gate_list;
  for (std::size_t i = 0; i < g.size(); ++i) gate_list.push_back(gate_of(g[i], i));
  std::vector<Complex> coeffs(a.data(), a.data() + a.size());
  return {"", lcc::LinearCombinationSpec(std::move(coeffs), std::move(gate_list)), std::move(input)};
}

template <typename T>
T field(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

SpecFile parse_spec_json(const std::string& text) { return spec_of(parse_json(text)); }

SpecFile read_spec_file(const std::string& path) { return parse_spec_json(read_text_file(path)); }

QuantumState parse_state_json(const std::string& text) { return state_of(parse_json(text)); }

Scenario parse_scenario_json(const std::string& text, const std::string& base_dir) {
  const json j = parse_json(text);
  if (!j.is_object()) throw ParseError("scenario must be a JSON object");
  if (!j.contains("spec")) throw ParseError("scenario needs a 'spec'");
  const json& s = j.at("spec");
  SpecFile spec = s.is_string() ? read_spec_file((std::filesystem::path(base_dir) / s.get<std::string>()).string())
                                : spec_of(s);
  Scenario sc{std::move(spec), QuantumState::trivial(), 0.0, 0.5, {}, {}, std::nullopt, {}};
  if (j.contains("input_state")) {
    sc.input_state = state_of(j.at("input_state"));
  } else if (sc.spec.input_state) {
    sc.input_state = *sc.spec.input_state;
  } else {
    throw ParseError("scenario has no input_state");
  }

  const json policy = j.value("policy", json::object());
  const double n = static_cast<double>(sc.spec.spec.terms());
  sc.epsilon = field(policy, "epsilon", 1.0 / (n - 1));
  sc.tau = field(policy, "tau", 0.5);

  const json behavior = j.value("behavior", json::object());
  const std::string mode = field<std::string>(behavior, "mode", "honest");
  if (mode == "honest") {
    sc.behavior.mode = protocol::ServerMode::honest;
  } else if (mode == "skip_measurement") {
    sc.behavior.mode = protocol::ServerMode::skip_measurement;
  } else if (mode == "intercept") {
    sc.behavior.mode = protocol::ServerMode::intercept;
  } else {
    throw UnknownName("unknown server mode '" + mode + "'");
  }
  sc.behavior.intercept_fraction = field(behavior, "intercept_fraction", 1.0);
  const std::string basis = field<std::string>(behavior, "intercept_basis", "computational");
  if (basis == "computational") {
    sc.behavior.intercept_basis = protocol::InterceptBasis::computational;
  } else if (basis == "hadamard") {
    sc.behavior.intercept_basis = protocol::InterceptBasis::hadamard;
  } else {
    throw UnknownName("unknown intercept basis '" + basis + "'");
  }

  const json verify = j.value("verify", json::object());
  const std::string vmode = field<std::string>(verify, "mode", "threshold");
  if (vmode == "threshold") {
    sc.config.verify_mode = protocol::VerifyMode::fidelity_threshold;
  } else if (vmode == "projective") {
    sc.config.verify_mode = protocol::VerifyMode::projective;
  } else {
    throw UnknownName("unknown verify mode '" + vmode + "'");
  }
  sc.config.fidelity_threshold = field(verify, "threshold", sc.config.fidelity_threshold);
  sc.config.teleport_input = field(j, "teleport_input", false);
  sc.config.teleport_output = field(j, "teleport_output", false);
  sc.config.rounds = field<std::size_t>(j, "rounds", 1);
  if (j.contains("seed")) sc.seed = field<std::uint64_t>(j, "seed", 0);
  sc.detection_curve = field(j, "detection_curve", std::vector<std::size_t>{});
  return sc;
}

Scenario read_scenario_file(const std::string& path) {
  return parse_scenario_json(read_text_file(path), std::filesystem::path(path).parent_path().string());
}

}  // namespace rqc::io
