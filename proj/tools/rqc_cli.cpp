// rqc: command-line front end. Every subcommand prints a report on stdout and
// writes its primary output to --out when given. Exit codes: 0 ok, 2 parse,
// 3 precondition, 4 dimension, 5 unknown name, 6 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rqc/gates.hpp"
#include "rqc/kak.hpp"
#include "rqc/lcc.hpp"
#include "rqc/literal_io.hpp"
#include "rqc/protocol.hpp"
#include "rqc/spec_io.hpp"
#include "rqc/tomography.hpp"

using namespace rqc;
using json = nlohmann::ordered_json;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "text";
};

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json matrix_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const ComplexVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v(i)));
  return out;
}

std::uint64_t require_seed(const Globals& g, std::optional<std::uint64_t> fallback = std::nullopt) {
  if (g.seed) return *g.seed;
  if (fallback) return *fallback;
  throw InvalidInput("this command is stochastic and needs --seed");
}

void emit(const Globals& g, const std::string& text) {
  std::cout << text;
  if (!g.out.empty()) {
    std::ofstream f(g.out, std::ios::binary);
    if (!f) throw InvalidInput("cannot write '" + g.out + "'");
    f << text;
  }
}

std::string render(const Globals& g, const json& j, const std::string& text) {
  if (g.format == "json") return j.dump(2) + "\n";
  return text;
}

// ---- lcc ----

int cmd_lcc(const Globals& g, const std::string& path, const std::string& form) {
  const io::SpecFile sf = io::read_spec_file(path);
  const lcc::LinearCombinationSpec& spec = sf.spec;
  const std::size_t d = spec.target_dim();
  const QuantumState input = sf.input_state ? *sf.input_state : QuantumState::basis(Dims{d}, Indices{0});
  if (!input.is_pure()) throw InvalidInput("lcc input must be a pure state");
  const lcc::LccRunResult r =
      form == "controlled" ? lcc::run_lcc_controlled_form(spec, input) : lcc::run_lcc(spec, input);
  const ComplexVector direct = spec.combination() * input.amplitudes();
  json j;
  j["operation"] = sf.name.empty() ? json(nullptr) : json(sf.name);
  j["terms"] = spec.terms();
  j["control_qubits"] = spec.control_qubits();
  j["dimension"] = d;
  j["form"] = form;
  j["success"] = r.success;
  j["success_probability"] = r.success_probability;
  std::ostringstream t;
  if (!sf.name.empty()) t << "operation: " << sf.name << "\n";
  t << "terms: " << spec.terms() << "\ncontrol_qubits: " << spec.control_qubits() << "\ndimension: " << d
    << "\nform: " << form << "\nsuccess_probability: " << num(r.success_probability) << "\n";
  if (r.success && direct.norm() > 1e-12) {
    const ComplexVector want = direct / direct.norm();
    const double residual = phase_aligned_distance(want, r.output_state->amplitudes());
    j["residual"] = residual;
    j["output_state"] = vector_json(r.output_state->amplitudes());
    t << "residual: " << num(residual) << "\noutput_state:\n" << io::format_state(*r.output_state);
  } else {
    j["residual"] = nullptr;
    j["output_state"] = nullptr;
    t << "residual: n/a\noutput_state: none (postselection branch vanishes)\n";
  }
  emit(g, render(g, j, t.str()));
  return 0;
}

// ---- kak ----

json kak_json(const kak::KakDecomposition& dec) {
  json j;
  j["k"] = dec.k;
  json alphas = json::array();
  for (Complex a : dec.alpha) alphas.push_back(complex_json(a));
  j["alphas"] = alphas;
  j["locals"] = {{"u1", matrix_json(dec.u1)}, {"v1", matrix_json(dec.v1)},
                 {"u2", matrix_json(dec.u2)}, {"v2", matrix_json(dec.v2)}};
  j["phase"] = dec.global_phase;
  j["residual"] = dec.residual;
  return j;
}

std::string kak_text(const kak::KakDecomposition& dec) {
  std::ostringstream t;
  t << "k: " << num(dec.k[0]) << " " << num(dec.k[1]) << " " << num(dec.k[2]) << "\nalphas:";
  for (Complex a : dec.alpha) t << " " << io::format_complex(a);
  t << "\nphase: " << num(dec.global_phase) << "\nresidual: " << num(dec.residual) << "\n";
  const std::pair<const char*, const ComplexMatrix*> locals[] = {
      {"u1", &dec.u1}, {"v1", &dec.v1}, {"u2", &dec.u2}, {"v2", &dec.v2}};
  for (const auto& [name, m] : locals) t << name << ":\n" << io::format_matrix(*m);
  return t.str();
}

int cmd_kak(const Globals& g, const std::string& path, std::size_t random) {
  if (random > 0) {
    Rng rng(require_seed(g));
    json residuals = json::array();
    std::ostringstream t;
    double worst = 0;
    for (std::size_t i = 0; i < random; ++i) {
      ComplexMatrix u = haar_random_unitary(4, rng);
      u /= principal_phase(u);
      const double r = kak::kak_decompose(u).residual;
      worst = std::max(worst, r);
      residuals.push_back(r);
      t << i << " " << num(r) << "\n";
    }
    t << "max_residual: " << num(worst) << "\n";
    json j;
    j["count"] = random;
    j["residuals"] = residuals;
    j["max_residual"] = worst;
    emit(g, render(g, j, t.str()));
    return 0;
  }
  if (path.empty()) throw InvalidInput("kak needs a matrix file or --random N");
  const kak::KakDecomposition dec = kak::kak_decompose(io::read_matrix_file(path));
  emit(g, render(g, kak_json(dec), kak_text(dec)));
  return 0;
}

// ---- protocol ----

const char* mode_name(protocol::ServerMode m) {
  switch (m) {
    case protocol::ServerMode::honest: return "honest";
    case protocol::ServerMode::skip_measurement: return "skip_measurement";
    case protocol::ServerMode::intercept: return "intercept";
  }
  return "?";
}

int cmd_protocol(const Globals& g, const std::string& path) {
  const io::Scenario sc = io::read_scenario_file(path);
  Rng rng(require_seed(g, sc.seed));
  const protocol::SendPolicy policy(lcc::build_control_state(sc.spec.spec), sc.epsilon, sc.tau);
  const protocol::ProtocolTranscript t =
      protocol::run_session(sc.spec.spec, sc.input_state, policy, sc.behavior, sc.config, rng);
  const protocol::DetectionAnalysis det =
      protocol::analyze_detection(sc.spec.spec, sc.input_state, policy, sc.behavior, sc.config);
  const protocol::SessionSummary& s = t.summary;

  std::vector<std::size_t> curve = sc.detection_curve;
  if (curve.empty() && sc.behavior.mode != protocol::ServerMode::honest) curve = {10, 20, 50, 100, 200};

  json j;
  j["scenario"] = path;
  j["mode"] = mode_name(sc.behavior.mode);
  j["rounds"] = s.rounds;
  j["p_compute"] = policy.p_control();
  j["p_decoy"] = policy.p_decoy();
  j["p_verify"] = 1 - policy.tau();
  j["compute_rounds"] = s.compute_rounds;
  j["decoy_rounds"] = s.decoy_rounds;
  j["verify_rounds"] = s.verify_rounds;
  j["completed"] = s.completed;
  j["empirical_success"] = s.empirical_success;
  j["analytic_success"] = s.analytic_success;
  j["detections"] = s.detections;
  j["first_detection_round"] = s.first_detection_round ? json(*s.first_detection_round) : json(nullptr);
  j["analytic_detection_per_round"] = det.per_round;
  j["analytic_detection_per_verify"] = det.per_verify;

  std::ostringstream txt;
  txt << "mode: " << mode_name(sc.behavior.mode) << "\nrounds: " << s.rounds
      << "\np_compute: " << num(policy.p_control()) << "\np_decoy: " << num(policy.p_decoy())
      << "\np_verify: " << num(1 - policy.tau()) << "\ncompute/decoy/verify rounds: " << s.compute_rounds << " "
      << s.decoy_rounds << " " << s.verify_rounds << "\ncompleted: " << s.completed
      << "\nempirical_success: " << num(s.empirical_success) << "\nanalytic_success: " << num(s.analytic_success)
      << "\ndetections: " << s.detections
      << "\nanalytic_detection_per_round: " << num(det.per_round) << "\n";

  if (!curve.empty()) {
    // Survival: no detection within a block of R consecutive rounds.
    json rows = json::array();
    txt << "R empirical_survival analytic_survival\n";
    for (std::size_t r : curve) {
      if (r == 0) throw InvalidInput("detection curve lengths must be positive");
      const std::size_t blocks = s.rounds / r;
      std::size_t clean = 0;
      for (std::size_t b = 0; b < blocks; ++b) {
        bool hit = false;
        for (std::size_t i = b * r; i < (b + 1) * r; ++i) hit |= t.records[i].verified == false;
        clean += !hit;
      }
      const double emp = blocks ? static_cast<double>(clean) / static_cast<double>(blocks) : 0.0;
      const double ana = std::pow(1 - det.per_round, static_cast<double>(r));
      rows.push_back({{"R", r}, {"blocks", blocks}, {"empirical_survival", emp}, {"analytic_survival", ana}});
      txt << r << " " << num(emp) << " " << num(ana) << "\n";
    }
    j["detection_curve"] = rows;
  }

  const std::string transcript = protocol::transcript_jsonl(t);
  if (!g.out.empty()) {
    std::ofstream f(g.out, std::ios::binary);
    if (!f) throw InvalidInput("cannot write '" + g.out + "'");
    f << transcript;
  }
  std::cout << render(g, j, txt.str());
  return 0;
}

// ---- tomography ----

std::vector<std::string> read_operation_list(const std::string& path) {
  std::istringstream in(io::read_text_file(path));
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream row(line);
    for (std::string w; row >> w;) names.push_back(w);
  }
  if (names.empty()) throw UnknownName("operation list is empty");
  return names;
}

int cmd_tomography(const Globals& g, const std::string& list_path, const std::string& dataset_path,
                   const std::string& reference, std::size_t shots, double noise, std::size_t resamples) {
  std::vector<std::pair<std::string, tomography::TomographyDataset>> jobs;
  std::optional<Rng> rng;
  if (shots > 0 || resamples > 0) rng.emplace(require_seed(g));
  const tomography::Noise nz{noise};

  if (!dataset_path.empty()) {
    if (reference.empty()) throw InvalidInput("--dataset needs --reference NAME");
    jobs.emplace_back(reference, tomography::parse_dataset(io::read_text_file(dataset_path)));
  } else {
    if (list_path.empty()) throw InvalidInput("tomography needs an operation list file or --dataset");
    for (const std::string& name : read_operation_list(list_path)) {
      const ComplexMatrix op = gates::named_operation(name).spec.combination();
      jobs.emplace_back(name, shots > 0 ? tomography::simulate_dataset(op, shots, nz, *rng)
                                        : tomography::analytic_dataset(op, nz));
    }
  }

  json rows = json::array();
  std::ostringstream chis, table;
  table << "name fidelity std resamples seed\n";
  for (const auto& [name, data] : jobs) {
    const tomography::ChiMatrix ideal = tomography::ideal_chi(gates::named_operation(name).spec.combination());
    const tomography::MleResult mle = tomography::reconstruct_mle(data);
    const double fid = tomography::process_fidelity(mle.chi, ideal);
    std::optional<tomography::BootstrapResult> boot;
    if (resamples > 0) boot = tomography::bootstrap_error(data, ideal, resamples, *rng);
    const std::string seed = g.seed ? std::to_string(*g.seed) : "-";
    chis << "# chi " << name << "\n" << io::format_matrix(mle.chi.m);
    table << name << " " << num(fid) << " " << (boot ? num(boot->std) : "-") << " " << resamples << " " << seed
          << "\n";
    json r;
    r["name"] = name;
    r["fidelity"] = fid;
    r["std"] = boot ? json(boot->std) : json(nullptr);
    r["bootstrap_mean"] = boot ? json(boot->mean) : json(nullptr);
    r["resamples"] = resamples;
    r["seed"] = g.seed ? json(*g.seed) : json(nullptr);
    r["iterations"] = mle.iterations;
    r["converged"] = mle.converged;
    r["chi"] = matrix_json(mle.chi.m);
    rows.push_back(std::move(r));
  }
  json j;
  j["mode"] = shots > 0 ? "sampled" : "analytic";
  j["shots"] = shots;
  j["depolarizing"] = noise;
  j["operations"] = rows;
  emit(g, render(g, j, chis.str() + table.str()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Remote quantum control simulator"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed for stochastic commands");
  app.add_option("--out", g.out, "Write the primary output to this file");
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"text", "json"}));

  std::string lcc_path, lcc_form = "extended";
  auto* lcc_cmd = app.add_subcommand("lcc", "Run the linear-combination circuit for a spec file");
  lcc_cmd->add_option("spec", lcc_path, "Spec JSON file")->required();
  lcc_cmd->add_option("--form", lcc_form, "Circuit form")->check(CLI::IsMember({"extended", "controlled"}));

  std::string kak_path;
  std::size_t kak_random = 0;
  auto* kak_cmd = app.add_subcommand("kak", "KAK-decompose a 4x4 unitary");
  kak_cmd->add_option("matrix", kak_path, "Matrix literal file");
  kak_cmd->add_option("--random", kak_random, "Decompose N Haar-random SU(4) matrices instead");

  std::string scenario_path;
  auto* proto_cmd = app.add_subcommand("protocol", "Run a client-server session from a scenario file");
  proto_cmd->add_option("scenario", scenario_path, "Scenario JSON file")->required();

  std::string tomo_list, tomo_dataset, tomo_ref;
  std::size_t tomo_shots = 0, tomo_resamples = 0;
  double tomo_noise = 0.0;
  auto* tomo_cmd = app.add_subcommand("tomography", "Process tomography of named operations");
  tomo_cmd->add_option("operations", tomo_list, "File listing operation names");
  tomo_cmd->add_option("--dataset", tomo_dataset, "Reconstruct from a dataset file instead");
  tomo_cmd->add_option("--reference", tomo_ref, "Operation the dataset is compared against");
  tomo_cmd->add_option("--shots", tomo_shots, "Shots per setting (0 = analytic)");
  tomo_cmd->add_option("--noise", tomo_noise, "Depolarizing probability");
  tomo_cmd->add_option("--resamples", tomo_resamples, "Bootstrap resamples (0 = none)");

  for (CLI::App* sub : {lcc_cmd, kak_cmd, proto_cmd, tomo_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    if (*lcc_cmd) return cmd_lcc(g, lcc_path, lcc_form);
    if (*kak_cmd) return cmd_kak(g, kak_path, kak_random);
    if (*proto_cmd) return cmd_protocol(g, scenario_path);
    if (*tomo_cmd) {
      return cmd_tomography(g, tomo_list, tomo_dataset, tomo_ref, tomo_shots, tomo_noise, tomo_resamples);
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 3;
  } catch (const DimensionMismatch& e) {
    std::cerr << "dimension mismatch: " << e.what() << "\n";
    return 4;
  } catch (const UnknownName& e) {
    std::cerr << "unknown name: " << e.what() << "\n";
    return 5;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 6;
  }
  return 1;
}
