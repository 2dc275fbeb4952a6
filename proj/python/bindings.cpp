#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rqc/gates.hpp"
#include "rqc/kak.hpp"
#include "rqc/lcc.hpp"
#include "rqc/protocol.hpp"
#include "rqc/tomography.hpp"

namespace py = pybind11;
using namespace rqc;

namespace {

QuantumState state_of(const ComplexVector& psi) {
  return QuantumState::pure({static_cast<std::size_t>(psi.size())}, psi);
}

}  // namespace

PYBIND11_MODULE(_rqc, m) {
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<DimensionMismatch>(m, "DimensionMismatch", PyExc_ValueError);
  py::register_exception<UnknownName>(m, "UnknownName", PyExc_KeyError);
  py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);

  py::class_<lcc::LinearCombinationSpec>(m, "LinearCombinationSpec")
      .def(py::init<std::vector<Complex>, std::vector<ComplexMatrix>>(), py::arg("coefficients"), py::arg("gates"))
      .def_property_readonly("terms", &lcc::LinearCombinationSpec::terms)
      .def_property_readonly("target_dim", &lcc::LinearCombinationSpec::target_dim)
      .def_property_readonly("coefficients", &lcc::LinearCombinationSpec::coefficients)
      .def_property_readonly("gates", &lcc::LinearCombinationSpec::gates)
      .def("combination", &lcc::LinearCombinationSpec::combination);

  m.def("named_operation", [](const std::string& name) { return gates::named_operation(name).spec; });
  m.def("operation_names", &gates::operation_names);
  m.def("named_gate", [](const std::string& name) { return gates::named_gate(name); });

  // Returns (success_probability, output amplitudes or None).
  m.def(
      "run_lcc",
      [](const lcc::LinearCombinationSpec& spec, const ComplexVector& psi, const std::string& form) {
        const lcc::LccRunResult r = form == "controlled" ? lcc::run_lcc_controlled_form(spec, state_of(psi))
                                                         : lcc::run_lcc(spec, state_of(psi));
        std::optional<ComplexVector> out;
        if (r.output_state) out = r.output_state->amplitudes();
        return py::make_tuple(r.success_probability, out);
      },
      py::arg("spec"), py::arg("psi"), py::arg("form") = "extended");
  m.def("effective_operator", [](const lcc::LinearCombinationSpec& spec) {
    return lcc::effective_operator(spec, lcc::CircuitForm::extended);
  });

  py::class_<kak::KakDecomposition>(m, "KakDecomposition")
      .def_readonly("u1", &kak::KakDecomposition::u1)
      .def_readonly("v1", &kak::KakDecomposition::v1)
      .def_readonly("u2", &kak::KakDecomposition::u2)
      .def_readonly("v2", &kak::KakDecomposition::v2)
      .def_readonly("k", &kak::KakDecomposition::k)
      .def_readonly("alpha", &kak::KakDecomposition::alpha)
      .def_readonly("global_phase", &kak::KakDecomposition::global_phase)
      .def_readonly("residual", &kak::KakDecomposition::residual);
  m.def("kak_decompose", &kak::kak_decompose);
  m.def("kak_reconstruct", &kak::kak_reconstruct);
  m.def("lcu_spec_from_kak", &kak::lcu_spec_from_kak);
  m.def("pauli_spec", &kak::pauli_spec);

  m.def("make_decoy", &protocol::make_decoy, py::arg("rho"), py::arg("epsilon"));
  m.def("success_probability_account", &protocol::success_probability_account, py::arg("spec"),
        py::arg("teleport_input") = false, py::arg("teleport_output") = false);

  m.def(
      "ideal_chi", [](const ComplexMatrix& op) { return tomography::ideal_chi(op).m; }, py::arg("op"));
  m.def(
      "reconstruct_analytic",
      [](const ComplexMatrix& op, double depolarizing) {
        return tomography::reconstruct_mle(tomography::analytic_dataset(op, {depolarizing})).chi.m;
      },
      py::arg("op"), py::arg("depolarizing") = 0.0);
  m.def("process_fidelity", [](const ComplexMatrix& a, const ComplexMatrix& b) {
    return tomography::process_fidelity({a, true}, {b, true});
  });
}
