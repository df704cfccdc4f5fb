#include "onlp/document.hpp"
#include "onlp/errors.hpp"
#include "onlp/generator.hpp"
#include "onlp/key_io.hpp"
#include "onlp/protocol.hpp"
#include "onlp/transform.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <chrono>
#include <string>

namespace py = pybind11;
using namespace onlp;

namespace {

py::dict solution_dict(const protocol::SolutionDocument& s) {
  py::dict d;
  d["status"] = protocol::to_string(s.status);
  d["termination"] = s.termination ? py::cast(grg::to_string(*s.termination)) : py::none();
  d["reason"] = s.reason;
  d["z_star"] = Vector(s.z_star);
  d["objective_value"] = s.objective_value;
  d["iterations"] = s.iterations;
  d["solver_wall_time_ms"] = s.solver_wall_time_ms;
  return d;
}

transform::Dims dims_of(const NlpProblem& p) { return {p.n(), p.m(), p.l()}; }

}  // namespace

PYBIND11_MODULE(_onlp, m) {
  m.doc() = "Masked outsourcing of quadratic programs: keys, masking, GRG solves.";

  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<DomainError>(m, "DomainError", error.ptr());
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<protocol::ConnectError>(m, "ConnectError", error.ptr());
  py::register_exception<protocol::TimeoutError>(m, "TimeoutError", error.ptr());
  py::register_exception<protocol::ProtocolError>(m, "ProtocolError", error.ptr());
  py::register_exception<protocol::RemoteError>(m, "RemoteError", error.ptr());
  py::register_exception<BasisFailure>(m, "BasisFailure", error.ptr());
  py::register_exception<SingularMatrix>(m, "SingularMatrix", error.ptr());

  m.def(
      "generate",
      [](std::size_t n, std::size_t m_eq, std::size_t l, std::uint64_t seed, double half_width) {
        const bench::GeneratedProblem g = bench::generate_feasible({n, m_eq, l, seed, half_width});
        return py::make_tuple(protocol::serialize_problem(protocol::plain_document(g.problem, g.x0)),
                              g.x0);
      },
      py::arg("n"), py::arg("m"), py::arg("l"), py::arg("seed") = 0, py::arg("half_width") = 10.0,
      "Random feasible instance as (problem document, strictly feasible x0).");

  m.def(
      "keygen",
      [](std::size_t n, std::size_t m_eq, std::size_t l, std::uint64_t seed, double N, double c_eq,
         double c_ineq) {
        transform::KeyParams params{N, c_eq, c_ineq, seed};
        return transform::serialize_key(transform::keygen({n, m_eq, l}, params));
      },
      py::arg("n"), py::arg("m"), py::arg("l"), py::arg("seed") = 0, py::arg("N") = 10.0,
      py::arg("c_eq") = 1.0, py::arg("c_ineq") = 1.0, "Secret key document.");

  m.def(
      "encrypt",
      [](const std::string& problem, const std::string& key_text) {
        const protocol::ProblemDocument doc = protocol::parse_problem(problem);
        if (doc.kind != protocol::ProblemKind::Plain) {
          throw DomainError("encrypt: document is already encrypted");
        }
        const transform::SecretKey key = transform::parse_key(key_text);
        if (key.dims() != dims_of(doc.problem)) {
          throw DomainError("encrypt: key dimensions do not match the problem");
        }
        std::optional<Vector> start;
        if (doc.start_point) start = transform::encrypt_point(*doc.start_point, key);
        return protocol::serialize_problem(
            protocol::encrypted_document(transform::encrypt(doc.problem, key), start));
      },
      py::arg("problem"), py::arg("key"), "Masks a plain problem document.");

  m.def(
      "decrypt",
      [](const Vector& z, const std::string& key_text) {
        return transform::decrypt(z, transform::parse_key(key_text));
      },
      py::arg("z"), py::arg("key"), "Maps a masked solution back to the original variables.");

  m.def(
      "solve",
      [](const std::string& problem) {
        const protocol::ProblemDocument doc = protocol::parse_problem(problem);
        protocol::SolutionDocument s;
        {
          py::gil_scoped_release release;
          s = protocol::solve_document(doc, {});
        }
        return solution_dict(s);
      },
      py::arg("problem"), "Solves a problem document in process.");

  m.def(
      "submit",
      [](const std::string& address, const std::string& problem, double timeout_s) {
        const protocol::ProblemDocument doc = protocol::parse_problem(problem);
        const auto timeout = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::duration<double>(timeout_s));
        protocol::SubmitResult r;
        {
          py::gil_scoped_release release;
          r = protocol::submit(address, doc, timeout);
        }
        return solution_dict(r.solution);
      },
      py::arg("address"), py::arg("problem"), py::arg("timeout") = 60.0,
      "Sends a problem document to a running server.");

  m.def(
      "verify",
      [](const std::string& problem, const Vector& x, double tol) {
        const protocol::ProblemDocument doc = protocol::parse_problem(problem);
        const transform::VerificationReport r = transform::verify_kkt(doc.problem, x, tol);
        py::dict d;
        d["accepted"] = r.accepted;
        d["feasibility_residual"] = r.feasibility_residual;
        d["stationarity_residual"] = r.stationarity_residual;
        d["min_ineq_multiplier"] = r.min_ineq_multiplier;
        d["complementarity_residual"] = r.complementarity_residual;
        d["summary"] = r.summary();
        return d;
      },
      py::arg("problem"), py::arg("x"), py::arg("tol") = 1e-6,
      "KKT check of x against the problem document.");

  m.attr("__version__") = "0.1.0";
}
