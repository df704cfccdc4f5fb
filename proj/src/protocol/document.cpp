#include "onlp/document.hpp"

#include "onlp/errors.hpp"
#include "onlp/json_io.hpp"

#include <utility>
#include <vector>

namespace onlp::protocol {

namespace {

using json_io::Reader;
using json_io::Writer;

void write_quad(Writer& w, const QuadraticForm& q) {
  w.key("quad");
  if (q.is_diagonal()) {
    w.begin_object().key("diag").vector(q.quad_diag()).end_object();
  } else {
    w.matrix(q.quad());
  }
}

QuadraticForm read_form(const Reader& node, std::size_t n, double const_term) {
  const Reader quad = node.at("quad");
  const Vector lin = node.at("lin").vector(n);
  if (quad.node().is_object()) {
    return QuadraticForm::diagonal(quad.at("diag").vector(n), lin, const_term);
  }
  return QuadraticForm::dense(quad.matrix(n, n), lin, const_term);
}

ProblemKind read_kind(const Reader& node) {
  const std::string s = node.string();
  if (s == "plain") return ProblemKind::Plain;
  if (s == "encrypted") return ProblemKind::Encrypted;
  node.fail("unknown problem kind '" + s + "'");
}

}  // namespace

std::string to_string(ProblemKind k) { return k == ProblemKind::Plain ? "plain" : "encrypted"; }

std::string to_string(SolveStatus s) { return s == SolveStatus::Solved ? "solved" : "failed"; }

ProblemDocument plain_document(NlpProblem p, std::optional<Vector> start) {
  return {ProblemKind::Plain, std::move(p), std::move(start)};
}

ProblemDocument encrypted_document(const EncryptedProblem& p, std::optional<Vector> start) {
  return {ProblemKind::Encrypted, p.problem(), std::move(start)};
}

std::string serialize_problem(const ProblemDocument& doc) {
  const NlpProblem& p = doc.problem;
  Writer w;
  w.begin_object();
  w.field("version", kDocumentVersion);
  w.field("kind", to_string(doc.kind));
  w.key("dims").begin_object();
  w.field("n", p.n()).field("m", p.m()).field("l", p.l());
  w.end_object();

  w.key("objective").begin_object();
  write_quad(w, p.objective());
  w.key("lin").vector(p.objective().lin());
  w.field("const", p.objective().const_term());
  w.end_object();

  w.key("equalities").begin_object();
  w.key("matrix").matrix(p.eq_matrix());
  w.key("rhs").vector(p.eq_rhs());
  w.end_object();

  w.key("inequalities").begin_array();
  for (const Inequality& ineq : p.ineqs()) {
    w.begin_object();
    write_quad(w, ineq.form);
    w.key("lin").vector(ineq.form.lin());
    w.field("const", ineq.form.const_term());
    w.field("rhs", ineq.rhs);
    w.end_object();
  }
  w.end_array();

  w.key("bounds").begin_object();
  w.key("lower").vector(p.lower());
  w.key("upper").vector(p.upper());
  w.end_object();

  if (doc.start_point) w.key("start_point").vector(*doc.start_point);
  w.end_object();
  return w.take() + "\n";
}

ProblemDocument parse_problem(std::string_view text) {
  const json_io::Json json = json_io::parse(text);
  const Reader root(json, "/");
  const auto version = root.at("version").integer();
  if (version != kDocumentVersion) {
    root.at("version").fail("unsupported document version " + std::to_string(version));
  }
  ProblemDocument doc;
  doc.kind = read_kind(root.at("kind"));
  const Reader dims = root.at("dims");
  const auto n = static_cast<std::size_t>(dims.at("n").unsigned_integer());
  const auto m = static_cast<std::size_t>(dims.at("m").unsigned_integer());
  const auto l = static_cast<std::size_t>(dims.at("l").unsigned_integer());

  const Reader obj = root.at("objective");
  QuadraticForm objective = read_form(obj, n, obj.at("const").real());

  const Reader eq = root.at("equalities");
  DenseMatrix g = eq.at("matrix").matrix(m, n);
  Vector b = eq.at("rhs").vector(m);

  const Reader ineq_list = root.at("inequalities");
  if (ineq_list.size() != l) {
    ineq_list.fail("expected " + std::to_string(l) + " inequalities, found " +
                   std::to_string(ineq_list.size()));
  }
  std::vector<Inequality> ineqs;
  ineqs.reserve(l);
  for (std::size_t j = 0; j < l; ++j) {
    const Reader row = ineq_list.at(j);
    ineqs.push_back({read_form(row, n, row.at("const").real()), row.at("rhs").real()});
  }

  const Reader bounds = root.at("bounds");
  Vector lower = bounds.at("lower").vector(n);
  Vector upper = bounds.at("upper").vector(n);

  try {
    doc.problem = NlpProblem(std::move(objective), std::move(g), std::move(b), std::move(ineqs),
                             std::move(lower), std::move(upper));
  } catch (const DomainError& e) {
    root.fail(std::string("invalid problem: ") + e.what());
  }
  if (root.has("start_point")) doc.start_point = root.at("start_point").vector(n);
  return doc;
}

std::string serialize_solution(const SolutionDocument& doc) {
  if (doc.solved() && doc.z_star.size() == 0) {
    throw DomainError("a solved document needs a solution vector");
  }
  Writer w;
  w.begin_object();
  w.field("version", kDocumentVersion);
  w.field("status", to_string(doc.status));
  if (doc.termination) w.field("termination", grg::to_string(*doc.termination));
  if (!doc.reason.empty()) w.field("reason", doc.reason);
  w.field("n", static_cast<std::size_t>(doc.z_star.size()));
  w.key("z_star").vector(doc.z_star);
  w.field("objective_value", doc.objective_value);
  w.field("iterations", doc.iterations);
  w.field("solver_wall_time_ms", doc.solver_wall_time_ms);
  w.end_object();
  return w.take() + "\n";
}

SolutionDocument parse_solution(std::string_view text) {
  const json_io::Json json = json_io::parse(text);
  const Reader root(json, "/");
  const auto version = root.at("version").integer();
  if (version != kDocumentVersion) {
    root.at("version").fail("unsupported document version " + std::to_string(version));
  }
  SolutionDocument doc;
  const Reader status = root.at("status");
  const std::string s = status.string();
  if (s == "solved") {
    doc.status = SolveStatus::Solved;
  } else if (s == "failed") {
    doc.status = SolveStatus::Failed;
  } else {
    status.fail("unknown status '" + s + "'");
  }
  if (root.has("termination")) {
    const Reader t = root.at("termination");
    doc.termination = grg::termination_from_string(t.string());
    if (!doc.termination) t.fail("unknown termination '" + t.string() + "'");
  }
  if (root.has("reason")) doc.reason = root.at("reason").string();
  const auto n = static_cast<std::size_t>(root.at("n").unsigned_integer());
  doc.z_star = root.at("z_star").vector(n);
  if (doc.solved() && n == 0) root.at("z_star").fail("solved document without a solution");
  doc.objective_value = root.at("objective_value").real();
  doc.iterations = static_cast<std::size_t>(root.at("iterations").unsigned_integer());
  doc.solver_wall_time_ms = root.at("solver_wall_time_ms").real();
  return doc;
}

}  // namespace onlp::protocol
