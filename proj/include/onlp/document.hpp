#pragma once

// Text documents exchanged between the client and the cloud server.
//
// Problem document, fields in this order:
//   {version, kind, dims{n, m, l}, objective{quad, lin, const},
//    equalities{matrix, rhs}, inequalities[{quad, lin, const, rhs}],
//    bounds{lower, upper}, start_point?}
// A quadratic part is either an array of rows (dense) or {"diag": [...]}.
// Infinite bounds are the strings "+inf" / "-inf".
//
// Solution document:
//   {version, status, termination?, reason?, n, z_star, objective_value,
//    iterations, solver_wall_time_ms}

#include "onlp/grg.hpp"
#include "onlp/matrix.hpp"
#include "onlp/problem.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace onlp::protocol {

inline constexpr int kDocumentVersion = 1;

enum class ProblemKind { Plain, Encrypted };

struct ProblemDocument {
  ProblemKind kind = ProblemKind::Plain;
  NlpProblem problem;
  /// Feasible point in the document's own variables (z for encrypted ones).
  std::optional<Vector> start_point;
};

ProblemDocument plain_document(NlpProblem p, std::optional<Vector> start = std::nullopt);
ProblemDocument encrypted_document(const EncryptedProblem& p,
                                   std::optional<Vector> start = std::nullopt);

std::string serialize_problem(const ProblemDocument& doc);
/// Throws ParseError (byte offset and field path) for malformed text and for
/// contents that do not form a valid problem.
ProblemDocument parse_problem(std::string_view text);

enum class SolveStatus { Solved, Failed };

struct SolutionDocument {
  SolveStatus status = SolveStatus::Failed;
  /// Absent when the solver never ran (for example no feasible start).
  std::optional<grg::Termination> termination;
  /// Free text for failures; empty when solved.
  std::string reason;
  /// Solution in the problem's own variables, slacks stripped. May hold the
  /// last iterate of a failed run, or be empty.
  Vector z_star;
  double objective_value = 0.0;
  std::size_t iterations = 0;
  double solver_wall_time_ms = 0.0;

  bool solved() const noexcept { return status == SolveStatus::Solved; }
};

/// Throws DomainError for a solved document without a solution vector.
std::string serialize_solution(const SolutionDocument& doc);
/// Checks that a solved document carries z_star of length n.
SolutionDocument parse_solution(std::string_view text);

std::string to_string(ProblemKind k);
std::string to_string(SolveStatus s);

}  // namespace onlp::protocol
