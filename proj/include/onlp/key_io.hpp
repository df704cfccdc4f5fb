#pragma once

#include "onlp/transform.hpp"

#include <string>
#include <string_view>

namespace onlp::transform {

inline constexpr int kKeyFormatVersion = 1;

/// Key file: {version, n, m, l, params{N, c_eq, c_ineq, seed}, shift[],
/// eq_scale[], ineq_scale[], row_perm_eq[], row_perm_ineq[], col_perm[]}.
/// Permutations are written one-based.
std::string serialize_key(const SecretKey& key);

/// Throws ParseError for malformed text or missing fields and DomainError when
/// the decoded key violates its invariants.
SecretKey parse_key(std::string_view text);

}  // namespace onlp::transform
