#pragma once

// Minimal JSON writing and path-aware reading shared by the key file and the
// problem/solution documents. Output is compact, field order is exactly the
// call order, and reals are printed as the shortest decimal that parses back
// to the same binary64 value. Infinite values use the string sentinels
// "+inf" and "-inf".

#include "onlp/matrix.hpp"

#include <json.hpp>

#include <concepts>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace onlp::json_io {

using Json = nlohmann::ordered_json;

class Writer {
 public:
  Writer& begin_object();
  Writer& end_object();
  Writer& begin_array();
  Writer& end_array();
  Writer& key(std::string_view k);

  Writer& value(double v);
  Writer& value(std::int64_t v);
  Writer& value(std::uint64_t v);
  Writer& value(int v) { return value(static_cast<std::int64_t>(v)); }
  template <std::unsigned_integral T>
    requires(!std::same_as<T, bool>)
  Writer& value(T v) {
    return value(static_cast<std::uint64_t>(v));
  }
  Writer& value(bool v);
  Writer& value(std::string_view v);
  Writer& value(const char* v) { return value(std::string_view(v)); }

  Writer& vector(const Vector& v);
  Writer& index_list(const std::vector<std::size_t>& v);
  /// Matrix as an array of row arrays.
  Writer& matrix(const DenseMatrix& m);

  template <typename T>
  Writer& field(std::string_view k, const T& v) {
    key(k);
    return value(v);
  }

  const std::string& str() const noexcept { return out_; }
  std::string take() { return std::move(out_); }

 private:
  void separate();

  std::string out_;
  // One flag per open container: true once it holds an element.
  std::vector<bool> has_element_;
  bool after_key_ = false;
};

/// Shortest round-trip decimal for a finite double.
std::string format_real(double v);

/// Parses text, throwing ParseError with the byte offset and the path of the
/// innermost field being read when the syntax error hit.
Json parse(std::string_view text);

/// Read-only view over a parsed node that remembers its path so every type
/// or presence error names the offending field.
class Reader {
 public:
  Reader(const Json& node, std::string path) : node_(&node), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }
  const Json& node() const noexcept { return *node_; }

  bool has(std::string_view key) const;
  Reader at(std::string_view key) const;
  Reader at(std::size_t index) const;
  std::size_t size() const;  // array length

  double real() const;
  std::int64_t integer() const;
  std::uint64_t unsigned_integer() const;
  std::string string() const;

  Vector vector(std::size_t expected_len) const;
  Vector vector() const;
  std::vector<std::size_t> index_list(std::size_t expected_len) const;
  DenseMatrix matrix(std::size_t rows, std::size_t cols) const;

  [[noreturn]] void fail(const std::string& what) const;

 private:
  const Json* node_;
  std::string path_;
};

}  // namespace onlp::json_io
