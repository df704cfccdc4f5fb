#include "onlp/json_io.hpp"

#include "onlp/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <variant>

namespace onlp::json_io {

std::string format_real(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  std::string s(buf.data(), end);
  // Keep the token a JSON number that reads back as a real.
  if (s.find_first_of(".eE") == std::string::npos && s.find("inf") == std::string::npos &&
      s.find("nan") == std::string::npos) {
    s += ".0";
  }
  return s;
}

void Writer::separate() {
  if (after_key_) {
    after_key_ = false;
    return;
  }
  if (!has_element_.empty()) {
    if (has_element_.back()) out_ += ',';
    has_element_.back() = true;
  }
}

Writer& Writer::begin_object() {
  separate();
  out_ += '{';
  has_element_.push_back(false);
  return *this;
}

Writer& Writer::end_object() {
  out_ += '}';
  has_element_.pop_back();
  return *this;
}

Writer& Writer::begin_array() {
  separate();
  out_ += '[';
  has_element_.push_back(false);
  return *this;
}

Writer& Writer::end_array() {
  out_ += ']';
  has_element_.pop_back();
  return *this;
}

Writer& Writer::key(std::string_view k) {
  separate();
  out_ += Json(std::string(k)).dump();
  out_ += ':';
  after_key_ = true;
  return *this;
}

Writer& Writer::value(double v) {
  separate();
  if (std::isinf(v)) {
    out_ += v > 0 ? "\"+inf\"" : "\"-inf\"";
  } else if (std::isnan(v)) {
    out_ += "null";
  } else {
    out_ += format_real(v);
  }
  return *this;
}

Writer& Writer::value(std::int64_t v) {
  separate();
  out_ += std::to_string(v);
  return *this;
}

Writer& Writer::value(std::uint64_t v) {
  separate();
  out_ += std::to_string(v);
  return *this;
}

Writer& Writer::value(bool v) {
  separate();
  out_ += v ? "true" : "false";
  return *this;
}

Writer& Writer::value(std::string_view v) {
  separate();
  out_ += Json(std::string(v)).dump();
  return *this;
}

Writer& Writer::vector(const Vector& v) {
  begin_array();
  for (double x : v) value(x);
  return end_array();
}

Writer& Writer::index_list(const std::vector<std::size_t>& v) {
  begin_array();
  for (std::size_t x : v) value(x);
  return end_array();
}

Writer& Writer::matrix(const DenseMatrix& m) {
  begin_array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    begin_array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) value(m(r, c));
    end_array();
  }
  return end_array();
}

namespace {

// SAX adapter: forwards to nlohmann's DOM builder while tracking the path of
// the value currently being read.
class TrackingSax : public nlohmann::json_sax<Json> {
 public:
  explicit TrackingSax(Json& result) : dom_(result, true) {}

  bool null() override { return step() && dom_.null(); }
  bool boolean(bool v) override { return step() && dom_.boolean(v); }
  bool number_integer(number_integer_t v) override { return step() && dom_.number_integer(v); }
  bool number_unsigned(number_unsigned_t v) override {
    return step() && dom_.number_unsigned(v);
  }
  bool number_float(number_float_t v, const string_t& s) override {
    return step() && dom_.number_float(v, s);
  }
  bool string(string_t& v) override { return step() && dom_.string(v); }
  bool binary(binary_t& v) override { return step() && dom_.binary(v); }

  bool start_object(std::size_t n) override {
    step();
    frames_.push_back(Frame{std::string(), false});
    return dom_.start_object(n);
  }
  bool key(string_t& k) override {
    frames_.back().key = k;
    frames_.back().has_key = true;
    return dom_.key(k);
  }
  bool end_object() override {
    frames_.pop_back();
    return dom_.end_object();
  }
  bool start_array(std::size_t n) override {
    step();
    frames_.push_back(Frame{std::string(), false, true, -1});
    return dom_.start_array(n);
  }
  bool end_array() override {
    frames_.pop_back();
    return dom_.end_array();
  }

  bool parse_error(std::size_t position, const std::string& /*last_token*/,
                   const nlohmann::detail::exception& ex) override {
    error_offset_ = position;
    error_message_ = ex.what();
    failed_ = true;
    return false;
  }

  bool failed() const { return failed_; }
  std::size_t error_offset() const { return error_offset_; }
  const std::string& error_message() const { return error_message_; }

  std::string path() const {
    std::string p;
    for (const auto& f : frames_) {
      if (f.is_array) {
        p += '/';
        p += std::to_string(f.index < 0 ? 0 : f.index);
      } else if (f.has_key) {
        p += '/';
        p += f.key;
      }
    }
    return p.empty() ? "/" : p;
  }

 private:
  struct Frame {
    std::string key;
    bool has_key = false;
    bool is_array = false;
    long index = -1;
  };

  // Called when a value starts; advances the array index of the parent.
  bool step() {
    if (!frames_.empty() && frames_.back().is_array) ++frames_.back().index;
    return true;
  }

  nlohmann::detail::json_sax_dom_parser<Json> dom_;
  std::vector<Frame> frames_;
  bool failed_ = false;
  std::size_t error_offset_ = 0;
  std::string error_message_;
};

}  // namespace

Json parse(std::string_view text) {
  Json result;
  TrackingSax sax(result);
  bool ok = false;
  try {
    ok = Json::sax_parse(text.begin(), text.end(), &sax);
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("malformed document: ") + ex.what(), 0, sax.path());
  }
  if (!ok || sax.failed()) {
    throw ParseError("malformed document: " + sax.error_message(), sax.error_offset(), sax.path());
  }
  return result;
}

bool Reader::has(std::string_view key) const {
  return node_->is_object() && node_->contains(std::string(key));
}

void Reader::fail(const std::string& what) const { throw ParseError(what, 0, path_); }

Reader Reader::at(std::string_view key) const {
  const std::string child_path = (path_ == "/" ? "" : path_) + "/" + std::string(key);
  if (!node_->is_object()) fail("expected an object");
  auto it = node_->find(std::string(key));
  if (it == node_->end()) throw ParseError("missing field", 0, child_path);
  return Reader(*it, child_path);
}

Reader Reader::at(std::size_t index) const {
  if (!node_->is_array()) fail("expected an array");
  if (index >= node_->size()) fail("array index out of range");
  return Reader((*node_)[index], (path_ == "/" ? "" : path_) + "/" + std::to_string(index));
}

std::size_t Reader::size() const {
  if (!node_->is_array()) fail("expected an array");
  return node_->size();
}

double Reader::real() const {
  if (node_->is_number()) return node_->get<double>();
  if (node_->is_string()) {
    const auto& s = node_->get_ref<const std::string&>();
    if (s == "+inf" || s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  fail("expected a real number");
}

std::int64_t Reader::integer() const {
  if (!node_->is_number_integer()) fail("expected an integer");
  return node_->get<std::int64_t>();
}

std::uint64_t Reader::unsigned_integer() const {
  if (!node_->is_number_unsigned()) fail("expected a non-negative integer");
  return node_->get<std::uint64_t>();
}

std::string Reader::string() const {
  if (!node_->is_string()) fail("expected a string");
  return node_->get<std::string>();
}

Vector Reader::vector() const {
  const std::size_t n = size();
  Vector v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = at(i).real();
  return v;
}

Vector Reader::vector(std::size_t expected_len) const {
  if (size() != expected_len) {
    fail("expected " + std::to_string(expected_len) + " entries, found " + std::to_string(size()));
  }
  return vector();
}

std::vector<std::size_t> Reader::index_list(std::size_t expected_len) const {
  if (size() != expected_len) {
    fail("expected " + std::to_string(expected_len) + " entries, found " + std::to_string(size()));
  }
  std::vector<std::size_t> out(expected_len);
  for (std::size_t i = 0; i < expected_len; ++i) {
    out[i] = static_cast<std::size_t>(at(i).unsigned_integer());
  }
  return out;
}

DenseMatrix Reader::matrix(std::size_t rows, std::size_t cols) const {
  if (size() != rows) {
    fail("expected " + std::to_string(rows) + " rows, found " + std::to_string(size()));
  }
  DenseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const Reader row = at(r);
    if (row.size() != cols) {
      row.fail("expected " + std::to_string(cols) + " columns, found " +
               std::to_string(row.size()));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row.at(c).real();
    }
  }
  return m;
}

}  // namespace onlp::json_io
