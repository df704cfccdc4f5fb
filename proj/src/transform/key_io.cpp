#include "onlp/key_io.hpp"

#include "onlp/errors.hpp"
#include "onlp/json_io.hpp"

namespace onlp::transform {

std::string serialize_key(const SecretKey& key) {
  const Dims d = key.dims();
  json_io::Writer w;
  w.begin_object();
  w.field("version", kKeyFormatVersion);
  w.field("n", d.n);
  w.field("m", d.m);
  w.field("l", d.l);
  w.key("params").begin_object();
  w.field("N", key.params.N);
  w.field("c_eq", key.params.c_eq);
  w.field("c_ineq", key.params.c_ineq);
  w.field("seed", static_cast<std::uint64_t>(key.params.seed));
  w.end_object();
  w.key("shift").vector(key.shift);
  w.key("eq_scale").vector(key.eq_scale);
  w.key("ineq_scale").vector(key.ineq_scale);
  w.key("row_perm_eq").index_list(key.row_perm_eq.one_based());
  w.key("row_perm_ineq").index_list(key.row_perm_ineq.one_based());
  w.key("col_perm").index_list(key.col_perm.one_based());
  w.end_object();
  return w.take() + "\n";
}

SecretKey parse_key(std::string_view text) {
  const json_io::Json doc = json_io::parse(text);
  const json_io::Reader root(doc, "/");
  const auto version = root.at("version").integer();
  if (version != kKeyFormatVersion) {
    root.at("version").fail("unsupported key format version " + std::to_string(version));
  }
  const auto n = static_cast<std::size_t>(root.at("n").unsigned_integer());
  const auto m = static_cast<std::size_t>(root.at("m").unsigned_integer());
  const auto l = static_cast<std::size_t>(root.at("l").unsigned_integer());

  SecretKey key;
  const auto params = root.at("params");
  key.params.N = params.at("N").real();
  key.params.c_eq = params.at("c_eq").real();
  key.params.c_ineq = params.at("c_ineq").real();
  key.params.seed = params.at("seed").unsigned_integer();
  key.shift = root.at("shift").vector(n);
  key.eq_scale = root.at("eq_scale").vector(m);
  key.ineq_scale = root.at("ineq_scale").vector(l);

  auto read_perm = [&](std::string_view field, std::size_t size) {
    const auto node = root.at(field);
    const auto seq = node.index_list(size);
    try {
      return Permutation::from_sequence(seq);
    } catch (const DomainError& e) {
      node.fail(e.what());
    }
  };
  key.row_perm_eq = read_perm("row_perm_eq", m);
  key.row_perm_ineq = read_perm("row_perm_ineq", l);
  key.col_perm = read_perm("col_perm", n);
  key.validate();
  return key;
}

}  // namespace onlp::transform
