#pragma once

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "exkit/colfin.hpp"
#include "exkit/exchange.hpp"
#include "exkit/ideal.hpp"
#include "exkit/module.hpp"
#include "exkit/radical.hpp"
#include "exkit/ring.hpp"

namespace exkit::io {

// Parsing -------------------------------------------------------------------------

/// Parses JSON text; syntax errors carry the line and column.
inline json parse_json_text(const std::string& text, const std::string& source = "<input>") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') { ++line; col = 1; }
      else ++col;
    }
    throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
}

inline std::string read_text(const std::string& path) {
  if (path == "-") {
    std::stringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json_file(const std::string& path) { return parse_json_text(read_text(path), path); }

inline std::size_t json_size(const json& j, const char* what) {
  const auto v = detail::json_int(j, what);
  if (v < 0) throw ParseError(std::string(what) + " must be non-negative");
  return static_cast<std::size_t>(v);
}

inline Ring parse_ring(const json& d, std::size_t cap = kDefaultCap);

namespace detail_io {

inline const json& field(const json& obj, const char* key, const char* ctx) {
  if (!obj.is_object() || !obj.contains(key)) throw ParseError(std::string(ctx) + ": missing \"" + key + "\"");
  return obj.at(key);
}

inline std::int64_t base_modulus(const json& desc, const char* ctx) {
  const json& base = field(desc, "base", ctx);
  if (base.is_object() && base.contains("zmod")) return detail::json_int(base.at("zmod"), "zmod modulus");
  throw ParseError(std::string(ctx) + ": base ring must be {\"zmod\": n}");
}

inline std::vector<std::vector<std::size_t>> table_of(const json& j, const char* what) {
  if (!j.is_array()) throw ParseError(std::string("table ") + what + " must be an array of rows");
  std::vector<std::vector<std::size_t>> out;
  for (const auto& row : j) {
    if (!row.is_array()) throw ParseError(std::string("table ") + what + " rows must be arrays");
    std::vector<std::size_t> r;
    for (const auto& v : row) r.push_back(json_size(v, "table entry"));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace detail_io

/// Ring from its descriptor: {"zmod": n}, {"matrix": {"base": {"zmod": n}, "k": k}},
/// {"upper_triangular": ...}, {"product": [...]}, {"corner": {"parent": ..., "e": x}},
/// {"quotient": {"parent": ..., "ideal_gens": [...]}}, {"table": {"size", "add", "mul", "one"}},
/// {"endomorphisms": {"factors": [[p, k], ...]}}.
inline Ring parse_ring(const json& d, std::size_t cap) {
  using detail_io::field;
  if (!d.is_object() || d.size() != 1) throw ParseError("ring descriptor must be an object with one key");
  const auto& [kind, desc] = *d.items().begin();
  if (kind == "zmod") return Ring::zmod(detail::json_int(desc, "zmod modulus"));
  if (kind == "matrix" || kind == "upper_triangular") {
    const auto m = detail_io::base_modulus(desc, kind.c_str());
    const auto k = json_size(field(desc, "k", kind.c_str()), "matrix size k");
    return kind == "matrix" ? Ring::matrix(m, k) : Ring::upper_triangular(m, k);
  }
  if (kind == "product") {
    if (!desc.is_array() || desc.empty()) throw ParseError("product needs a nonempty list of factors");
    std::vector<Ring> fs;
    for (const auto& f : desc) fs.push_back(parse_ring(f, cap));
    return Ring::product(std::move(fs));
  }
  if (kind == "corner") {
    Ring parent = parse_ring(field(desc, "parent", "corner"), cap);
    return Ring::corner(parent, parent.from_json(field(desc, "e", "corner")));
  }
  if (kind == "quotient") {
    Ring parent = parse_ring(field(desc, "parent", "quotient"), cap);
    const json& gens = field(desc, "ideal_gens", "quotient");
    if (!gens.is_array()) throw ParseError("quotient: ideal_gens must be an array");
    std::vector<Element> g;
    for (const auto& x : gens) g.push_back(parent.from_json(x));
    return quotient_ring(parent, g, cap);
  }
  if (kind == "table") {
    return Ring::table(json_size(field(desc, "size", "table"), "table size"),
                       detail_io::table_of(field(desc, "add", "table"), "add"),
                       detail_io::table_of(field(desc, "mul", "table"), "mul"),
                       json_size(field(desc, "one", "table"), "table identity"));
  }
  if (kind == "endomorphisms") {
    const json& fs = field(desc, "factors", "endomorphisms");
    if (!fs.is_array()) throw ParseError("endomorphisms: factors must be [[p, k], ...]");
    std::vector<std::pair<std::int64_t, std::int64_t>> factors;
    for (const auto& f : fs) {
      if (!f.is_array() || f.size() != 2) throw ParseError("endomorphisms: each factor is [p, k]");
      factors.emplace_back(detail::json_int(f[0], "prime"), detail::json_int(f[1], "exponent"));
    }
    return endomorphism_ring(FiniteAbelianModule(std::move(factors)));
  }
  throw ParseError("unknown ring kind \"" + kind + "\"");
}

inline Ring load_ring(const std::string& path, std::size_t cap = kDefaultCap) {
  return parse_ring(read_json_file(path), cap);
}

/// Family of elements: a JSON array of element literals, or a comma list of
/// integers.
inline std::vector<Element> parse_family(const Ring& r, const std::string& text) {
  std::vector<Element> out;
  const auto first = text.find_first_not_of(" \t");
  if (first != std::string::npos && text[first] == '[') {
    json j = parse_json_text(text, "--family");
    if (!j.is_array()) throw ParseError("--family must be a JSON array");
    for (const auto& x : j) out.push_back(r.from_json(x));
    return out;
  }
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(r.from_json(parse_json_text(tok, "--family")));
  if (out.empty()) throw ParseError("--family is empty");
  return out;
}

/// Rational from a JSON integer or a string "p/q".
inline colfin::Q parse_rational(const json& j) {
  if (j.is_number_integer()) return colfin::Q(static_cast<long>(j.get<std::int64_t>()));
  if (!j.is_string()) throw ParseError("rational must be an integer or a string \"p/q\"");
  colfin::Q q;
  if (q.set_str(j.get<std::string>(), 10) != 0) throw ParseError("bad rational \"" + j.get<std::string>() + "\"");
  if (q.get_den() == 0) throw ParseError("rational with zero denominator");
  q.canonicalize();
  return q;
}

/// Column-finite family description:
///   {"family": "singleton"} | {"family": "diagonal"} | {"family": "banded", "c": "1/2"}
///   {"family": "block_pairs", "blocks": [[[a, b], [c, d]], ...]}
///   {"family": "explicit", "members": [{"entries": [[row, col, q], ...], "extent": n, "tail": q}, ...],
///    "support": [[members touching column 0], [column 1], ...], "support_beyond": [...]}
/// The support lists are the per-column certificate; explicit families are
/// checked against it when loaded.
inline colfin::SummableFamily parse_colfin_family(const json& desc) {
  using colfin::BlockForm;
  using colfin::Q;
  const std::string kind = detail_io::field(desc, "family", "family description").get<std::string>();
  if (kind == "singleton") return colfin::singleton_family();
  if (kind == "diagonal") return colfin::diagonal_family();
  if (kind == "banded") return colfin::banded_family(parse_rational(detail_io::field(desc, "c", "banded")));
  if (kind == "block_pairs") {
    std::vector<std::array<std::array<Q, 2>, 2>> blocks;
    for (const auto& b : detail_io::field(desc, "blocks", "block_pairs")) {
      if (!b.is_array() || b.size() != 2 || !b[0].is_array() || b[0].size() != 2 || !b[1].is_array() || b[1].size() != 2)
        throw ParseError("block_pairs: each block is [[a, b], [c, d]]");
      std::array<std::array<Q, 2>, 2> a;
      for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c) a[r][c] = parse_rational(b[r][c]);
      blocks.push_back(a);
    }
    return colfin::block_pair_family(std::move(blocks));
  }
  if (kind == "explicit") {
    std::vector<BlockForm> forms;
    std::size_t reach = 0;
    for (const auto& m : detail_io::field(desc, "members", "explicit")) {
      BlockForm f;
      f.extent = json_size(detail_io::field(m, "extent", "member"), "extent");
      f.tail = m.contains("tail") ? parse_rational(m.at("tail")) : Q(0);
      for (const auto& e : detail_io::field(m, "entries", "member")) {
        if (!e.is_array() || e.size() != 3) throw ParseError("explicit: entries are [row, col, value]");
        const auto r = json_size(e[0], "row"), c = json_size(e[1], "col");
        if (r >= f.extent || c >= f.extent) throw ParseError("explicit: entry outside the member's extent");
        f.entries.emplace_back(r, c, parse_rational(e[2]));
      }
      reach = std::max(reach, f.extent);
      forms.push_back(std::move(f));
    }
    if (forms.empty()) throw ParseError("explicit: no members");
    std::vector<std::vector<std::size_t>> support;
    for (const auto& col : detail_io::field(desc, "support", "explicit")) {
      std::vector<std::size_t> s;
      for (const auto& i : col) s.push_back(json_size(i, "support member"));
      support.push_back(std::move(s));
    }
    std::vector<std::size_t> beyond;
    if (desc.contains("support_beyond"))
      for (const auto& i : desc.at("support_beyond")) beyond.push_back(json_size(i, "support member"));
    auto cert = [support, beyond](std::size_t j) { return j < support.size() ? support[j] : beyond; };
    colfin::SummableFamily fam("explicit", forms.size(), [forms](std::size_t i) { return forms[i]; }, cert);
    // Every nonzero column of every member must be certified.
    for (std::size_t i = 0; i < forms.size(); ++i) {
      const auto m = fam.member(i);
      for (std::size_t j = 0; j <= std::max(reach, support.size()); ++j) {
        if (m.column(j).empty()) continue;
        const auto c = cert(j);
        if (std::find(c.begin(), c.end(), i) == c.end()) throw SummabilityViolated(j);
      }
    }
    return fam;
  }
  throw ParseError("unknown family kind \"" + kind + "\"");
}

// Output --------------------------------------------------------------------------

inline json elements_json(const Ring& r, const std::vector<Element>& xs) {
  json out = json::array();
  for (const auto& x : xs) out.push_back(r.to_json(x));
  return out;
}

inline json flag_json(const Ring& r, const Flag& f) {
  json j = {{"value", f.value}, {"witness", elements_json(r, f.witness)}};
  if (!f.note.empty()) j["note"] = f.note;
  return j;
}

inline json classification_json(const Ring& r, const ClassificationReport& c) {
  json j;
  const std::pair<const char*, const Flag*> flags[] = {
      {"suitable", &c.suitable},       {"regular", &c.regular},
      {"pi_regular", &c.pi_regular},   {"strongly_pi_regular", &c.strongly_pi_regular},
      {"semiregular", &c.semiregular}, {"semi_pi_regular", &c.semi_pi_regular},
      {"dedekind_finite", &c.dedekind_finite}, {"cohopfian_rr", &c.cohopfian_rr},
      {"c2_rr", &c.c2_rr}};
  json witnesses;
  for (const auto& [name, f] : flags) {
    j[name] = f->value;
    witnesses[name] = flag_json(r, *f);
  }
  j["witnesses"] = witnesses;
  j["quotient_suitable"] = c.quotient_suitable;
  j["quotient_regular"] = c.quotient_regular;
  j["quotient_pi_regular"] = c.quotient_pi_regular;
  j["idempotents_lift"] = c.idempotents_lift;
  j["size"] = c.size;
  j["radical_size"] = c.radical_size;
  j["lattice_violations"] = c.lattice_violations();
  j["ring"] = r.descriptor();
  return j;
}

inline json stage_json(const Ring& r, const StageState<Element>& s) {
  return {{"stage", s.stage},     {"e", elements_json(r, s.e)}, {"s", elements_json(r, s.s)},
          {"f", r.to_json(s.f)},  {"t", r.to_json(s.t)},        {"v", r.to_json(s.v)},
          {"v_inv", r.to_json(s.v_inv)}, {"y", r.to_json(s.y)}};
}

inline json certificate_json(const Ring& r, const ExchangeCertificate<Element>& c) {
  return {{"ring", r.descriptor()}, {"x", elements_json(r, c.x)}, {"e", elements_json(r, c.e)},
          {"s", elements_json(r, c.s)}};
}

/// Certificate from JSON written by certificate_json (the ring is embedded).
inline std::pair<Ring, ExchangeCertificate<Element>> certificate_from_json(const json& j,
                                                                          std::size_t cap = kDefaultCap) {
  Ring r = parse_ring(detail_io::field(j, "ring", "certificate"), cap);
  ExchangeCertificate<Element> c;
  auto list = [&](const char* key) {
    std::vector<Element> out;
    const json& a = detail_io::field(j, key, "certificate");
    if (!a.is_array()) throw ParseError(std::string("certificate: ") + key + " must be an array");
    for (const auto& x : a) out.push_back(r.from_json(x));
    return out;
  };
  c.x = list("x");
  c.e = list("e");
  c.s = list("s");
  return {r, c};
}

inline json radical_json(const RadicalData& rad) {
  std::vector<Element> members;
  const auto& all = rad.ring.elements();
  for (std::size_t i = 0; i < all.size(); ++i)
    if (rad.J.member[i]) members.push_back(all[i]);
  return {{"ring", rad.ring.descriptor()},
          {"radical", elements_json(rad.ring, members)},
          {"generators", elements_json(rad.ring, rad.J.generators)},
          {"radical_size", members.size()},
          {"quotient", rad.quotient.descriptor()},
          {"quotient_size", rad.quotient.elements().size()},
          {"nilpotency_index", rad.nilpotency_index}};
}

inline json lemma1_json(const Lemma1Report& l) {
  return {{"left_strongly_iso", l.left_strongly_iso},
          {"same_left_ideal", l.same_left_ideal},
          {"corner_translate", l.corner_translate},
          {"unit_multiple", l.unit_multiple},
          {"complements_right_iso", l.complements_right_iso},
          {"all_agree", l.all_agree()}};
}

inline std::string rational_str(const colfin::Q& q) { return q.get_str(); }

inline json qmatrix_json(const colfin::QMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols; ++j) row.push_back(rational_str(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

inline json unit_limit_json(const colfin::UnitLimitReport& r) {
  const bool units = std::all_of(r.unit_invertible.begin(), r.unit_invertible.end(), [](bool b) { return b; });
  return {{"window", r.window},
          {"depth", r.depth},
          {"units_invertible", r.unit_invertible},
          {"all_units_invertible", units},
          {"agreeing_columns", r.agreeing_columns},
          {"differences_vanish", r.differences_vanish},
          {"converges_on_window", r.converges_on_window},
          {"shift_injective", r.shift_injective},
          {"shift_left_non_zero_divisor", r.shift_left_non_zero_divisor},
          {"shift_not_surjective", r.shift_not_surjective},
          {"shift_no_right_inverse", r.shift_no_right_inverse},
          {"shift_rank", r.shift_rank},
          {"shift_window", qmatrix_json(colfin::ColFinMatrix::shift().window(r.window + 1, r.window))}};
}

inline json truncated_chain_json(const colfin::TruncatedChainReport& rep, const colfin::BlockScalarRing& ring,
                                 const std::optional<colfin::DepthComparison>& cmp = std::nullopt) {
  const std::size_t w = rep.window.width;
  auto win = [&](const colfin::BlockScalar& x) { return qmatrix_json(ring.to_matrix(x).window(w, w)); };
  json stages = json::array();
  for (const auto& s : rep.stages) {
    json es = json::array();
    for (const auto& e : s.e) es.push_back(win(e));
    stages.push_back({{"stage", s.stage}, {"e", es}, {"f", win(s.f)}, {"v", win(s.v)}, {"v_inv", win(s.v_inv)}});
  }
  json cols = json::array();
  for (const auto& c : rep.columns) {
    json cj = {{"column", c.column}, {"resolved", c.resolved}};
    if (c.resolved) {
      cj["e_stable_stage"] = c.e_stable_stage;
      cj["phi_stable_stage"] = c.phi_stable_stage;
      cj["phi_matches_v_inverse"] = c.phi_matches_v_inverse;
    } else {
      cj["status"] = "undetermined at depth " + std::to_string(rep.stages_run);
      cj["phi_matches_v_inverse_at_depth"] = c.phi_matches_v_inverse;
    }
    cols.push_back(cj);
  }
  json j = {{"family", rep.family},
            {"depth", rep.window.depth},
            {"width", rep.window.width},
            {"block_size", rep.block_size},
            {"stages_run", rep.stages_run},
            {"invariants_hold", rep.invariants_hold},
            {"stages", stages},
            {"columns", cols}};
  if (cmp) {
    j["depth_comparison"] = {{"compared_depth", rep.window.depth + 2},
                             {"compared_columns", cmp->compared_columns},
                             {"mismatched_columns", cmp->mismatched_columns},
                             {"agree", cmp->agree()}};
  }
  return j;
}

inline json module_json(const FiniteAbelianModule& m) {
  json fs = json::array();
  for (const auto& [p, k] : m.factors()) fs.push_back({p, k});
  return {{"factors", fs}, {"description", m.describe()}, {"size", m.size().value_or(0)}};
}

inline json module_c2_json(const FiniteAbelianModule& m, const ModuleC2Report& r) {
  json j = {{"module", module_json(m)},
            {"c2", r.has_c2},
            {"submodules", r.submodules},
            {"summand_type_submodules", r.summand_type_submodules}};
  if (r.witness) j["witness"] = *r.witness;
  if (r.witness_summand) j["isomorphic_summand"] = *r.witness_summand;
  return j;
}

inline json lemma8_json(const FiniteAbelianModule& m, const Lemma8Report& r) {
  const Ring e = endomorphism_ring(m);
  json j = {{"module", module_json(m)},
            {"module_c2", r.module_c2},
            {"ring_method", r.ring_method},
            {"implication_holds", r.implication_holds},
            {"endomorphism_ring", e.descriptor()},
            {"cohopfian", {{"module", true}, {"ring", true}, {"tag", r.cohopfian_tag}}}};
  j["ring_c2"] = r.ring_c2 ? json(*r.ring_c2) : json(nullptr);
  if (r.ring_size) j["ring_size"] = r.ring_size;
  if (r.module_witness) j["module_witness"] = *r.module_witness;
  if (r.ring_idempotent) j["ring_witness"] = {{"e", e.to_json(*r.ring_idempotent)}, {"a", e.to_json(*r.ring_element)}};
  return j;
}

}  // namespace exkit::io
