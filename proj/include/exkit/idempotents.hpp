#pragma once

#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "exkit/ring.hpp"

namespace exkit {

/// An ordered family of idempotents. Position in the vector is the
/// well-order: "almost orthogonal" conditions constrain e_i e_j for i < j only.
template <class V>
using Family = std::vector<V>;

namespace detail {

template <RingLike R>
void require_idempotent(const R& r, const typename R::value_type& e, const char* name) {
  if (!r.eq(r.mul(e, e), e)) throw NotIdempotent(std::string(name) + " is not idempotent");
}

template <RingLike R>
typename R::value_type family_sum(const R& r, const Family<typename R::value_type>& fam) {
  auto acc = r.zero();
  for (const auto& x : fam) acc = r.add(acc, x);
  return acc;
}

[[noreturn]] inline void broken(const std::string& what) { throw InvariantViolated(0, what); }

}  // namespace detail

/// e ~ e': e'e = e' and ee' = e.
template <RingLike R>
bool is_left_strongly_iso(const R& r, const typename R::value_type& e, const typename R::value_type& e_prime) {
  detail::require_idempotent(r, e, "e");
  detail::require_idempotent(r, e_prime, "e'");
  return r.eq(r.mul(e_prime, e), e_prime) && r.eq(r.mul(e, e_prime), e);
}

/// The mirror relation: ee' = e' and e'e = e.
template <RingLike R>
bool is_right_strongly_iso(const R& r, const typename R::value_type& e, const typename R::value_type& e_prime) {
  detail::require_idempotent(r, e, "e");
  detail::require_idempotent(r, e_prime, "e'");
  return r.eq(r.mul(e, e_prime), e_prime) && r.eq(r.mul(e_prime, e), e);
}

template <class V>
struct StrongIsoWitness {
  V e, e_prime, u, u_inv;
};

/// Unit u = 1 + e' - e with e' = ue and u(1-e) = 1-e; u^{-1} = 1 - e' + e.
/// Every identity of the witness, including the secondary ones
/// u(1-e') = 1-e', eu = e, e'u = e', (1-e)u^{-1} = 1-e', is re-checked.
template <RingLike R>
StrongIsoWitness<typename R::value_type> unit_from_strong_iso(const R& r, const typename R::value_type& e,
                                                              const typename R::value_type& e_prime) {
  if (!is_left_strongly_iso(r, e, e_prime)) throw NotStronglyIso("e and e' are not left strongly isomorphic");
  const auto one = r.one();
  StrongIsoWitness<typename R::value_type> w{e, e_prime, r.sub(r.add(one, e_prime), e),
                                             r.add(r.sub(one, e_prime), e)};
  const auto ce = r.sub(one, e), ce2 = r.sub(one, e_prime);
  auto check = [&](bool ok, const char* what) {
    if (!ok) detail::broken(std::string("strong-iso unit: ") + what);
  };
  check(r.eq(r.mul(w.u, e), e_prime), "ue = e'");
  check(r.eq(r.mul(w.u, ce), ce), "u(1-e) = 1-e");
  check(r.eq(r.mul(w.u, ce2), ce2), "u(1-e') = 1-e'");
  check(r.eq(r.mul(e, w.u), e), "eu = e");
  check(r.eq(r.mul(e_prime, w.u), e_prime), "e'u = e'");
  check(r.eq(r.mul(ce, w.u_inv), ce2), "(1-e)u^-1 = 1-e'");
  check(r.eq(r.mul(w.u, w.u_inv), one) && r.eq(r.mul(w.u_inv, w.u), one), "u u^-1 = u^-1 u = 1");
  return w;
}

/// Pairwise-orthogonal split of 1 into corner pieces produced by a corner
/// decomposer: f2 = s2 * a, f3 = s3 * b inside fRf with f2 + f3 = f.
template <class V>
struct CornerSplit {
  V f2, f3, s2, s3;
};

/// Output of the three-term refinement: e_i = s_i x_i.
template <class V>
struct Refinement {
  V e1, e2, e3;
  V s1, s2, s3;
};

/// Given x1 + x2 + x3 = 1 with x1 idempotent, produces pairwise orthogonal
/// idempotents e_i in R x_i summing to 1 with x1 ~ e1.
///
/// `split(f, a, b)` must return a CornerSplit for a + b = f in the corner fRf
/// (or std::nullopt when the corner equation has no solution).
template <RingLike R, class Splitter>
Refinement<typename R::value_type> refine_three(const R& r, const typename R::value_type& x1,
                                                const typename R::value_type& x2,
                                                const typename R::value_type& x3, Splitter&& split) {
  using V = typename R::value_type;
  const V one = r.one();
  if (!r.eq(r.mul(x1, x1), x1)) throw PreconditionFailed("refine_three: x1 is not idempotent");
  if (!r.eq(r.add(r.add(x1, x2), x3), one)) throw PreconditionFailed("refine_three: x1 + x2 + x3 != 1");

  const V f = r.sub(one, x1);
  const V a = r.mul(r.mul(f, x2), f);
  const V b = r.mul(r.mul(f, x3), f);
  std::optional<CornerSplit<V>> cs = split(f, a, b);
  if (!cs) throw NotSuitable("refine_three: corner decomposition of f x2 f + f x3 f = f has no solution");

  Refinement<V> out;
  // e2 = f2 r2 f x2, e3 = f3 r3 f x3 with r_i the corner multipliers.
  out.s2 = r.mul(r.mul(cs->f2, cs->s2), f);
  out.s3 = r.mul(r.mul(cs->f3, cs->s3), f);
  out.e2 = r.mul(out.s2, x2);
  out.e3 = r.mul(out.s3, x3);
  out.e1 = r.sub(r.sub(one, out.e2), out.e3);
  out.s1 = out.e1;  // e1 x1 = e1

  auto check = [&](bool ok, const char* what) {
    if (!ok) detail::broken(std::string("refine_three: ") + what);
  };
  check(r.eq(r.mul(out.e1, out.e1), out.e1) && r.eq(r.mul(out.e2, out.e2), out.e2) &&
            r.eq(r.mul(out.e3, out.e3), out.e3),
        "outputs idempotent");
  const V z = r.zero();
  check(r.eq(r.mul(out.e1, out.e2), z) && r.eq(r.mul(out.e2, out.e1), z) && r.eq(r.mul(out.e1, out.e3), z) &&
            r.eq(r.mul(out.e3, out.e1), z) && r.eq(r.mul(out.e2, out.e3), z) && r.eq(r.mul(out.e3, out.e2), z),
        "outputs pairwise orthogonal");
  check(r.eq(r.mul(out.s1, x1), out.e1), "e1 in R x1");
  check(r.eq(r.mul(x1, out.e1), x1) && r.eq(r.mul(out.e1, x1), out.e1), "x1 ~ e1");
  return out;
}

/// Transports an orthogonal decomposition g of e along e ~ e': returns
/// {e' g_i}. Checks orthogonality to `f_extra` when supplied.
template <RingLike R>
Family<typename R::value_type> transport_family(const R& r, const typename R::value_type& e,
                                                const typename R::value_type& e_prime,
                                                const Family<typename R::value_type>& g,
                                                const std::optional<typename R::value_type>& f_extra = {}) {
  using V = typename R::value_type;
  if (!is_left_strongly_iso(r, e, e_prime)) throw PreconditionFailed("transport_family: e and e' are not ~");
  const V z = r.zero();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!r.eq(r.mul(g[i], g[i]), g[i]))
      throw PreconditionFailed("transport_family: member " + std::to_string(i) + " is not idempotent");
    for (std::size_t j = 0; j < g.size(); ++j)
      if (i != j && !r.eq(r.mul(g[i], g[j]), z))
        throw PreconditionFailed("transport_family: members " + std::to_string(i) + ", " + std::to_string(j) +
                                 " are not orthogonal");
  }
  if (!r.eq(detail::family_sum(r, g), e)) throw PreconditionFailed("transport_family: family does not sum to e");
  if (f_extra) {
    if (!r.eq(r.mul(*f_extra, *f_extra), *f_extra) || !r.eq(r.mul(*f_extra, e), z) ||
        !r.eq(r.mul(e, *f_extra), z))
      throw PreconditionFailed("transport_family: f is not an idempotent orthogonal to e");
  }
  const auto w = unit_from_strong_iso(r, e, e_prime);
  Family<V> out;
  for (const auto& gi : g) out.push_back(r.mul(e_prime, gi));
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!r.eq(out[i], r.mul(w.u, g[i]))) detail::broken("transport_family: e'g_i = u g_i");
    if (!is_left_strongly_iso(r, g[i], out[i])) detail::broken("transport_family: g_i ~ e'g_i");
    for (std::size_t j = 0; j < out.size(); ++j)
      if (i != j && !r.eq(r.mul(out[i], out[j]), z)) detail::broken("transport_family: outputs orthogonal");
    if (f_extra && (!r.eq(r.mul(*f_extra, g[i]), z) || !r.eq(r.mul(g[i], *f_extra), z)))
      detail::broken("transport_family: f orthogonal to g_i");
  }
  return out;
}

/// {u^{-1} e_i} for a family with e_i e_j in J (i < j) and sum u a unit.
/// `in_radical` decides membership in J; `u_inv` is the inverse of the sum.
template <RingLike R, class InRadical>
Family<typename R::value_type> orthogonalize(const R& r, const Family<typename R::value_type>& fam,
                                             const typename R::value_type& u, const typename R::value_type& u_inv,
                                             InRadical&& in_radical) {
  using V = typename R::value_type;
  const V one = r.one(), z = r.zero();
  if (!r.eq(detail::family_sum(r, fam), u)) throw PreconditionFailed("orthogonalize: family does not sum to u");
  if (!r.eq(r.mul(u, u_inv), one) || !r.eq(r.mul(u_inv, u), one)) throw NotUnit("orthogonalize: u is not a unit");
  for (std::size_t i = 0; i < fam.size(); ++i) {
    if (!r.eq(r.mul(fam[i], fam[i]), fam[i]))
      throw NotIdempotent("orthogonalize: member " + std::to_string(i) + " is not idempotent");
    for (std::size_t j = i + 1; j < fam.size(); ++j)
      if (!in_radical(r.mul(fam[i], fam[j]))) throw PairNotInRadical(i, j);
  }
  Family<V> out;
  for (const auto& e : fam) out.push_back(r.mul(u_inv, e));
  V total = z;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!r.eq(r.mul(out[i], out[i]), out[i])) detail::broken("orthogonalize: output idempotent");
    for (std::size_t j = 0; j < out.size(); ++j)
      if (i != j && !r.eq(r.mul(out[i], out[j]), z)) detail::broken("orthogonalize: outputs orthogonal");
    total = r.add(total, out[i]);
  }
  if (!r.eq(total, one)) detail::broken("orthogonalize: outputs sum to 1");
  return out;
}

/// Checks that e_i r = 0 for every member and e r = 0, given e_i e_j = 0
/// (i < j) and e^n r = 0 for e the family sum.
template <RingLike R>
bool power_kill(const R& r, const Family<typename R::value_type>& fam, const typename R::value_type& x,
                std::size_t n) {
  using V = typename R::value_type;
  const V z = r.zero();
  if (n == 0) throw PreconditionFailed("power_kill: n must be positive");
  for (std::size_t i = 0; i < fam.size(); ++i) {
    if (!r.eq(r.mul(fam[i], fam[i]), fam[i])) throw PreconditionFailed("power_kill: member is not idempotent");
    for (std::size_t j = i + 1; j < fam.size(); ++j)
      if (!r.eq(r.mul(fam[i], fam[j]), z))
        throw PreconditionFailed("power_kill: e_i e_j != 0 for i < j at (" + std::to_string(i) + ", " +
                                 std::to_string(j) + ")");
  }
  const V e = detail::family_sum(r, fam);
  V en_x = x;
  for (std::size_t k = 0; k < n; ++k) en_x = r.mul(e, en_x);
  if (!r.eq(en_x, z)) throw PreconditionFailed("power_kill: e^n r != 0");
  for (const auto& ei : fam)
    if (!r.eq(r.mul(ei, x), z)) detail::broken("power_kill: e_i r = 0");
  if (!r.eq(r.mul(e, x), z)) detail::broken("power_kill: e r = 0");
  return true;
}

// Finite-ring clauses --------------------------------------------------------

struct Lemma1Report {
  bool left_strongly_iso = false;     // e ~ e'
  bool same_left_ideal = false;       // Re = Re'
  bool corner_translate = false;      // e' = e + (1-e) r e for some r
  bool unit_multiple = false;         // e' = u e for some unit u
  bool complements_right_iso = false; // (1-e) ∽ (1-e')
  bool all_agree() const {
    return left_strongly_iso == same_left_ideal && same_left_ideal == corner_translate &&
           corner_translate == unit_multiple && unit_multiple == complements_right_iso;
  }
};

/// Evaluates the five equivalent clauses independently by enumeration.
inline Lemma1Report lemma1_equivalences(const Ring& r, const Element& e, const Element& e_prime,
                                        std::size_t cap = kDefaultCap) {
  Lemma1Report rep;
  rep.left_strongly_iso = is_left_strongly_iso(r, e, e_prime);
  const auto& all = r.elements(cap);
  std::unordered_set<Element, ElementHash> re, re2;
  for (const auto& s : all) {
    re.insert(r.mul(s, e));
    re2.insert(r.mul(s, e_prime));
  }
  rep.same_left_ideal = re == re2;
  const Element one = r.one(), ce = r.sub(one, e);
  for (const auto& s : all)
    if (r.add(e, r.mul(r.mul(ce, s), e)) == e_prime) { rep.corner_translate = true; break; }
  for (const auto& u : r.units(cap))
    if (r.mul(u, e) == e_prime) { rep.unit_multiple = true; break; }
  rep.complements_right_iso = is_right_strongly_iso(r, ce, r.sub(one, e_prime));
  return rep;
}

}  // namespace exkit
