#pragma once

#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "exkit/decompose.hpp"
#include "exkit/ideal.hpp"
#include "exkit/idempotents.hpp"
#include "exkit/ring.hpp"

namespace exkit {

/// J(R), the quotient R/J and the nilpotency index of J.
struct RadicalData {
  Ring ring;
  IdealData J;
  Ring quotient;
  std::size_t nilpotency_index = 1;

  bool in_radical(const Element& x) const { return J.contains(ring, x); }
  Element project(const Element& x) const { return exkit::project(quotient, x); }
};

namespace detail {

/// Additive closure of a set of elements (a subgroup of (R, +)).
inline std::vector<bool> additive_closure(const Ring& r, const std::vector<Element>& seeds, std::size_t cap) {
  const auto& all = r.elements(cap);
  std::vector<bool> in(all.size(), false);
  std::vector<std::size_t> members;
  auto insert = [&](const Element& x) {
    std::size_t i = r.index_of(x, cap);
    if (!in[i]) {
      in[i] = true;
      members.push_back(i);
    }
  };
  insert(r.zero());
  for (const auto& s : seeds) insert(s);
  for (std::size_t k = 0; k < members.size(); ++k)
    for (std::size_t l = 0; l <= k; ++l) insert(r.add(all[members[k]], all[members[l]]));
  return in;
}

}  // namespace detail

/// J = { r : 1 - s r is left invertible for every s }.
inline RadicalData jacobson_radical(const Ring& r, std::size_t cap = kDefaultCap) {
  const auto& all = r.elements(cap);
  const Element one = r.one();
  std::vector<bool> left_invertible(all.size(), false);
  for (std::size_t i = 0; i < all.size(); ++i)
    for (const auto& t : all)
      if (r.mul(t, all[i]) == one) { left_invertible[i] = true; break; }

  std::vector<Element> j;
  for (const auto& x : all) {
    bool ok = true;
    for (const auto& s : all)
      if (!left_invertible[r.index_of(r.sub(one, r.mul(s, x)), cap)]) { ok = false; break; }
    if (ok) j.push_back(x);
  }
  IdealData ideal = ideal_from_closure(r, j, cap);

  // Nilpotency: J^(k+1) is additively generated by products J^k * J.
  std::size_t index = 1;
  std::vector<Element> power = ideal.closure;
  while (!(power.size() == 1 && power[0] == r.zero())) {
    std::vector<Element> products;
    for (const auto& a : power)
      for (const auto& b : ideal.closure) products.push_back(r.mul(a, b));
    auto in = detail::additive_closure(r, products, cap);
    std::vector<Element> next;
    for (std::size_t i = 0; i < all.size(); ++i)
      if (in[i]) next.push_back(all[i]);
    if (next.size() == power.size()) throw InvariantViolated(0, "jacobson_radical: J is not nilpotent");
    power = std::move(next);
    ++index;
  }
  Ring q = quotient_ring(r, ideal, cap);
  return RadicalData{r, std::move(ideal), std::move(q), index};
}

enum class LiftMethod { Search, Newton };

/// e idempotent with e = s x.
struct Lift {
  Element e, s;
};

/// Lifts an idempotent eps of R/J lying in (R/J) x̄ to an idempotent e in Rx
/// with ē = eps. Search takes the first such idempotent in canonical order;
/// Newton iterates a -> 3a^2 - 2a^3 from a preimage of eps in Rx.
inline Lift lift_idempotent(const RadicalData& rad, const Element& x, const Element& eps,
                            LiftMethod method = LiftMethod::Search, std::size_t cap = kDefaultCap) {
  const Ring& r = rad.ring;
  const Ring& q = rad.quotient;
  if (!q.is_idempotent(eps)) throw NotIdempotent("lift_idempotent: eps is not idempotent in R/J");
  const Element xbar = rad.project(x);
  if (!find_left_multiplier(q, eps, xbar, cap)) throw PreconditionFailed("lift_idempotent: eps not in (R/J) x");

  Lift out;
  if (method == LiftMethod::Search) {
    const auto rx = left_multiples(r, x, cap);
    bool found = false;
    for (const auto& e : r.idempotents(cap)) {
      if (rad.project(e) != eps) continue;
      auto it = rx.find(e);
      if (it == rx.end()) continue;
      out = {e, it->second};
      found = true;
      break;
    }
    if (!found) throw NoLift("lift_idempotent: no idempotent of Rx lies over eps");
  } else {
    std::optional<Element> s;
    for (const auto& cand : r.elements(cap))
      if (rad.project(r.mul(cand, x)) == eps) { s = cand; break; }
    if (!s) throw NoLift("lift_idempotent: no preimage of eps in Rx");
    Element m = *s, a = r.mul(m, x);
    for (std::size_t it = 0; !r.is_idempotent(a); ++it) {
      if (it > 64) throw NoLift("lift_idempotent: Newton iteration did not converge");
      const Element a2 = r.mul(a, a);
      const Element k = r.sub(r.add(r.add(a, a), a), r.add(a2, a2));  // 3a - 2a^2
      m = r.mul(k, m);
      a = r.mul(m, x);
    }
    out = {a, m};
  }
  if (!r.is_idempotent(out.e)) detail::broken("lift_idempotent: e idempotent");
  if (r.mul(out.s, x) != out.e) detail::broken("lift_idempotent: e = s x");
  if (rad.project(out.e) != eps) detail::broken("lift_idempotent: e lies over eps");
  return out;
}

struct LiftedFamily {
  Family<Element> e;
  std::vector<Element> s;  // e_i = s_i x_i
  Element u;               // sum of the e_i, a unit congruent to 1 mod J
};

/// Lifts an orthogonal decomposition {eps_i} of 1 in R/J, eps_i in (R/J) x̄_i,
/// to idempotents e_i in R x_i, ready for orthogonalize.
inline LiftedFamily quotient_lift_family(const RadicalData& rad, const Family<Element>& eps,
                                         const std::vector<Element>& x, std::size_t cap = kDefaultCap) {
  const Ring& r = rad.ring;
  const Ring& q = rad.quotient;
  if (eps.size() != x.size()) throw PreconditionFailed("quotient_lift_family: family sizes differ");
  for (std::size_t i = 0; i < eps.size(); ++i)
    for (std::size_t j = 0; j < eps.size(); ++j)
      if (i != j && !q.is_zero(q.mul(eps[i], eps[j])))
        throw PreconditionFailed("quotient_lift_family: quotient family is not orthogonal");
  if (q.sum(eps) != q.one()) throw PreconditionFailed("quotient_lift_family: quotient family does not sum to 1");
  LiftedFamily out;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    Lift l = lift_idempotent(rad, x[i], eps[i], LiftMethod::Search, cap);
    out.e.push_back(l.e);
    out.s.push_back(l.s);
  }
  out.u = r.sum(out.e);
  if (!rad.in_radical(r.sub(out.u, r.one()))) detail::broken("quotient_lift_family: u = 1 mod J");
  if (!r.is_unit(out.u, cap)) detail::broken("quotient_lift_family: u is a unit");
  return out;
}

// Classification -------------------------------------------------------------

/// One classification flag with the element(s) that decided it: a
/// counterexample when false, a representative witness when true (if any).
struct Flag {
  bool value = true;
  std::vector<Element> witness;
  std::string note;
};

struct ClassificationReport {
  Flag suitable, regular, pi_regular, strongly_pi_regular, semiregular, semi_pi_regular, dedekind_finite,
      cohopfian_rr, c2_rr;
  bool quotient_suitable = true;
  bool quotient_regular = true;
  bool quotient_pi_regular = true;
  bool idempotents_lift = true;
  std::size_t size = 0;
  std::size_t radical_size = 0;

  /// Implications that must hold on every report; returns the violated ones.
  std::vector<std::string> lattice_violations() const {
    std::vector<std::string> bad;
    auto need = [&](bool premise, bool conclusion, const char* name) {
      if (premise && !conclusion) bad.emplace_back(name);
    };
    need(regular.value, pi_regular.value, "regular => pi_regular");
    need(pi_regular.value, semi_pi_regular.value, "pi_regular => semi_pi_regular");
    need(regular.value, semiregular.value, "regular => semiregular");
    need(semi_pi_regular.value, suitable.value, "semi_pi_regular => suitable");
    need(strongly_pi_regular.value, pi_regular.value, "strongly_pi_regular => pi_regular");
    need(true, dedekind_finite.value, "finite => dedekind_finite");
    return bad;
  }
};

namespace detail {

/// Table-driven view of an enumerated ring: products by index.
struct IndexedRing {
  const Ring& r;
  const std::vector<Element>& all;
  std::size_t cap;
  std::vector<std::size_t> mul;  // n*n table, filled for n <= 1024

  IndexedRing(const Ring& ring, std::size_t c) : r(ring), all(ring.elements(c)), cap(c) {
    const std::size_t n = all.size();
    if (n <= 1024) {
      mul.resize(n * n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) mul[i * n + j] = r.index_of(r.mul(all[i], all[j]), cap);
    }
  }
  std::size_t size() const { return all.size(); }
  std::size_t idx(const Element& x) const { return r.index_of(x, cap); }
  std::size_t times(std::size_t a, std::size_t b) const {
    if (!mul.empty()) return mul[a * all.size() + b];
    return r.index_of(r.mul(all[a], all[b]), cap);
  }
};

inline std::optional<std::size_t> regular_partner(const IndexedRing& ir, std::size_t x) {
  for (std::size_t y = 0; y < ir.size(); ++y)
    if (ir.times(ir.times(x, y), x) == x) return y;
  return std::nullopt;
}

/// First x with no regular partner, if any.
inline std::optional<std::size_t> first_irregular(const IndexedRing& ir) {
  for (std::size_t x = 0; x < ir.size(); ++x)
    if (!regular_partner(ir, x)) return x;
  return std::nullopt;
}

/// First x none of whose powers x^1..x^|R| is regular.
inline std::optional<std::size_t> first_non_pi_regular(const IndexedRing& ir) {
  std::vector<int> regular(ir.size(), -1);
  auto is_regular = [&](std::size_t a) {
    if (regular[a] < 0) regular[a] = regular_partner(ir, a).has_value();
    return regular[a] == 1;
  };
  for (std::size_t x = 0; x < ir.size(); ++x) {
    std::size_t p = x;
    bool ok = false;
    for (std::size_t n = 1; n <= ir.size() && !ok; ++n) {
      ok = is_regular(p);
      p = ir.times(p, x);
    }
    if (!ok) return x;
  }
  return std::nullopt;
}

}  // namespace detail

/// All flags computed exhaustively over the enumeration.
inline ClassificationReport classify(const Ring& r, std::size_t cap = kDefaultCap) {
  ClassificationReport rep;
  detail::IndexedRing ir(r, cap);
  const auto& all = ir.all;
  const std::size_t n = ir.size();
  const std::size_t one = ir.idx(r.one()), zero = ir.idx(r.zero());
  rep.size = n;

  auto ver = verify_exchange_ring(r, 1024, cap);
  rep.suitable.value = ver.suitable;
  if (ver.failing_x) rep.suitable.witness = {*ver.failing_x};
  if (!ver.exhaustive) rep.suitable.note = "sampled";

  if (auto x = detail::first_irregular(ir)) {
    rep.regular = {false, {all[*x]}, "no y with xyx = x"};
  }
  if (auto x = detail::first_non_pi_regular(ir)) {
    rep.pi_regular = {false, {all[*x]}, "no regular power x^n, n <= |R|"};
  }

  // x^n in x^(n+1) R for some n <= |R|.
  for (std::size_t x = 0; x < n && rep.strongly_pi_regular.value; ++x) {
    std::size_t xn = x;
    bool ok = false;
    for (std::size_t k = 1; k <= n && !ok; ++k) {
      const std::size_t xn1 = ir.times(xn, x);
      for (std::size_t y = 0; y < n && !ok; ++y) ok = ir.times(xn1, y) == xn;
      xn = xn1;
    }
    if (!ok) rep.strongly_pi_regular = {false, {all[x]}, "x^n R never stabilizes"};
  }

  const RadicalData rad = jacobson_radical(r, cap);
  rep.radical_size = rad.J.size();
  {
    detail::IndexedRing qi(rad.quotient, cap);
    if (auto x = detail::first_irregular(qi)) {
      rep.quotient_regular = false;
      rep.semiregular = {false, {qi.all[*x]}, "R/J not regular"};
    }
    if (auto x = detail::first_non_pi_regular(qi)) {
      rep.quotient_pi_regular = false;
      rep.semi_pi_regular = {false, {qi.all[*x]}, "R/J not pi-regular"};
    }
    rep.quotient_suitable = verify_exchange_ring(rad.quotient, 1024, cap).suitable;
    std::unordered_set<Element, ElementHash> lifted;
    for (const auto& e : r.idempotents(cap)) lifted.insert(rad.project(e));
    for (const auto& eps : rad.quotient.idempotents(cap)) {
      if (lifted.count(eps)) continue;
      rep.idempotents_lift = false;
      if (rep.semiregular.value) rep.semiregular = {false, {eps}, "idempotent of R/J does not lift"};
      if (rep.semi_pi_regular.value) rep.semi_pi_regular = {false, {eps}, "idempotent of R/J does not lift"};
      break;
    }
  }

  for (std::size_t a = 0; a < n && rep.dedekind_finite.value; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (ir.times(a, b) == one && ir.times(b, a) != one) {
        rep.dedekind_finite = {false, {all[a], all[b]}, "ab = 1, ba != 1"};
        break;
      }

  // Left non-zero-divisor: x r = 0 forces r = 0.
  for (std::size_t x = 0; x < n && rep.cohopfian_rr.value; ++x) {
    bool nzd = true;
    for (std::size_t s = 0; s < n && nzd; ++s) nzd = s == zero || ir.times(x, s) != zero;
    if (nzd && !r.is_unit(all[x], cap)) rep.cohopfian_rr = {false, {all[x]}, "left non-zero-divisor that is not a unit"};
  }

  // C2 for R_R: every injective image a eR (a = ae) of some eR is generated
  // by an idempotent.
  {
    const auto& idem = r.idempotents(cap);
    std::unordered_set<std::vector<bool>> generated;
    std::vector<std::pair<std::size_t, std::vector<std::size_t>>> distinct;  // (e, members of eR)
    for (const auto& g : idem) {
      const std::size_t gi = ir.idx(g);
      std::vector<bool> set(n, false);
      for (std::size_t s = 0; s < n; ++s) set[ir.times(gi, s)] = true;
      if (!generated.insert(set).second) continue;
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < n; ++i)
        if (set[i]) members.push_back(i);
      distinct.emplace_back(gi, std::move(members));
    }
    for (const auto& [e, members] : distinct) {
      if (!rep.c2_rr.value) break;
      std::vector<bool> seen_a(n, false);
      for (std::size_t s = 0; s < n && rep.c2_rr.value; ++s) {
        const std::size_t a = ir.times(s, e);
        if (seen_a[a]) continue;
        seen_a[a] = true;
        std::vector<bool> image(n, false);
        std::size_t count = 0;
        for (std::size_t m : members) {
          const std::size_t t = ir.times(a, m);
          if (!image[t]) { image[t] = true; ++count; }
        }
        if (count != members.size()) continue;  // not injective on eR
        if (!generated.count(image))
          rep.c2_rr = {false, {all[e], all[a]}, "a eR is isomorphic to eR but not generated by an idempotent"};
      }
    }
  }
  return rep;
}

}  // namespace exkit
