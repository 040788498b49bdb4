#pragma once

// Brute-force reference implementations used to cross-check the library.
// Everything here works on Cayley tables by index and uses the textbook
// characterizations directly, sharing no search code with exkit.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "exkit/exkit.hpp"

namespace oracle {

using exkit::Element;
using exkit::Ring;

struct Table {
  std::size_t n = 0;
  std::vector<std::vector<std::size_t>> add, mul;
  std::size_t zero = 0, one = 0;
  std::vector<std::size_t> neg;

  std::size_t sub(std::size_t a, std::size_t b) const { return add[a][neg[b]]; }
};

inline Table table_of(const Ring& r) {
  const auto& el = r.elements();
  Table t;
  t.n = el.size();
  std::map<Element, std::size_t> idx;
  for (std::size_t i = 0; i < t.n; ++i) idx[el[i]] = i;
  t.add.assign(t.n, std::vector<std::size_t>(t.n));
  t.mul.assign(t.n, std::vector<std::size_t>(t.n));
  for (std::size_t a = 0; a < t.n; ++a)
    for (std::size_t b = 0; b < t.n; ++b) {
      t.add[a][b] = idx.at(r.add(el[a], el[b]));
      t.mul[a][b] = idx.at(r.mul(el[a], el[b]));
    }
  t.zero = idx.at(r.zero());
  t.one = idx.at(r.one());
  t.neg.assign(t.n, 0);
  for (std::size_t a = 0; a < t.n; ++a)
    for (std::size_t b = 0; b < t.n; ++b)
      if (t.add[a][b] == t.zero) t.neg[a] = b;
  return t;
}

/// Quotient table by an additive subgroup closed under two-sided multiplication.
inline Table quotient_table(const Table& t, const std::vector<bool>& ideal) {
  std::vector<std::size_t> cls(t.n, t.n);
  std::vector<std::size_t> reps;
  for (std::size_t a = 0; a < t.n; ++a) {
    if (cls[a] != t.n) continue;
    const std::size_t id = reps.size();
    reps.push_back(a);
    for (std::size_t j = 0; j < t.n; ++j)
      if (ideal[j]) cls[t.add[a][j]] = id;
  }
  Table q;
  q.n = reps.size();
  q.add.assign(q.n, std::vector<std::size_t>(q.n));
  q.mul.assign(q.n, std::vector<std::size_t>(q.n));
  for (std::size_t a = 0; a < q.n; ++a)
    for (std::size_t b = 0; b < q.n; ++b) {
      q.add[a][b] = cls[t.add[reps[a]][reps[b]]];
      q.mul[a][b] = cls[t.mul[reps[a]][reps[b]]];
    }
  q.zero = cls[t.zero];
  q.one = cls[t.one];
  q.neg.assign(q.n, 0);
  for (std::size_t a = 0; a < q.n; ++a) q.neg[a] = cls[t.neg[reps[a]]];
  return q;
}

inline bool is_two_sided_unit(const Table& t, std::size_t a) {
  for (std::size_t b = 0; b < t.n; ++b)
    if (t.mul[a][b] == t.one && t.mul[b][a] == t.one) return true;
  return false;
}

inline std::vector<std::size_t> idempotents(const Table& t) {
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < t.n; ++a)
    if (t.mul[a][a] == a) out.push_back(a);
  return out;
}

inline std::size_t unit_count(const Table& t) {
  std::size_t c = 0;
  for (std::size_t a = 0; a < t.n; ++a) c += is_two_sided_unit(t, a);
  return c;
}

/// J = {x : 1 - s x is a unit for every s}.
inline std::vector<bool> radical(const Table& t) {
  std::vector<bool> unit(t.n);
  for (std::size_t a = 0; a < t.n; ++a) unit[a] = is_two_sided_unit(t, a);
  std::vector<bool> j(t.n, true);
  for (std::size_t x = 0; x < t.n; ++x)
    for (std::size_t s = 0; s < t.n && j[x]; ++s) j[x] = unit[t.sub(t.one, t.mul[s][x])];
  return j;
}

/// Left multiples R x as a membership vector.
inline std::vector<bool> left_ideal(const Table& t, std::size_t x) {
  std::vector<bool> in(t.n, false);
  for (std::size_t s = 0; s < t.n; ++s) in[t.mul[s][x]] = true;
  return in;
}

inline std::vector<bool> right_ideal(const Table& t, std::size_t x) {
  std::vector<bool> in(t.n, false);
  for (std::size_t s = 0; s < t.n; ++s) in[t.mul[x][s]] = true;
  return in;
}

/// Some idempotent e in R x with 1 - e in R (1 - x).
inline bool suitable_at(const Table& t, std::size_t x) {
  const auto rx = left_ideal(t, x);
  const auto ry = left_ideal(t, t.sub(t.one, x));
  for (std::size_t e = 0; e < t.n; ++e)
    if (t.mul[e][e] == e && rx[e] && ry[t.sub(t.one, e)]) return true;
  return false;
}

inline bool suitable(const Table& t) {
  for (std::size_t x = 0; x < t.n; ++x)
    if (!suitable_at(t, x)) return false;
  return true;
}

inline bool regular_at(const Table& t, std::size_t x) {
  for (std::size_t y = 0; y < t.n; ++y)
    if (t.mul[t.mul[x][y]][x] == x) return true;
  return false;
}

inline bool regular(const Table& t) {
  for (std::size_t x = 0; x < t.n; ++x)
    if (!regular_at(t, x)) return false;
  return true;
}

inline bool pi_regular(const Table& t) {
  for (std::size_t x = 0; x < t.n; ++x) {
    bool ok = false;
    std::size_t p = x;
    for (std::size_t k = 0; k <= t.n && !ok; ++k, p = t.mul[p][x]) ok = regular_at(t, p);
    if (!ok) return false;
  }
  return true;
}

/// Every x has n with x^n in x^(n+1) R.
inline bool strongly_pi_regular(const Table& t) {
  for (std::size_t x = 0; x < t.n; ++x) {
    bool ok = false;
    std::size_t p = x;
    for (std::size_t k = 0; k <= t.n && !ok; ++k, p = t.mul[p][x]) ok = right_ideal(t, t.mul[p][x])[p];
    if (!ok) return false;
  }
  return true;
}

/// Idempotents of R/J lift: every x with x^2 - x in J is congruent to an idempotent.
inline bool idempotents_lift(const Table& t, const std::vector<bool>& j) {
  for (std::size_t x = 0; x < t.n; ++x) {
    if (!j[t.sub(t.mul[x][x], x)]) continue;
    bool found = false;
    for (std::size_t e = 0; e < t.n && !found; ++e) found = t.mul[e][e] == e && j[t.sub(e, x)];
    if (!found) return false;
  }
  return true;
}

inline bool dedekind_finite(const Table& t) {
  for (std::size_t a = 0; a < t.n; ++a)
    for (std::size_t b = 0; b < t.n; ++b)
      if (t.mul[a][b] == t.one && t.mul[b][a] != t.one) return false;
  return true;
}

/// Every x with x r = 0 only for r = 0 is a unit.
inline bool cohopfian_rr(const Table& t) {
  for (std::size_t x = 0; x < t.n; ++x) {
    bool nzd = true;
    for (std::size_t r = 0; r < t.n && nzd; ++r) nzd = r == t.zero || t.mul[x][r] != t.zero;
    if (nzd && !is_two_sided_unit(t, x)) return false;
  }
  return true;
}

/// C2 for R_R over right ideals: whenever a = a e and left multiplication by
/// a is injective on eR (so aR ≅ eR), aR must equal gR for an idempotent g.
inline bool c2_rr(const Table& t) {
  std::set<std::vector<bool>> summands;
  for (std::size_t g = 0; g < t.n; ++g)
    if (t.mul[g][g] == g) summands.insert(right_ideal(t, g));
  for (std::size_t e = 0; e < t.n; ++e) {
    if (t.mul[e][e] != e) continue;
    const auto er = right_ideal(t, e);
    for (std::size_t a = 0; a < t.n; ++a) {
      if (t.mul[a][e] != a) continue;
      std::set<std::size_t> image;
      std::size_t domain = 0;
      for (std::size_t y = 0; y < t.n; ++y)
        if (er[y]) {
          ++domain;
          image.insert(t.mul[a][y]);
        }
      if (image.size() != domain) continue;
      if (!summands.count(right_ideal(t, a))) return false;
    }
  }
  return true;
}

struct Classification {
  bool suitable, regular, pi_regular, strongly_pi_regular, semiregular, semi_pi_regular, dedekind_finite,
      cohopfian_rr, c2_rr, quotient_suitable, idempotents_lift;
  std::size_t radical_size;
};

inline Classification classify(const Ring& r) {
  const Table t = table_of(r);
  const auto j = radical(t);
  const Table q = quotient_table(t, j);
  Classification c{};
  c.suitable = suitable(t);
  c.regular = regular(t);
  c.pi_regular = pi_regular(t);
  c.strongly_pi_regular = strongly_pi_regular(t);
  c.idempotents_lift = idempotents_lift(t, j);
  c.semiregular = regular(q) && c.idempotents_lift;
  c.semi_pi_regular = pi_regular(q) && c.idempotents_lift;
  c.dedekind_finite = dedekind_finite(t);
  c.cohopfian_rr = cohopfian_rr(t);
  c.c2_rr = c2_rr(t);
  c.quotient_suitable = suitable(q);
  c.radical_size = static_cast<std::size_t>(std::count(j.begin(), j.end(), true));
  return c;
}

// Finite abelian groups ---------------------------------------------------------------

struct Group {
  std::vector<std::int64_t> moduli;
  std::vector<Element> el;
  std::map<Element, std::size_t> idx;
  std::vector<std::vector<std::size_t>> add;

  explicit Group(std::vector<std::int64_t> m) : moduli(std::move(m)) {
    el = {Element{}};
    for (auto q : moduli) {
      std::vector<Element> next;
      for (const auto& p : el)
        for (std::int64_t v = 0; v < q; ++v) {
          auto e = p;
          e.push_back(v);
          next.push_back(e);
        }
      el = next;
    }
    for (std::size_t i = 0; i < el.size(); ++i) idx[el[i]] = i;
    add.assign(el.size(), std::vector<std::size_t>(el.size()));
    for (std::size_t a = 0; a < el.size(); ++a)
      for (std::size_t b = 0; b < el.size(); ++b) {
        Element c(moduli.size());
        for (std::size_t k = 0; k < moduli.size(); ++k) c[k] = (el[a][k] + el[b][k]) % moduli[k];
        add[a][b] = idx.at(c);
      }
  }
  std::size_t size() const { return el.size(); }
  std::size_t order(std::size_t a) const {
    std::size_t k = 1;
    for (std::size_t x = a; x != 0; x = add[x][a]) ++k;
    return k;
  }
};

using Subset = std::vector<bool>;

/// All subgroups, by closing {0} under adjoining single elements.
inline std::vector<Subset> subgroups(const Group& g) {
  const std::size_t n = g.size();
  auto close = [&](Subset s) {
    bool grown = true;
    while (grown) {
      grown = false;
      for (std::size_t a = 0; a < n; ++a)
        if (s[a])
          for (std::size_t b = 0; b < n; ++b)
            if (s[b] && !s[g.add[a][b]]) {
              s[g.add[a][b]] = true;
              grown = true;
            }
    }
    return s;
  };
  Subset zero(n, false);
  zero[0] = true;
  std::set<Subset> seen{zero};
  std::vector<Subset> frontier{zero};
  while (!frontier.empty()) {
    std::vector<Subset> next;
    for (const auto& h : frontier)
      for (std::size_t a = 0; a < n; ++a) {
        if (h[a]) continue;
        Subset s = h;
        s[a] = true;
        s = close(s);
        if (seen.insert(s).second) next.push_back(s);
      }
    frontier = next;
  }
  return {seen.begin(), seen.end()};
}

/// Finite abelian groups are isomorphic iff they have the same number of
/// elements of each order.
inline std::map<std::size_t, std::size_t> order_profile(const Group& g, const Subset& s) {
  std::map<std::size_t, std::size_t> prof;
  for (std::size_t a = 0; a < g.size(); ++a)
    if (s[a]) ++prof[g.order(a)];
  return prof;
}

inline bool has_complement(const Group& g, const std::vector<Subset>& subs, const Subset& s) {
  const auto ns = static_cast<std::size_t>(std::count(s.begin(), s.end(), true));
  for (const auto& k : subs) {
    const auto nk = static_cast<std::size_t>(std::count(k.begin(), k.end(), true));
    if (nk * ns != g.size()) continue;
    bool meet_zero = true;
    for (std::size_t a = 1; a < g.size() && meet_zero; ++a) meet_zero = !(s[a] && k[a]);
    if (meet_zero) return true;
  }
  return false;
}

struct C2Result {
  bool c2 = true;
  std::vector<Subset> failures;  // submodules isomorphic to a summand but not summands
};

inline C2Result module_c2(const Group& g) {
  const auto subs = subgroups(g);
  std::vector<std::map<std::size_t, std::size_t>> summand_profiles;
  std::vector<bool> summand(subs.size());
  for (std::size_t i = 0; i < subs.size(); ++i) {
    summand[i] = has_complement(g, subs, subs[i]);
    if (summand[i]) summand_profiles.push_back(order_profile(g, subs[i]));
  }
  C2Result out;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (summand[i]) continue;
    const auto p = order_profile(g, subs[i]);
    if (std::find(summand_profiles.begin(), summand_profiles.end(), p) != summand_profiles.end()) {
      out.c2 = false;
      out.failures.push_back(subs[i]);
    }
  }
  return out;
}

/// All additive self-maps of the group, as image tables, built from images
/// of the coordinate generators (each image's order must divide the generator's).
inline std::vector<std::vector<std::size_t>> endomorphisms(const Group& g) {
  const std::size_t r = g.moduli.size();
  std::vector<std::vector<std::size_t>> choices(r);
  for (std::size_t k = 0; k < r; ++k)
    for (std::size_t a = 0; a < g.size(); ++a)
      if (static_cast<std::int64_t>(g.order(a)) <= g.moduli[k] && g.moduli[k] % static_cast<std::int64_t>(g.order(a)) == 0)
        choices[k].push_back(a);
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> pick(r, 0);
  for (;;) {
    std::vector<std::size_t> img(g.size());
    for (std::size_t x = 0; x < g.size(); ++x) {
      std::size_t acc = 0;
      for (std::size_t k = 0; k < r; ++k)
        for (std::int64_t c = 0; c < g.el[x][k]; ++c) acc = g.add[acc][choices[k][pick[k]]];
      img[x] = acc;
    }
    out.push_back(img);
    std::size_t k = 0;
    while (k < r && ++pick[k] == choices[k].size()) pick[k++] = 0;
    if (k == r) break;
  }
  return out;
}

// Column-finite windows ---------------------------------------------------------------

/// Dense rational matrix product, for recomputing windows independently.
inline std::vector<std::vector<mpq_class>> dense_mul(const std::vector<std::vector<mpq_class>>& a,
                                                    const std::vector<std::vector<mpq_class>>& b) {
  const std::size_t n = a.size(), m = b.empty() ? 0 : b[0].size(), k = b.size();
  std::vector<std::vector<mpq_class>> c(n, std::vector<mpq_class>(m, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l)
      if (sgn(a[i][l]) != 0)
        for (std::size_t j = 0; j < m; ++j) c[i][j] += a[i][l] * b[l][j];
  return c;
}

/// Rank over Q by plain Gaussian elimination.
inline std::size_t dense_rank(std::vector<std::vector<mpq_class>> a) {
  std::size_t rank = 0;
  const std::size_t rows = a.size(), cols = rows ? a[0].size() : 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t p = rank;
    while (p < rows && sgn(a[p][c]) == 0) ++p;
    if (p == rows) continue;
    std::swap(a[p], a[rank]);
    for (std::size_t r = 0; r < rows; ++r)
      if (r != rank && sgn(a[r][c]) != 0) {
        const mpq_class f = a[r][c] / a[rank][c];
        for (std::size_t k = c; k < cols; ++k) a[r][k] -= f * a[rank][k];
      }
    ++rank;
  }
  return rank;
}

}  // namespace oracle
