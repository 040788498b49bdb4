#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "exkit/decompose.hpp"
#include "exkit/idempotents.hpp"
#include "exkit/radical.hpp"
#include "exkit/ring.hpp"

namespace exkit {

/// Chain state after stage j (1-based). Index i - 1 of `e` holds e_{i,j}.
template <class V>
struct StageState {
  std::size_t stage = 0;
  std::vector<V> e;  // e_{i,j}, i <= j
  std::vector<V> s;  // e_{i,j} = s_i x_i
  V f, t;            // f_j = t y_j
  V v, v_inv;
  V y;               // y_j = sum of x_i for i > j
};

/// Orthogonal idempotents e_i = s_i x_i summing to 1.
template <class V>
struct ExchangeCertificate {
  std::vector<V> x, e, s;
};

template <class V>
struct ChainResult {
  ExchangeCertificate<V> certificate;
  std::vector<StageState<V>> stages;
};

/// Outcome of re-checking a certificate; `failure` names the first violated clause.
struct CertificateCheck {
  bool valid = true;
  std::string failure;
  explicit operator bool() const { return valid; }
};

template <RingLike R>
CertificateCheck validate_certificate(const R& r, const ExchangeCertificate<typename R::value_type>& c) {
  auto fail = [](std::string what) { return CertificateCheck{false, std::move(what)}; };
  const std::size_t n = c.x.size();
  if (c.e.size() != n || c.s.size() != n) return fail("family sizes differ");
  auto sum = r.zero();
  for (std::size_t i = 0; i < n; ++i) {
    const std::string tag = "e_" + std::to_string(i + 1);
    if (!r.eq(r.mul(c.e[i], c.e[i]), c.e[i])) return fail(tag + " is not idempotent");
    if (!r.eq(r.mul(c.s[i], c.x[i]), c.e[i])) return fail(tag + " != s_" + std::to_string(i + 1) + " x_" + std::to_string(i + 1));
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && !r.eq(r.mul(c.e[i], c.e[j]), r.zero()))
        return fail(tag + " e_" + std::to_string(j + 1) + " != 0");
    sum = r.add(sum, c.e[i]);
  }
  if (!r.eq(sum, r.one())) return fail("sum of e_i != 1");
  return {};
}

/// Stage-by-stage construction of orthogonal idempotents e_i in R x_i.
///
/// Stage 1 splits x_1 + y_1 = 1. Stage j refines 1 = S + r x_j + r y_j, with
/// S the sum of the previous e_{i,j-1} and f_{j-1} = r y_{j-1}, into h1 + h2 + h3;
/// then u_j = 1 + h1 - S, e_{i,j} = u_j e_{i,j-1}, e_{j,j} = h2, f_j = h3 and
/// v_j = u_j v_{j-1}. `split(f, a, b)` decomposes a + b = f in the corner fRf.
template <RingLike R, class Splitter>
class ChainRunner {
 public:
  using V = typename R::value_type;

  ChainRunner(const R& r, std::vector<V> x, Splitter split) : r_(r), x_(std::move(x)), split_(std::move(split)) {
    if (x_.empty()) throw PreconditionFailed("exchange_chain: empty family");
    auto total = r_.zero();
    for (const auto& xi : x_) total = r_.add(total, xi);
    if (!r_.eq(total, r_.one())) throw PreconditionFailed("exchange_chain: family does not sum to 1");
    y_.assign(x_.size(), r_.zero());
    for (std::size_t j = x_.size() - 1; j-- > 0;) y_[j] = r_.add(y_[j + 1], x_[j + 1]);
  }

  bool done() const { return stages_.size() == x_.size(); }
  const std::vector<StageState<V>>& stages() const { return stages_; }
  const std::vector<V>& family() const { return x_; }

  const StageState<V>& step() {
    const V one = r_.one();
    const std::size_t j = stages_.size() + 1;
    StageState<V> st;
    st.stage = j;
    st.y = y_[j - 1];
    if (j == 1) {
      auto cs = split_(one, x_[0], st.y);
      if (!cs) throw NotSuitable("stage 1: no decomposition of x_1 + y_1 = 1");
      st.e = {cs->f2};
      st.s = {cs->s2};
      st.f = cs->f3;
      st.t = cs->s3;
      st.v = one;
      st.v_inv = one;
    } else {
      const StageState<V>& prev = stages_.back();
      V sum = r_.zero();
      for (const auto& e : prev.e) sum = r_.add(sum, e);
      const V rx = r_.mul(prev.t, x_[j - 1]);
      const V ry = r_.mul(prev.t, st.y);
      Refinement<V> h;
      try {
        h = refine_three(r_, sum, rx, ry, split_);
      } catch (const NotSuitable& err) {
        throw NotSuitable("stage " + std::to_string(j) + ": " + err.what());
      }
      const V u = r_.sub(r_.add(one, h.e1), sum);
      const V u_inv = r_.add(r_.sub(one, h.e1), sum);
      for (std::size_t i = 0; i < prev.e.size(); ++i) {
        st.e.push_back(r_.mul(u, prev.e[i]));
        st.s.push_back(r_.mul(u, prev.s[i]));
      }
      st.e.push_back(h.e2);
      st.s.push_back(r_.mul(h.s2, prev.t));
      st.f = h.e3;
      st.t = r_.mul(h.s3, prev.t);
      st.v = r_.mul(u, prev.v);
      st.v_inv = r_.mul(prev.v_inv, u_inv);
      check(j, r_.eq(r_.mul(u, u_inv), one) && r_.eq(r_.mul(u_inv, u), one), "u_j is a unit");
      check(j, r_.eq(r_.mul(u, prev.f), prev.f), "u_j f_{j-1} = f_{j-1}");
      const V tail = r_.add(h.e2, h.e3);
      check(j, r_.eq(r_.mul(tail, prev.f), prev.f) && r_.eq(r_.mul(prev.f, tail), tail),
            "(e_{j,j} + f_j) right strongly isomorphic to f_{j-1}");
    }
    verify(st);
    stages_.push_back(std::move(st));
    return stages_.back();
  }

  ChainResult<V> run() {
    while (!done()) step();
    return result();
  }

  ChainResult<V> result() const {
    if (!done()) throw PreconditionFailed("exchange_chain: chain not finished");
    const auto& last = stages_.back();
    ChainResult<V> out{{x_, last.e, last.s}, stages_};
    const std::size_t n = x_.size();
    check(n, r_.eq(last.f, r_.zero()), "f_n = 0");
    // phi = sum of e_{i,i} inverts v_n, and e_{i,i} e_{j,j} = 0 for i < j.
    V phi = r_.zero();
    for (std::size_t i = 0; i < n; ++i) phi = r_.add(phi, stages_[i].e[i]);
    check(n, r_.eq(phi, last.v_inv), "sum of e_{i,i} = v_n^{-1}");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = i + 1; k < n; ++k)
        check(n, r_.eq(r_.mul(stages_[i].e[i], stages_[k].e[k]), r_.zero()), "e_{i,i} e_{j,j} = 0 for i < j");
    auto cert = validate_certificate(r_, out.certificate);
    check(n, cert.valid, "certificate: " + cert.failure);
    return out;
  }

 private:
  static void check(std::size_t stage, bool ok, const std::string& clause) {
    if (!ok) throw InvariantViolated(stage, clause);
  }

  void verify(const StageState<V>& st) const {
    const std::size_t j = st.stage;
    const V one = r_.one(), zero = r_.zero();
    std::vector<V> all = st.e;
    all.push_back(st.f);
    V sum = zero;
    for (std::size_t a = 0; a < all.size(); ++a) {
      check(j, r_.eq(r_.mul(all[a], all[a]), all[a]), "stage split: idempotent");
      for (std::size_t b = 0; b < all.size(); ++b)
        if (a != b) check(j, r_.eq(r_.mul(all[a], all[b]), zero), "stage split: orthogonal");
      sum = r_.add(sum, all[a]);
    }
    check(j, r_.eq(sum, one), "stage split: sums to 1");
    for (std::size_t i = 0; i < st.e.size(); ++i) {
      const V& eii = i + 1 == j ? st.e[i] : stages_[i].e[i];
      check(j, r_.eq(r_.mul(st.v, eii), st.e[i]), "v_j e_{i,i} = e_{i,j}");
      check(j, r_.eq(r_.mul(st.s[i], x_[i]), st.e[i]), "e_{i,j} in R x_i");
    }
    check(j, r_.eq(r_.mul(st.v, st.f), st.f), "v_j f_j = f_j");
    check(j, r_.eq(r_.mul(st.t, st.y), st.f), "f_j in R y_j");
    check(j, r_.eq(r_.mul(st.v, st.v_inv), one) && r_.eq(r_.mul(st.v_inv, st.v), one), "v_j v_j^{-1} = 1");
  }

  const R& r_;
  std::vector<V> x_;
  std::vector<V> y_;  // y_[j-1] = y_j
  Splitter split_;
  std::vector<StageState<V>> stages_;
};

template <RingLike R, class Splitter>
ChainResult<typename R::value_type> exchange_chain(const R& r, std::vector<typename R::value_type> x,
                                                   Splitter split) {
  return ChainRunner<R, Splitter>(r, std::move(x), std::move(split)).run();
}

inline ChainResult<Element> exchange_chain(const Ring& r, std::vector<Element> x,
                                           DecomposeBackend backend = DecomposeBackend::Auto,
                                           std::size_t cap = kDefaultCap) {
  for (auto& xi : x) xi = r.canonical(xi);
  return exchange_chain(r, std::move(x), FiniteCornerSplitter{r, backend, cap});
}

/// Chain in R/J, lift each quotient idempotent into R x_i, then orthogonalize
/// with u = sum of the lifts.
inline ExchangeCertificate<Element> exchange_chain_via_quotient(const Ring& r, std::vector<Element> x,
                                                                std::size_t cap = kDefaultCap) {
  for (auto& xi : x) xi = r.canonical(xi);
  if (r.sum(x) != r.one()) throw PreconditionFailed("exchange_chain_via_quotient: family does not sum to 1");
  const RadicalData rad = jacobson_radical(r, cap);
  std::vector<Element> xbar;
  for (const auto& xi : x) xbar.push_back(rad.project(xi));
  auto quotient_chain = exchange_chain(rad.quotient, xbar, DecomposeBackend::Auto, cap);
  auto lifted = quotient_lift_family(rad, quotient_chain.certificate.e, x, cap);
  auto u_inv = r.inverse(lifted.u, cap);
  if (!u_inv) detail::broken("exchange_chain_via_quotient: lifted sum is a unit");
  auto e = orthogonalize(r, lifted.e, lifted.u, *u_inv, [&](const Element& y) { return rad.in_radical(y); });
  ExchangeCertificate<Element> cert{x, e, {}};
  for (const auto& s : lifted.s) cert.s.push_back(r.mul(*u_inv, s));
  auto check = validate_certificate(r, cert);
  if (!check) detail::broken("exchange_chain_via_quotient: " + check.failure);
  return cert;
}

// Regularization --------------------------------------------------------------

enum class RegularizeMode { Exact, ModRadical };

struct RegularizationWitness {
  RegularizeMode mode = RegularizeMode::Exact;
  Element phi, psi, p, phi_prime;
  std::optional<Element> phi_prime_inv;
  // Mod-radical intermediates: p_tilde lifts 1 - psi phi, phi_tilde = phi + p_tilde.
  std::optional<Element> p_tilde, phi_tilde, phi_tilde_inv;
  bool family_context = false;
};

namespace detail {

inline void require_almost_orthogonal(const Ring& r, const Family<Element>& fam, const Element& phi) {
  for (std::size_t i = 0; i < fam.size(); ++i) {
    if (!r.is_idempotent(fam[i])) throw NotIdempotent("family member " + std::to_string(i) + " is not idempotent");
    for (std::size_t j = i + 1; j < fam.size(); ++j)
      if (!r.is_zero(r.mul(fam[i], fam[j])))
        throw PreconditionFailed("family members " + std::to_string(i) + ", " + std::to_string(j) +
                                 ": e_i e_j != 0 for i < j");
  }
  if (r.sum(fam) != phi) throw PreconditionFailed("phi is not the sum of the family");
}

/// phi' tau = 0 forces tau = 0, over every tau.
inline bool left_non_zero_divisor(const Ring& r, const Element& x, std::size_t cap) {
  for (const auto& t : r.elements(cap))
    if (!r.is_zero(t) && r.is_zero(r.mul(x, t))) return false;
  return true;
}

}  // namespace detail

/// Builds psi with phi psi phi = phi (exactly, or modulo J when `rad` is
/// given), the idempotent p with phi p = 0 and phi' = phi + p. With a family
/// context {e_i} (e_i e_j = 0 for i < j, phi their sum) phi' is proven a unit
/// and all the intermediate identities are asserted; without one the unit
/// status of phi' is only reported.
inline RegularizationWitness regularize(const Ring& r, const Element& phi_in,
                                        const std::optional<Family<Element>>& family = std::nullopt,
                                        const RadicalData* rad = nullptr, std::size_t cap = kDefaultCap) {
  const Element phi = r.canonical(phi_in);
  const Element one = r.one();
  RegularizationWitness w;
  w.phi = phi;
  w.family_context = family.has_value();
  if (family) detail::require_almost_orthogonal(r, *family, phi);
  const auto& all = r.elements(cap);
  auto fail = [](const std::string& what) { detail::broken("regularize: " + what); };

  if (!rad) {
    w.mode = RegularizeMode::Exact;
    bool found = false;
    for (const auto& psi : all)
      if (r.mul({phi, psi, phi}) == phi) { w.psi = psi; found = true; break; }
    if (!found) throw NotRegular("regularize: no psi with phi psi phi = phi");
    w.p = r.sub(one, r.mul(w.psi, phi));
  } else {
    w.mode = RegularizeMode::ModRadical;
    bool found = false;
    for (const auto& psi : all)
      if (rad->in_radical(r.sub(phi, r.mul({phi, psi, phi})))) { w.psi = psi; found = true; break; }
    if (!found) throw NotRegular("regularize: phi is not regular modulo J");
    const Element approx = r.sub(one, r.mul(w.psi, phi));
    for (const auto& g : r.idempotents(cap))
      if (rad->in_radical(r.sub(g, approx))) { w.p_tilde = g; break; }
    if (!w.p_tilde) throw NoLift("regularize: 1 - psi phi does not lift to an idempotent");
    w.phi_tilde = r.add(phi, *w.p_tilde);
    w.phi_tilde_inv = r.inverse(*w.phi_tilde, cap);
    if (!w.phi_tilde_inv) {
      if (family) fail("phi~ is a unit");
      throw NotUnit("regularize: phi + p~ is not a unit; a family context is required in mod-radical mode");
    }
    if (family) {
      for (const auto& e : *family)
        if (!rad->in_radical(r.mul(e, *w.p_tilde))) fail("e_i p~ in J");
      Family<Element> ext = *family;
      ext.push_back(*w.p_tilde);
      auto orth = orthogonalize(r, ext, *w.phi_tilde, *w.phi_tilde_inv,
                                [&](const Element& y) { return rad->in_radical(y); });
      w.p = orth.back();
    } else {
      w.p = r.mul(*w.phi_tilde_inv, *w.p_tilde);
    }
  }

  if (!r.is_idempotent(w.p)) {
    if (family || w.mode == RegularizeMode::Exact) fail("p idempotent");
    throw PreconditionFailed("regularize: phi~^-1 p~ is not idempotent without a family context");
  }
  if (w.mode == RegularizeMode::Exact && r.mul({phi, w.psi, phi}) != phi) fail("phi psi phi = phi");
  if (!r.is_zero(r.mul(phi, w.p))) {
    if (family || w.mode == RegularizeMode::Exact) fail("phi p = 0");
    throw PreconditionFailed("regularize: phi p != 0 without a family context");
  }
  w.phi_prime = r.add(phi, w.p);
  w.phi_prime_inv = r.inverse(w.phi_prime, cap);
  if (family) {
    for (const auto& e : *family)
      if (!r.is_zero(r.mul(e, w.p))) fail("e_i p = 0");
    if (!detail::left_non_zero_divisor(r, w.phi_prime, cap)) fail("phi' is a left non-zero-divisor");
    if (!w.phi_prime_inv) fail("phi' is a unit");
  }
  return w;
}

struct PiRegularWitness {
  std::size_t n = 1;
  Element psi;        // phi^n psi phi^n = phi^n
  Element psi_prime;  // psi phi^(n-1), with phi psi' phi = phi
};

/// For phi = sum of {e_i} (e_i e_j = 0, i < j) with phi^n regular, returns
/// psi' = psi phi^(n-1) regularizing phi itself. `n` and `psi` may be fixed
/// by the caller; otherwise the least n and first psi are used.
inline PiRegularWitness pi_regular_reduce(const Ring& r, const Element& phi_in, const Family<Element>& fam,
                                          std::optional<std::size_t> n_hint = std::nullopt,
                                          std::optional<Element> psi_hint = std::nullopt,
                                          std::size_t cap = kDefaultCap) {
  const Element phi = r.canonical(phi_in);
  detail::require_almost_orthogonal(r, fam, phi);
  const auto& all = r.elements(cap);
  PiRegularWitness w;
  bool found = false;
  if (n_hint) {
    if (*n_hint == 0) throw PreconditionFailed("pi_regular_reduce: n must be positive");
    const Element pn = r.pow(phi, *n_hint);
    if (psi_hint) {
      if (r.mul({pn, *psi_hint, pn}) != pn) throw PreconditionFailed("pi_regular_reduce: phi^n psi phi^n != phi^n");
      w = {*n_hint, *psi_hint, {}};
      found = true;
    } else {
      for (const auto& psi : all)
        if (r.mul({pn, psi, pn}) == pn) { w = {*n_hint, psi, {}}; found = true; break; }
    }
  } else {
    Element pn = phi;
    for (std::size_t n = 1; n <= all.size() && !found; ++n, pn = r.mul(pn, phi))
      for (const auto& psi : all)
        if (r.mul({pn, psi, pn}) == pn) { w = {n, psi, {}}; found = true; break; }
  }
  if (!found) throw NotPiRegular("pi_regular_reduce: no regular power phi^n, n <= |R|");
  const Element pn = r.pow(phi, w.n);
  const Element kill = r.sub(r.one(), r.mul(w.psi, pn));
  power_kill(r, fam, kill, w.n);  // phi^n (1 - psi phi^n) = 0 gives phi (1 - psi phi^n) = 0
  w.psi_prime = r.mul(w.psi, r.pow(phi, w.n - 1));
  if (r.mul({phi, w.psi_prime, phi}) != phi) detail::broken("pi_regular_reduce: phi psi' phi = phi");
  return w;
}

// Idempotent transfer ---------------------------------------------------------

struct TransferWitness {
  Element y_prime, f_prime, g, z, r_prime, f_double_prime;
};

/// Replaces f' by an idempotent f'' in R y' with f' and f'' right strongly
/// isomorphic. `history` lists pairs (r_i, y_i) with f_i = r_i y_i and
/// f_i f' = f'; its last entry must already agree with the limit, that is
/// y_last f' = y' f'.
inline TransferWitness transfer_idempotent(const Ring& r, const Element& y_prime_in, const Element& f_prime_in,
                                           const std::vector<std::pair<Element, Element>>& history = {},
                                           std::size_t cap = kDefaultCap) {
  TransferWitness w;
  w.y_prime = r.canonical(y_prime_in);
  w.f_prime = r.canonical(f_prime_in);
  if (!r.is_idempotent(w.f_prime)) throw NotIdempotent("transfer_idempotent: f' is not idempotent");
  const Element a = r.mul(w.y_prime, w.f_prime);
  for (std::size_t i = 0; i < history.size(); ++i) {
    const Element fi = r.mul(history[i].first, history[i].second);
    if (r.mul(fi, w.f_prime) != w.f_prime)
      throw PreconditionFailed("transfer_idempotent: f_i f' != f' for history entry " + std::to_string(i));
  }
  if (!history.empty() && r.mul(history.back().second, w.f_prime) != a)
    throw PreconditionFailed("transfer_idempotent: last history entry has y_i f' != y' f'");

  const auto& all = r.elements(cap);
  std::optional<Element> g;
  if (r.is_idempotent(a)) {
    g = a;
  } else {
    const auto ar = [&] {
      std::unordered_set<Element, ElementHash> s;
      for (const auto& t : all) s.insert(r.mul(a, t));
      return s;
    }();
    for (const auto& cand : r.idempotents(cap))
      if (ar.count(cand) && r.mul(cand, a) == a) { g = cand; break; }
  }
  if (!g) throw NoIdempotentGenerator("transfer_idempotent: y' f' R is not generated by an idempotent");
  w.g = *g;
  std::optional<Element> z;
  if (w.g == a) z = w.f_prime;
  else
    for (const auto& t : all)
      if (r.mul(a, t) == w.g) { z = t; break; }
  if (!z) detail::broken("transfer_idempotent: g in y' f' R");
  w.z = r.mul(*z, w.g);
  w.r_prime = r.mul(w.f_prime, w.z);
  w.f_double_prime = r.mul(w.r_prime, w.y_prime);

  auto check = [](bool ok, const char* what) {
    if (!ok) detail::broken(std::string("transfer_idempotent: ") + what);
  };
  check(r.is_idempotent(w.g), "g idempotent");
  check(r.mul(a, w.z) == w.g, "g = y' f' z");
  check(r.mul(w.g, a) == a, "g y' f' = y' f'");
  check(r.mul(w.z, w.g) == w.z, "z g = z");
  if (!history.empty()) check(r.mul(history.back().first, w.g) == w.r_prime, "r' = r_i g");
  check(r.is_idempotent(w.f_double_prime), "f'' idempotent");
  check(r.mul(w.f_prime, w.f_double_prime) == w.f_double_prime, "f' f'' = f''");
  if (r.mul(w.f_double_prime, w.f_prime) != w.f_prime) {
    if (history.empty())
      throw PreconditionFailed("transfer_idempotent: f'' f' != f'; a history realizing the limit is required");
    check(false, "f'' f' = f'");
  }
  return w;
}

}  // namespace exkit
