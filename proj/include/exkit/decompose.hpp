#pragma once

#include <optional>
#include <random>
#include <string>

#include "exkit/idempotents.hpp"
#include "exkit/linalg.hpp"
#include "exkit/ring.hpp"

namespace exkit {

enum class DecomposeBackend {
  Auto,             // kernel splitting when applicable, otherwise exhaustive
  KernelSplitting,  // linear algebra; matrix rings over F_p and their corners only
  Exhaustive,       // first hit over idempotents in canonical order
};

/// Orthogonal idempotents e in Rx, f in Ry with e + f = 1; e = s x, f = t y.
struct Decomposition {
  Element e, f;
  Element s, t;
};

namespace detail {

struct MatrixFrame {
  const MatrixBackend* matrix;
  Element frame;  // identity of the ring inside the matrix ring
};

/// Matrix ring over a prime field, or a corner of one.
inline std::optional<MatrixFrame> matrix_frame(const Ring& r) {
  if (const auto* m = dynamic_cast<const MatrixBackend*>(&r.backend())) {
    if (m->over_prime_field() && !m->upper_triangular()) return MatrixFrame{m, m->one()};
    return std::nullopt;
  }
  if (const auto* c = dynamic_cast<const CornerBackend*>(&r.backend())) {
    auto inner = matrix_frame(c->parent());
    if (inner && inner->frame == inner->matrix->one()) return MatrixFrame{inner->matrix, c->idempotent()};
  }
  return std::nullopt;
}

inline linalg::Matrix<linalg::PrimeField> to_linalg(const MatrixBackend& m, const Element& x) {
  linalg::Matrix<linalg::PrimeField> out(linalg::PrimeField{m.modulus()}, m.dim(), m.dim());
  for (std::size_t i = 0; i < x.size(); ++i) out.a[i] = x[i];
  return out;
}

inline Element from_linalg(const linalg::Matrix<linalg::PrimeField>& x) { return Element(x.a.begin(), x.a.end()); }

inline void verify_decomposition(const Ring& r, const Element& x, const Element& y, const Decomposition& d) {
  auto check = [](bool ok, const char* what) {
    if (!ok) throw InvariantViolated(0, std::string("suitable_decompose: ") + what);
  };
  check(r.is_idempotent(d.e) && r.is_idempotent(d.f), "e, f idempotent");
  check(r.orthogonal(d.e, d.f), "ef = fe = 0");
  check(r.add(d.e, d.f) == r.one(), "e + f = 1");
  check(r.mul(d.s, x) == d.e, "e in Rx");
  check(r.mul(d.t, y) == d.f, "f in Ry");
}

inline std::optional<Decomposition> decompose_by_kernel_splitting(const Ring& r, const Element& x,
                                                                  const Element& y) {
  auto frame = matrix_frame(r);
  if (!frame) return std::nullopt;
  const auto& m = *frame->matrix;
  auto split = linalg::kernel_split(to_linalg(m, frame->frame), to_linalg(m, x), to_linalg(m, y));
  if (!split) return std::nullopt;
  return Decomposition{from_linalg(split->f2), from_linalg(split->f3), from_linalg(split->s2),
                       from_linalg(split->s3)};
}

inline std::optional<Decomposition> decompose_by_search(const Ring& r, const Element& x, const Element& y,
                                                        std::size_t cap) {
  const auto rx = left_multiples(r, x, cap);
  const auto ry = left_multiples(r, y, cap);
  const Element one = r.one();
  for (const auto& e : r.idempotents(cap)) {
    auto ie = rx.find(e);
    if (ie == rx.end()) continue;
    auto jf = ry.find(r.sub(one, e));
    if (jf == ry.end()) continue;
    return Decomposition{e, jf->first, ie->second, jf->second};
  }
  return std::nullopt;
}

}  // namespace detail

/// True when the kernel-splitting backend can run on this ring.
inline bool supports_kernel_splitting(const Ring& r) { return detail::matrix_frame(r).has_value(); }

/// Splits x + y = 1 into orthogonal idempotents e in Rx, f in Ry. Throws
/// NotSuitable when the exhaustive search finds no pair, which certifies
/// that R is not suitable.
inline Decomposition suitable_decompose(const Ring& r, const Element& x, const Element& y,
                                        DecomposeBackend backend = DecomposeBackend::Auto,
                                        std::size_t cap = kDefaultCap) {
  if (r.add(x, y) != r.one()) throw PreconditionFailed("suitable_decompose: x + y != 1");
  std::optional<Decomposition> d;
  if (backend != DecomposeBackend::Exhaustive) {
    d = detail::decompose_by_kernel_splitting(r, x, y);
    if (!d && backend == DecomposeBackend::KernelSplitting)
      throw PreconditionFailed("suitable_decompose: kernel splitting does not apply to " + r.describe());
  }
  if (!d) {
    d = detail::decompose_by_search(r, x, y, cap);
    if (!d) throw NotSuitable(r.describe() + " is not suitable: no decomposition for x = " + r.to_json(x).dump());
  }
  detail::verify_decomposition(r, x, y, *d);
  return *d;
}

/// Corner splitter for refine_three over a finite ring: decomposes
/// a + b = f inside Corner(R, f).
struct FiniteCornerSplitter {
  const Ring& ring;
  DecomposeBackend backend = DecomposeBackend::Auto;
  std::size_t cap = kDefaultCap;

  std::optional<CornerSplit<Element>> operator()(const Element& f, const Element& a, const Element& b) const {
    try {
      const Ring corner = f == ring.one() ? ring : Ring::corner(ring, f);
      auto d = suitable_decompose(corner, a, b, backend, cap);
      return CornerSplit<Element>{d.e, d.f, d.s, d.t};
    } catch (const NotSuitable&) {
      return std::nullopt;
    }
  }
};

inline Refinement<Element> refine_three(const Ring& r, const Element& x1, const Element& x2, const Element& x3,
                                        DecomposeBackend backend = DecomposeBackend::Auto,
                                        std::size_t cap = kDefaultCap) {
  return refine_three(r, x1, x2, x3, FiniteCornerSplitter{r, backend, cap});
}

/// Finite-ring orthogonalize: J given as an ideal membership predicate,
/// u inverted in R.
template <class InRadical>
Family<Element> orthogonalize(const Ring& r, const Family<Element>& fam, const Element& u, InRadical&& in_radical,
                              std::size_t cap = kDefaultCap) {
  auto inv = r.inverse(u, cap);
  if (!inv) throw NotUnit("orthogonalize: u is not a unit");
  return orthogonalize(r, fam, u, *inv, std::forward<InRadical>(in_radical));
}


struct ExchangeVerification {
  bool suitable = true;
  bool exhaustive = true;
  std::size_t checked = 0;
  std::optional<Element> failing_x;
};

/// Runs suitable_decompose(x, 1 - x) with the exhaustive backend for every
/// x (when |R| <= 256) or for `sample_budget` sampled x. Doubles as the
/// oracle certifying NotSuitable claims.
inline ExchangeVerification verify_exchange_ring(const Ring& r, std::size_t sample_budget = 1024,
                                                 std::size_t cap = kDefaultCap) {
  const auto& all = r.elements(cap);
  ExchangeVerification out;
  out.exhaustive = all.size() <= 256;
  std::vector<std::size_t> picks;
  if (out.exhaustive) {
    for (std::size_t i = 0; i < all.size(); ++i) picks.push_back(i);
  } else {
    std::mt19937_64 rng(0x5eed);
    std::uniform_int_distribution<std::size_t> dist(0, all.size() - 1);
    for (std::size_t k = 0; k < sample_budget; ++k) picks.push_back(dist(rng));
  }
  const Element one = r.one();
  for (std::size_t i : picks) {
    ++out.checked;
    try {
      suitable_decompose(r, all[i], r.sub(one, all[i]), DecomposeBackend::Exhaustive, cap);
    } catch (const NotSuitable&) {
      out.suitable = false;
      out.failing_x = all[i];
      break;
    }
  }
  return out;
}

}  // namespace exkit
