#pragma once

#include <deque>
#include <memory>
#include <vector>

#include "exkit/ring.hpp"

namespace exkit {

/// A two-sided ideal of an enumerable ring, stored as its full closure.
struct IdealData {
  std::vector<Element> generators;
  std::vector<Element> closure;     // canonical enumeration order
  std::vector<bool> member;         // indexed by position in the parent enumeration

  bool contains(const Ring& r, const Element& x) const { return member[r.index_of(x)]; }
  std::size_t size() const { return closure.size(); }
};

/// Smallest two-sided ideal containing `gens`.
inline IdealData generate_ideal(const Ring& r, std::vector<Element> gens, std::size_t cap = kDefaultCap) {
  const auto& all = r.elements(cap);
  IdealData id;
  id.member.assign(all.size(), false);
  std::deque<std::size_t> queue;
  auto insert = [&](const Element& x) {
    std::size_t i = r.index_of(x, cap);
    if (!id.member[i]) {
      id.member[i] = true;
      queue.push_back(i);
    }
  };
  insert(r.zero());
  for (auto& g : gens) {
    g = r.canonical(g);
    insert(g);
  }
  std::vector<std::size_t> seen;
  while (!queue.empty()) {
    std::size_t i = queue.front();
    queue.pop_front();
    const Element& a = all[i];
    for (std::size_t j : seen) insert(r.add(a, all[j]));
    seen.push_back(i);
    insert(r.add(a, a));
    insert(r.neg(a));
    for (const auto& s : all) {
      insert(r.mul(s, a));
      insert(r.mul(a, s));
    }
  }
  for (std::size_t i = 0; i < all.size(); ++i)
    if (id.member[i]) id.closure.push_back(all[i]);
  id.generators = std::move(gens);
  return id;
}

/// Wraps an explicitly listed subset, verifying it is a two-sided ideal.
inline IdealData ideal_from_closure(const Ring& r, const std::vector<Element>& subset,
                                    std::size_t cap = kDefaultCap) {
  const auto& all = r.elements(cap);
  IdealData id;
  id.member.assign(all.size(), false);
  for (const auto& x : subset) id.member[r.index_of(x, cap)] = true;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (id.member[i]) id.closure.push_back(all[i]);
  id.generators = id.closure;
  if (!id.member[r.index_of(r.zero(), cap)]) throw PreconditionFailed("ideal must contain zero");
  for (const auto& a : id.closure) {
    for (const auto& b : id.closure)
      if (!id.member[r.index_of(r.add(a, b), cap)]) throw PreconditionFailed("subset not closed under addition");
    for (const auto& s : all)
      if (!id.member[r.index_of(r.mul(s, a), cap)] || !id.member[r.index_of(r.mul(a, s), cap)])
        throw PreconditionFailed("subset not closed under ring multiplication");
  }
  return id;
}

namespace detail {

/// R/I with each coset represented by its least member in the parent's
/// canonical enumeration order.
class QuotientBackend final : public RingBackend {
 public:
  QuotientBackend(Ring parent, IdealData ideal, std::size_t cap)
      : parent_(std::move(parent)), ideal_(std::move(ideal)) {
    const auto& all = parent_.elements(cap);
    rep_.assign(all.size(), SIZE_MAX);
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (rep_[i] != SIZE_MAX) continue;
      reps_.push_back(i);
      for (const auto& j : ideal_.closure) rep_[parent_.index_of(parent_.add(all[i], j), cap)] = i;
    }
    cap_ = cap;
  }

  const Ring& parent() const { return parent_; }
  const IdealData& ideal() const { return ideal_; }

  /// Canonical image of a parent element.
  Element project(const Element& x) const {
    return parent_.elements(cap_)[rep_[parent_.index_of(x, cap_)]];
  }

  std::string describe() const override {
    return parent_.describe() + "/(" + std::to_string(ideal_.size()) + "-element ideal)";
  }
  Element zero() const override { return project(parent_.zero()); }
  Element one() const override { return project(parent_.one()); }
  Element add(const Element& a, const Element& b) const override { return project(parent_.add(a, b)); }
  Element neg(const Element& a) const override { return project(parent_.neg(a)); }
  Element mul(const Element& a, const Element& b) const override { return project(parent_.mul(a, b)); }
  Element canonical(const Element& raw) const override { return project(parent_.canonical(raw)); }
  std::optional<std::size_t> known_size() const override { return reps_.size(); }
  std::vector<Element> list(std::size_t) const override {
    std::vector<Element> out;
    for (std::size_t i : reps_) out.push_back(parent_.elements(cap_)[i]);
    return out;
  }
  json descriptor() const override {
    json gens = json::array();
    for (const auto& g : ideal_.generators) gens.push_back(parent_.to_json(g));
    return {{"quotient", {{"parent", parent_.descriptor()}, {"ideal_gens", gens}}}};
  }
  json element_to_json(const Element& x) const override { return parent_.to_json(x); }
  Element element_from_json(const json& j) const override { return project(parent_.from_json(j)); }

 private:
  Ring parent_;
  IdealData ideal_;
  std::vector<std::size_t> rep_;   // parent index -> index of least coset member
  std::vector<std::size_t> reps_;  // coset representatives in order
  std::size_t cap_ = kDefaultCap;
};

}  // namespace detail

inline Ring quotient_ring(const Ring& parent, IdealData ideal, std::size_t cap = kDefaultCap) {
  return Ring(std::make_shared<detail::QuotientBackend>(parent, std::move(ideal), cap));
}

inline Ring quotient_ring(const Ring& parent, const std::vector<Element>& gens, std::size_t cap = kDefaultCap) {
  return quotient_ring(parent, generate_ideal(parent, gens, cap), cap);
}

/// Projection R -> R/I for a ring built by quotient_ring.
inline Element project(const Ring& quotient, const Element& x) {
  const auto* q = dynamic_cast<const detail::QuotientBackend*>(&quotient.backend());
  if (!q) throw PreconditionFailed("ring is not a quotient");
  return q->project(x);
}

}  // namespace exkit
