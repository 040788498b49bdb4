#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "exkit/error.hpp"

namespace exkit {

using json = nlohmann::json;

/// Canonical encoding of a ring element. Two encodings compare equal iff the
/// elements they denote are equal; the layout is owned by the ring backend
/// (residue, row-major matrix, concatenated tuple, coset representative,
/// table index).
using Element = std::vector<std::int64_t>;

struct ElementHash {
  std::size_t operator()(const Element& x) const noexcept {
    std::size_t h = 0xcbf29ce484222325ull;
    for (auto v : x) {
      h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

inline constexpr std::size_t kDefaultCap = 4096;

/// Minimal interface shared by every ring the generic algorithms run on.
template <class R>
concept RingLike = requires(const R& r, const typename R::value_type& a) {
  typename R::value_type;
  { r.zero() } -> std::convertible_to<typename R::value_type>;
  { r.one() } -> std::convertible_to<typename R::value_type>;
  { r.add(a, a) } -> std::convertible_to<typename R::value_type>;
  { r.sub(a, a) } -> std::convertible_to<typename R::value_type>;
  { r.neg(a) } -> std::convertible_to<typename R::value_type>;
  { r.mul(a, a) } -> std::convertible_to<typename R::value_type>;
  { r.eq(a, a) } -> std::convertible_to<bool>;
};

namespace detail {

inline std::int64_t mod(std::int64_t a, std::int64_t n) {
  std::int64_t r = a % n;
  return r < 0 ? r + n : r;
}

inline std::int64_t mulmod(std::int64_t a, std::int64_t b, std::int64_t n) {
  return static_cast<std::int64_t>((static_cast<__int128>(a) * b) % n);
}

inline bool is_prime(std::int64_t n) {
  if (n < 2) return false;
  for (std::int64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

/// Inverse of a modulo n, if gcd(a, n) = 1.
inline std::optional<std::int64_t> inverse_mod(std::int64_t a, std::int64_t n) {
  std::int64_t t = 0, new_t = 1, r = n, new_r = mod(a, n);
  while (new_r != 0) {
    std::int64_t q = r / new_r;
    std::tie(t, new_t) = std::make_pair(new_t, t - q * new_t);
    std::tie(r, new_r) = std::make_pair(new_r, r - q * new_r);
  }
  if (r != 1) return std::nullopt;
  return mod(t, n);
}

/// Product of sizes with overflow detection against `limit`.
inline std::optional<std::size_t> checked_power(std::size_t base, std::size_t exp,
                                                std::size_t limit = std::numeric_limits<std::size_t>::max() / 4) {
  std::size_t result = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && result > limit / base) return std::nullopt;
    result *= base;
  }
  return result;
}

}  // namespace detail

class Ring;

/// Backend of a concrete ring. Implementations are immutable after
/// construction and must be safe for concurrent use.
class RingBackend {
 public:
  virtual ~RingBackend() = default;

  virtual std::string describe() const = 0;
  virtual Element zero() const = 0;
  virtual Element one() const = 0;
  virtual Element add(const Element& a, const Element& b) const = 0;
  virtual Element neg(const Element& a) const = 0;
  virtual Element mul(const Element& a, const Element& b) const = 0;

  /// Reduces an arbitrary encoding of the right width to canonical form, or
  /// throws PreconditionFailed if it does not denote an element.
  virtual Element canonical(const Element& raw) const = 0;

  /// Number of elements when it is known without enumerating; nullopt when it
  /// overflows or needs enumeration.
  virtual std::optional<std::size_t> known_size() const = 0;

  /// Complete, duplicate-free listing in canonical order. Callers enforce the
  /// enumeration cap; `cap` is passed so nested rings can enforce theirs.
  virtual std::vector<Element> list(std::size_t cap) const = 0;

  /// Inverse by structure (linear algebra, extended gcd). The outer optional
  /// is empty when the backend cannot decide without enumeration.
  virtual std::optional<std::optional<Element>> structural_inverse(const Element&) const {
    return std::nullopt;
  }

  virtual json descriptor() const = 0;
  virtual json element_to_json(const Element& x) const = 0;
  virtual Element element_from_json(const json& j) const = 0;
};

namespace detail {

struct EnumerationCache {
  std::once_flag once;
  std::vector<Element> elements;
  std::unordered_map<Element, std::size_t, ElementHash> index;
  std::once_flag idem_once;
  std::vector<Element> idempotents;
  std::once_flag unit_once;
  std::vector<Element> units;
  std::vector<std::size_t> inverse_index;  // SIZE_MAX for non-units
};

}  // namespace detail

/// A concrete ring: a shared immutable backend plus a memoized enumeration.
///
/// `Ring` is cheap to copy. Copies share the enumeration cache, which is
/// filled at most once under std::call_once.
class Ring {
 public:
  using value_type = Element;

  explicit Ring(std::shared_ptr<const RingBackend> backend)
      : impl_(std::move(backend)), cache_(std::make_shared<detail::EnumerationCache>()) {}

  static Ring zmod(std::int64_t n);
  static Ring matrix(std::int64_t modulus, std::size_t k);
  static Ring upper_triangular(std::int64_t modulus, std::size_t k);
  static Ring product(std::vector<Ring> factors);
  static Ring corner(const Ring& parent, const Element& e);
  static Ring table(std::size_t size, std::vector<std::vector<std::size_t>> add,
                    std::vector<std::vector<std::size_t>> mul, std::size_t one);

  const RingBackend& backend() const { return *impl_; }
  std::shared_ptr<const RingBackend> backend_ptr() const { return impl_; }
  std::string describe() const { return impl_->describe(); }

  Element zero() const { return impl_->zero(); }
  Element one() const { return impl_->one(); }
  Element add(const Element& a, const Element& b) const { return impl_->add(a, b); }
  Element neg(const Element& a) const { return impl_->neg(a); }
  Element sub(const Element& a, const Element& b) const { return impl_->add(a, impl_->neg(b)); }
  Element mul(const Element& a, const Element& b) const { return impl_->mul(a, b); }
  bool eq(const Element& a, const Element& b) const { return a == b; }

  Element mul(std::initializer_list<std::reference_wrapper<const Element>> factors) const {
    auto it = factors.begin();
    Element acc = it->get();
    for (++it; it != factors.end(); ++it) acc = mul(acc, it->get());
    return acc;
  }

  Element pow(const Element& x, std::size_t n) const {
    Element result = one();
    Element base = x;
    while (n > 0) {
      if (n & 1u) result = mul(result, base);
      n >>= 1u;
      if (n > 0) base = mul(base, base);
    }
    return result;
  }

  Element sum(const std::vector<Element>& xs) const {
    Element acc = zero();
    for (const auto& x : xs) acc = add(acc, x);
    return acc;
  }

  bool is_zero(const Element& x) const { return x == zero(); }
  bool is_idempotent(const Element& x) const { return mul(x, x) == x; }
  bool orthogonal(const Element& a, const Element& b) const {
    return is_zero(mul(a, b)) && is_zero(mul(b, a));
  }

  Element canonical(const Element& raw) const { return impl_->canonical(raw); }
  Element from_json(const json& j) const { return impl_->element_from_json(j); }
  json to_json(const Element& x) const { return impl_->element_to_json(x); }
  json descriptor() const { return impl_->descriptor(); }

  std::optional<std::size_t> known_size() const { return impl_->known_size(); }

  /// Full enumeration, memoized. Throws CapExceeded when the ring is larger
  /// than `cap`.
  const std::vector<Element>& elements(std::size_t cap = kDefaultCap) const {
    if (auto n = impl_->known_size(); !n || *n > cap) {
      throw CapExceeded(describe() + ": " + (n ? std::to_string(*n) : std::string("unbounded")) +
                            " elements exceeds enumeration cap " + std::to_string(cap),
                        n.value_or(0));
    }
    std::call_once(cache_->once, [&] {
      cache_->elements = impl_->list(cap);
      cache_->index.reserve(cache_->elements.size());
      for (std::size_t i = 0; i < cache_->elements.size(); ++i)
        cache_->index.emplace(cache_->elements[i], i);
    });
    if (cache_->elements.size() > cap) {
      throw CapExceeded(describe() + ": " + std::to_string(cache_->elements.size()) +
                            " elements exceeds enumeration cap " + std::to_string(cap),
                        cache_->elements.size());
    }
    return cache_->elements;
  }

  std::size_t size(std::size_t cap = kDefaultCap) const {
    if (auto n = impl_->known_size()) return *n;
    return elements(cap).size();
  }

  /// Position in the canonical enumeration. Requires an enumerable ring.
  std::size_t index_of(const Element& x, std::size_t cap = kDefaultCap) const {
    elements(cap);
    auto it = cache_->index.find(x);
    if (it == cache_->index.end())
      throw PreconditionFailed(describe() + ": encoding is not a canonical element");
    return it->second;
  }

  const std::vector<Element>& idempotents(std::size_t cap = kDefaultCap) const {
    const auto& all = elements(cap);
    std::call_once(cache_->idem_once, [&] {
      for (const auto& x : all)
        if (is_idempotent(x)) cache_->idempotents.push_back(x);
    });
    return cache_->idempotents;
  }

  const std::vector<Element>& units(std::size_t cap = kDefaultCap) const {
    fill_units(cap);
    return cache_->units;
  }

  /// Two-sided inverse, or nullopt when x is not a unit. Uses the backend's
  /// structural inverse when available, otherwise the enumeration.
  std::optional<Element> inverse(const Element& x, std::size_t cap = kDefaultCap) const {
    if (auto s = impl_->structural_inverse(x)) return *s;
    fill_units(cap);
    std::size_t inv = cache_->inverse_index[index_of(x, cap)];
    if (inv == SIZE_MAX) return std::nullopt;
    return cache_->elements[inv];
  }

  bool is_unit(const Element& x, std::size_t cap = kDefaultCap) const {
    return inverse(x, cap).has_value();
  }

 private:
  void fill_units(std::size_t cap) const {
    const auto& all = elements(cap);
    std::call_once(cache_->unit_once, [&] {
      const Element e = one();
      cache_->inverse_index.assign(all.size(), SIZE_MAX);
      for (std::size_t i = 0; i < all.size(); ++i) {
        if (cache_->inverse_index[i] != SIZE_MAX) continue;
        for (std::size_t j = 0; j < all.size(); ++j) {
          if (mul(all[i], all[j]) == e && mul(all[j], all[i]) == e) {
            cache_->inverse_index[i] = j;
            cache_->inverse_index[j] = i;
            break;
          }
        }
      }
      for (std::size_t i = 0; i < all.size(); ++i)
        if (cache_->inverse_index[i] != SIZE_MAX) cache_->units.push_back(all[i]);
    });
  }

  std::shared_ptr<const RingBackend> impl_;
  std::shared_ptr<detail::EnumerationCache> cache_;
};

static_assert(RingLike<Ring>);

// Free-function surface ------------------------------------------------------

inline const std::vector<Element>& enumerate(const Ring& r, std::size_t cap = kDefaultCap) {
  return r.elements(cap);
}

inline std::vector<Element> idempotents(const Ring& r, std::size_t cap = kDefaultCap) {
  return r.idempotents(cap);
}

inline std::vector<Element> units(const Ring& r, std::size_t cap = kDefaultCap) {
  return r.units(cap);
}

inline std::optional<Element> is_unit(const Ring& r, const Element& x, std::size_t cap = kDefaultCap) {
  return r.inverse(x, cap);
}

// Backends --------------------------------------------------------------------

namespace detail {

inline std::int64_t json_int(const json& j, const char* what) {
  if (!j.is_number_integer()) throw ParseError(std::string("expected integer for ") + what);
  return j.get<std::int64_t>();
}

class ZModBackend final : public RingBackend {
 public:
  explicit ZModBackend(std::int64_t n) : n_(n) {
    if (n < 1) throw MalformedRing("zmod modulus must be positive");
  }
  std::int64_t modulus() const { return n_; }

  std::string describe() const override { return "Z/" + std::to_string(n_); }
  Element zero() const override { return {0}; }
  Element one() const override { return {detail::mod(1, n_)}; }
  Element add(const Element& a, const Element& b) const override {
    return {detail::mod(a[0] + b[0], n_)};
  }
  Element neg(const Element& a) const override { return {detail::mod(-a[0], n_)}; }
  Element mul(const Element& a, const Element& b) const override {
    return {detail::mulmod(a[0], b[0], n_)};
  }
  Element canonical(const Element& raw) const override {
    if (raw.size() != 1) throw PreconditionFailed("Z/n element must have width 1");
    return {detail::mod(raw[0], n_)};
  }
  std::optional<std::size_t> known_size() const override { return static_cast<std::size_t>(n_); }
  std::vector<Element> list(std::size_t) const override {
    std::vector<Element> out;
    out.reserve(static_cast<std::size_t>(n_));
    for (std::int64_t i = 0; i < n_; ++i) out.push_back({i});
    return out;
  }
  std::optional<std::optional<Element>> structural_inverse(const Element& x) const override {
    if (n_ == 1) return std::optional<Element>(Element{0});
    auto inv = detail::inverse_mod(x[0], n_);
    if (!inv) return std::optional<Element>{};
    return std::optional<Element>(Element{*inv});
  }
  json descriptor() const override { return {{"zmod", n_}}; }
  json element_to_json(const Element& x) const override { return x[0]; }
  Element element_from_json(const json& j) const override {
    return canonical({json_int(j, "Z/n element")});
  }

 private:
  std::int64_t n_;
};

/// k x k matrices over Z/m, row-major; optionally restricted to the
/// upper-triangular subring.
class MatrixBackend final : public RingBackend {
 public:
  MatrixBackend(std::int64_t m, std::size_t k, bool upper)
      : m_(m), k_(k), upper_(upper), prime_(detail::is_prime(m)) {
    if (m < 1) throw MalformedRing("matrix base modulus must be positive");
    if (k < 1) throw MalformedRing("matrix size must be positive");
  }

  std::int64_t modulus() const { return m_; }
  std::size_t dim() const { return k_; }
  bool upper_triangular() const { return upper_; }
  bool over_prime_field() const { return prime_; }

  std::string describe() const override {
    return std::string(upper_ ? "T" : "M") + std::to_string(k_) + "(Z/" + std::to_string(m_) + ")";
  }
  Element zero() const override { return Element(k_ * k_, 0); }
  Element one() const override {
    Element e(k_ * k_, 0);
    for (std::size_t i = 0; i < k_; ++i) e[i * k_ + i] = detail::mod(1, m_);
    return e;
  }
  Element add(const Element& a, const Element& b) const override {
    Element c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = detail::mod(a[i] + b[i], m_);
    return c;
  }
  Element neg(const Element& a) const override {
    Element c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = detail::mod(-a[i], m_);
    return c;
  }
  Element mul(const Element& a, const Element& b) const override {
    Element c(k_ * k_, 0);
    for (std::size_t i = 0; i < k_; ++i)
      for (std::size_t l = 0; l < k_; ++l) {
        const std::int64_t ail = a[i * k_ + l];
        if (ail == 0) continue;
        for (std::size_t j = 0; j < k_; ++j) c[i * k_ + j] += ail * b[l * k_ + j];
      }
    for (auto& v : c) v = detail::mod(v, m_);
    return c;
  }
  Element canonical(const Element& raw) const override {
    if (raw.size() != k_ * k_) throw PreconditionFailed("matrix element has wrong width");
    Element c(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) c[i] = detail::mod(raw[i], m_);
    if (upper_)
      for (std::size_t i = 0; i < k_; ++i)
        for (std::size_t j = 0; j < i; ++j)
          if (c[i * k_ + j] != 0) throw PreconditionFailed("not an upper-triangular matrix");
    return c;
  }
  std::optional<std::size_t> known_size() const override {
    return detail::checked_power(static_cast<std::size_t>(m_), free_entries());
  }
  std::vector<Element> list(std::size_t) const override {
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < k_; ++i)
      for (std::size_t j = 0; j < k_; ++j)
        if (!upper_ || j >= i) slots.push_back(i * k_ + j);
    std::vector<Element> out;
    Element cur(k_ * k_, 0);
    // Lexicographic: first row-major slot is most significant.
    while (true) {
      out.push_back(cur);
      std::size_t pos = slots.size();
      while (pos > 0) {
        auto& v = cur[slots[pos - 1]];
        if (++v < m_) break;
        v = 0;
        --pos;
      }
      if (pos == 0) break;
    }
    return out;
  }
  std::optional<std::optional<Element>> structural_inverse(const Element& x) const override {
    if (!prime_) return std::nullopt;
    // Gauss-Jordan on [x | I] over F_p.
    const std::size_t n = k_;
    std::vector<std::int64_t> a(x.begin(), x.end());
    Element inv = one();
    for (std::size_t col = 0; col < n; ++col) {
      std::size_t piv = n;
      for (std::size_t r = col; r < n; ++r)
        if (a[r * n + col] != 0) { piv = r; break; }
      if (piv == n) return std::optional<Element>{};
      if (piv != col)
        for (std::size_t j = 0; j < n; ++j) {
          std::swap(a[piv * n + j], a[col * n + j]);
          std::swap(inv[piv * n + j], inv[col * n + j]);
        }
      const std::int64_t s = *detail::inverse_mod(a[col * n + col], m_);
      for (std::size_t j = 0; j < n; ++j) {
        a[col * n + j] = detail::mulmod(a[col * n + j], s, m_);
        inv[col * n + j] = detail::mulmod(inv[col * n + j], s, m_);
      }
      for (std::size_t r = 0; r < n; ++r) {
        if (r == col || a[r * n + col] == 0) continue;
        const std::int64_t f = a[r * n + col];
        for (std::size_t j = 0; j < n; ++j) {
          a[r * n + j] = detail::mod(a[r * n + j] - f * a[col * n + j], m_);
          inv[r * n + j] = detail::mod(inv[r * n + j] - f * inv[col * n + j], m_);
        }
      }
    }
    return std::optional<Element>(inv);
  }
  json descriptor() const override {
    return {{upper_ ? "upper_triangular" : "matrix", {{"base", {{"zmod", m_}}}, {"k", k_}}}};
  }
  json element_to_json(const Element& x) const override {
    json rows = json::array();
    for (std::size_t i = 0; i < k_; ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < k_; ++j) row.push_back(x[i * k_ + j]);
      rows.push_back(row);
    }
    return rows;
  }
  Element element_from_json(const json& j) const override {
    if (!j.is_array() || j.size() != k_) throw ParseError("matrix literal must have k rows");
    Element raw;
    for (const auto& row : j) {
      if (!row.is_array() || row.size() != k_) throw ParseError("matrix row must have k entries");
      for (const auto& v : row) raw.push_back(json_int(v, "matrix entry"));
    }
    return canonical(raw);
  }

 private:
  std::size_t free_entries() const { return upper_ ? k_ * (k_ + 1) / 2 : k_ * k_; }

  std::int64_t m_;
  std::size_t k_;
  bool upper_;
  bool prime_;
};

class ProductBackend final : public RingBackend {
 public:
  explicit ProductBackend(std::vector<Ring> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw MalformedRing("product needs at least one factor");
    std::size_t off = 0;
    for (const auto& f : factors_) {
      offsets_.push_back(off);
      widths_.push_back(f.zero().size());
      off += widths_.back();
    }
    width_ = off;
  }

  const std::vector<Ring>& factors() const { return factors_; }

  Element component(const Element& x, std::size_t i) const {
    return Element(x.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
                   x.begin() + static_cast<std::ptrdiff_t>(offsets_[i] + widths_[i]));
  }

  std::string describe() const override {
    std::string s;
    for (std::size_t i = 0; i < factors_.size(); ++i) s += (i ? " x " : "") + factors_[i].describe();
    return "(" + s + ")";
  }
  Element zero() const override { return build([](const Ring& r, std::size_t, const Element*) { return r.zero(); }); }
  Element one() const override { return build([](const Ring& r, std::size_t, const Element*) { return r.one(); }); }
  Element add(const Element& a, const Element& b) const override {
    return zip(a, b, [](const Ring& r, const Element& x, const Element& y) { return r.add(x, y); });
  }
  Element mul(const Element& a, const Element& b) const override {
    return zip(a, b, [](const Ring& r, const Element& x, const Element& y) { return r.mul(x, y); });
  }
  Element neg(const Element& a) const override {
    return zip(a, a, [](const Ring& r, const Element& x, const Element&) { return r.neg(x); });
  }
  Element canonical(const Element& raw) const override {
    if (raw.size() != width_) throw PreconditionFailed("product element has wrong width");
    return zip(raw, raw, [](const Ring& r, const Element& x, const Element&) { return r.canonical(x); });
  }
  std::optional<std::size_t> known_size() const override {
    std::size_t total = 1;
    for (const auto& f : factors_) {
      auto n = f.known_size();
      if (!n) return std::nullopt;
      if (*n != 0 && total > (std::numeric_limits<std::size_t>::max() / 4) / *n) return std::nullopt;
      total *= *n;
    }
    return total;
  }
  std::vector<Element> list(std::size_t cap) const override {
    std::vector<Element> out{Element{}};
    for (const auto& f : factors_) {
      const auto& fs = f.elements(cap);
      std::vector<Element> next;
      next.reserve(out.size() * fs.size());
      for (const auto& prefix : out)
        for (const auto& x : fs) {
          Element e = prefix;
          e.insert(e.end(), x.begin(), x.end());
          next.push_back(std::move(e));
        }
      out = std::move(next);
    }
    return out;
  }
  std::optional<std::optional<Element>> structural_inverse(const Element& x) const override {
    Element inv;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      auto s = factors_[i].backend().structural_inverse(component(x, i));
      if (!s) return std::nullopt;
      if (!*s) return std::optional<Element>{};
      inv.insert(inv.end(), (*s)->begin(), (*s)->end());
    }
    return std::optional<Element>(inv);
  }
  json descriptor() const override {
    json fs = json::array();
    for (const auto& f : factors_) fs.push_back(f.descriptor());
    return {{"product", fs}};
  }
  json element_to_json(const Element& x) const override {
    json t = json::array();
    for (std::size_t i = 0; i < factors_.size(); ++i) t.push_back(factors_[i].to_json(component(x, i)));
    return t;
  }
  Element element_from_json(const json& j) const override {
    if (!j.is_array() || j.size() != factors_.size())
      throw ParseError("product literal must list one component per factor");
    Element e;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      Element c = factors_[i].from_json(j[i]);
      e.insert(e.end(), c.begin(), c.end());
    }
    return e;
  }

 private:
  template <class F>
  Element build(F f) const {
    Element e;
    e.reserve(width_);
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      Element c = f(factors_[i], i, nullptr);
      e.insert(e.end(), c.begin(), c.end());
    }
    return e;
  }
  template <class F>
  Element zip(const Element& a, const Element& b, F f) const {
    Element e;
    e.reserve(width_);
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      Element c = f(factors_[i], component(a, i), component(b, i));
      e.insert(e.end(), c.begin(), c.end());
    }
    return e;
  }

  std::vector<Ring> factors_;
  std::vector<std::size_t> offsets_, widths_;
  std::size_t width_ = 0;
};

/// eRe for an idempotent e of the parent; identity e, parent operations.
class CornerBackend final : public RingBackend {
 public:
  CornerBackend(Ring parent, Element e) : parent_(std::move(parent)), e_(parent_.canonical(e)) {
    if (!parent_.is_idempotent(e_)) throw MalformedRing("corner requires an idempotent");
  }
  const Ring& parent() const { return parent_; }
  const Element& idempotent() const { return e_; }

  Element compress(const Element& x) const { return parent_.mul(parent_.mul(e_, x), e_); }

  std::string describe() const override {
    return "Corner(" + parent_.describe() + ", " + parent_.to_json(e_).dump() + ")";
  }
  Element zero() const override { return parent_.zero(); }
  Element one() const override { return e_; }
  Element add(const Element& a, const Element& b) const override { return parent_.add(a, b); }
  Element neg(const Element& a) const override { return parent_.neg(a); }
  Element mul(const Element& a, const Element& b) const override { return parent_.mul(a, b); }
  Element canonical(const Element& raw) const override {
    Element x = parent_.canonical(raw);
    if (compress(x) != x) throw PreconditionFailed("element does not lie in the corner eRe");
    return x;
  }
  std::optional<std::size_t> known_size() const override {
    if (auto n = parent_.known_size(); !n) return std::nullopt;
    return size_once();
  }
  std::vector<Element> list(std::size_t cap) const override {
    std::vector<Element> out;
    for (const auto& x : parent_.elements(cap))
      if (compress(x) == x) out.push_back(x);
    return out;
  }
  json descriptor() const override {
    return {{"corner", {{"parent", parent_.descriptor()}, {"e", parent_.to_json(e_)}}}};
  }
  json element_to_json(const Element& x) const override { return parent_.to_json(x); }
  Element element_from_json(const json& j) const override { return canonical(parent_.from_json(j)); }

 private:
  std::optional<std::size_t> size_once() const {
    // The corner size needs the parent enumeration; it is computed lazily
    // and only when the parent fits the default cap.
    std::call_once(size_flag_, [&] {
      try {
        std::size_t n = 0;
        for (const auto& x : parent_.elements()) n += compress(x) == x;
        size_ = n;
      } catch (const CapExceeded&) {
        size_.reset();
      }
    });
    return size_;
  }

  Ring parent_;
  Element e_;
  mutable std::once_flag size_flag_;
  mutable std::optional<std::size_t> size_;
};

/// Finite ring given by Cayley tables over indices 0..n-1.
class TableBackend final : public RingBackend {
 public:
  TableBackend(std::size_t n, std::vector<std::vector<std::size_t>> add,
               std::vector<std::vector<std::size_t>> mul, std::size_t one)
      : n_(n), add_(std::move(add)), mul_(std::move(mul)), one_(one) {
    validate();
  }

  std::string describe() const override { return "Table(" + std::to_string(n_) + ")"; }
  Element zero() const override { return {static_cast<std::int64_t>(zero_)}; }
  Element one() const override { return {static_cast<std::int64_t>(one_)}; }
  Element add(const Element& a, const Element& b) const override {
    return {static_cast<std::int64_t>(add_[a[0]][b[0]])};
  }
  Element neg(const Element& a) const override { return {static_cast<std::int64_t>(neg_[a[0]])}; }
  Element mul(const Element& a, const Element& b) const override {
    return {static_cast<std::int64_t>(mul_[a[0]][b[0]])};
  }
  Element canonical(const Element& raw) const override {
    if (raw.size() != 1 || raw[0] < 0 || static_cast<std::size_t>(raw[0]) >= n_)
      throw PreconditionFailed("table element index out of range");
    return raw;
  }
  std::optional<std::size_t> known_size() const override { return n_; }
  std::vector<Element> list(std::size_t) const override {
    std::vector<Element> out;
    for (std::size_t i = 0; i < n_; ++i) out.push_back({static_cast<std::int64_t>(i)});
    return out;
  }
  json descriptor() const override {
    return {{"table", {{"size", n_}, {"add", add_}, {"mul", mul_}, {"one", one_}}}};
  }
  json element_to_json(const Element& x) const override { return x[0]; }
  Element element_from_json(const json& j) const override {
    return canonical({json_int(j, "table element")});
  }

 private:
  [[noreturn]] static void fail(const std::string& what, std::size_t a, std::size_t b, std::size_t c) {
    throw MalformedRing("table ring violates " + what + " at (" + std::to_string(a) + ", " +
                        std::to_string(b) + ", " + std::to_string(c) + ")");
  }

  void validate() {
    if (n_ == 0) throw MalformedRing("table ring must be nonempty");
    if (add_.size() != n_ || mul_.size() != n_) throw MalformedRing("table dimensions must equal size");
    for (std::size_t i = 0; i < n_; ++i) {
      if (add_[i].size() != n_ || mul_[i].size() != n_) throw MalformedRing("table rows must have size entries");
      for (std::size_t j = 0; j < n_; ++j)
        if (add_[i][j] >= n_ || mul_[i][j] >= n_) throw MalformedRing("table entry out of range");
    }
    if (one_ >= n_) throw MalformedRing("identity index out of range");
    // Additive identity.
    std::optional<std::size_t> z;
    for (std::size_t c = 0; c < n_ && !z; ++c) {
      bool ok = true;
      for (std::size_t a = 0; a < n_ && ok; ++a) ok = add_[c][a] == a && add_[a][c] == a;
      if (ok) z = c;
    }
    if (!z) throw MalformedRing("table ring has no additive identity");
    zero_ = *z;
    neg_.assign(n_, n_);
    for (std::size_t a = 0; a < n_; ++a) {
      for (std::size_t b = 0; b < n_; ++b)
        if (add_[a][b] == zero_) { neg_[a] = b; break; }
      if (neg_[a] == n_) fail("additive inverses", a, a, a);
    }
    for (std::size_t a = 0; a < n_; ++a) {
      if (mul_[one_][a] != a || mul_[a][one_] != a) fail("two-sided identity", one_, a, a);
      for (std::size_t b = 0; b < n_; ++b) {
        if (add_[a][b] != add_[b][a]) fail("additive commutativity", a, b, b);
        for (std::size_t c = 0; c < n_; ++c) {
          if (add_[add_[a][b]][c] != add_[a][add_[b][c]]) fail("additive associativity", a, b, c);
          if (mul_[mul_[a][b]][c] != mul_[a][mul_[b][c]]) fail("associativity", a, b, c);
          if (mul_[a][add_[b][c]] != add_[mul_[a][b]][mul_[a][c]]) fail("left distributivity", a, b, c);
          if (mul_[add_[a][b]][c] != add_[mul_[a][c]][mul_[b][c]]) fail("right distributivity", a, b, c);
        }
      }
    }
  }

  std::size_t n_;
  std::vector<std::vector<std::size_t>> add_, mul_;
  std::size_t one_;
  std::size_t zero_ = 0;
  std::vector<std::size_t> neg_;
};

}  // namespace detail

inline Ring Ring::zmod(std::int64_t n) { return Ring(std::make_shared<detail::ZModBackend>(n)); }

inline Ring Ring::matrix(std::int64_t modulus, std::size_t k) {
  return Ring(std::make_shared<detail::MatrixBackend>(modulus, k, false));
}

inline Ring Ring::upper_triangular(std::int64_t modulus, std::size_t k) {
  return Ring(std::make_shared<detail::MatrixBackend>(modulus, k, true));
}

inline Ring Ring::product(std::vector<Ring> factors) {
  return Ring(std::make_shared<detail::ProductBackend>(std::move(factors)));
}

inline Ring Ring::corner(const Ring& parent, const Element& e) {
  return Ring(std::make_shared<detail::CornerBackend>(parent, e));
}

inline Ring Ring::table(std::size_t size, std::vector<std::vector<std::size_t>> add,
                        std::vector<std::vector<std::size_t>> mul, std::size_t one) {
  return Ring(std::make_shared<detail::TableBackend>(size, std::move(add), std::move(mul), one));
}

/// Left multiples R*x keyed by element, each mapped to the first multiplier
/// s (in canonical order) with s*x equal to it.
inline std::unordered_map<Element, Element, ElementHash> left_multiples(const Ring& r, const Element& x,
                                                                        std::size_t cap = kDefaultCap) {
  std::unordered_map<Element, Element, ElementHash> out;
  for (const auto& s : r.elements(cap)) out.try_emplace(r.mul(s, x), s);
  return out;
}

/// First s in canonical order with s*x == target, if any.
inline std::optional<Element> find_left_multiplier(const Ring& r, const Element& target, const Element& x,
                                                   std::size_t cap = kDefaultCap) {
  for (const auto& s : r.elements(cap))
    if (r.mul(s, x) == target) return s;
  return std::nullopt;
}

}  // namespace exkit
