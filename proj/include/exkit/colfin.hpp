#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "exkit/error.hpp"
#include "exkit/exchange.hpp"
#include "exkit/idempotents.hpp"
#include "exkit/linalg.hpp"

namespace exkit::colfin {

using Q = mpq_class;
using QMatrix = linalg::Matrix<linalg::RationalField>;

/// Nonzero entries of one column, sorted by row.
using Column = std::vector<std::pair<std::size_t, Q>>;

/// An N x N matrix over Q with finitely many nonzero entries per column,
/// given lazily by its column function. Columns are memoized; concurrent
/// readers see the same memoized column.
class ColFinMatrix {
 public:
  using ColumnFn = std::function<Column(std::size_t)>;

  explicit ColFinMatrix(ColumnFn fn) : impl_(std::make_shared<Impl>()) { impl_->fn = std::move(fn); }

  static ColFinMatrix zero() {
    return ColFinMatrix([](std::size_t) { return Column{}; });
  }
  static ColFinMatrix identity() {
    return ColFinMatrix([](std::size_t j) { return Column{{j, Q(1)}}; });
  }
  /// Right shift e_j -> e_{j+1}.
  static ColFinMatrix shift() {
    return ColFinMatrix([](std::size_t j) { return Column{{j + 1, Q(1)}}; });
  }
  /// Permutation matrix of a bijection of N (e_j -> e_{pi(j)}).
  static ColFinMatrix permutation(std::function<std::size_t(std::size_t)> pi) {
    return ColFinMatrix([pi = std::move(pi)](std::size_t j) { return Column{{pi(j), Q(1)}}; });
  }
  /// Finite part given by entries (row, col, value), plus `tail` times the
  /// identity on indices >= `tail_from`.
  static ColFinMatrix block_scalar(std::vector<std::tuple<std::size_t, std::size_t, Q>> entries,
                                   std::size_t tail_from = 0, Q tail = 0) {
    std::map<std::size_t, std::map<std::size_t, Q>> cols;
    for (auto& [r, c, v] : entries) cols[c][r] += v;
    return ColFinMatrix([cols = std::move(cols), tail_from, tail](std::size_t j) {
      std::map<std::size_t, Q> col;
      if (auto it = cols.find(j); it != cols.end()) col = it->second;
      if (j >= tail_from && sgn(tail) != 0) col[j] += tail;
      Column out;
      for (auto& [r, v] : col)
        if (sgn(v) != 0) out.emplace_back(r, v);
      return out;
    });
  }

  const Column& column(std::size_t j) const {
    std::lock_guard<std::mutex> lock(impl_->mu);
    auto it = impl_->memo.find(j);
    if (it != impl_->memo.end()) return it->second;
    Column c = impl_->fn(j);
    std::sort(c.begin(), c.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return impl_->memo.emplace(j, std::move(c)).first->second;
  }

  Q entry(std::size_t i, std::size_t j) const {
    for (const auto& [r, v] : column(j))
      if (r == i) return v;
    return 0;
  }

  /// Leading rows x cols block.
  QMatrix window(std::size_t rows, std::size_t cols) const {
    QMatrix m(linalg::RationalField{}, rows, cols);
    for (std::size_t j = 0; j < cols; ++j)
      for (const auto& [r, v] : column(j))
        if (r < rows) m(r, j) = v;
    return m;
  }

  /// Largest row index that is nonzero in column j, if any.
  std::optional<std::size_t> max_row(std::size_t j) const {
    const auto& c = column(j);
    if (c.empty()) return std::nullopt;
    return c.back().first;
  }

  bool column_equals(const ColFinMatrix& other, std::size_t j) const { return column(j) == other.column(j); }

  friend ColFinMatrix operator+(const ColFinMatrix& a, const ColFinMatrix& b) { return combine(a, b, 1); }
  friend ColFinMatrix operator-(const ColFinMatrix& a, const ColFinMatrix& b) { return combine(a, b, -1); }

  /// Column j of ab is the finite combination of columns of a selected by column j of b.
  friend ColFinMatrix operator*(const ColFinMatrix& a, const ColFinMatrix& b) {
    return ColFinMatrix([a, b](std::size_t j) {
      std::map<std::size_t, Q> acc;
      for (const auto& [k, bv] : b.column(j))
        for (const auto& [r, av] : a.column(k)) acc[r] += av * bv;
      Column out;
      for (auto& [r, v] : acc)
        if (sgn(v) != 0) out.emplace_back(r, v);
      return out;
    });
  }

 private:
  struct Impl {
    ColumnFn fn;
    std::mutex mu;
    std::unordered_map<std::size_t, Column> memo;
  };

  static ColFinMatrix combine(const ColFinMatrix& a, const ColFinMatrix& b, int sign) {
    return ColFinMatrix([a, b, sign](std::size_t j) {
      std::map<std::size_t, Q> acc;
      for (const auto& [r, v] : a.column(j)) acc[r] += v;
      for (const auto& [r, v] : b.column(j)) acc[r] += sign * v;
      Column out;
      for (auto& [r, v] : acc)
        if (sgn(v) != 0) out.emplace_back(r, v);
      return out;
    });
  }

  std::shared_ptr<Impl> impl_;
};

/// A finitely supported block on indices < extent plus `tail` times the
/// identity beyond it.
struct BlockForm {
  std::vector<std::tuple<std::size_t, std::size_t, Q>> entries;
  std::size_t extent = 0;
  Q tail = 0;

  ColFinMatrix matrix() const { return ColFinMatrix::block_scalar(entries, extent, tail); }
};

/// Family {x_i} with a per-column certificate listing the members that may
/// be nonzero in that column.
class SummableFamily {
 public:
  using MemberFn = std::function<BlockForm(std::size_t)>;
  using CertificateFn = std::function<std::vector<std::size_t>(std::size_t)>;

  SummableFamily(std::string name, std::optional<std::size_t> size, MemberFn member, CertificateFn cert)
      : name_(std::move(name)), size_(size), member_(std::move(member)), cert_(std::move(cert)),
        cache_(std::make_shared<Cache>()) {}

  const std::string& name() const { return name_; }
  std::optional<std::size_t> size() const { return size_; }

  const BlockForm& form(std::size_t i) const {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto it = cache_->forms.find(i);
    if (it == cache_->forms.end()) it = cache_->forms.emplace(i, member_(i)).first;
    return it->second;
  }

  ColFinMatrix member(std::size_t i) const {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto it = cache_->members.find(i);
    if (it != cache_->members.end()) return it->second;
    auto f = cache_->forms.find(i);
    if (f == cache_->forms.end()) f = cache_->forms.emplace(i, member_(i)).first;
    return cache_->members.emplace(i, f->second.matrix()).first->second;
  }

  /// Certified members touching column j, restricted to the family's index range.
  std::vector<std::size_t> touching(std::size_t j) const {
    std::vector<std::size_t> out;
    for (std::size_t i : cert_(j))
      if (!size_ || i < *size_) out.push_back(i);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Sum of members 0..n-1. Accessing column j checks that every member not
  /// certified for j vanishes there.
  ColFinMatrix partial_sum(std::size_t n) const {
    if (size_) n = std::min(n, *size_);
    SummableFamily self = *this;
    return ColFinMatrix([self, n](std::size_t j) {
      const auto cert = self.touching(j);
      std::map<std::size_t, Q> acc;
      for (std::size_t i = 0; i < n; ++i) {
        const auto& col = self.member(i).column(j);
        if (!col.empty() && !std::binary_search(cert.begin(), cert.end(), i)) throw SummabilityViolated(j);
        for (const auto& [r, v] : col) acc[r] += v;
      }
      Column out;
      for (auto& [r, v] : acc)
        if (sgn(v) != 0) out.emplace_back(r, v);
      return out;
    });
  }

  /// The full sum, column j summing only the certified members.
  ColFinMatrix sum() const {
    SummableFamily self = *this;
    return ColFinMatrix([self](std::size_t j) {
      std::map<std::size_t, Q> acc;
      for (std::size_t i : self.touching(j))
        for (const auto& [r, v] : self.member(i).column(j)) acc[r] += v;
      Column out;
      for (auto& [r, v] : acc)
        if (sgn(v) != 0) out.emplace_back(r, v);
      return out;
    });
  }

  /// Column index after which partial sums are constant on column j.
  std::size_t stabilizes_after(std::size_t j) const {
    auto cert = touching(j);
    return cert.empty() ? 0 : cert.back() + 1;
  }

 private:
  struct Cache {
    std::mutex mu;
    std::unordered_map<std::size_t, BlockForm> forms;
    std::unordered_map<std::size_t, ColFinMatrix> members;
  };

  std::string name_;
  std::optional<std::size_t> size_;
  MemberFn member_;
  CertificateFn cert_;
  std::shared_ptr<Cache> cache_;
};

// Families ---------------------------------------------------------------------

inline SummableFamily singleton_family() {
  return SummableFamily(
      "singleton", 1, [](std::size_t) { return BlockForm{{}, 0, 1}; },
      [](std::size_t) { return std::vector<std::size_t>{0}; });
}

/// x_i = E_{i,i}.
inline SummableFamily diagonal_family() {
  return SummableFamily(
      "diagonal", std::nullopt, [](std::size_t i) { return BlockForm{{{i, i, Q(1)}}, i + 1, 0}; },
      [](std::size_t j) { return std::vector<std::size_t>{j}; });
}

/// Block k occupies indices 2k, 2k+1; member 2k is A_k there and member 2k+1
/// is I - A_k, with A_k cycling through `blocks` (each a 2x2 rational matrix).
inline SummableFamily block_pair_family(std::vector<std::array<std::array<Q, 2>, 2>> blocks) {
  if (blocks.empty()) throw PreconditionFailed("block_pair_family: no blocks");
  return SummableFamily(
      "block_pairs", std::nullopt,
      [blocks](std::size_t i) {
        const std::size_t k = i / 2, base = 2 * k;
        const auto& a = blocks[k % blocks.size()];
        BlockForm f;
        f.extent = base + 2;
        for (std::size_t r = 0; r < 2; ++r)
          for (std::size_t c = 0; c < 2; ++c) {
            Q v = (i % 2 == 0) ? a[r][c] : Q(r == c ? 1 : 0) - a[r][c];
            if (sgn(v) != 0) f.entries.emplace_back(base + r, base + c, v);
          }
        return f;
      },
      [](std::size_t j) {
        const std::size_t base = 2 * (j / 2);
        return std::vector<std::size_t>{base, base + 1};
      });
}

/// x_i = E_{i,i} + c E_{i-1,i} - c E_{i,i+1}; consecutive members cancel
/// off the diagonal so the sum is the identity.
inline SummableFamily banded_family(Q c) {
  return SummableFamily(
      "banded", std::nullopt,
      [c](std::size_t i) {
        BlockForm f;
        f.extent = i + 2;
        f.entries.emplace_back(i, i, Q(1));
        if (i > 0 && sgn(c) != 0) f.entries.emplace_back(i - 1, i, c);
        if (sgn(c) != 0) f.entries.emplace_back(i, i + 1, -c);
        return f;
      },
      [](std::size_t j) {
        if (j == 0) return std::vector<std::size_t>{0};
        return std::vector<std::size_t>{j - 1, j};
      });
}

// Eventually scalar matrices ------------------------------------------------------

/// block (B x B) direct sum with `tail` times the identity on indices >= B:
/// the subring in which truncated chains run exactly.
struct BlockScalar {
  QMatrix block;
  Q tail = 0;
  friend bool operator==(const BlockScalar& a, const BlockScalar& b) {
    return a.tail == b.tail && a.block.a == b.block.a;
  }
};

class BlockScalarRing {
 public:
  using value_type = BlockScalar;
  explicit BlockScalarRing(std::size_t b) : b_(b) {}
  std::size_t block_size() const { return b_; }

  BlockScalar zero() const { return {QMatrix(linalg::RationalField{}, b_, b_), 0}; }
  BlockScalar one() const { return {QMatrix::identity(linalg::RationalField{}, b_), 1}; }
  BlockScalar add(const BlockScalar& x, const BlockScalar& y) const { return {x.block + y.block, x.tail + y.tail}; }
  BlockScalar sub(const BlockScalar& x, const BlockScalar& y) const { return {x.block - y.block, x.tail - y.tail}; }
  BlockScalar neg(const BlockScalar& x) const { return sub(zero(), x); }
  BlockScalar mul(const BlockScalar& x, const BlockScalar& y) const { return {x.block * y.block, x.tail * y.tail}; }
  bool eq(const BlockScalar& x, const BlockScalar& y) const { return x == y; }

  BlockScalar from_form(const BlockForm& f) const {
    if (f.extent > b_) throw PreconditionFailed("member extent exceeds the block size");
    BlockScalar out = zero();
    for (const auto& [r, c, v] : f.entries) {
      if (r >= b_ || c >= b_) throw PreconditionFailed("member entry outside the block");
      out.block(r, c) += v;
    }
    for (std::size_t i = f.extent; i < b_; ++i) out.block(i, i) += f.tail;
    out.tail = f.tail;
    return out;
  }

  ColFinMatrix to_matrix(const BlockScalar& x) const {
    std::vector<std::tuple<std::size_t, std::size_t, Q>> entries;
    for (std::size_t r = 0; r < b_; ++r)
      for (std::size_t c = 0; c < b_; ++c)
        if (sgn(x.block(r, c)) != 0) entries.emplace_back(r, c, x.block(r, c));
    return ColFinMatrix::block_scalar(std::move(entries), b_, x.tail);
  }

  /// Column j (j < B) of the block.
  Column column(const BlockScalar& x, std::size_t j) const {
    Column out;
    if (j >= b_) {
      if (sgn(x.tail) != 0) out.emplace_back(j, x.tail);
      return out;
    }
    for (std::size_t r = 0; r < b_; ++r)
      if (sgn(x.block(r, j)) != 0) out.emplace_back(r, x.block(r, j));
    return out;
  }

 private:
  std::size_t b_;
};

static_assert(RingLike<BlockScalarRing>);

/// Kernel-splitting corner decomposition on block and tail separately.
struct BlockScalarSplitter {
  const BlockScalarRing* ring;

  std::optional<CornerSplit<BlockScalar>> operator()(const BlockScalar& f, const BlockScalar& a,
                                                     const BlockScalar& b) const {
    if (a.tail + b.tail != f.tail) return std::nullopt;
    auto ks = linalg::kernel_split(f.block, a.block, b.block);
    if (!ks) return std::nullopt;
    CornerSplit<BlockScalar> out{{ks->f2, 0}, {ks->f3, 0}, {ks->s2, 0}, {ks->s3, 0}};
    if (f.tail == 1) {
      if (sgn(a.tail) != 0) {
        out.f2.tail = 1;
        out.s2.tail = 1 / a.tail;
      } else {
        out.f3.tail = 1;
        out.s3.tail = 1 / b.tail;
      }
    } else if (sgn(f.tail) != 0) {
      return std::nullopt;
    }
    return out;
  }
};

// Truncated chain ------------------------------------------------------------------

struct TruncationWindow {
  std::size_t depth = 1;  // N, chain stages
  std::size_t width = 1;  // W, observed rows and columns
};

struct ColumnStability {
  std::size_t column = 0;
  std::size_t e_stable_stage = 0;    // first stage from which every e_{i,j} column is final
  std::size_t phi_stable_stage = 0;  // same for phi_j = sum of e_{i,i}, i <= j
  bool phi_matches_v_inverse = false;
  bool resolved = false;             // all members touching the column were processed
};

struct TruncatedChainReport {
  std::string family;
  TruncationWindow window;
  std::size_t block_size = 0;
  std::size_t stages_run = 0;
  std::vector<StageState<BlockScalar>> stages;
  std::vector<ColumnStability> columns;
  bool invariants_hold = false;
};

/// Runs stages 1..N of the chain on the family, whose tail y_N = 1 - (x_1 +
/// ... + x_N) is carried as a lumped last member. Each stage's invariants
/// are checked exactly on the whole eventually scalar matrix.
inline TruncatedChainReport truncated_chain(const SummableFamily& fam, TruncationWindow win) {
  if (win.depth == 0 || win.width == 0) throw PreconditionFailed("truncated_chain: depth and width must be >= 1");
  std::size_t n = win.depth;
  if (fam.size()) n = std::min(n, *fam.size());
  std::size_t b = win.width;
  for (std::size_t i = 0; i < n; ++i) b = std::max(b, fam.form(i).extent);

  TruncatedChainReport rep;
  rep.family = fam.name();
  rep.window = win;
  rep.block_size = b;
  BlockScalarRing ring(b);
  std::vector<BlockScalar> xs;
  BlockScalar rest = ring.one();
  for (std::size_t i = 0; i < n; ++i) {
    xs.push_back(ring.from_form(fam.form(i)));
    rest = ring.sub(rest, xs.back());
  }
  const bool lumped = !ring.eq(rest, ring.zero());
  if (lumped) xs.push_back(rest);
  else if (fam.size() && n < *fam.size())
    throw PreconditionFailed("truncated_chain: partial sum is 1 before the family ends");

  ChainRunner<BlockScalarRing, BlockScalarSplitter> runner(ring, xs, BlockScalarSplitter{&ring});
  for (std::size_t s = 1; s <= n; ++s) {
    try {
      runner.step();
    } catch (const NotSuitable& e) {
      throw NotSolvable(s, std::string("kernel splitting failed: ") + e.what());
    }
  }
  rep.stages = runner.stages();
  rep.stages_run = n;
  rep.invariants_hold = true;  // ChainRunner::step throws InvariantViolated otherwise

  const auto& last = rep.stages.back();
  for (std::size_t c = 0; c < win.width; ++c) {
    ColumnStability cs;
    cs.column = c;
    auto e_col = [&](std::size_t stage, std::size_t i) {
      const auto& st = rep.stages[stage - 1];
      return i < st.e.size() ? ring.column(st.e[i], c) : Column{};
    };
    cs.e_stable_stage = n;
    for (std::size_t s = n; s >= 1; --s) {
      bool same = true;
      for (std::size_t i = 0; i < n && same; ++i) same = e_col(s, i) == e_col(n, i);
      if (!same) break;
      cs.e_stable_stage = s;
    }
    std::vector<Column> phi_cols;
    BlockScalar phi = ring.zero();
    for (std::size_t s = 1; s <= n; ++s) {
      phi = ring.add(phi, rep.stages[s - 1].e[s - 1]);
      phi_cols.push_back(ring.column(phi, c));
    }
    cs.phi_stable_stage = n;
    for (std::size_t s = n; s >= 1 && phi_cols[s - 1] == phi_cols[n - 1]; --s) cs.phi_stable_stage = s;
    cs.phi_matches_v_inverse = ring.column(phi, c) == ring.column(last.v_inv, c);
    const auto touching = fam.touching(c);
    cs.resolved = !touching.empty() && touching.back() < n;
    rep.columns.push_back(cs);
  }
  return rep;
}

struct DepthComparison {
  std::vector<std::size_t> compared_columns;
  std::vector<std::size_t> mismatched_columns;
  bool agree() const { return mismatched_columns.empty(); }
};

/// Re-runs at depth N + 2 and compares stabilization stages on the columns
/// resolved at depth N.
inline DepthComparison compare_depths(const SummableFamily& fam, TruncationWindow win) {
  auto a = truncated_chain(fam, win);
  auto b = truncated_chain(fam, {win.depth + 2, win.width});
  DepthComparison out;
  for (std::size_t c = 0; c < win.width; ++c) {
    if (!a.columns[c].resolved) continue;
    out.compared_columns.push_back(c);
    const auto &x = a.columns[c], &y = b.columns[c];
    if (x.e_stable_stage != y.e_stable_stage || x.phi_stable_stage != y.phi_stable_stage)
      out.mismatched_columns.push_back(c);
  }
  return out;
}

// Limit of units ------------------------------------------------------------------

/// u_n cycles e_0 -> e_1 -> ... -> e_{n-1} -> e_0 and fixes the rest.
inline ColFinMatrix cycle_unit(std::size_t n) {
  return ColFinMatrix::permutation([n](std::size_t j) {
    if (j >= n) return j;
    return j + 1 == n ? std::size_t{0} : j + 1;
  });
}

inline ColFinMatrix cycle_unit_inverse(std::size_t n) {
  return ColFinMatrix::permutation([n](std::size_t j) {
    if (j >= n) return j;
    return j == 0 ? n - 1 : j - 1;
  });
}

struct UnitLimitReport {
  std::size_t window = 0, depth = 0;
  std::vector<bool> unit_invertible;       // u_n u_n^{-1} = u_n^{-1} u_n = 1 on the window, n = 1..depth
  std::vector<std::size_t> agreeing_columns;  // per n: columns k < n - 1 where u_n and S agree
  bool differences_vanish = false;         // (u_n - S) column k = 0 for every k < n - 1
  bool converges_on_window = false;        // each column k < W agrees with S for all n >= k + 2
  bool shift_injective = false;            // rank of the (W+1) x W block is W
  bool shift_left_non_zero_divisor = false;
  bool shift_not_surjective = false;       // e_0 outside the image
  bool shift_no_right_inverse = false;
  std::size_t shift_rank = 0;
};

inline UnitLimitReport unit_limit_counterexample(std::size_t window = 8, std::size_t depth = 8) {
  using linalg::RationalField;
  UnitLimitReport rep;
  rep.window = window;
  rep.depth = depth;
  const ColFinMatrix s = ColFinMatrix::shift();
  const ColFinMatrix id = ColFinMatrix::identity();
  const std::size_t span = std::max(window, depth) + 1;

  rep.differences_vanish = true;
  for (std::size_t n = 1; n <= depth; ++n) {
    const ColFinMatrix u = cycle_unit(n), ui = cycle_unit_inverse(n);
    bool inv = true;
    for (std::size_t j = 0; j < span; ++j)
      inv = inv && (u * ui).column_equals(id, j) && (ui * u).column_equals(id, j);
    rep.unit_invertible.push_back(inv);
    const ColFinMatrix diff = u - s;
    std::size_t agree = 0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      if (diff.column(k).empty()) ++agree;
      else rep.differences_vanish = false;
    }
    rep.agreeing_columns.push_back(agree);
  }
  rep.converges_on_window = true;
  for (std::size_t k = 0; k < window; ++k)
    for (std::size_t n = k + 2; n <= std::max(depth, k + 2); ++n)
      if (!cycle_unit(n).column_equals(s, k)) rep.converges_on_window = false;

  // S maps span(e_0..e_{W-1}) into span(e_0..e_W); its block there decides
  // injectivity and the image.
  const QMatrix block = s.window(window + 1, window);
  rep.shift_rank = linalg::rank(block);
  rep.shift_injective = rep.shift_rank == window && linalg::kernel(block).cols == 0;
  // S r = 0 for r supported on the window forces every column of r into ker S.
  rep.shift_left_non_zero_divisor = rep.shift_injective;
  QMatrix e0(RationalField{}, window + 1, 1);
  e0(0, 0) = 1;
  const QMatrix aug = linalg::hstack(RationalField{}, window + 1, {block, e0});
  bool row0_zero = true;
  for (std::size_t j = 0; j < span; ++j)
    for (const auto& [r, v] : s.column(j))
      if (r == 0) row0_zero = false;
  rep.shift_not_surjective = row0_zero && linalg::rank(aug) == rep.shift_rank + 1;
  // S T = 1 would put e_0 = S (T e_0) in the image.
  rep.shift_no_right_inverse = rep.shift_not_surjective;
  return rep;
}

}  // namespace exkit::colfin
