#pragma once

// Greedy tensor-train cross interpolation over binary tensors, with rook
// pivoting on two-site superblocks and maximisation over sampled entries.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tcinet/adjacency.hpp"
#include "tcinet/errors.hpp"
#include "tcinet/random.hpp"

namespace tcinet::tt {

/// Objective seen by the optimizer: entry values, a count of genuinely new
/// evaluations, and the best entry among everything evaluated so far.
template <class O>
concept CachedObjective = requires(O& o, std::span<const Bit> g) {
  { o.value(g) } -> std::convertible_to<double>;
  { o.fresh_evaluations() } -> std::convertible_to<std::size_t>;
  { o.best() } -> std::convertible_to<std::pair<BitString, double>>;
};

/// Caching adapter for a plain function BitString -> double.
template <class F>
class MemoObjective {
 public:
  explicit MemoObjective(F f) : f_(std::move(f)) {}

  double value(std::span<const Bit> g) {
    BitString key(g.begin(), g.end());
    if (auto it = memo_.find(key); it != memo_.end()) {
      ++hits_;
      return it->second;
    }
    const double v = f_(std::span<const Bit>(key));
    memo_.emplace(std::move(key), v);
    return v;
  }

  std::size_t fresh_evaluations() const { return memo_.size(); }
  std::size_t n_hits() const { return hits_; }

  /// Largest value; ties go to the lexicographically smallest index.
  std::pair<BitString, double> best() const {
    if (memo_.empty()) throw ValidationError("MemoObjective::best: nothing evaluated yet");
    auto best = memo_.begin();
    for (auto it = std::next(memo_.begin()); it != memo_.end(); ++it)
      if (it->second > best->second) best = it;
    return *best;
  }

  const std::map<BitString, double>& memo() const { return memo_; }

 private:
  F f_;
  std::map<BitString, double> memo_;
  std::size_t hits_ = 0;
};

template <class F>
MemoObjective(F) -> MemoObjective<F>;

enum class SweepPolicy { Alternate, LeftOnly };
enum class Direction { LeftToRight, RightToLeft };

struct CrossConfig {
  double delta = 0.0;                ///< stop once max error <= delta * best value
  std::size_t r_max = 5;             ///< TT rank cap
  std::size_t n_max = 100000;        ///< budget of fresh objective evaluations
  std::size_t rook_max_iters = 3;    ///< row/column alternations per pivot search
  std::uint64_t seed = 0;            ///< probe RNG seed
  SweepPolicy sweep_policy = SweepPolicy::Alternate;
  std::size_t max_sweeps = 0;        ///< 0 means unlimited
  /// Pivots with residual below this fraction of the largest seen |value| are rejected.
  double admission_tolerance = 1e-14;

  void validate() const {
    if (!(delta >= 0.0)) throw ValidationError("delta must be nonnegative");
    if (r_max < 1) throw ValidationError("r_max must be at least 1");
    if (n_max < 1) throw ValidationError("n_max must be at least 1");
    if (rook_max_iters < 1) throw ValidationError("rook_max_iters must be at least 1");
  }
};

// ---------------------------------------------------------------------------
// Matrix cross step

struct CrossStep {
  std::optional<std::pair<std::size_t, std::size_t>> pivot;
  double error = 0.0;
  /// Distinct entries requested from the matrix during this step.
  std::size_t evaluations = 0;
  std::size_t rook_iterations = 0;
  /// Row-major n_rows x n_cols; NaN where the entry was not requested.
  std::vector<double> sampled;
};

/// One greedy cross step with rook pivoting on an n_rows x n_cols matrix.
///
/// `entry(i, j)` returns the matrix element and `approx(i, j)` the current
/// cross interpolant built on (row_set, col_set). A random probe set of
/// min(n_rows, n_cols) free pairs seeds the search (all free pairs when
/// `n_probes` covers them); then full-column and full-row argmax scans over
/// indices outside the sets alternate until the pivot is maximal in both its
/// row and column or `rook_max_iters` alternations are spent. Ties go to the
/// smallest linear index. No pivot is returned if the residual at the final
/// candidate is not above `admission_threshold`. Each probe and each scanned
/// entry is one call to `entry`, so an entry seen twice is requested twice.
template <class Entry, class Approx>
CrossStep matrix_cross_step(std::size_t n_rows, std::size_t n_cols, Entry&& entry, Approx&& approx,
                            std::span<const std::size_t> row_set, std::span<const std::size_t> col_set, Rng& rng,
                            std::size_t rook_max_iters, std::size_t n_probes = 0, double admission_threshold = 0.0) {
  CrossStep step;
  step.sampled.assign(n_rows * n_cols, std::numeric_limits<double>::quiet_NaN());

  std::vector<char> row_taken(n_rows, 0), col_taken(n_cols, 0);
  for (auto i : row_set) row_taken.at(i) = 1;
  for (auto j : col_set) col_taken.at(j) = 1;
  std::vector<std::size_t> free_rows, free_cols;
  for (std::size_t i = 0; i < n_rows; ++i)
    if (!row_taken[i]) free_rows.push_back(i);
  for (std::size_t j = 0; j < n_cols; ++j)
    if (!col_taken[j]) free_cols.push_back(j);
  if (free_rows.empty() || free_cols.empty()) return step;

  // every draw goes to `entry`, repeats included; deduplication is the objective's job
  auto value = [&](std::size_t i, std::size_t j) {
    double& slot = step.sampled[i * n_cols + j];
    if (std::isnan(slot)) ++step.evaluations;
    slot = entry(i, j);
    return slot;
  };
  auto residual = [&](std::size_t i, std::size_t j) { return std::abs(value(i, j) - approx(i, j)); };

  // random probes
  std::vector<std::pair<std::size_t, std::size_t>> probes;
  const std::size_t n_free = free_rows.size() * free_cols.size();
  if (n_probes == 0) n_probes = std::min(n_rows, n_cols);
  if (n_probes >= n_free) {
    for (auto i : free_rows)
      for (auto j : free_cols) probes.emplace_back(i, j);
  } else {
    for (std::size_t s = 0; s < n_probes; ++s)
      probes.emplace_back(free_rows[rng.below(free_rows.size())], free_cols[rng.below(free_cols.size())]);
  }
  auto before = [&](std::pair<std::size_t, std::size_t> a, std::pair<std::size_t, std::size_t> b) {
    return a.first * n_cols + a.second < b.first * n_cols + b.second;
  };
  std::pair<std::size_t, std::size_t> star = probes.front();
  double best = -1.0;
  for (const auto& p : probes) {
    const double r = residual(p.first, p.second);
    if (r > best || (r == best && before(p, star))) {
      best = r;
      star = p;
    }
  }

  // rook search
  for (std::size_t it = 0; it < rook_max_iters; ++it) {
    ++step.rook_iterations;
    std::size_t i_new = free_rows.front();
    double r_col = -1.0;
    for (auto i : free_rows) {
      const double r = residual(i, star.second);
      if (r > r_col) {
        r_col = r;
        i_new = i;
      }
    }
    std::size_t j_new = free_cols.front();
    double r_row = -1.0;
    for (auto j : free_cols) {
      const double r = residual(i_new, j);
      if (r > r_row) {
        r_row = r;
        j_new = j;
      }
    }
    const bool settled = i_new == star.first && j_new == star.second;
    star = {i_new, j_new};
    best = r_row;
    if (settled) break;
  }

  if (best > admission_threshold && best > 0.0) {
    step.pivot = star;
    step.error = best;
  }
  return step;
}

// ---------------------------------------------------------------------------
// Index sets and interpolant

struct LeftIndex {
  BitString bits;      ///< prefix of length k
  std::size_t parent;  ///< position in the level k-1 set
  Bit last;            ///< appended bit
};

struct RightIndex {
  BitString bits;      ///< suffix covering positions k..d-1
  std::size_t parent;  ///< position in the level k+1 set
  Bit first;           ///< prepended bit
};

/// left[k] holds I_{<=k} for k = 0..d-1 and right[k] holds I_{>k} for k = 1..d;
/// left[d] and right[0] are unused and stay empty.
struct NestedIndexSets {
  std::size_t dims = 0;
  std::vector<std::vector<LeftIndex>> left;
  std::vector<std::vector<RightIndex>> right;

  static NestedIndexSets from_index(const BitString& g0) {
    NestedIndexSets s;
    const std::size_t d = g0.size();
    s.dims = d;
    s.left.resize(d + 1);
    s.right.resize(d + 1);
    for (std::size_t k = 0; k < d; ++k)
      s.left[k].push_back({BitString(g0.begin(), g0.begin() + static_cast<std::ptrdiff_t>(k)), 0,
                           k > 0 ? g0[k - 1] : Bit{0}});
    for (std::size_t k = 1; k <= d; ++k)
      s.right[k].push_back({BitString(g0.begin() + static_cast<std::ptrdiff_t>(k), g0.end()), 0,
                            k < d ? g0[k] : Bit{0}});
    return s;
  }

  /// r_k, with r_0 = r_d = 1.
  std::size_t rank(std::size_t k) const { return (k == 0 || k >= dims) ? 1 : left[k].size(); }

  /// Checks equal set sizes per bond, nestedness and absence of duplicates.
  bool is_nested() const {
    if (dims == 0) return true;
    if (left[0].size() != 1 || !left[0][0].bits.empty()) return false;
    if (right[dims].size() != 1 || !right[dims][0].bits.empty()) return false;
    for (std::size_t k = 1; k < dims; ++k) {
      if (left[k].size() != right[k].size() || left[k].empty()) return false;
      std::set<BitString> seen_left, seen_right;
      for (const auto& l : left[k]) {
        if (l.bits.size() != k || l.parent >= left[k - 1].size()) return false;
        BitString expect = left[k - 1][l.parent].bits;
        expect.push_back(l.last);
        if (expect != l.bits || !seen_left.insert(l.bits).second) return false;
      }
      for (const auto& r : right[k]) {
        if (r.bits.size() != dims - k || r.parent >= right[k + 1].size()) return false;
        BitString expect{r.first};
        const auto& tail = right[k + 1][r.parent].bits;
        expect.insert(expect.end(), tail.begin(), tail.end());
        if (expect != r.bits || !seen_right.insert(r.bits).second) return false;
      }
    }
    return true;
  }
};

/// Core k has shape r_{k-1} x 2 x r_k, stored row-major.
struct TTCore {
  std::size_t r_left = 1;
  std::size_t r_right = 1;
  std::vector<double> data;

  double& operator()(std::size_t a, std::size_t b, std::size_t c) { return data[(a * 2 + b) * r_right + c]; }
  double operator()(std::size_t a, std::size_t b, std::size_t c) const { return data[(a * 2 + b) * r_right + c]; }
};

struct TTCores {
  std::vector<TTCore> cores;

  std::size_t dims() const { return cores.size(); }

  double eval(std::span<const Bit> g) const {
    if (g.size() != cores.size()) throw ValidationError("TTCores::eval: index length mismatch");
    std::vector<double> v{1.0}, next;
    for (std::size_t k = 0; k < cores.size(); ++k) {
      const auto& c = cores[k];
      next.assign(c.r_right, 0.0);
      for (std::size_t a = 0; a < c.r_left; ++a)
        for (std::size_t b = 0; b < c.r_right; ++b) next[b] += v[a] * c(a, g[k], b);
      v.swap(next);
    }
    return v.at(0);
  }
};

// Text format: `d`, then per core a line `r_left 2 r_right` and the row-major
// entries with 17 significant digits.
inline void write_cores(std::ostream& out, const TTCores& tt) {
  out << tt.dims() << '\n' << std::setprecision(17);
  for (const auto& c : tt.cores) {
    out << c.r_left << " 2 " << c.r_right << '\n';
    for (std::size_t i = 0; i < c.data.size(); ++i) out << c.data[i] << (i + 1 == c.data.size() ? '\n' : ' ');
  }
}

inline TTCores read_cores(std::istream& in) {
  TTCores tt;
  std::size_t d = 0;
  if (!(in >> d)) throw ValidationError("TT cores: missing dimension");
  for (std::size_t k = 0; k < d; ++k) {
    TTCore c;
    std::size_t two = 0;
    if (!(in >> c.r_left >> two >> c.r_right) || two != 2) throw ValidationError("TT cores: bad shape line");
    c.data.resize(c.r_left * 2 * c.r_right);
    for (auto& v : c.data)
      if (!(in >> v)) throw ValidationError("TT cores: truncated entries");
    tt.cores.push_back(std::move(c));
  }
  return tt;
}

/// Nested TT cross interpolant of a binary tensor with factor data kept
/// complete: for each k the fibre matrix F_k = L(I_{<=k-1}, g_k, I_{>k}),
/// stored as (2 r_{k-1}) x r_k with row 2a+b, and for each bond the
/// intersection matrix A_k = L(I_{<=k}, I_{>k}) with a pivoted LU of its transpose.
template <CachedObjective O>
class CrossInterpolant {
 public:
  CrossInterpolant(O& objective, const BitString& g0)
      : obj_(&objective), d_(g0.size()), sets_(NestedIndexSets::from_index(g0)) {
    if (d_ == 0) throw ValidationError("cross interpolation needs at least one variable");
    for (Bit b : g0)
      if (b > 1) throw ValidationError("initial index must be binary");
    fibres_.resize(d_ + 1);
    inter_.resize(d_);
    lu_t_.resize(d_);
    for (std::size_t k = 1; k <= d_; ++k) {
      fibres_[k].resize(2, 1);
      for (Bit b = 0; b < 2; ++b) {
        BitString g = g0;
        g[k - 1] = b;
        fibres_[k](b, 0) = request(g);
      }
    }
    for (std::size_t k = 1; k < d_; ++k) refactor(k);
  }

  std::size_t dims() const { return d_; }
  const NestedIndexSets& sets() const { return sets_; }
  std::size_t rank(std::size_t k) const { return sets_.rank(k); }
  std::size_t requests() const { return requests_; }
  double max_abs_seen() const { return max_abs_; }
  O& objective() const { return *obj_; }

  const Eigen::MatrixXd& fibre(std::size_t k) const { return fibres_.at(k); }
  const Eigen::MatrixXd& intersection(std::size_t k) const { return inter_.at(k); }

  /// Largest rank bond k can reach: 2^min(k, d-k).
  std::size_t rank_cap(std::size_t k) const {
    const std::size_t e = std::min(k, d_ - k);
    return e >= 62 ? std::numeric_limits<std::size_t>::max() : std::size_t{1} << e;
  }

  /// Interpolant value at g from stored factors; no objective calls.
  double eval(std::span<const Bit> g) const {
    if (g.size() != d_) throw ValidationError("interpolant_eval: index length mismatch");
    Eigen::RowVectorXd v = fibres_[1].row(g[0]);
    for (std::size_t k = 1; k < d_; ++k) {
      const Eigen::VectorXd w = lu_t_[k].solve(v.transpose());
      const auto& f = fibres_[k + 1];
      Eigen::RowVectorXd next = Eigen::RowVectorXd::Zero(f.cols());
      for (Eigen::Index p = 0; p < w.size(); ++p) next += w[p] * f.row(2 * p + g[k]);
      v = std::move(next);
    }
    return v[0];
  }

  /// Cores with the inverse intersections merged into the left factors.
  TTCores cores() const {
    TTCores tt;
    for (std::size_t k = 1; k <= d_; ++k) {
      Eigen::MatrixXd m = fibres_[k];
      if (k < d_) m = lu_t_[k].solve(m.transpose()).transpose();
      TTCore c;
      c.r_left = static_cast<std::size_t>(m.rows()) / 2;
      c.r_right = static_cast<std::size_t>(m.cols());
      c.data.resize(c.r_left * 2 * c.r_right);
      for (std::size_t a = 0; a < c.r_left; ++a)
        for (std::size_t b = 0; b < 2; ++b)
          for (std::size_t q = 0; q < c.r_right; ++q)
            c(a, b, q) = m(static_cast<Eigen::Index>(2 * a + b), static_cast<Eigen::Index>(q));
      tt.cores.push_back(std::move(c));
    }
    return tt;
  }

  /// Runs one matrix cross step on the superblock of bond k (1 <= k < d),
  /// the (2 r_{k-1}) x (2 r_{k+1}) matrix L(I_{<=k-1} g_k; g_{k+1} I_{>k+1}),
  /// and admits the pivot into I_{<=k}, I_{>k} when one is found.
  CrossStep update_bond(std::size_t k, Rng& rng, std::size_t rook_max_iters, double admission_tolerance,
                        std::size_t n_probes = 0) {
    if (k < 1 || k >= d_) throw ValidationError("update_bond: bond index out of range");
    const auto& lefts = sets_.left[k - 1];
    const auto& rights = sets_.right[k + 1];
    const std::size_t n_rows = 2 * lefts.size();
    const std::size_t n_cols = 2 * rights.size();

    std::vector<std::size_t> row_set, col_set;
    for (const auto& l : sets_.left[k]) row_set.push_back(2 * l.parent + l.last);
    for (const auto& r : sets_.right[k]) col_set.push_back(2 * r.parent + r.first);

    const Eigen::MatrixXd approx = superblock_approx(k);
    auto index_at = [&](std::size_t i, std::size_t j) {
      BitString g = lefts[i / 2].bits;
      g.push_back(static_cast<Bit>(i % 2));
      g.push_back(static_cast<Bit>(j % 2));
      const auto& tail = rights[j / 2].bits;
      g.insert(g.end(), tail.begin(), tail.end());
      return g;
    };
    auto entry = [&](std::size_t i, std::size_t j) { return request(index_at(i, j)); };
    auto approx_at = [&](std::size_t i, std::size_t j) {
      return approx(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    };

    CrossStep step = matrix_cross_step(n_rows, n_cols, entry, approx_at, row_set, col_set, rng, rook_max_iters,
                                       n_probes, admission_tolerance * max_abs_);
    if (!step.pivot) return step;

    const auto [i_star, j_star] = *step.pivot;
    auto sampled = [&](std::size_t i, std::size_t j) {
      if (std::isnan(step.sampled[i * n_cols + j])) ++step.evaluations;
      return step.sampled[i * n_cols + j] = entry(i, j);
    };

    // new column of F_k: superblock column j*
    auto& fk = fibres_[k];
    fk.conservativeResize(Eigen::NoChange, fk.cols() + 1);
    for (std::size_t i = 0; i < n_rows; ++i) fk(static_cast<Eigen::Index>(i), fk.cols() - 1) = sampled(i, j_star);

    // new rows of F_{k+1}: superblock row i*
    auto& fn = fibres_[k + 1];
    fn.conservativeResize(fn.rows() + 2, Eigen::NoChange);
    for (std::size_t j = 0; j < n_cols; ++j)
      fn(fn.rows() - 2 + static_cast<Eigen::Index>(j % 2), static_cast<Eigen::Index>(j / 2)) = sampled(i_star, j);

    BitString prefix = lefts[i_star / 2].bits;
    prefix.push_back(static_cast<Bit>(i_star % 2));
    sets_.left[k].push_back({std::move(prefix), i_star / 2, static_cast<Bit>(i_star % 2)});
    BitString suffix{static_cast<Bit>(j_star % 2)};
    suffix.insert(suffix.end(), rights[j_star / 2].bits.begin(), rights[j_star / 2].bits.end());
    sets_.right[k].push_back({std::move(suffix), j_star / 2, static_cast<Bit>(j_star % 2)});

    refactor(k);
    return step;
  }

 private:
  double request(const BitString& g) {
    const double v = obj_->value(std::span<const Bit>(g));
    ++requests_;
    if (std::isfinite(v)) max_abs_ = std::max(max_abs_, std::abs(v));
    return v;
  }

  /// A_k from the rows of F_k selected by I_{<=k}.
  void refactor(std::size_t k) {
    const auto& lefts = sets_.left[k];
    const auto r = static_cast<Eigen::Index>(lefts.size());
    Eigen::MatrixXd a(r, r);
    for (Eigen::Index p = 0; p < r; ++p)
      a.row(p) = fibres_[k].row(static_cast<Eigen::Index>(2 * lefts[p].parent + lefts[p].last));
    inter_[k] = a;
    lu_t_[k].compute(a.transpose());
    // the determinant itself overflows for large entries; test the pivots of U
    const Eigen::VectorXd u = lu_t_[k].matrixLU().diagonal();
    if (!u.allFinite() || (u.array() == 0.0).any())
      throw InternalError("singular intersection matrix at bond " + std::to_string(k));
  }

  /// F_k A_k^{-1} F_{k+1} on the superblock of bond k.
  Eigen::MatrixXd superblock_approx(std::size_t k) const {
    const Eigen::MatrixXd w = lu_t_[k].solve(fibres_[k].transpose()).transpose();
    const auto& fn = fibres_[k + 1];
    const Eigen::Index r = w.cols();
    const Eigen::Index r_next = fn.cols();
    Eigen::MatrixXd right(r, 2 * r_next);
    for (Eigen::Index p = 0; p < r; ++p)
      for (Eigen::Index c = 0; c < r_next; ++c)
        for (Eigen::Index b = 0; b < 2; ++b) right(p, 2 * c + b) = fn(2 * p + b, c);
    return w * right;
  }

  O* obj_;
  std::size_t d_;
  NestedIndexSets sets_;
  std::vector<Eigen::MatrixXd> fibres_;  // index 1..d
  std::vector<Eigen::MatrixXd> inter_;   // index 1..d-1
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_t_;  // LU of A_k^T
  std::size_t requests_ = 0;
  double max_abs_ = 0.0;
};

template <CachedObjective O>
double interpolant_eval(const CrossInterpolant<O>& interp, std::span<const Bit> g) {
  return interp.eval(g);
}

template <CachedObjective O>
TTCores build_tt_cores(const CrossInterpolant<O>& interp) {
  return interp.cores();
}

// ---------------------------------------------------------------------------
// Sweeps and the optimizer

struct SweepReport {
  std::vector<double> bond_errors;  ///< E_k for k = 1..d-1 at position k-1
  double max_error = 0.0;
  std::size_t pivots_added = 0;
  std::size_t no_pivot_bonds = 0;
  std::size_t skipped_bonds = 0;     ///< already at r_max
  std::size_t evaluations = 0;       ///< fresh objective evaluations
  std::size_t requests = 0;          ///< all objective requests
  bool budget_exhausted = false;
};

/// One pass over bonds 1..d-1 (or back), one pivot per bond below r_max.
/// Stops between bonds once `fresh_limit` fresh evaluations have been used in total.
template <CachedObjective O>
SweepReport sweep(CrossInterpolant<O>& interp, Direction dir, Rng& rng, const CrossConfig& cfg,
                  std::size_t fresh_limit = std::numeric_limits<std::size_t>::max()) {
  SweepReport report;
  const std::size_t d = interp.dims();
  report.bond_errors.assign(d > 0 ? d - 1 : 0, 0.0);
  const std::size_t fresh0 = interp.objective().fresh_evaluations();
  const std::size_t req0 = interp.requests();

  for (std::size_t s = 1; s < d; ++s) {
    const std::size_t k = dir == Direction::LeftToRight ? s : d - s;
    if (interp.objective().fresh_evaluations() >= fresh_limit) {
      report.budget_exhausted = true;
      break;
    }
    if (interp.rank(k) >= cfg.r_max) {
      ++report.skipped_bonds;
      continue;
    }
    const CrossStep step = interp.update_bond(k, rng, cfg.rook_max_iters, cfg.admission_tolerance);
    if (step.pivot) {
      ++report.pivots_added;
      report.bond_errors[k - 1] = step.error;
    } else {
      ++report.no_pivot_bonds;
    }
  }
  for (double e : report.bond_errors) report.max_error = std::max(report.max_error, e);
  report.evaluations = interp.objective().fresh_evaluations() - fresh0;
  report.requests = interp.requests() - req0;
  return report;
}

enum class Termination { Converged, RankLimit, Budget, SweepLimit, Aborted };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::RankLimit: return "rank_limit";
    case Termination::Budget: return "budget";
    case Termination::SweepLimit: return "sweep_limit";
    case Termination::Aborted: return "aborted";
  }
  return "unknown";
}

struct SweepRecord {
  std::size_t sweep = 0;
  std::size_t n_eval = 0;    ///< cumulative fresh evaluations
  std::size_t requests = 0;  ///< cumulative objective requests
  double max_error = 0.0;
  std::size_t pivots_added = 0;
  std::size_t max_rank = 1;
  BitString g_max;
  double value = 0.0;
};

struct CrossResult {
  BitString g_max;
  double value = 0.0;
  TTCores cores;
  std::vector<SweepRecord> history;
  Termination termination = Termination::Converged;
  std::string message;
  std::size_t n_eval = 0;
  std::size_t requests = 0;
  NestedIndexSets sets;
};

/// Greedy TT cross maximisation started from the single cross through g0.
///
/// After every sweep the best entry among all evaluated ones is recorded, and
/// the run stops when the largest pivot error is <= delta * best value, every
/// bond has reached min(r_max, 2^min(k, d-k)), the fresh-evaluation budget is
/// spent, or max_sweeps sweeps have run. An ObjectiveAbort thrown by the
/// objective ends the run with termination Aborted and the history so far.
template <CachedObjective O>
CrossResult cross_optimize(O& objective, const BitString& g0, const CrossConfig& cfg,
                           const std::function<void(const SweepRecord&)>& on_sweep = {}) {
  cfg.validate();
  CrossResult result;
  result.g_max = g0;
  const std::size_t fresh0 = objective.fresh_evaluations();
  std::optional<CrossInterpolant<O>> interp;
  auto fresh = [&] { return objective.fresh_evaluations() - fresh0; };

  try {
    interp.emplace(objective, g0);
    const std::size_t d = g0.size();
    Rng rng(cfg.seed);
    for (std::size_t s = 1;; ++s) {
      const Direction dir = (cfg.sweep_policy == SweepPolicy::Alternate && s % 2 == 0) ? Direction::RightToLeft
                                                                                       : Direction::LeftToRight;
      const SweepReport report = sweep(*interp, dir, rng, cfg, fresh0 + cfg.n_max);
      auto [g_best, v_best] = objective.best();
      result.g_max = g_best;
      result.value = v_best;

      SweepRecord rec;
      rec.sweep = s;
      rec.n_eval = fresh();
      rec.requests = interp->requests();
      rec.max_error = report.max_error;
      rec.pivots_added = report.pivots_added;
      for (std::size_t k = 1; k < d; ++k) rec.max_rank = std::max(rec.max_rank, interp->rank(k));
      rec.g_max = g_best;
      rec.value = v_best;
      result.history.push_back(rec);
      if (on_sweep) on_sweep(rec);

      bool saturated = true;
      for (std::size_t k = 1; k < d; ++k)
        if (interp->rank(k) < std::min(cfg.r_max, interp->rank_cap(k))) saturated = false;

      if (report.budget_exhausted || fresh() >= cfg.n_max) {
        result.termination = Termination::Budget;
        break;
      }
      if (saturated) {
        result.termination = Termination::RankLimit;
        break;
      }
      if (report.max_error <= cfg.delta * v_best) {
        result.termination = Termination::Converged;
        break;
      }
      if (cfg.max_sweeps != 0 && s >= cfg.max_sweeps) {
        result.termination = Termination::SweepLimit;
        break;
      }
    }
    result.cores = interp->cores();
  } catch (const ObjectiveAbort& e) {
    result.termination = Termination::Aborted;
    result.message = e.what();
    if (!result.history.empty()) {
      result.g_max = result.history.back().g_max;
      result.value = result.history.back().value;
    }
  }
  result.n_eval = fresh();
  if (interp) {
    result.requests = interp->requests();
    result.sets = interp->sets();
  }
  return result;
}

}  // namespace tcinet::tt
