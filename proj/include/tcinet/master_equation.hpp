#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "tcinet/epidemic.hpp"
#include "tcinet/errors.hpp"

namespace tcinet {

enum class ExpmMethod { Auto, Dense, Uniformization };

struct ExpmOptions {
  ExpmMethod method = ExpmMethod::Auto;
  /// Largest dimension for which the dense exponential is formed.
  std::size_t dense_limit = 4096;
  /// Whether Auto may fall back to uniformization above dense_limit.
  bool allow_uniformization = true;
  /// Neglected Poisson tail mass per uniformization run.
  double tail_tolerance = 1e-12;
};

/// Values in [-kClampTolerance, 0) are roundoff and read as exact zeros.
inline constexpr double kClampTolerance = 1e-12;

/// Column-stochastic P(X(t+dt) = y | X(t) = x), stored densely or as a subset of columns.
class TransitionMatrix {
 public:
  TransitionMatrix(Eigen::MatrixXd dense, double dt) : dim_(static_cast<std::size_t>(dense.rows())), dt_(dt), dense_(std::move(dense)) {}

  TransitionMatrix(std::size_t dim, std::map<StateIndex, Eigen::VectorXd> columns, double dt)
      : dim_(dim), dt_(dt), columns_(std::move(columns)) {}

  std::size_t dim() const { return dim_; }
  double dt() const { return dt_; }
  bool is_dense() const { return dense_.has_value(); }

  bool has_column(StateIndex x) const { return x < dim_ && (dense_ || columns_.contains(x)); }

  /// Raw entry M(y, x), before clamping.
  double raw(StateIndex y, StateIndex x) const {
    if (y >= dim_ || x >= dim_)
      throw ValidationError("transition matrix index out of range");
    if (dense_) return (*dense_)(y, x);
    auto it = columns_.find(x);
    if (it == columns_.end())
      throw ValidationError("column " + std::to_string(x) + " was not computed");
    return it->second[y];
  }

  double operator()(StateIndex y, StateIndex x) const {
    const double v = raw(y, x);
    return (v < 0.0 && v >= -kClampTolerance) ? 0.0 : v;
  }

  Eigen::VectorXd column(StateIndex x) const {
    if (dense_) return dense_->col(x);
    auto it = columns_.find(x);
    if (it == columns_.end())
      throw ValidationError("column " + std::to_string(x) + " was not computed");
    return it->second;
  }

 private:
  std::size_t dim_;
  double dt_;
  std::optional<Eigen::MatrixXd> dense_;
  std::map<StateIndex, Eigen::VectorXd> columns_;
};

namespace detail {

/// exp(Q t) v by uniformization, splitting t so each Poisson mean stays below 50.
inline Eigen::VectorXd uniformized_action(const RateMatrix& q, double t, Eigen::VectorXd v, double tail_tol) {
  const double lambda = q.max_exit_rate();
  if (lambda == 0.0 || t == 0.0) return v;
  const double total = lambda * t;
  const auto substeps = static_cast<std::size_t>(std::max(1.0, std::ceil(total / 50.0)));
  const double mean = total / static_cast<double>(substeps);
  const double tol = tail_tol / static_cast<double>(substeps);

  Eigen::VectorXd term(v.size()), qv(v.size()), acc(v.size());
  for (std::size_t s = 0; s < substeps; ++s) {
    double weight = std::exp(-mean);
    double mass = weight;
    term = v;
    acc = weight * term;
    for (std::size_t n = 1; 1.0 - mass > tol; ++n) {
      // term <- P term with P = I + Q / lambda
      q.multiply(term, qv);
      term += qv / lambda;
      weight *= mean / static_cast<double>(n);
      mass += weight;
      acc += weight * term;
      if (n > 10000) break;
    }
    v = acc;
  }
  return v;
}

}  // namespace detail

/// M = exp(Q dt). The dense path runs scaling-and-squaring on the densified generator;
/// the uniformization path computes only `columns` (all columns when empty).
inline TransitionMatrix transition_matrix(const RateMatrix& q, double dt, const ExpmOptions& opts = {},
                                          std::span<const StateIndex> columns = {}) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("transition_matrix: dt must be positive and finite");
  bool dense = false;
  switch (opts.method) {
    case ExpmMethod::Dense:
      if (q.dim() > opts.dense_limit)
        throw CapacityError("dimension " + std::to_string(q.dim()) + " exceeds the dense limit " +
                            std::to_string(opts.dense_limit));
      dense = true;
      break;
    case ExpmMethod::Uniformization:
      dense = false;
      break;
    case ExpmMethod::Auto:
      if (q.dim() <= opts.dense_limit)
        dense = true;
      else if (!opts.allow_uniformization)
        throw CapacityError("dimension " + std::to_string(q.dim()) + " exceeds the dense limit " +
                            std::to_string(opts.dense_limit) + " and uniformization is disabled");
      break;
  }

  if (dense) {
    Eigen::MatrixXd qdt = q.to_dense() * dt;
    Eigen::MatrixXd m = qdt.exp();
    return TransitionMatrix(std::move(m), dt);
  }

  std::vector<StateIndex> wanted(columns.begin(), columns.end());
  if (wanted.empty()) {
    wanted.resize(q.dim());
    for (std::size_t x = 0; x < q.dim(); ++x) wanted[x] = static_cast<StateIndex>(x);
  }
  std::map<StateIndex, Eigen::VectorXd> cols;
  for (StateIndex x : wanted) {
    if (x >= q.dim()) throw ValidationError("requested column out of range");
    if (cols.contains(x)) continue;
    Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(q.dim()));
    e[x] = 1.0;
    cols.emplace(x, detail::uniformized_action(q, dt, std::move(e), opts.tail_tolerance));
  }
  return TransitionMatrix(q.dim(), std::move(cols), dt);
}

inline double step_probability(const TransitionMatrix& m, const NetworkState& prev, const NetworkState& next) {
  if (prev.n_nodes() != next.n_nodes() || (std::size_t{1} << prev.n_nodes()) != m.dim())
    throw ValidationError("step_probability: state size does not match transition matrix");
  return m(next.linear_index(), prev.linear_index());
}

}  // namespace tcinet
