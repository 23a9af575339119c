#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tcinet/adjacency.hpp"
#include "tcinet/errors.hpp"

namespace tcinet {

/// Largest network handled by the exact CTMC engine.
inline constexpr std::size_t kMaxNodes = 14;

struct EpidemicParams {
  double beta = 1.0;   ///< infection rate per infected contact
  double gamma = 0.5;  ///< recovery rate
  double eps = 0.01;   ///< self-infection rate

  void validate() const {
    auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!ok(beta) || !ok(gamma) || !ok(eps))
      throw ValidationError("epidemic rates must be finite and nonnegative");
  }
};

using StateIndex = std::uint32_t;

/// Node states x_1..x_N; node 1 is the least significant bit of the linear index.
class NetworkState {
 public:
  NetworkState() = default;

  explicit NetworkState(BitString bits) : bits_(std::move(bits)) {
    if (bits_.empty() || bits_.size() > 31) throw ValidationError("network state must have 1..31 nodes");
    for (std::size_t n = 0; n < bits_.size(); ++n) {
      if (bits_[n] > 1) throw ValidationError("network state bits must be 0 or 1");
      index_ |= static_cast<StateIndex>(bits_[n]) << n;
    }
  }

  static NetworkState from_index(StateIndex index, std::size_t n_nodes) {
    if (n_nodes == 0 || n_nodes > 31 || index >> n_nodes)
      throw ValidationError("state index " + std::to_string(index) + " out of range for " +
                            std::to_string(n_nodes) + " nodes");
    BitString bits(n_nodes);
    for (std::size_t n = 0; n < n_nodes; ++n) bits[n] = (index >> n) & 1u;
    return NetworkState(std::move(bits));
  }

  /// Node 1 infected, all others susceptible.
  static NetworkState patient_zero(std::size_t n_nodes) {
    BitString bits(n_nodes, 0);
    bits.at(0) = 1;
    return NetworkState(std::move(bits));
  }

  std::size_t n_nodes() const { return bits_.size(); }
  const BitString& bits() const { return bits_; }
  StateIndex linear_index() const { return index_; }
  Bit operator[](std::size_t n) const { return bits_[n]; }

  friend bool operator==(const NetworkState& a, const NetworkState& b) { return a.bits_ == b.bits_; }

 private:
  BitString bits_;
  StateIndex index_ = 0;
};

/// Generator of the epsilon-SIS chain in column convention: Q(y, x) is the rate x -> y.
/// Every column holds at most N off-diagonal entries, one per single-node flip.
class RateMatrix {
 public:
  struct Entry {
    StateIndex row;
    double rate;
  };

  RateMatrix(std::size_t n_nodes, std::vector<std::vector<Entry>> columns)
      : n_nodes_(n_nodes), columns_(std::move(columns)), exit_(columns_.size(), 0.0) {
    for (std::size_t x = 0; x < columns_.size(); ++x)
      for (const auto& e : columns_[x]) exit_[x] += e.rate;
  }

  std::size_t n_nodes() const { return n_nodes_; }
  std::size_t dim() const { return columns_.size(); }

  /// Off-diagonal entries of column x.
  const std::vector<Entry>& column(StateIndex x) const { return columns_[x]; }
  /// Total rate out of state x, i.e. -Q(x, x).
  double exit_rate(StateIndex x) const { return exit_[x]; }

  double operator()(StateIndex y, StateIndex x) const {
    if (y == x) return -exit_[x];
    for (const auto& e : columns_[x])
      if (e.row == y) return e.rate;
    return 0.0;
  }

  double max_exit_rate() const {
    double m = 0.0;
    for (double r : exit_) m = std::max(m, r);
    return m;
  }

  Eigen::MatrixXd to_dense() const {
    const auto n = static_cast<Eigen::Index>(dim());
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index x = 0; x < n; ++x) {
      for (const auto& e : columns_[x]) q(e.row, x) = e.rate;
      q(x, x) = -exit_[x];
    }
    return q;
  }

  /// y = Q v.
  void multiply(const Eigen::VectorXd& v, Eigen::VectorXd& y) const {
    y.setZero(static_cast<Eigen::Index>(dim()));
    for (std::size_t x = 0; x < dim(); ++x) {
      const double vx = v[static_cast<Eigen::Index>(x)];
      if (vx == 0.0) continue;
      y[static_cast<Eigen::Index>(x)] -= exit_[x] * vx;
      for (const auto& e : columns_[x]) y[e.row] += e.rate * vx;
    }
  }

 private:
  std::size_t n_nodes_;
  std::vector<std::vector<Entry>> columns_;
  std::vector<double> exit_;
};

/// Infected neighbours of node n in state x.
inline unsigned infected_neighbours(const AdjacencyVector& g, StateIndex x, std::size_t n) {
  unsigned count = 0;
  for (std::size_t m = 0; m < g.n_nodes(); ++m)
    if (m != n && ((x >> m) & 1u) && g.connected(m, n)) ++count;
  return count;
}

inline RateMatrix build_generator(const AdjacencyVector& g, const EpidemicParams& params) {
  params.validate();
  const std::size_t n_nodes = g.n_nodes();
  if (n_nodes > kMaxNodes)
    throw CapacityError("networks above " + std::to_string(kMaxNodes) + " nodes are not supported");
  const std::size_t dim = std::size_t{1} << n_nodes;
  std::vector<std::vector<RateMatrix::Entry>> cols(dim);
  for (StateIndex x = 0; x < dim; ++x) {
    auto& col = cols[x];
    col.reserve(n_nodes);
    for (std::size_t n = 0; n < n_nodes; ++n) {
      const StateIndex y = x ^ (StateIndex{1} << n);
      double rate = 0.0;
      if ((x >> n) & 1u)
        rate = params.gamma;
      else
        rate = infected_neighbours(g, x, n) * params.beta + params.eps;
      if (rate > 0.0) col.push_back({y, rate});
    }
  }
  return RateMatrix(n_nodes, std::move(cols));
}

}  // namespace tcinet
