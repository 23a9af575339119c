#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tcinet/adjacency.hpp"
#include "tcinet/epidemic.hpp"
#include "tcinet/errors.hpp"
#include "tcinet/random.hpp"

namespace tcinet {

/// Observed states x(t_0), ..., x(t_K).
class Trajectory {
 public:
  Trajectory() = default;

  Trajectory(std::vector<double> times, std::vector<NetworkState> states)
      : times_(std::move(times)), states_(std::move(states)) {
    if (times_.empty()) throw ValidationError("trajectory must contain at least one observation");
    if (times_.size() != states_.size()) throw ValidationError("trajectory times and states differ in length");
    for (std::size_t k = 0; k < times_.size(); ++k) {
      if (!std::isfinite(times_[k])) throw ValidationError("trajectory times must be finite");
      if (k > 0 && !(times_[k] > times_[k - 1])) throw ValidationError("trajectory times must be strictly increasing");
      if (states_[k].n_nodes() != states_[0].n_nodes())
        throw ValidationError("all trajectory states must have the same number of nodes");
    }
  }

  std::size_t n_nodes() const { return states_.front().n_nodes(); }
  /// Number of transitions K.
  std::size_t steps() const { return times_.size() - 1; }
  std::size_t size() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<NetworkState>& states() const { return states_; }
  double time(std::size_t k) const { return times_[k]; }
  const NetworkState& state(std::size_t k) const { return states_[k]; }

  /// Observations first..last inclusive.
  Trajectory slice(std::size_t first, std::size_t last) const {
    if (first > last || last >= size()) throw ValidationError("invalid trajectory slice");
    return Trajectory({times_.begin() + first, times_.begin() + last + 1},
                      {states_.begin() + first, states_.begin() + last + 1});
  }

 private:
  std::vector<double> times_;
  std::vector<NetworkState> states_;
};

/// Gillespie direct method, recorded on the grid t_k = k dt, k = 0..floor(t_max/dt).
/// The recorded value at t_k includes every event at times <= t_k.
inline Trajectory ssa_simulate(const AdjacencyVector& g, const EpidemicParams& params, double dt, double t_max,
                               const NetworkState& x0, std::uint64_t seed) {
  params.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("ssa_simulate: dt must be positive");
  if (!(t_max >= dt) || !std::isfinite(t_max)) throw ValidationError("ssa_simulate: t_max must be >= dt");
  if (x0.n_nodes() != g.n_nodes()) throw ValidationError("ssa_simulate: initial state size does not match network");

  const std::size_t n_nodes = g.n_nodes();
  // tolerate t_max/dt landing just below an integer
  const auto steps = static_cast<std::size_t>(std::floor(t_max / dt * (1.0 + 1e-12)));
  Rng rng(seed);

  BitString x = x0.bits();
  std::vector<unsigned> infected_nbrs(n_nodes, 0);
  for (std::size_t n = 0; n < n_nodes; ++n)
    for (std::size_t m = 0; m < n_nodes; ++m)
      if (x[m] && g.connected(m, n)) ++infected_nbrs[n];

  std::vector<double> rates(n_nodes);
  auto node_rate = [&](std::size_t n) {
    return x[n] ? params.gamma : infected_nbrs[n] * params.beta + params.eps;
  };

  std::vector<double> times;
  std::vector<NetworkState> states;
  times.reserve(steps + 1);
  states.reserve(steps + 1);

  double t = 0.0;
  std::size_t k = 0;
  auto record_until = [&](double t_event) {
    while (k <= steps && static_cast<double>(k) * dt < t_event) {
      times.push_back(static_cast<double>(k) * dt);
      states.emplace_back(x);
      ++k;
    }
  };

  while (k <= steps) {
    double total = 0.0;
    for (std::size_t n = 0; n < n_nodes; ++n) total += rates[n] = node_rate(n);
    if (total <= 0.0) {
      record_until(std::numeric_limits<double>::infinity());
      break;
    }
    t += rng.exponential(total);
    record_until(t);
    if (k > steps) break;

    double target = rng.uniform() * total;
    std::size_t n = 0;
    while (n + 1 < n_nodes && target >= rates[n]) target -= rates[n++];
    while (rates[n] <= 0.0) --n;  // roundoff landed on a disabled reaction

    x[n] ^= 1;
    for (std::size_t m = 0; m < n_nodes; ++m)
      if (g.connected(n, m)) x[n] ? ++infected_nbrs[m] : --infected_nbrs[m];
  }
  return Trajectory(std::move(times), std::move(states));
}

// CSV: header t,x1,...,xN followed by K+1 rows; times with 17 significant digits.
inline void write_trajectory(std::ostream& out, const Trajectory& data) {
  out << 't';
  for (std::size_t n = 1; n <= data.n_nodes(); ++n) out << ",x" << n;
  out << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t k = 0; k < data.size(); ++k) {
    out << data.time(k);
    for (Bit b : data.state(k).bits()) out << ',' << static_cast<int>(b);
    out << '\n';
  }
}

inline Trajectory read_trajectory(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("trajectory file is empty");
  std::size_t n_nodes = 0;
  {
    std::istringstream hs(line);
    std::string col;
    std::getline(hs, col, ',');
    if (col != "t") throw ValidationError("trajectory header must start with 't'");
    while (std::getline(hs, col, ',')) {
      ++n_nodes;
      if (col != "x" + std::to_string(n_nodes)) throw ValidationError("unexpected trajectory column '" + col + "'");
    }
  }
  if (n_nodes == 0) throw ValidationError("trajectory header has no state columns");

  std::vector<double> times;
  std::vector<NetworkState> states;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');
    double t = 0.0;
    try {
      std::size_t used = 0;
      t = std::stod(cell, &used);
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ValidationError("trajectory line " + std::to_string(line_no) + ": bad time '" + cell + "'");
    }
    BitString bits;
    while (std::getline(ls, cell, ',')) {
      if (cell != "0" && cell != "1")
        throw ValidationError("trajectory line " + std::to_string(line_no) + ": states must be 0/1");
      bits.push_back(cell == "1");
    }
    if (bits.size() != n_nodes)
      throw ValidationError("trajectory line " + std::to_string(line_no) + ": expected " + std::to_string(n_nodes) +
                            " states");
    times.push_back(t);
    states.emplace_back(std::move(bits));
  }
  return Trajectory(std::move(times), std::move(states));
}

inline Trajectory read_trajectory_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open trajectory file " + path);
  return read_trajectory(in);
}

inline void write_trajectory_file(const std::string& path, const Trajectory& data) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write trajectory file " + path);
  write_trajectory(out, data);
}

}  // namespace tcinet
