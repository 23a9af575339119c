#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ctime>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tcinet/adjacency.hpp"
#include "tcinet/errors.hpp"
#include "tcinet/likelihood.hpp"
#include "tcinet/trajectory.hpp"
#include "tcinet/tt_cross.hpp"

namespace tcinet {

/// CPU time consumed by the calling thread, in seconds.
inline double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

/// Relative threshold for the co-infection score initializer.
inline constexpr double kScoreThreshold = 0.2;

/// Heuristic starting network from co-infection counts.
///
/// S(m, n) counts steps in which exactly one of m, n becomes infected while
/// the other was already infected; links with S >= 0.2 max S are kept.
inline AdjacencyVector score_init(const Trajectory& data) {
  if (data.steps() < 1) throw ValidationError("score_init: need at least one transition");
  const std::size_t n_nodes = data.n_nodes();
  std::vector<std::size_t> score(num_links(n_nodes), 0);
  for (std::size_t k = 1; k < data.size(); ++k) {
    const auto& prev = data.state(k - 1);
    const auto& next = data.state(k);
    for (std::size_t n = 1; n < n_nodes; ++n) {
      for (std::size_t m = 0; m < n; ++m) {
        const bool m_up = !prev[m] && next[m];
        const bool n_up = !prev[n] && next[n];
        if ((m_up && !n_up && prev[n]) || (n_up && !m_up && prev[m])) ++score[link_index(m, n)];
      }
    }
  }
  const std::size_t top = score.empty() ? 0 : *std::max_element(score.begin(), score.end());
  BitString bits(score.size(), 0);
  if (top > 0)
    for (std::size_t i = 0; i < score.size(); ++i)
      bits[i] = static_cast<double>(score[i]) >= kScoreThreshold * static_cast<double>(top);
  return AdjacencyVector(std::move(bits));
}

/// Per-node log pseudo-likelihood: each susceptible node's flip over a step is
/// scored independently, with its infection pressure frozen at the start.
inline double pseudo_loglik(const AdjacencyVector& g, const Trajectory& data, const EpidemicParams& params) {
  const std::size_t n_nodes = data.n_nodes();
  double s = 0.0;
  for (std::size_t k = 1; k < data.size(); ++k) {
    const auto& prev = data.state(k - 1);
    const auto& next = data.state(k);
    const double dt = data.time(k) - data.time(k - 1);
    for (std::size_t m = 0; m < n_nodes; ++m) {
      if (prev[m]) continue;
      std::size_t infected = 0;
      for (std::size_t n = 0; n < n_nodes; ++n)
        if (n != m && prev[n] && g.connected(m, n)) ++infected;
      const double r = (params.eps + params.beta * static_cast<double>(infected)) * dt;
      s += next[m] ? std::log(-std::expm1(-r)) : -r;
    }
  }
  return s;
}

/// Starting network by coordinate ascent on pseudo_loglik from the empty
/// graph: links are toggled in index order while that strictly improves it.
inline AdjacencyVector pseudo_likelihood_init(const Trajectory& data, const EpidemicParams& params,
                                              std::size_t max_passes = 50) {
  if (data.steps() < 1) throw ValidationError("pseudo_likelihood_init: need at least one transition");
  params.validate();
  AdjacencyVector g = AdjacencyVector::empty(data.n_nodes());
  double best = pseudo_loglik(g, data, params);
  for (std::size_t pass = 0; pass < max_passes; ++pass) {
    bool changed = false;
    for (std::size_t i = 0; i < g.size(); ++i) {
      BitString bits = g.bits();
      bits[i] ^= 1u;
      AdjacencyVector trial(std::move(bits));
      const double s = pseudo_loglik(trial, data, params);
      if (s > best) {
        best = s;
        g = std::move(trial);
        changed = true;
      }
    }
    if (!changed) break;
  }
  return g;
}

/// Exhaustive maximum-likelihood network over all 2^d candidates.
inline std::pair<AdjacencyVector, LogLikelihood> brute_force_mle(const LikelihoodModel& model, EvalCache& cache,
                                                                 std::size_t d_limit = 20) {
  const std::size_t d = num_links(model.data.n_nodes());
  if (d > d_limit)
    throw CapacityError("brute force over 2^" + std::to_string(d) + " networks exceeds the limit 2^" +
                        std::to_string(d_limit) + "; use cross optimization instead");
  std::optional<std::pair<AdjacencyVector, LogLikelihood>> best;
  const std::uint64_t count = std::uint64_t{1} << d;
  for (std::uint64_t i = 0; i < count; ++i) {
    // lexicographic order of the 01-string: position 0 is the most significant bit
    BitString bits(d);
    for (std::size_t j = 0; j < d; ++j) bits[j] = (i >> (d - 1 - j)) & 1u;
    AdjacencyVector g(std::move(bits));
    const LogLikelihood ll = cache.get_or_compute(g.key(), [&] { return model(g); });
    if (!best || ll > best->second) best.emplace(std::move(g), ll);
  }
  return *best;
}

enum class InitKind { Pseudo, Score, Zero, Given };

struct InferenceOptions {
  double tau = 1.0;
  tt::CrossConfig cross;
  InitKind init = InitKind::Pseudo;
  std::optional<AdjacencyVector> init_network;  ///< used with InitKind::Given
  std::optional<AdjacencyVector> truth;         ///< enables link errors
  bool record_timing = true;                    ///< false writes cpu_seconds = 0
};

struct HistoryRecord {
  std::size_t sweep = 0;
  std::size_t n_eval = 0;
  double cpu_seconds = 0.0;
  double max_error = 0.0;
  std::string g_max;
  LogLikelihood loglik = 0.0;
  std::optional<std::size_t> link_error;
};

struct RunResult {
  std::size_t dataset_id = 0;
  double tau = 1.0;
  std::string init;
  LogLikelihood init_loglik = 0.0;
  std::string g_max;
  LogLikelihood loglik = 0.0;
  std::size_t n_eval = 0;
  std::size_t cache_hits = 0;
  std::size_t n_requests = 0;
  std::string termination;
  std::string message;
  std::optional<std::size_t> link_error;
  double cpu_seconds = 0.0;
  std::vector<HistoryRecord> history;
  tt::TTCores cores;  ///< final interpolant; empty after an abort

  bool completed() const { return termination != tt::to_string(tt::Termination::Aborted); }
  double cache_hit_fraction() const {
    return n_requests == 0 ? 0.0 : static_cast<double>(cache_hits) / static_cast<double>(n_requests);
  }
};

inline AdjacencyVector initial_network(const Trajectory& data, const EpidemicParams& params,
                                       const InferenceOptions& opts) {
  switch (opts.init) {
    case InitKind::Pseudo: return pseudo_likelihood_init(data, params);
    case InitKind::Score: return score_init(data);
    case InitKind::Zero: return AdjacencyVector::empty(data.n_nodes());
    case InitKind::Given:
      if (!opts.init_network) throw ValidationError("initial network not provided");
      if (opts.init_network->n_nodes() != data.n_nodes())
        throw ValidationError("initial network size does not match the data");
      return *opts.init_network;
  }
  return pseudo_likelihood_init(data, params);
}

/// Tempered cross maximisation of the likelihood, started at the initial
/// network with log_shift = its log-likelihood.
inline RunResult run_inference(const LikelihoodModel& model, const InferenceOptions& opts, EvalCache& cache) {
  const double t0 = thread_cpu_seconds();
  auto elapsed = [&] { return opts.record_timing ? thread_cpu_seconds() - t0 : 0.0; };
  if (opts.truth && opts.truth->n_nodes() != model.data.n_nodes())
    throw ValidationError("ground-truth network size does not match the data");

  RunResult out;
  out.tau = opts.tau;
  const std::size_t evals0 = cache.n_evaluations();
  const std::size_t hits0 = cache.n_hits();

  const AdjacencyVector g0 = initial_network(model.data, model.params, opts);
  out.init = g0.key();
  out.init_loglik = cache.get_or_compute(g0.key(), [&] { return model(g0); });
  if (!std::isfinite(out.init_loglik))
    throw ValidationError("initial network " + g0.key() + " has zero likelihood; choose another --init");

  TemperedObjective objective(model, TemperConfig{opts.tau, out.init_loglik}, cache, evals0);
  auto link_error = [&](const std::string& key) -> std::optional<std::size_t> {
    if (!opts.truth) return std::nullopt;
    return network_error(AdjacencyVector::from_string(key), *opts.truth);
  };

  const tt::CrossResult res = tt::cross_optimize(objective, g0.bits(), opts.cross, [&](const tt::SweepRecord& r) {
    HistoryRecord h;
    h.sweep = r.sweep;
    h.n_eval = r.n_eval;
    h.cpu_seconds = elapsed();
    h.max_error = r.max_error;
    h.g_max = to_bitstring(r.g_max);
    h.loglik = cache.find(h.g_max).value_or(kImpossible);
    h.link_error = link_error(h.g_max);
    out.history.push_back(std::move(h));
  });

  const auto [g_best, ll_best] = cache_argmax(cache);
  out.g_max = g_best.key();
  out.loglik = ll_best;
  out.link_error = link_error(out.g_max);
  out.n_eval = cache.n_evaluations() - evals0;
  out.cache_hits = cache.n_hits() - hits0;
  out.n_requests = out.n_eval + out.cache_hits;
  out.termination = tt::to_string(res.termination);
  out.message = res.message;
  out.cores = res.cores;
  out.cpu_seconds = elapsed();
  return out;
}

}  // namespace tcinet
