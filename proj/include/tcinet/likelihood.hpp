#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tcinet/adjacency.hpp"
#include "tcinet/epidemic.hpp"
#include "tcinet/errors.hpp"
#include "tcinet/master_equation.hpp"
#include "tcinet/trajectory.hpp"

namespace tcinet {

/// Sum of log transition probabilities; -inf marks impossible data.
using LogLikelihood = double;

inline constexpr LogLikelihood kImpossible = -std::numeric_limits<double>::infinity();

/// Step lengths within this relative distance share one exponential.
inline constexpr double kStepTolerance = 1e-9;

/// sum_k log M_{dt_k}(x_k, x_{k-1}).
inline LogLikelihood log_likelihood(const AdjacencyVector& g, const Trajectory& data, const EpidemicParams& params,
                                    const ExpmOptions& opts = {}) {
  if (g.n_nodes() != data.n_nodes())
    throw ValidationError("log_likelihood: network has " + std::to_string(g.n_nodes()) + " nodes, data has " +
                          std::to_string(data.n_nodes()));
  const RateMatrix q = build_generator(g, params);

  // Group steps by length; the first step of each group fixes the representative dt.
  struct Group {
    double dt;
    std::vector<std::size_t> steps;
  };
  std::vector<Group> groups;
  for (std::size_t k = 1; k < data.size(); ++k) {
    const double dt = data.time(k) - data.time(k - 1);
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& gr) {
      return std::abs(gr.dt - dt) <= kStepTolerance * std::max(gr.dt, dt);
    });
    if (it == groups.end()) {
      groups.push_back({dt, {}});
      it = std::prev(groups.end());
    }
    it->steps.push_back(k);
  }

  LogLikelihood total = 0.0;
  for (const auto& group : groups) {
    std::set<StateIndex> sources;
    for (std::size_t k : group.steps) sources.insert(data.state(k - 1).linear_index());
    const std::vector<StateIndex> cols(sources.begin(), sources.end());
    const TransitionMatrix m = transition_matrix(q, group.dt, opts, cols);
    for (std::size_t k : group.steps) {
      const double p = std::min(1.0, step_probability(m, data.state(k - 1), data.state(k)));
      if (!(p > 0.0)) return kImpossible;
      total += std::log(p);
    }
  }
  return total;
}

/// Observations, rates and solver options defining L(g).
struct LikelihoodModel {
  Trajectory data;
  EpidemicParams params;
  ExpmOptions expm;

  LogLikelihood operator()(const AdjacencyVector& g) const { return log_likelihood(g, data, params, expm); }
};

struct TemperConfig {
  double tau = 1.0;
  double log_shift = 0.0;

  void validate() const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("temperature must be positive and finite");
    if (!std::isfinite(log_shift)) throw ValidationError("log_shift must be finite");
  }
};

/// Raised when exp((ll - shift) / tau) is not representable.
class TemperingOverflow : public ObjectiveAbort {
 public:
  TemperingOverflow(std::string g, LogLikelihood ll, const TemperConfig& cfg)
      : ObjectiveAbort(message(g, ll, cfg)), network_(std::move(g)), loglik_(ll) {}

  const std::string& network() const { return network_; }
  LogLikelihood loglik() const { return loglik_; }

 private:
  static std::string message(const std::string& g, LogLikelihood ll, const TemperConfig& cfg) {
    std::ostringstream os;
    os << std::setprecision(17) << "tempered likelihood overflow (temperature too low / shift too small): g=" << g
       << " loglik=" << ll << " tau=" << cfg.tau << " log_shift=" << cfg.log_shift;
    return os.str();
  }

  std::string network_;
  LogLikelihood loglik_;
};

/// exp((ll - log_shift) / tau); -inf maps to 0.
inline double tempered_objective(LogLikelihood ll, const TemperConfig& cfg, const std::string& g = {}) {
  cfg.validate();
  if (ll == kImpossible) return 0.0;
  const double v = std::exp((ll - cfg.log_shift) / cfg.tau);
  if (!std::isfinite(v)) throw TemperingOverflow(g, ll, cfg);
  return v;
}

/// Temperature-independent store of log-likelihoods keyed by the 01-string of g.
///
/// Each key is computed at most once, also under concurrent callers: a thread
/// requesting a key that another thread is computing waits for that result.
class EvalCache {
 public:
  EvalCache() = default;
  EvalCache(const EvalCache&) = delete;
  EvalCache& operator=(const EvalCache&) = delete;

  /// Looks up `key`, computing it with `compute()` on a miss.
  template <class Compute>
  LogLikelihood get_or_compute(const std::string& key, Compute&& compute) {
    std::unique_lock lock(mutex_);
    for (;;) {
      if (auto it = entries_.find(key); it != entries_.end()) {
        ++n_hits_;
        return it->second;
      }
      if (!pending_.contains(key)) break;
      ready_.wait(lock);
    }
    pending_.insert(key);
    ++n_evaluations_;
    lock.unlock();

    LogLikelihood ll = 0.0;
    try {
      ll = compute();
    } catch (...) {
      lock.lock();
      pending_.erase(key);
      --n_evaluations_;
      ready_.notify_all();
      throw;
    }

    lock.lock();
    entries_.emplace(key, ll);
    pending_.erase(key);
    ready_.notify_all();
    return ll;
  }

  /// Inserts without touching the counters (used when loading dumps).
  void insert(const std::string& key, LogLikelihood ll) {
    std::lock_guard lock(mutex_);
    entries_.insert_or_assign(key, ll);
  }

  std::optional<LogLikelihood> find(const std::string& key) const {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    return std::nullopt;
  }

  bool contains(const std::string& key) const {
    std::lock_guard lock(mutex_);
    return entries_.contains(key);
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
  }

  std::size_t n_evaluations() const { return n_evaluations_; }
  std::size_t n_hits() const { return n_hits_; }
  std::size_t n_requests() const { return n_evaluations_ + n_hits_; }

  /// Copy of all entries, ordered by key.
  std::map<std::string, LogLikelihood> entries() const {
    std::lock_guard lock(mutex_);
    return entries_;
  }

 private:
  mutable std::mutex mutex_;
  std::condition_variable ready_;
  std::map<std::string, LogLikelihood> entries_;
  std::set<std::string> pending_;
  std::atomic<std::size_t> n_evaluations_{0};
  std::atomic<std::size_t> n_hits_{0};
};

inline double evaluate_cached(const AdjacencyVector& g, const LikelihoodModel& model, const TemperConfig& cfg,
                              EvalCache& cache) {
  cfg.validate();
  const std::string key = g.key();
  const LogLikelihood ll = cache.get_or_compute(key, [&] { return model(g); });
  return tempered_objective(ll, cfg, key);
}

/// Largest stored log-likelihood; ties go to the lexicographically smallest key.
inline std::pair<AdjacencyVector, LogLikelihood> cache_argmax(const EvalCache& cache) {
  const auto entries = cache.entries();
  if (entries.empty()) throw ValidationError("cache_argmax: cache is empty");
  auto best = entries.begin();
  for (auto it = std::next(entries.begin()); it != entries.end(); ++it)
    if (it->second > best->second) best = it;
  return {AdjacencyVector::from_string(best->first), best->second};
}

// Dump format: header `g,loglik`, one row per key, -inf for impossible networks.
inline void write_cache(std::ostream& out, const EvalCache& cache) {
  out << "g,loglik\n" << std::setprecision(17);
  for (const auto& [key, ll] : cache.entries()) {
    out << key << ',';
    if (ll == kImpossible)
      out << "-inf";
    else
      out << ll;
    out << '\n';
  }
}

inline void read_cache(std::istream& in, EvalCache& cache) {
  std::string line;
  if (!std::getline(in, line) || (line != "g,loglik" && line != "g,loglik\r"))
    throw ValidationError("cache dump must start with header 'g,loglik'");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ValidationError("cache dump line " + std::to_string(line_no) + ": missing ','");
    const std::string key = line.substr(0, comma);
    const std::string value = line.substr(comma + 1);
    parse_bitstring(key);
    LogLikelihood ll = 0.0;
    if (value == "-inf") {
      ll = kImpossible;
    } else {
      try {
        std::size_t used = 0;
        ll = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        throw ValidationError("cache dump line " + std::to_string(line_no) + ": bad value '" + value + "'");
      }
    }
    cache.insert(key, ll);
  }
}

/// Cached tempered likelihood presented to the cross optimizer.
class TemperedObjective {
 public:
  /// Fresh evaluations are counted from `baseline` (default: the cache's current count).
  TemperedObjective(const LikelihoodModel& model, TemperConfig cfg, EvalCache& cache,
                    std::optional<std::size_t> baseline = std::nullopt)
      : model_(&model), cfg_(cfg), cache_(&cache), baseline_(baseline.value_or(cache.n_evaluations())) {
    cfg_.validate();
  }

  double value(std::span<const Bit> bits) const {
    return evaluate_cached(AdjacencyVector(BitString(bits.begin(), bits.end())), *model_, cfg_, *cache_);
  }

  /// Solves triggered through this objective.
  std::size_t fresh_evaluations() const { return cache_->n_evaluations() - baseline_; }

  std::pair<BitString, double> best() const {
    auto [g, ll] = cache_argmax(*cache_);
    const std::string key = g.key();
    return {g.bits(), tempered_objective(ll, cfg_, key)};
  }

  const TemperConfig& config() const { return cfg_; }
  EvalCache& cache() const { return *cache_; }

 private:
  const LikelihoodModel* model_;
  TemperConfig cfg_;
  EvalCache* cache_;
  std::size_t baseline_;
};

}  // namespace tcinet
