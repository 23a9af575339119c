#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tcinet/inference.hpp"
#include "tcinet/random.hpp"
#include "tcinet/report.hpp"

namespace tcinet {

/// Repeated inference of a chain network from simulated epidemics.
struct ExperimentConfig {
  std::size_t n_nodes = 9;
  EpidemicParams params{1.0, 0.5, 0.01};
  double dt = 0.1;
  double t_max = 200.0;
  std::vector<double> taus{1.0, 10.0, 100.0};
  tt::CrossConfig cross = default_cross();
  std::size_t n_datasets = 42;
  std::uint64_t base_seed = 1;
  InitKind init = InitKind::Pseudo;
  bool record_timing = true;
  std::size_t threads = 1;
  bool write_data = true;

  static tt::CrossConfig default_cross() {
    tt::CrossConfig c;
    c.r_max = 5;
    c.max_sweeps = 4;
    return c;
  }

  void validate() const {
    if (n_nodes < 2 || n_nodes > kMaxNodes) throw ValidationError("n_nodes must be in [2, 14]");
    params.validate();
    if (!(dt > 0.0) || !(t_max >= dt)) throw ValidationError("need dt > 0 and t_max >= dt");
    if (taus.empty()) throw ValidationError("at least one temperature is required");
    for (double t : taus)
      if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("temperatures must be positive");
    cross.validate();
    if (n_datasets < 1) throw ValidationError("n_datasets must be at least 1");
    if (threads < 1) throw ValidationError("threads must be at least 1");
  }

  static ExperimentConfig from_json(const json& j) {
    ExperimentConfig c;
    c.n_nodes = j.value("n_nodes", c.n_nodes);
    c.params.beta = j.value("beta", c.params.beta);
    c.params.gamma = j.value("gamma", c.params.gamma);
    c.params.eps = j.value("eps", c.params.eps);
    c.dt = j.value("dt", c.dt);
    c.t_max = j.value("t_max", c.t_max);
    if (j.contains("taus")) c.taus = j["taus"].get<std::vector<double>>();
    if (j.contains("cross")) {
      const auto& x = j["cross"];
      c.cross.delta = x.value("delta", c.cross.delta);
      c.cross.r_max = x.value("r_max", c.cross.r_max);
      c.cross.n_max = x.value("n_max", c.cross.n_max);
      c.cross.rook_max_iters = x.value("rook_iters", c.cross.rook_max_iters);
      c.cross.max_sweeps = x.value("max_sweeps", c.cross.max_sweeps);
      const auto policy = x.value("sweep_policy", std::string("alternate"));
      if (policy == "alternate")
        c.cross.sweep_policy = tt::SweepPolicy::Alternate;
      else if (policy == "left_only")
        c.cross.sweep_policy = tt::SweepPolicy::LeftOnly;
      else
        throw ValidationError("sweep_policy must be 'alternate' or 'left_only'");
    }
    c.n_datasets = j.value("n_datasets", c.n_datasets);
    c.base_seed = j.value("base_seed", c.base_seed);
    const auto init = j.value("init", std::string("pseudo"));
    if (init == "pseudo")
      c.init = InitKind::Pseudo;
    else if (init == "score")
      c.init = InitKind::Score;
    else if (init == "zero")
      c.init = InitKind::Zero;
    else
      throw ValidationError("experiment init must be 'pseudo', 'score' or 'zero'");
    c.record_timing = j.value("record_timing", c.record_timing);
    c.threads = j.value("threads", c.threads);
    c.write_data = j.value("write_data", c.write_data);
    c.validate();
    return c;
  }

  json to_json() const {
    json j;
    j["n_nodes"] = n_nodes;
    j["beta"] = params.beta;
    j["gamma"] = params.gamma;
    j["eps"] = params.eps;
    j["dt"] = dt;
    j["t_max"] = t_max;
    j["taus"] = taus;
    j["cross"] = {{"delta", cross.delta},
                  {"r_max", cross.r_max},
                  {"n_max", cross.n_max},
                  {"rook_iters", cross.rook_max_iters},
                  {"max_sweeps", cross.max_sweeps},
                  {"sweep_policy", cross.sweep_policy == tt::SweepPolicy::Alternate ? "alternate" : "left_only"}};
    j["n_datasets"] = n_datasets;
    j["base_seed"] = base_seed;
    j["init"] = init == InitKind::Zero ? "zero" : init == InitKind::Score ? "score" : "pseudo";
    j["record_timing"] = record_timing;
    j["threads"] = threads;
    j["write_data"] = write_data;
    return j;
  }

  std::uint64_t data_seed(std::size_t dataset) const { return base_seed + dataset; }
  std::uint64_t optimizer_seed(std::size_t dataset) const {
    return base_seed + Rng::kOptimizerStreamOffset + dataset;
  }
};

struct SummaryRow {
  double tau = 1.0;
  std::size_t sweep = 0;
  double n_eval = 0.0;
  double cpu_seconds_mean = 0.0;
  double err_mean = 0.0;
  double err_std = 0.0;
  std::size_t runs_included = 0;
};

struct TemperatureStats {
  double tau = 1.0;
  std::size_t runs = 0;
  std::size_t completed = 0;
  std::size_t aborted = 0;
  double final_err_mean = 0.0;  ///< relative link error
  double final_err_std = 0.0;
  double exact_fraction = 0.0;  ///< completed runs with zero wrong links
  double cache_hit_fraction = 0.0;
  double n_eval_mean = 0.0;
};

struct ExperimentResult {
  std::vector<RunResult> runs;
  std::vector<SummaryRow> summary;
  std::vector<TemperatureStats> stats;
};

inline std::string tau_label(double tau) {
  std::ostringstream os;
  os << tau;
  return os.str();
}

inline std::string run_file_name(double tau, std::size_t dataset) {
  return "run_tau" + tau_label(tau) + "_ds" + std::to_string(dataset) + ".json";
}

namespace detail {

inline void mean_std(const std::vector<double>& v, double& mean, double& sd) {
  mean = sd = 0.0;
  if (v.empty()) return;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  for (double x : v) sd += (x - mean) * (x - mean);
  sd = std::sqrt(sd / static_cast<double>(v.size()));
}

}  // namespace detail

/// Per-sweep aggregates over completed runs; a run that stopped early
/// contributes its last record to later sweeps. err_std is the population
/// standard deviation of the relative link error.
inline std::vector<SummaryRow> summarize(const std::vector<RunResult>& runs, const std::vector<double>& taus,
                                         std::size_t n_links) {
  std::vector<SummaryRow> rows;
  for (double tau : taus) {
    std::vector<const RunResult*> included;
    std::size_t sweeps = 0;
    for (const auto& r : runs)
      if (r.tau == tau && r.completed() && !r.history.empty()) {
        included.push_back(&r);
        sweeps = std::max(sweeps, r.history.size());
      }
    for (std::size_t s = 1; s <= sweeps; ++s) {
      std::vector<double> n_eval, cpu, err;
      for (const RunResult* r : included) {
        const auto& h = r->history[std::min(s, r->history.size()) - 1];
        n_eval.push_back(static_cast<double>(h.n_eval));
        cpu.push_back(h.cpu_seconds);
        err.push_back(static_cast<double>(h.link_error.value_or(0)) / static_cast<double>(n_links));
      }
      SummaryRow row;
      row.tau = tau;
      row.sweep = s;
      double unused = 0.0;
      detail::mean_std(n_eval, row.n_eval, unused);
      detail::mean_std(cpu, row.cpu_seconds_mean, unused);
      detail::mean_std(err, row.err_mean, row.err_std);
      row.runs_included = included.size();
      rows.push_back(row);
    }
  }
  return rows;
}

inline std::vector<TemperatureStats> temperature_stats(const std::vector<RunResult>& runs,
                                                       const std::vector<double>& taus, std::size_t n_links) {
  std::vector<TemperatureStats> out;
  for (double tau : taus) {
    TemperatureStats st;
    st.tau = tau;
    std::vector<double> err, evals;
    std::size_t exact = 0, hits = 0, requests = 0;
    for (const auto& r : runs) {
      if (r.tau != tau) continue;
      ++st.runs;
      if (!r.completed()) {
        ++st.aborted;
        continue;
      }
      ++st.completed;
      const std::size_t e = r.link_error.value_or(0);
      err.push_back(static_cast<double>(e) / static_cast<double>(n_links));
      evals.push_back(static_cast<double>(r.n_eval));
      exact += e == 0;
      hits += r.cache_hits;
      requests += r.n_requests;
    }
    double unused = 0.0;
    detail::mean_std(err, st.final_err_mean, st.final_err_std);
    detail::mean_std(evals, st.n_eval_mean, unused);
    if (st.completed > 0) st.exact_fraction = static_cast<double>(exact) / static_cast<double>(st.completed);
    if (requests > 0) st.cache_hit_fraction = static_cast<double>(hits) / static_cast<double>(requests);
    out.push_back(st);
  }
  return out;
}

inline void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "tau,n_eval,cpu_seconds_mean,err_mean,err_std,runs_included\n" << std::setprecision(17);
  for (const auto& r : rows)
    out << r.tau << ',' << r.n_eval << ',' << r.cpu_seconds_mean << ',' << r.err_mean << ',' << r.err_std << ','
        << r.runs_included << '\n';
}

/// Final link-error counts per temperature over completed runs, for errors 0..d.
inline void write_histogram_csv(std::ostream& out, const std::vector<RunResult>& runs,
                                const std::vector<double>& taus, std::size_t n_links) {
  out << "tau,link_error,count\n";
  for (double tau : taus) {
    std::vector<std::size_t> counts(n_links + 1, 0);
    for (const auto& r : runs)
      if (r.tau == tau && r.completed()) ++counts[std::min(r.link_error.value_or(0), n_links)];
    for (std::size_t e = 0; e <= n_links; ++e) out << tau << ',' << e << ',' << counts[e] << '\n';
  }
}

inline json to_json(const TemperatureStats& s) {
  return {{"tau", s.tau},
          {"runs", s.runs},
          {"completed", s.completed},
          {"aborted", s.aborted},
          {"final_err_mean", s.final_err_mean},
          {"final_err_std", s.final_err_std},
          {"exact_fraction", s.exact_fraction},
          {"cache_hit_fraction", s.cache_hit_fraction},
          {"n_eval_mean", s.n_eval_mean}};
}

/// Runs every (dataset, temperature) pair. Dataset i is simulated on the chain
/// with seed base_seed + i from node 1 infected; each run gets a fresh cache
/// and optimizer seed base_seed + 10^6 + i. With `out_dir`, writes per-run
/// JSON, summary.csv, histogram.csv and stats.json there.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::optional<std::string>& out_dir = {}) {
  cfg.validate();
  namespace fs = std::filesystem;
  if (out_dir) fs::create_directories(*out_dir);

  const AdjacencyVector truth = AdjacencyVector::chain(cfg.n_nodes);
  const std::size_t n_links = truth.size();
  const std::size_t n_taus = cfg.taus.size();
  std::vector<RunResult> runs(cfg.n_datasets * n_taus);
  std::vector<std::exception_ptr> errors(cfg.n_datasets);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.n_datasets; i = next++) {
      try {
        const Trajectory data = ssa_simulate(truth, cfg.params, cfg.dt, cfg.t_max,
                                             NetworkState::patient_zero(cfg.n_nodes), cfg.data_seed(i));
        if (out_dir && cfg.write_data)
          write_trajectory_file((fs::path(*out_dir) / ("data_" + std::to_string(i) + ".csv")).string(), data);
        const LikelihoodModel model{data, cfg.params, {}};
        for (std::size_t t = 0; t < n_taus; ++t) {
          InferenceOptions opts;
          opts.tau = cfg.taus[t];
          opts.cross = cfg.cross;
          opts.cross.seed = cfg.optimizer_seed(i);
          opts.init = cfg.init;
          opts.truth = truth;
          opts.record_timing = cfg.record_timing;
          EvalCache cache;
          RunResult r = run_inference(model, opts, cache);
          r.dataset_id = i;
          if (out_dir) write_json_file((fs::path(*out_dir) / run_file_name(r.tau, i)).string(), to_json(r));
          runs[i * n_taus + t] = std::move(r);
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < cfg.threads; ++w) pool.emplace_back(worker);
    worker();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  ExperimentResult result;
  result.runs = std::move(runs);
  result.summary = summarize(result.runs, cfg.taus, n_links);
  result.stats = temperature_stats(result.runs, cfg.taus, n_links);

  if (out_dir) {
    const fs::path dir(*out_dir);
    std::ofstream summary(dir / "summary.csv");
    write_summary_csv(summary, result.summary);
    std::ofstream hist(dir / "histogram.csv");
    write_histogram_csv(hist, result.runs, cfg.taus, n_links);
    json stats = json::array();
    for (const auto& s : result.stats) stats.push_back(to_json(s));
    write_json_file((dir / "stats.json").string(), {{"config", cfg.to_json()}, {"temperatures", stats}});
  }
  return result;
}

}  // namespace tcinet
