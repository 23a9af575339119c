// tcinet: simulate epsilon-SIS data and infer contact networks by TT cross maximisation.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "tcinet/tcinet.hpp"

namespace {

using namespace tcinet;

struct RateFlags {
  double beta = 1.0;
  double gamma = 0.5;
  double eps = 0.01;

  void add(CLI::App* app) {
    app->add_option("--beta", beta, "infection rate per infected contact")->capture_default_str();
    app->add_option("--gamma", gamma, "recovery rate")->capture_default_str();
    app->add_option("--eps", eps, "self-infection rate")->capture_default_str();
  }
  EpidemicParams params() const { return {beta, gamma, eps}; }
};

void emit_json(const json& j, const std::string& out) {
  if (out.empty() || out == "-")
    std::cout << j.dump(2) << '\n';
  else
    write_json_file(out, j);
}

void load_cache(EvalCache& cache, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open cache dump " + path);
  read_cache(in, cache);
}

void save_cache(const EvalCache& cache, const std::string& path) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write cache dump " + path);
  write_cache(out, cache);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contact-network inference with greedy tensor-train cross interpolation"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Gillespie simulation of the epsilon-SIS process");
  std::string sim_network, sim_out, sim_x0;
  RateFlags sim_rates;
  double sim_dt = 0.1, sim_tmax = 200.0;
  std::uint64_t sim_seed = 1;
  sim->add_option("--network", sim_network, "network file")->required();
  sim_rates.add(sim);
  sim->add_option("--dt", sim_dt, "observation interval")->capture_default_str();
  sim->add_option("--tmax", sim_tmax, "observation horizon")->capture_default_str();
  sim->add_option("--seed", sim_seed, "random seed")->capture_default_str();
  sim->add_option("--x0", sim_x0, "initial state as 01-string x1..xN (default: node 1 infected)");
  sim->add_option("--out", sim_out, "output CSV (default stdout)");

  // loglik
  auto* ll = app.add_subcommand("loglik", "Log-likelihood of a network given data");
  std::string ll_data, ll_network;
  RateFlags ll_rates;
  ll->add_option("--data", ll_data, "trajectory CSV")->required();
  ll->add_option("--network", ll_network, "network file")->required();
  ll_rates.add(ll);

  // brute
  auto* brute = app.add_subcommand("brute", "Exhaustive maximum-likelihood search");
  std::string br_data, br_out, br_cache_in, br_cache_out, br_truth;
  RateFlags br_rates;
  double br_tau = 1.0;
  std::size_t br_limit = 20;
  brute->add_option("--data", br_data, "trajectory CSV")->required();
  br_rates.add(brute);
  brute->add_option("--tau", br_tau, "temperature (recorded only; the argmax does not depend on it)")
      ->capture_default_str();
  brute->add_option("--d-limit", br_limit, "largest number of links to enumerate")->capture_default_str();
  brute->add_option("--truth", br_truth, "ground-truth network file");
  brute->add_option("--cache-in", br_cache_in, "preload cache dump");
  brute->add_option("--cache-out", br_cache_out, "write cache dump");
  brute->add_option("--out", br_out, "result JSON (default stdout)");

  // infer
  auto* infer = app.add_subcommand("infer", "TT cross maximisation of the tempered likelihood");
  std::string in_data, in_out, in_init = "pseudo", in_truth, in_cache_in, in_cache_out, in_cores, in_policy = "alternate";
  RateFlags in_rates;
  double in_tau = 1.0;
  tt::CrossConfig in_cross = ExperimentConfig::default_cross();
  in_cross.max_sweeps = 0;
  bool in_no_timing = false;
  infer->add_option("--data", in_data, "trajectory CSV")->required();
  in_rates.add(infer);
  infer->add_option("--tau", in_tau, "temperature")->capture_default_str();
  infer->add_option("--rank-max", in_cross.r_max, "maximal TT rank")->capture_default_str();
  infer->add_option("--delta", in_cross.delta, "relative error stopping threshold")->capture_default_str();
  infer->add_option("--budget", in_cross.n_max, "maximal number of likelihood evaluations")->capture_default_str();
  infer->add_option("--rook-iters", in_cross.rook_max_iters, "rook pivoting alternations")->capture_default_str();
  infer->add_option("--sweeps", in_cross.max_sweeps, "maximal number of sweeps (0 = unlimited)")
      ->capture_default_str();
  infer->add_option("--sweep-policy", in_policy, "alternate | left_only")->capture_default_str();
  infer->add_option("--init", in_init, "pseudo | score | zero | file:PATH")->capture_default_str();
  infer->add_option("--seed", in_cross.seed, "optimizer seed")->capture_default_str();
  infer->add_option("--truth", in_truth, "ground-truth network file for link errors");
  infer->add_option("--cache-in", in_cache_in, "preload cache dump");
  infer->add_option("--cache-out", in_cache_out, "write cache dump");
  infer->add_option("--cores-out", in_cores, "write the final TT cores");
  infer->add_flag("--no-timing", in_no_timing, "record cpu_seconds as 0 for byte-reproducible output");
  infer->add_option("--out", in_out, "result JSON (default stdout)");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Repeated simulate-and-infer runs on a chain network");
  std::string ex_config, ex_out;
  exp->add_option("--config", ex_config, "experiment JSON")->required();
  exp->add_option("--out", ex_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      const AdjacencyVector g = read_network_file(sim_network);
      const NetworkState x0 = sim_x0.empty() ? NetworkState::patient_zero(g.n_nodes())
                                             : NetworkState(parse_bitstring(sim_x0));
      const Trajectory data = ssa_simulate(g, sim_rates.params(), sim_dt, sim_tmax, x0, sim_seed);
      if (sim_out.empty() || sim_out == "-")
        write_trajectory(std::cout, data);
      else
        write_trajectory_file(sim_out, data);
    } else if (*ll) {
      const Trajectory data = read_trajectory_file(ll_data);
      const AdjacencyVector g = read_network_file(ll_network);
      const LogLikelihood v = log_likelihood(g, data, ll_rates.params());
      std::cout << std::setprecision(17) << v << '\n';
    } else if (*brute) {
      const LikelihoodModel model{read_trajectory_file(br_data), br_rates.params(), {}};
      EvalCache cache;
      load_cache(cache, br_cache_in);
      const auto [g, v] = brute_force_mle(model, cache, br_limit);
      json j;
      j["g_max"] = g.key();
      j["loglik"] = loglik_json(v);
      j["n_eval"] = cache.n_evaluations();
      j["cache_hits"] = cache.n_hits();
      j["termination"] = "exhaustive";
      j["tau"] = br_tau;
      if (!br_truth.empty())
        j["link_error"] = network_error(g, read_network_file(br_truth));
      else
        j["link_error"] = nullptr;
      j["history"] = json::array();
      emit_json(j, br_out);
      save_cache(cache, br_cache_out);
    } else if (*infer) {
      const LikelihoodModel model{read_trajectory_file(in_data), in_rates.params(), {}};
      InferenceOptions opts;
      opts.tau = in_tau;
      if (in_policy == "alternate")
        in_cross.sweep_policy = tt::SweepPolicy::Alternate;
      else if (in_policy == "left_only")
        in_cross.sweep_policy = tt::SweepPolicy::LeftOnly;
      else
        throw ValidationError("--sweep-policy must be alternate or left_only");
      opts.cross = in_cross;
      opts.record_timing = !in_no_timing;
      if (in_init == "pseudo") {
        opts.init = InitKind::Pseudo;
      } else if (in_init == "score") {
        opts.init = InitKind::Score;
      } else if (in_init == "zero") {
        opts.init = InitKind::Zero;
      } else if (in_init.rfind("file:", 0) == 0) {
        opts.init = InitKind::Given;
        opts.init_network = read_network_file(in_init.substr(5));
      } else {
        throw ValidationError("--init must be pseudo, score, zero or file:PATH");
      }
      if (!in_truth.empty()) opts.truth = read_network_file(in_truth);
      EvalCache cache;
      load_cache(cache, in_cache_in);

      const RunResult r = run_inference(model, opts, cache);
      emit_json(to_json(r), in_out);
      save_cache(cache, in_cache_out);
      if (!in_cores.empty()) {
        std::ofstream out(in_cores);
        if (!out) throw ValidationError("cannot write " + in_cores);
        tt::write_cores(out, r.cores);
      }
      if (!r.completed()) {
        std::cerr << "inference aborted: " << r.message << '\n';
        return 3;
      }
    } else if (*exp) {
      const ExperimentConfig cfg = ExperimentConfig::from_json(read_json_file(ex_config));
      const ExperimentResult res = run_experiment(cfg, ex_out);
      for (const auto& s : res.stats)
        std::cout << "tau=" << s.tau << " completed=" << s.completed << "/" << s.runs
                  << " final_err_mean=" << s.final_err_mean << " exact=" << s.exact_fraction
                  << " cache_hit_fraction=" << s.cache_hit_fraction << '\n';
    }
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
