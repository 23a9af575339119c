#pragma once

#include <cmath>
#include <fstream>
#include <string>

#include "json.hpp"

#include "tcinet/errors.hpp"
#include "tcinet/inference.hpp"

namespace tcinet {

using json = nlohmann::ordered_json;

/// -inf log-likelihoods are written as null.
inline json loglik_json(LogLikelihood ll) { return std::isfinite(ll) ? json(ll) : json(nullptr); }

inline LogLikelihood loglik_from_json(const json& j) { return j.is_null() ? kImpossible : j.get<double>(); }

inline json to_json(const HistoryRecord& h) {
  json j;
  j["sweep"] = h.sweep;
  j["n_eval"] = h.n_eval;
  j["cpu_seconds"] = h.cpu_seconds;
  j["max_error"] = h.max_error;
  j["g_max"] = h.g_max;
  j["loglik"] = loglik_json(h.loglik);
  j["link_error"] = h.link_error ? json(*h.link_error) : json(nullptr);
  return j;
}

inline json to_json(const RunResult& r) {
  json j;
  j["dataset"] = r.dataset_id;
  j["tau"] = r.tau;
  j["init"] = r.init;
  j["init_loglik"] = loglik_json(r.init_loglik);
  j["g_max"] = r.g_max;
  j["loglik"] = loglik_json(r.loglik);
  j["n_eval"] = r.n_eval;
  j["cache_hits"] = r.cache_hits;
  j["termination"] = r.termination;
  if (!r.message.empty()) j["message"] = r.message;
  j["link_error"] = r.link_error ? json(*r.link_error) : json(nullptr);
  j["cpu_seconds"] = r.cpu_seconds;
  json hist = json::array();
  for (const auto& h : r.history) hist.push_back(to_json(h));
  j["history"] = std::move(hist);
  return j;
}

inline RunResult run_result_from_json(const json& j) {
  RunResult r;
  r.dataset_id = j.value("dataset", std::size_t{0});
  r.tau = j.value("tau", 1.0);
  r.init = j.value("init", std::string{});
  if (j.contains("init_loglik")) r.init_loglik = loglik_from_json(j["init_loglik"]);
  r.g_max = j.at("g_max").get<std::string>();
  r.loglik = loglik_from_json(j.at("loglik"));
  r.n_eval = j.at("n_eval").get<std::size_t>();
  r.cache_hits = j.at("cache_hits").get<std::size_t>();
  r.n_requests = r.n_eval + r.cache_hits;
  r.termination = j.at("termination").get<std::string>();
  r.message = j.value("message", std::string{});
  if (j.contains("link_error") && !j["link_error"].is_null()) r.link_error = j["link_error"].get<std::size_t>();
  r.cpu_seconds = j.value("cpu_seconds", 0.0);
  for (const auto& h : j.at("history")) {
    HistoryRecord rec;
    rec.sweep = h.at("sweep").get<std::size_t>();
    rec.n_eval = h.at("n_eval").get<std::size_t>();
    rec.cpu_seconds = h.at("cpu_seconds").get<double>();
    rec.max_error = h.at("max_error").get<double>();
    rec.g_max = h.at("g_max").get<std::string>();
    rec.loglik = loglik_from_json(h.at("loglik"));
    if (!h.at("link_error").is_null()) rec.link_error = h["link_error"].get<std::size_t>();
    r.history.push_back(std::move(rec));
  }
  return r;
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(2) << '\n';
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace tcinet
