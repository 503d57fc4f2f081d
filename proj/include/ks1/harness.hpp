#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>
#include "ks1/analysis.hpp"
#include "ks1/configmodel.hpp"
#include "ks1/construct.hpp"
#include "ks1/exactmatch.hpp"
#include "ks1/multigraph.hpp"
#include "ks1/reduce.hpp"
#include "ks1/rng.hpp"
#include "ks1/types.hpp"

namespace ks1 {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kReportSchema = "ks1-report/1";

struct Timings {
  double sample = 0, reduce = 0, exact = 0, unwind = 0;  // seconds
};

namespace detail {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace detail

struct GraphInstance {
  std::size_t n = 0;
  std::vector<VertexPair> pairs;
  MultiGraph graph;
  std::size_t retries = 0;
  bool degree_adjusted = false;
};

inline GraphInstance sample_graph(std::size_t n, double deg4_frac, Rng& rng, SampleOptions opts = {}) {
  const auto mixed = mixed_degree_sequence(n, deg4_frac);
  auto sample = sample_no_loops(mixed.degrees, rng, opts);
  GraphInstance inst;
  inst.n = n;
  inst.graph = MultiGraph::build(n, sample.pairs);
  inst.pairs = std::move(sample.pairs);
  inst.retries = sample.retries;
  inst.degree_adjusted = mixed.adjusted;
  return inst;
}

enum class Mode { Full, Hybrid };

struct PipelineResult {
  ReduceTrace trace;
  Matching m0;
  std::vector<VertexPair> pairs;  // input vertex ids
  DeficiencyLedger ledger;
  std::size_t kappa = 0;
  std::optional<std::size_t> kappa_h;  // hybrid: deficiency of the exact matching on the stop snapshot
  std::size_t stop_vertices = 0;
  bool anomaly = false;  // hybrid: the snapshot window was missed
  Timings time;
};

/// REDUCE then CONSTRUCT on a copy of g0. Full mode starts unwinding from the empty matching of
/// the empty graph; hybrid mode stops at the first snapshot in [omega, 2*omega] with ex4 = 0 and
/// starts from a maximum matching of it. The final matching is revalidated against `input`.
inline PipelineResult run_pipeline(const MultiGraph& g0, std::span<const VertexPair> input, Rng& rng, Mode mode,
                                   std::size_t omega = 0) {
  PipelineResult out;
  detail::Stopwatch clock;
  MultiGraph g = g0;
  StopRule rule = RunToEmpty{};
  if (mode == Mode::Hybrid) rule = SnapshotWindow{omega ? omega : default_omega(g0.num_vertices())};
  out.trace = run(g, rng, rule);
  out.time.reduce = clock.lap();

  Matching mj;
  if (mode == Mode::Hybrid) {
    mj = max_matching(g);
    out.kappa_h = g.num_vertices() - 2 * mj.size();
    out.anomaly = out.trace.stop != StopReason::SnapshotFound;
  }
  out.stop_vertices = g.num_vertices();
  out.time.exact = clock.lap();

  auto unwound = unwind(out.trace, out.trace.actions.size(), g, mj);
  out.time.unwind = clock.lap();

  out.m0 = std::move(unwound.matching);
  out.ledger = unwound.ledger;
  out.kappa = out.ledger.kappa0();
  out.pairs = resolve_to_original(out.m0, g);
  std::string why;
  if (!is_matching_of(g0.original_vertex_count(), input, out.pairs, &why))
    throw IntegrityError("pipeline produced an invalid matching: " + why);
  if (out.kappa != g0.num_vertices() - 2 * out.pairs.size()) throw IntegrityError("kappa disagrees with matching size");
  return out;
}

/// One trial of any experiment. Fields that an experiment does not measure stay empty.
struct TrialRecord {
  std::size_t index = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t kappa = 0;
  std::size_t r0 = 0;
  std::size_t r2b = 0;
  std::size_t matching_size = 0;
  std::optional<std::size_t> nu;
  std::optional<std::size_t> kappa_h;
  std::string stop;
  std::size_t actions = 0;
  std::size_t snapshots = 0;
  std::size_t retries = 0;
  bool anomaly = false;
  std::optional<bool> stop_equality;
  // drift
  std::size_t drift_samples = 0;
  std::int64_t drift_sum = 0;
  std::int64_t max_abs_good = 0;
  std::size_t good_over_two = 0;
  std::size_t flagged = 0;
  TypeHistogram histogram;
  Timings time;
};

struct ExperimentReport {
  std::string experiment;
  nlohmann::json parameters = nlohmann::json::object();
  nlohmann::json thresholds = nlohmann::json::object();
  std::vector<TrialRecord> trials;
  nlohmann::json aggregates = nlohmann::json::object();
  bool thresholds_met = true;
};

inline nlohmann::json to_json(const TrialRecord& t, bool with_timings = true) {
  nlohmann::json j{{"index", t.index},       {"n", t.n},
                   {"seed", t.seed},         {"kappa", t.kappa},
                   {"r0", t.r0},             {"r2b", t.r2b},
                   {"matching_size", t.matching_size},
                   {"stop", t.stop},         {"actions", t.actions},
                   {"snapshots", t.snapshots}, {"retries", t.retries},
                   {"anomaly", t.anomaly}};
  if (t.nu) j["nu"] = *t.nu;
  if (t.kappa_h) j["kappa_h"] = *t.kappa_h;
  if (t.stop_equality) j["stop_equality"] = *t.stop_equality;
  if (t.drift_samples || !t.histogram.empty()) {
    j["drift"] = {{"samples", t.drift_samples},
                  {"sum", t.drift_sum},
                  {"max_abs_good", t.max_abs_good},
                  {"good_over_two", t.good_over_two},
                  {"flagged", t.flagged}};
    nlohmann::json h = nlohmann::json::object();
    for (const auto& [type, row] : t.histogram)
      h[to_string(type)] = {{"count", row.count}, {"sum_dex4", row.sum_d_ex4}, {"sum_dn", row.sum_d_n}};
    j["histogram"] = h;
  }
  if (with_timings)
    j["time"] = {{"sample", t.time.sample}, {"reduce", t.time.reduce}, {"exact", t.time.exact}, {"unwind", t.time.unwind}};
  return j;
}

inline nlohmann::json to_json(const ExperimentReport& r, bool with_timings = true) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : r.trials) trials.push_back(to_json(t, with_timings));
  nlohmann::json j{{"schema", kReportSchema},         {"version", kVersion},
                   {"experiment", r.experiment},      {"parameters", r.parameters},
                   {"thresholds", r.thresholds},      {"trials", trials},
                   {"aggregates", r.aggregates},      {"thresholds_met", r.thresholds_met}};
  if (!with_timings) {
    for (const char* key : {"median_seconds", "ratios", "time"}) j["aggregates"].erase(key);
  }
  return j;
}

namespace detail {

// Runs body(i) for i in [0, count) on `threads` workers; the first exception is rethrown.
template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

inline double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

inline nlohmann::json kappa_summary(const std::vector<TrialRecord>& trials) {
  std::vector<double> k;
  for (const auto& t : trials) k.push_back(static_cast<double>(t.kappa));
  return {{"median", quantile(k, 0.5)}, {"p90", quantile(k, 0.9)}, {"max", k.empty() ? 0.0 : *std::max_element(k.begin(), k.end())}};
}

inline void fill_common(TrialRecord& t, const PipelineResult& res, const GraphInstance& inst) {
  t.n = inst.n;
  t.kappa = res.kappa;
  t.r0 = res.ledger.r0;
  t.r2b = res.ledger.r2b;
  t.matching_size = res.pairs.size();
  t.kappa_h = res.kappa_h;
  t.stop = to_string(res.trace.stop);
  t.actions = res.trace.actions.size();
  t.snapshots = res.trace.snapshots.size();
  t.retries = inst.retries;
  t.anomaly = res.anomaly;
  t.time.reduce = res.time.reduce;
  t.time.exact = res.time.exact;
  t.time.unwind = res.time.unwind;
}

inline double fraction(std::size_t hits, std::size_t total) {
  return total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
}

}  // namespace detail

struct ExperimentOptions {
  std::size_t n = 1000;
  std::size_t trials = 10;
  double deg4_frac = 0.0;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::size_t omega = 0;  // hybrid: 0 means ceil(n^(2/3))
  std::vector<std::size_t> sizes;  // scaling
};

// Shared body: sample, run the pipeline, fill the common fields. The sampling stream and the
// algorithm stream are split from the trial stream so they do not depend on each other.
inline TrialRecord run_trial(const ExperimentOptions& o, std::size_t n, std::size_t index, Mode mode,
                             bool with_oracle = false) {
  const Rng trial = Rng(o.seed).split(index);
  Rng sampling = trial.split(0), algo = trial.split(1);
  detail::Stopwatch clock;
  GraphInstance inst = sample_graph(n, o.deg4_frac, sampling);
  const double sample_time = clock.lap();
  const PipelineResult res = run_pipeline(inst.graph, inst.pairs, algo, mode, o.omega);
  TrialRecord t;
  t.index = index;
  t.seed = trial.seed();
  detail::fill_common(t, res, inst);
  t.time.sample = sample_time;
  if (mode == Mode::Hybrid && !res.anomaly) t.stop_equality = res.ledger.r0 == 0 && res.ledger.r2b == 0 && res.kappa == *res.kappa_h;
  if (with_oracle) t.nu = max_matching(inst.graph).size();
  return t;
}

inline void validate(const ExperimentOptions& o) {
  if (o.n == 0) throw InputError("n must be positive");
  if (!(o.deg4_frac >= 0.0 && o.deg4_frac <= 1.0)) throw InputError("deg4 fraction must lie in [0,1]");
}

/// Full mode; fraction of trials with kappa <= 2 log2 n.
inline ExperimentReport exp_deficit(const ExperimentOptions& o) {
  validate(o);
  ExperimentReport r;
  r.experiment = "deficit";
  r.parameters = {{"n", o.n}, {"trials", o.trials}, {"deg4_frac", o.deg4_frac}, {"seed", o.seed}, {"mode", "full"}};
  const double bound = 2.0 * std::log2(static_cast<double>(o.n));
  r.thresholds = {{"kappa_bound", bound}, {"min_fraction", 0.9}};
  r.trials.resize(o.trials);
  detail::parallel_for(o.trials, o.threads, [&](std::size_t i) { r.trials[i] = run_trial(o, o.n, i, Mode::Full); });
  std::size_t within = 0;
  for (const auto& t : r.trials) within += static_cast<double>(t.kappa) <= bound;
  const double frac = detail::fraction(within, o.trials);
  r.aggregates = {{"within_bound", within}, {"fraction_within_bound", frac}, {"kappa", detail::kappa_summary(r.trials)}};
  r.thresholds_met = o.trials == 0 || frac >= 0.9;
  return r;
}

/// Full mode against an exact maximum matching of the same graph.
inline ExperimentReport exp_oracle(const ExperimentOptions& o) {
  validate(o);
  ExperimentReport r;
  r.experiment = "oracle";
  r.parameters = {{"n", o.n}, {"trials", o.trials}, {"deg4_frac", o.deg4_frac}, {"seed", o.seed}, {"mode", "full"}};
  const double bound = 2.0 * std::log2(static_cast<double>(o.n));
  r.thresholds = {{"max_gap", bound}, {"min_perfect_fraction", 0.95}};
  r.trials.resize(o.trials);
  detail::parallel_for(o.trials, o.threads,
                       [&](std::size_t i) { r.trials[i] = run_trial(o, o.n, i, Mode::Full, true); });
  std::size_t max_gap = 0, perfect = 0, gap_violations = 0;
  for (const auto& t : r.trials) {
    const std::size_t gap = *t.nu - t.matching_size;
    max_gap = std::max(max_gap, gap);
    gap_violations += static_cast<double>(gap) > bound;
    perfect += *t.nu == t.n / 2;
  }
  const double frac = detail::fraction(perfect, o.trials);
  r.aggregates = {{"max_gap", max_gap}, {"gap_violations", gap_violations}, {"perfect", perfect},
                  {"fraction_perfect", frac}, {"kappa", detail::kappa_summary(r.trials)}};
  r.thresholds_met = o.trials == 0 || (gap_violations == 0 && frac >= 0.95);
  return r;
}

/// Hybrid mode; fraction of trials reaching kappa = n mod 2.
inline ExperimentReport exp_hybrid(const ExperimentOptions& o) {
  validate(o);
  ExperimentReport r;
  r.experiment = "hybrid";
  const std::size_t omega = o.omega ? o.omega : default_omega(o.n);
  r.parameters = {{"n", o.n}, {"trials", o.trials}, {"deg4_frac", o.deg4_frac}, {"seed", o.seed},
                  {"mode", "hybrid"}, {"omega", omega}};
  r.thresholds = {{"min_fraction_optimal", 0.95}, {"stop_equality_violations", 0}};
  r.trials.resize(o.trials);
  ExperimentOptions with_omega = o;
  with_omega.omega = omega;
  detail::parallel_for(o.trials, o.threads,
                       [&](std::size_t i) { r.trials[i] = run_trial(with_omega, o.n, i, Mode::Hybrid); });
  std::size_t optimal = 0, anomalies = 0, stop_equality_bad = 0;
  for (const auto& t : r.trials) {
    optimal += t.kappa == o.n % 2;
    anomalies += t.anomaly;
    stop_equality_bad += t.stop_equality.has_value() && !*t.stop_equality;
  }
  const double frac = detail::fraction(optimal, o.trials);
  r.aggregates = {{"optimal", optimal}, {"fraction_optimal", frac}, {"anomalies", anomalies},
                  {"stop_equality_violations", stop_equality_bad}, {"kappa", detail::kappa_summary(r.trials)}};
  r.thresholds_met = o.trials == 0 || (frac >= 0.95 && stop_equality_bad == 0);
  return r;
}

/// Median reduce+unwind time per size and the ratio between consecutive sizes.
inline ExperimentReport exp_scaling(const ExperimentOptions& o) {
  if (o.sizes.empty()) throw InputError("scaling needs at least one size");
  if (!std::is_sorted(o.sizes.begin(), o.sizes.end())) throw InputError("sizes must be ascending");
  ExperimentOptions base = o;
  base.n = o.sizes.front();
  validate(base);
  ExperimentReport r;
  r.experiment = "scaling";
  r.parameters = {{"sizes", o.sizes}, {"trials", o.trials}, {"deg4_frac", o.deg4_frac}, {"seed", o.seed}, {"mode", "full"}};
  r.thresholds = {{"max_ratio_per_4x", 6.0}, {"max_actions_per_vertex", 3}};
  const std::size_t k = o.sizes.size();
  r.trials.resize(k * o.trials);
  // Timed trials run one at a time so measurements do not compete for cores.
  for (std::size_t s = 0; s < k; ++s)
    for (std::size_t i = 0; i < o.trials; ++i) {
      auto t = run_trial(o, o.sizes[s], s * o.trials + i, Mode::Full);
      r.trials[s * o.trials + i] = std::move(t);
    }
  nlohmann::json medians = nlohmann::json::array(), ratios = nlohmann::json::array();
  std::vector<double> med(k);
  std::size_t action_violations = 0;
  for (std::size_t s = 0; s < k; ++s) {
    std::vector<double> ts;
    for (std::size_t i = 0; i < o.trials; ++i) {
      const auto& t = r.trials[s * o.trials + i];
      ts.push_back(t.time.reduce + t.time.unwind);
      action_violations += t.actions > 3 * t.n;
    }
    med[s] = detail::quantile(ts, 0.5);
    medians.push_back({{"n", o.sizes[s]}, {"seconds", med[s]}});
  }
  bool ratio_ok = true;
  for (std::size_t s = 0; s + 1 < k; ++s) {
    const double ratio = med[s] > 0 ? med[s + 1] / med[s] : 0.0;
    const double size_ratio = static_cast<double>(o.sizes[s + 1]) / static_cast<double>(o.sizes[s]);
    // allowance 6 per 4x growth, scaled to the actual size step
    const double limit = 1.5 * size_ratio;
    ratio_ok = ratio_ok && ratio <= limit;
    ratios.push_back({{"from", o.sizes[s]}, {"to", o.sizes[s + 1]}, {"ratio", ratio}, {"limit", limit}});
  }
  r.aggregates = {{"median_seconds", medians}, {"ratios", ratios}, {"action_violations", action_violations}};
  r.thresholds_met = action_violations == 0 && ratio_ok;
  return r;
}

/// Pools the per-trial histograms of a drift report.
inline TypeHistogram pooled_histogram(const ExperimentReport& r) {
  TypeHistogram pooled;
  for (const auto& t : r.trials)
    for (const auto& [type, row] : t.histogram) {
      auto& p = pooled[type];
      p.count += row.count;
      p.sum_d_ex4 += row.sum_d_ex4;
      p.sum_d_n += row.sum_d_n;
    }
  return pooled;
}

/// Pooled ex4 drift and hyperaction histogram over full-mode runs.
inline ExperimentReport exp_drift(const ExperimentOptions& o, std::size_t ex4_check_every = 1000) {
  validate(o);
  ExperimentReport r;
  r.experiment = "drift";
  r.parameters = {{"n", o.n}, {"trials", o.trials}, {"deg4_frac", o.deg4_frac}, {"seed", o.seed}, {"mode", "full"}};
  r.thresholds = {{"max_conditioned_mean", -0.2}, {"min_samples", 500}, {"good_over_two", 0}};
  r.trials.resize(o.trials);
  detail::parallel_for(o.trials, o.threads, [&](std::size_t i) {
    const Rng trial = Rng(o.seed).split(i);
    Rng sampling = trial.split(0), algo = trial.split(1);
    detail::Stopwatch clock;
    GraphInstance inst = sample_graph(o.n, o.deg4_frac, sampling);
    const double sample_time = clock.lap();
    const PipelineResult res = run_pipeline(inst.graph, inst.pairs, algo, Mode::Full);
    const Segmentation seg = analyze(res.trace, inst.graph, ex4_check_every);
    const DriftStats d = drift(res.trace, seg);
    TrialRecord t;
    t.index = i;
    t.seed = trial.seed();
    detail::fill_common(t, res, inst);
    t.time.sample = sample_time;
    t.drift_samples = d.conditioned_count;
    t.drift_sum = d.conditioned_sum;
    t.max_abs_good = d.max_abs_delta_good;
    t.good_over_two = d.good_over_two;
    for (const auto& rec : seg.records) t.flagged += rec.flagged();
    accumulate(t.histogram, seg);
    r.trials[i] = std::move(t);
  });
  std::size_t samples = 0, over = 0, flagged = 0;
  std::int64_t sum = 0, max_abs = 0;
  for (const auto& t : r.trials) {
    samples += t.drift_samples;
    sum += t.drift_sum;
    over += t.good_over_two;
    flagged += t.flagged;
    max_abs = std::max(max_abs, t.max_abs_good);
  }
  const double mean = samples ? static_cast<double>(sum) / static_cast<double>(samples) : 0.0;
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [type, row] : pooled_histogram(r))
    hist[to_string(type)] = {{"count", row.count},
                             {"mean_dex4", static_cast<double>(row.sum_d_ex4) / static_cast<double>(row.count)},
                             {"mean_dn", static_cast<double>(row.sum_d_n) / static_cast<double>(row.count)}};
  r.aggregates = {{"samples", samples},          {"conditioned_mean", mean}, {"max_abs_good", max_abs},
                  {"good_over_two", over},       {"flagged", flagged},       {"histogram", hist}};
  r.thresholds_met = over == 0 && (samples < 500 || mean <= -0.2);
  return r;
}

}  // namespace ks1
