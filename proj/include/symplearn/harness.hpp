#ifndef SYMPLEARN_HARNESS_HPP
#define SYMPLEARN_HARNESS_HPP

// Experiment driver: versioned JSON configs, deterministic parallel
// Monte-Carlo trials over learn_unitary, exact binomial success summaries,
// self-contained invariant suites, and flat-table emission for offline
// plotting.  Every per-trial random stream is a pure function of
// (master seed, trial index), so summaries are independent of the degree of
// parallelism and of scheduling order.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "symplearn/bounds.hpp"
#include "symplearn/errors.hpp"
#include "symplearn/measurement.hpp"
#include "symplearn/phase_space.hpp"
#include "symplearn/rng.hpp"
#include "symplearn/serialization.hpp"
#include "symplearn/symplectic.hpp"
#include "symplearn/tomography.hpp"

namespace symplearn {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

//! Where each trial's hidden (r*, S*) comes from: drawn per trial from a
//! dedicated instance stream (with the squeezing ceiling pinned to the
//! config's z), or loaded once from explicit files shared by all trials.
struct InstanceSpec {
  bool random = true;
  std::uint64_t seed = 0; //!< instance stream seed (random mode only)
  std::string r_file;     //!< displacement vector file (explicit mode)
  std::string s_file;     //!< symplectic matrix file (explicit mode)
};

//! One experiment: problem parameters, instance source, protocol variants,
//! trial count, seeding, output location, and oracle accounting mode.
struct ExperimentConfig {
  int schema_version = 1;
  int m = 1;
  double z = 1.0;
  double n_bar = 1.0;
  double n_bar_in = 1.0;
  double epsilon = 0.1;
  double delta = 0.1;
  InstanceSpec instance;
  SymplecticVariant sym_variant = SymplecticVariant::vacuum_shared;
  DisplacementVariant disp_variant = DisplacementVariant::tmsv;
  int trials = 1;
  std::uint64_t master_seed = 1;
  std::string out_dir;                     //!< empty: keep results in memory
  Accounting accounting = Accounting::paper;
  SamplerMode sampler = SamplerMode::per_shot;
  double symplectic_tol = kSymplecticTol;  //!< validation tolerance override
};

//! Emit the full config (all keys, canonical form).
inline Json config_to_json(const ExperimentConfig& c) {
  Json instance;
  if (c.instance.random) {
    instance = Json{{"kind", "random"}, {"seed", c.instance.seed}};
  } else {
    instance =
        Json{{"kind", "explicit"}, {"r_file", c.instance.r_file}, {"s_file", c.instance.s_file}};
  }
  return Json{{"schema_version", c.schema_version},
              {"m", c.m},
              {"z", c.z},
              {"n_bar", c.n_bar},
              {"n_bar_in", c.n_bar_in},
              {"epsilon", c.epsilon},
              {"delta", c.delta},
              {"instance", std::move(instance)},
              {"symplectic_variant", to_string(c.sym_variant)},
              {"displacement_variant", to_string(c.disp_variant)},
              {"trials", c.trials},
              {"master_seed", c.master_seed},
              {"out_dir", c.out_dir},
              {"accounting", to_string(c.accounting)},
              {"sampler", to_string(c.sampler)},
              {"symplectic_tol", c.symplectic_tol}};
}

//! Parse and validate a config document.  The schema is versioned and closed:
//! an unsupported version or any unknown key is rejected outright.
inline ExperimentConfig config_from_json(const Json& j) {
  const std::string who = "config_from_json";
  detail::check_keys(j,
                     {"schema_version", "m", "z", "n_bar", "n_bar_in", "epsilon", "delta",
                      "instance", "trials", "master_seed"},
                     {"symplectic_variant", "displacement_variant", "out_dir", "accounting",
                      "sampler", "symplectic_tol"},
                     who);
  ExperimentConfig c;
  c.schema_version = static_cast<int>(detail::get_integer(j, "schema_version", who));
  if (c.schema_version != 1)
    throw ConfigError(who + ": unsupported schema_version " + std::to_string(c.schema_version));
  c.m = static_cast<int>(detail::get_integer(j, "m", who));
  c.z = detail::get_number(j, "z", who);
  c.n_bar = detail::get_number(j, "n_bar", who);
  c.n_bar_in = detail::get_number(j, "n_bar_in", who);
  c.epsilon = detail::get_number(j, "epsilon", who);
  c.delta = detail::get_number(j, "delta", who);
  c.trials = static_cast<int>(detail::get_integer(j, "trials", who));
  c.master_seed = detail::get_u64(j, "master_seed", who);

  const Json& inst = j.at("instance");
  const std::string kind = detail::get_string(inst, "kind", who + ": instance");
  if (kind == "random") {
    detail::check_keys(inst, {"kind"}, {"seed"}, who + ": instance");
    c.instance.random = true;
    c.instance.seed = inst.contains("seed") ? detail::get_u64(inst, "seed", who + ": instance") : 0;
  } else if (kind == "explicit") {
    detail::check_keys(inst, {"kind", "r_file", "s_file"}, {}, who + ": instance");
    c.instance.random = false;
    c.instance.r_file = detail::get_string(inst, "r_file", who + ": instance");
    c.instance.s_file = detail::get_string(inst, "s_file", who + ": instance");
  } else {
    throw ConfigError(who + ": instance kind must be \"random\" or \"explicit\"");
  }

  if (j.contains("symplectic_variant"))
    c.sym_variant = parse_symplectic_variant(detail::get_string(j, "symplectic_variant", who));
  if (j.contains("displacement_variant"))
    c.disp_variant =
        parse_displacement_variant(detail::get_string(j, "displacement_variant", who));
  if (j.contains("out_dir")) c.out_dir = detail::get_string(j, "out_dir", who);
  if (j.contains("accounting"))
    c.accounting = parse_accounting(detail::get_string(j, "accounting", who));
  if (j.contains("sampler")) c.sampler = parse_sampler_mode(detail::get_string(j, "sampler", who));
  if (j.contains("symplectic_tol")) c.symplectic_tol = detail::get_number(j, "symplectic_tol", who);

  if (c.trials < 1) throw ConfigError(who + ": trials must be >= 1");
  if (c.m < 1) throw ConfigError(who + ": m must be >= 1");
  if (!(c.z >= 1.0)) throw ConfigError(who + ": z must be >= 1");
  if (!(c.n_bar > 0.0) || !(c.n_bar_in > 0.0))
    throw ConfigError(who + ": photon parameters must be positive");
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0))
    throw ConfigError(who + ": epsilon must lie in (0, 1)");
  if (!(c.delta > 0.0 && c.delta < 1.0)) throw ConfigError(who + ": delta must lie in (0, 1)");
  if (!(c.symplectic_tol > 0.0)) throw ConfigError(who + ": symplectic_tol must be positive");
  return c;
}

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

//! Hidden unitary for one trial of a random-instance experiment: the
//! symplectic part is drawn with squeezing ceiling z, the displacement has
//! independent centred entries.  A pure function of (seed, trial).
inline GaussianUnitary draw_random_instance(int m, double z, std::uint64_t instance_seed,
                                            std::uint64_t trial) {
  Xoshiro256pp rng = Xoshiro256pp::derive(instance_seed, Stream::instance, trial);
  SymplecticMatrix s = random_symplectic(m, z, rng);
  RealVector r(2 * m);
  for (int i = 0; i < r.size(); ++i) r(i) = 2.0 * rng.normal();
  return GaussianUnitary(std::move(r), std::move(s));
}

//! Load the shared hidden unitary of an explicit-instance experiment.  The
//! matrix must pass the symplectic check at the configured tolerance.
inline GaussianUnitary load_explicit_instance(const ExperimentConfig& config) {
  RealVector r =
      vector_from_json(load_json_file(config.instance.r_file), "load_explicit_instance: r");
  RealMatrix s =
      matrix_from_json(load_json_file(config.instance.s_file), "load_explicit_instance: S");
  if (r.size() != 2 * config.m || s.rows() != 2 * config.m || s.cols() != 2 * config.m)
    throw ConfigError("load_explicit_instance: instance dimensions do not match m");
  try {
    return GaussianUnitary(std::move(r), SymplecticMatrix(std::move(s), config.symplectic_tol));
  } catch (const StructureError& e) {
    throw ConfigError(std::string("load_explicit_instance: ") + e.what());
  }
}

//! Draw a random instance and persist it as an explicit-instance file pair
//! (flat JSON array for r, array of rows for S).  Returns the instance.
inline GaussianUnitary write_random_instance(int m, double z, std::uint64_t seed,
                                             const std::string& r_path,
                                             const std::string& s_path) {
  const GaussianUnitary g = draw_random_instance(m, z, seed, 0);
  save_json_file(r_path, vector_to_json(g.r()));
  save_json_file(s_path, matrix_to_json(g.s().matrix()));
  return g;
}

// ---------------------------------------------------------------------------
// Trial records
// ---------------------------------------------------------------------------

//! One persisted trial: the learner's report plus the estimates inline.  The
//! estimate fields stay empty for the stages an error prevented.
struct TrialRecord {
  TrialReport report;
  RealVector r_tilde; //!< displacement estimate (empty if that stage failed)
  RealMatrix s_tilde; //!< symplectic estimate (0x0 if that stage failed)
};

inline Json record_to_json(const TrialRecord& rec) {
  const TrialReport& r = rec.report;
  Json j{{"trial_index", r.trial_index},
         {"seed", r.seed},
         {"eps_S_true", number_to_json(r.eps_S_true)},
         {"eps_r_true", number_to_json(r.eps_r_true)},
         {"combined_bound", number_to_json(r.combined_bound)},
         {"symplectic_ok", r.symplectic_ok},
         {"displacement_ok", r.displacement_ok},
         {"bound_ok", r.bound_ok},
         {"failed", r.failed},
         {"failure_reason", r.failure_reason},
         {"failure_code", r.failure_code},
         {"queries_symplectic", r.queries_symplectic},
         {"queries_displacement", r.queries_displacement},
         {"queries_total", r.queries_total},
         {"wall_time_seconds", r.wall_time_seconds}};
  if (rec.s_tilde.size() > 0) j["s_tilde"] = matrix_to_json(rec.s_tilde);
  if (rec.r_tilde.size() > 0) j["r_tilde"] = vector_to_json(rec.r_tilde);
  return j;
}

inline TrialRecord record_from_json(const Json& j) {
  const std::string who = "record_from_json";
  detail::check_keys(j,
                     {"trial_index", "seed", "eps_S_true", "eps_r_true", "combined_bound",
                      "symplectic_ok", "displacement_ok", "bound_ok", "failed", "failure_reason",
                      "failure_code", "queries_symplectic", "queries_displacement",
                      "queries_total", "wall_time_seconds"},
                     {"s_tilde", "r_tilde"}, who);
  TrialRecord rec;
  TrialReport& r = rec.report;
  r.trial_index = static_cast<int>(detail::get_integer(j, "trial_index", who));
  r.seed = detail::get_u64(j, "seed", who);
  r.eps_S_true = number_from_json(j.at("eps_S_true"), who + ": eps_S_true");
  r.eps_r_true = number_from_json(j.at("eps_r_true"), who + ": eps_r_true");
  r.combined_bound = number_from_json(j.at("combined_bound"), who + ": combined_bound");
  r.symplectic_ok = j.at("symplectic_ok").get<bool>();
  r.displacement_ok = j.at("displacement_ok").get<bool>();
  r.bound_ok = j.at("bound_ok").get<bool>();
  r.failed = j.at("failed").get<bool>();
  r.failure_reason = detail::get_string(j, "failure_reason", who);
  r.failure_code = detail::get_string(j, "failure_code", who);
  r.queries_symplectic = detail::get_u64(j, "queries_symplectic", who);
  r.queries_displacement = detail::get_u64(j, "queries_displacement", who);
  r.queries_total = detail::get_u64(j, "queries_total", who);
  r.wall_time_seconds = detail::get_number(j, "wall_time_seconds", who);
  if (j.contains("s_tilde")) rec.s_tilde = matrix_from_json(j.at("s_tilde"), who + ": s_tilde");
  if (j.contains("r_tilde")) rec.r_tilde = vector_from_json(j.at("r_tilde"), who + ": r_tilde");
  return rec;
}

// ---------------------------------------------------------------------------
// Exact binomial confidence interval
// ---------------------------------------------------------------------------

namespace detail {

//! P(X <= k) for X ~ Binomial(n, p), by direct log-space summation.
inline double binomial_cdf(int n, int k, double p) {
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  if (p <= 0.0) return 1.0;
  if (p >= 1.0) return 0.0;
  double sum = 0.0;
  for (int i = 0; i <= k; ++i) {
    const double log_coeff =
        std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0);
    sum += std::exp(log_coeff + i * std::log(p) + (n - i) * std::log1p(-p));
  }
  return std::min(1.0, sum);
}

//! Exact (Clopper-Pearson) two-sided confidence interval for a binomial
//! proportion, by bisection on the exact CDF.
inline std::pair<double, double> clopper_pearson(int successes, int trials, double alpha) {
  if (trials < 1) throw InvalidArgument("clopper_pearson: trials must be >= 1");
  if (successes < 0 || successes > trials)
    throw InvalidArgument("clopper_pearson: successes out of range");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw InvalidArgument("clopper_pearson: alpha must lie in (0, 1)");
  const double half = 0.5 * alpha;
  // binomial_cdf(n, k, p) is strictly decreasing in p, so each endpoint is a
  // simple bisection root.
  const auto solve = [&](int k, double target) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (binomial_cdf(trials, k, mid) > target)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  };
  const double lower = successes == 0 ? 0.0 : solve(successes - 1, 1.0 - half);
  const double upper = successes == trials ? 1.0 : solve(successes, half);
  return {lower, upper};
}

//! Nearest-rank percentile of an unsorted sample (q in (0, 1]).
inline double percentile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::infinity();
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  const auto idx = static_cast<std::size_t>(std::max(0.0, std::ceil(q * n) - 1.0));
  return values[std::min(idx, values.size() - 1)];
}

//! Zero-padded per-trial report filename.
inline std::string trial_filename(int trial) {
  std::ostringstream name;
  name << "trial_" << std::setw(5) << std::setfill('0') << trial << ".json";
  return name.str();
}

//! FNV-1a 64-bit hash as a fixed-width hex string.
inline std::string hex_hash(const std::string& text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char ch : text) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001B3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

} // namespace detail

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

//! Aggregate statistics over one experiment's trials.  Certification means
//! combined_diamond_bound(true errors) <= epsilon; the raw per-stage
//! criteria are tallied alongside.  Error means/percentiles cover the trials
//! whose errors were measurable (i.e. that did not fail outright).
struct ExperimentSummary {
  QueryPlan plan;
  int trials = 0;
  int certified = 0;
  int symplectic_within = 0;
  int displacement_within = 0;
  int failures = 0;
  double success_rate = 0.0;
  double ci_low = 0.0;  //!< exact binomial 95% interval on the success rate
  double ci_high = 1.0;
  double mean_eps_S = std::numeric_limits<double>::infinity();
  double p50_eps_S = std::numeric_limits<double>::infinity();
  double p90_eps_S = std::numeric_limits<double>::infinity();
  double mean_eps_r = std::numeric_limits<double>::infinity();
  double p50_eps_r = std::numeric_limits<double>::infinity();
  double p90_eps_r = std::numeric_limits<double>::infinity();
  std::uint64_t total_queries = 0;
  std::map<std::string, int> failure_counts; //!< by failure code
};

//! Reduce trial records to the summary.  Pure and order-independent: the
//! result depends only on the multiset of records.
inline ExperimentSummary summarize(const std::vector<TrialRecord>& records,
                                   const QueryPlan& plan) {
  if (records.empty()) throw InvalidArgument("summarize: no trial records");
  ExperimentSummary s;
  s.plan = plan;
  s.trials = static_cast<int>(records.size());
  std::vector<double> eps_s;
  std::vector<double> eps_r;
  for (const TrialRecord& rec : records) {
    const TrialReport& r = rec.report;
    s.total_queries += r.queries_total;
    if (r.bound_ok) ++s.certified;
    if (r.symplectic_ok) ++s.symplectic_within;
    if (r.displacement_ok) ++s.displacement_within;
    if (r.failed) ++s.failures;
    if (!r.failure_code.empty()) ++s.failure_counts[r.failure_code];
    if (std::isfinite(r.eps_S_true)) eps_s.push_back(r.eps_S_true);
    if (std::isfinite(r.eps_r_true)) eps_r.push_back(r.eps_r_true);
  }
  s.success_rate = static_cast<double>(s.certified) / s.trials;
  const auto ci = detail::clopper_pearson(s.certified, s.trials, 0.05);
  s.ci_low = ci.first;
  s.ci_high = ci.second;
  if (!eps_s.empty()) {
    s.mean_eps_S = std::accumulate(eps_s.begin(), eps_s.end(), 0.0) / eps_s.size();
    s.p50_eps_S = detail::percentile(eps_s, 0.5);
    s.p90_eps_S = detail::percentile(eps_s, 0.9);
  }
  if (!eps_r.empty()) {
    s.mean_eps_r = std::accumulate(eps_r.begin(), eps_r.end(), 0.0) / eps_r.size();
    s.p50_eps_r = detail::percentile(eps_r, 0.5);
    s.p90_eps_r = detail::percentile(eps_r, 0.9);
  }
  return s;
}

inline Json summary_to_json(const ExperimentSummary& s) {
  Json counts = Json::object();
  for (const auto& [code, n] : s.failure_counts) counts[code] = n;
  return Json{{"trials", s.trials},
              {"certified", s.certified},
              {"symplectic_within", s.symplectic_within},
              {"displacement_within", s.displacement_within},
              {"failures", s.failures},
              {"success_rate", s.success_rate},
              {"ci_low", s.ci_low},
              {"ci_high", s.ci_high},
              {"mean_eps_S", number_to_json(s.mean_eps_S)},
              {"p50_eps_S", number_to_json(s.p50_eps_S)},
              {"p90_eps_S", number_to_json(s.p90_eps_S)},
              {"mean_eps_r", number_to_json(s.mean_eps_r)},
              {"p50_eps_r", number_to_json(s.p50_eps_r)},
              {"p90_eps_r", number_to_json(s.p90_eps_r)},
              {"total_queries", s.total_queries},
              {"failure_counts", std::move(counts)},
              {"plan", plan_to_json(s.plan)}};
}

// ---------------------------------------------------------------------------
// Experiment execution
// ---------------------------------------------------------------------------

//! Everything run_experiment produces: the summary plus all trial records in
//! trial order.
struct ExperimentResult {
  ExperimentSummary summary;
  std::vector<TrialRecord> records;
};

namespace detail {

inline TrialRecord run_single_trial(const ExperimentConfig& config, const QueryPlan& plan,
                                    const std::optional<GaussianUnitary>& shared_instance,
                                    int trial) {
  const GaussianUnitary truth =
      shared_instance ? *shared_instance
                      : draw_random_instance(config.m, config.z, config.instance.seed,
                                             static_cast<std::uint64_t>(trial));
  UnitaryOracle oracle(truth, config.n_bar_in, config.accounting);
  const std::uint64_t trial_seed =
      Xoshiro256pp::derive(config.master_seed, Stream::harness,
                           static_cast<std::uint64_t>(trial))
          .next_u64();
  const LearnResult run = learn_unitary(oracle, plan, trial_seed, config.sampler);

  TrialRecord rec;
  rec.report = run.report;
  rec.report.trial_index = trial;
  // The symplectic stage completed iff it consumed queries; the displacement
  // estimate exists iff nothing failed.
  if (run.symplectic.queries_used > 0) rec.s_tilde = run.symplectic.s_tilde.matrix();
  if (!run.report.failed) rec.r_tilde = run.displacement.r_tilde;
  return rec;
}

} // namespace detail

//! Run all trials of an experiment, optionally in parallel.  Each trial
//! draws/loads its instance, builds a fresh oracle, runs the full learner,
//! and (if the config names an output directory) persists its record
//! atomically.  The summary is identical for every thread count because each
//! trial is a pure function of (config, master_seed, trial index).
inline ExperimentResult run_experiment(const ExperimentConfig& config, int threads = 1) {
  if (config.trials < 1) throw ConfigError("run_experiment: trials must be >= 1");
  if (threads < 1) throw ConfigError("run_experiment: threads must be >= 1");
  const QueryPlan plan = plan_queries(config.m, config.z, config.n_bar, config.n_bar_in,
                                      config.epsilon, config.delta, config.sym_variant,
                                      config.disp_variant);
  std::optional<GaussianUnitary> shared_instance;
  if (!config.instance.random) shared_instance = load_explicit_instance(config);

  const bool persist = !config.out_dir.empty();
  if (persist) {
    std::filesystem::create_directories(config.out_dir);
    save_json_file((std::filesystem::path(config.out_dir) / "config.json").string(),
                   config_to_json(config));
  }

  std::vector<TrialRecord> records(static_cast<std::size_t>(config.trials));
  std::atomic<int> next{0};
  std::mutex error_guard;
  std::exception_ptr first_error;

  const auto worker = [&]() {
    for (;;) {
      const int trial = next.fetch_add(1);
      if (trial >= config.trials) return;
      try {
        TrialRecord rec = detail::run_single_trial(config, plan, shared_instance, trial);
        if (persist)
          save_json_file(
              (std::filesystem::path(config.out_dir) / detail::trial_filename(trial)).string(),
              record_to_json(rec));
        records[static_cast<std::size_t>(trial)] = std::move(rec);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_guard);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int pool_size = std::min(threads, config.trials);
  if (pool_size == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(pool_size));
    for (int t = 0; t < pool_size; ++t) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  ExperimentResult result;
  result.records = std::move(records);
  result.summary = summarize(result.records, plan);
  if (persist)
    save_json_file((std::filesystem::path(config.out_dir) / "summary.json").string(),
                   summary_to_json(result.summary));
  return result;
}

// ---------------------------------------------------------------------------
// Invariant suites
// ---------------------------------------------------------------------------

//! One measured margin inside a suite; passing means measured <= threshold.
struct SuiteCheck {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

//! Machine-readable outcome of one invariant suite.
struct SuiteReport {
  std::string suite;
  std::uint64_t seed = 0;
  bool passed = true;
  std::vector<SuiteCheck> checks;

  void add(const std::string& name, double measured, double threshold) {
    const bool ok = measured <= threshold;
    checks.push_back(SuiteCheck{name, measured, threshold, ok});
    passed = passed && ok;
  }
};

inline Json suite_report_to_json(const SuiteReport& report) {
  Json checks = Json::array();
  for (const SuiteCheck& c : report.checks)
    checks.push_back(Json{{"name", c.name},
                          {"measured", number_to_json(c.measured)},
                          {"threshold", c.threshold},
                          {"pass", c.pass}});
  return Json{{"suite", report.suite},
              {"seed", report.seed},
              {"passed", report.passed},
              {"checks", std::move(checks)}};
}

namespace detail {

//! Two-path agreement of the entangled protocol's output moments: the closed
//! composition against the chained state pipeline, plus the closed forms of
//! the output means and of the signal covariance block.
inline SuiteReport suite_moments(std::uint64_t seed) {
  SuiteReport report;
  report.suite = "moments";
  report.seed = seed;
  // nu is capped where the chained pipeline's roundoff (~ machine epsilon
  // times nu^2 z^4) stays safely below the 1e-10 agreement tolerance.
  const double nus[] = {1.0, 1.5, 4.0, 10.0};
  double dev_mean = 0.0, dev_cov = 0.0, dev_signal = 0.0, dev_ancilla = 0.0, dev_block = 0.0;
  for (int i = 0; i < 100; ++i) {
    Xoshiro256pp rng = Xoshiro256pp::derive(seed, Stream::analysis, static_cast<std::uint64_t>(i));
    const int m = 1 + (i % 3);
    const double nu = nus[(i / 3) % 4];
    const SymplecticMatrix s = random_symplectic(m, 2.0, rng);
    RealMatrix perturbed = s.matrix();
    for (int a = 0; a < perturbed.rows(); ++a)
      for (int b = 0; b < perturbed.cols(); ++b) perturbed(a, b) += 0.01 * rng.normal();
    const SymplecticMatrix s_tilde = regularize(perturbed);
    RealVector r(2 * m);
    for (int a = 0; a < r.size(); ++a) r(a) = 2.0 * rng.normal();

    const ProtocolMoments moments = tmsv_protocol_moments(r, s, s_tilde, nu);

    // Chained pipeline: pre-rotate the squeezed pairs, apply the hidden
    // unitary on the signal half, undo the squeezing.
    const GaussianState pairs = tmsv(nu, m);
    const GaussianUnitary pre = embed_on_first_modes(
        GaussianUnitary::from_symplectic(SymplecticMatrix(s_tilde.inverse())), 2 * m);
    const GaussianUnitary hidden = embed_on_first_modes(GaussianUnitary(r, s), 2 * m);
    const GaussianUnitary post =
        GaussianUnitary::from_symplectic(SymplecticMatrix(tmsv_symplectic_inverse(nu, m)));
    const GaussianState chained =
        apply_unitary(post, apply_unitary(hidden, apply_unitary(pre, pairs)));

    dev_mean = std::max(dev_mean,
                        (chained.mean() - moments.full_mean()).cwiseAbs().maxCoeff());
    dev_cov = std::max(dev_cov,
                       (chained.cov() - moments.full_covariance()).cwiseAbs().maxCoeff());

    // Closed forms of the output means.
    const RealMatrix zc = phase_conjugation(m);
    dev_signal = std::max(
        dev_signal, (moments.mean_signal - std::sqrt(nu) * r).cwiseAbs().maxCoeff());
    dev_ancilla = std::max(
        dev_ancilla,
        (moments.mean_ancilla + std::sqrt(nu - 1.0) * (zc * r)).cwiseAbs().maxCoeff());

    // Closed form of the signal covariance block.
    const RealMatrix delta = s.matrix() * s_tilde.inverse() - RealMatrix::Identity(2 * m, 2 * m);
    const RealMatrix a_formula = RealMatrix::Identity(2 * m, 2 * m) +
                                 nu * (delta + delta.transpose()) +
                                 nu * (2.0 * nu - 1.0) * delta * delta.transpose();
    dev_block = std::max(dev_block, (moments.A - a_formula).cwiseAbs().maxCoeff());
  }
  report.add("two-path mean agreement", dev_mean, 1e-10);
  report.add("two-path covariance agreement", dev_cov, 1e-10);
  report.add("signal mean closed form", dev_signal, 1e-10);
  report.add("ancilla mean closed form", dev_ancilla, 1e-10);
  report.add("signal covariance closed form", dev_block, 1e-10);
  return report;
}

//! Symplectic regularization: exact symplecticity of the output and the
//! 9 z^2 eps distance guarantee, across the full (m, z) grid.
inline SuiteReport suite_regularize(std::uint64_t seed) {
  SuiteReport report;
  report.suite = "regularize";
  report.seed = seed;
  const int ms[] = {1, 2, 4};
  const double zs[] = {1.0, 2.0, 4.0};
  double worst_residual = 0.0;
  double worst_ratio = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Xoshiro256pp rng = Xoshiro256pp::derive(seed, Stream::analysis, static_cast<std::uint64_t>(i));
    const int m = ms[i % 3];
    const double z = zs[(i / 3) % 3];
    const SymplecticMatrix s = random_symplectic(m, z, rng);
    RealMatrix direction(2 * m, 2 * m);
    for (int a = 0; a < direction.rows(); ++a)
      for (int b = 0; b < direction.cols(); ++b) direction(a, b) = rng.normal();
    direction /= operator_norm(direction);
    // Perturbation small enough that the square root stays in its domain:
    // (2z + 1) eps < 1/2 gives ||T - 1|| <= 2 z eps + eps^2 < 1/2.
    const double eps = rng.uniform(0.05, 1.0) * 0.5 / (2.0 * z + 1.0);
    const RealMatrix s_hat = s.matrix() + eps * direction;
    const SymplecticMatrix s_tilde = regularize(s_hat);
    worst_residual = std::max(worst_residual, symplectic_residual(s_tilde.matrix()));
    const double err = operator_norm(s_tilde.matrix() - s.matrix());
    worst_ratio = std::max(worst_ratio, err / (9.0 * z * z * eps));
  }
  report.add("output symplectic residual", worst_residual, 1e-10);
  report.add("distance over 9 z^2 eps", worst_ratio, 1.0);
  return report;
}

//! Passive realization: the interfere-and-homodyne pipeline's analytic
//! outcome law equals heterodyne after the symplectic unitary.
inline SuiteReport suite_passive(std::uint64_t seed) {
  SuiteReport report;
  report.suite = "passive";
  report.seed = seed;
  double dev_mean = 0.0, dev_cov = 0.0;
  for (int i = 0; i < 100; ++i) {
    Xoshiro256pp rng = Xoshiro256pp::derive(seed, Stream::analysis, static_cast<std::uint64_t>(i));
    const int m = 1 + (i % 3);
    const SymplecticMatrix s = random_symplectic(m, 2.0, rng);
    // Random physical state: a pure-state covariance plus thermal noise.
    const SymplecticMatrix sp = random_symplectic(m, 2.0, rng);
    RealMatrix cov = sp.matrix() * sp.matrix().transpose();
    for (int a = 0; a < 2 * m; ++a) cov(a, a) += rng.uniform(0.0, 1.0);
    RealVector mean(2 * m);
    for (int a = 0; a < mean.size(); ++a) mean(a) = rng.normal();
    const GaussianState state(mean, 0.5 * (cov + cov.transpose()));

    const GaussianState rotated = apply_unitary(GaussianUnitary::from_symplectic(s), state);
    const RealMatrix het_cov =
        0.5 * (rotated.cov() + RealMatrix::Identity(2 * m, 2 * m));
    const PipelineMoments passive = passive_pipeline_moments(state, s);
    dev_mean = std::max(dev_mean, (passive.mean - rotated.mean()).cwiseAbs().maxCoeff());
    dev_cov = std::max(dev_cov, (passive.cov - het_cov).cwiseAbs().maxCoeff());
  }
  report.add("outcome mean agreement", dev_mean, 1e-10);
  report.add("outcome covariance agreement", dev_cov, 1e-10);
  return report;
}

//! Concentration calibration: the sub-gaussian radius used by every shot
//! bound, chi = sqrt(2m) + sqrt(2 log(1/delta)), must cover the sample mean
//! of N standard-normal outcome vectors with empirical failure rate at most
//! delta (plus three binomial standard errors), and the per-entry variance
//! of the scaled estimator must calibrate to 1.
inline SuiteReport suite_concentration(std::uint64_t seed) {
  SuiteReport report;
  report.suite = "concentration";
  report.seed = seed;
  const double delta = 0.1;
  const int reps = 400;
  const std::int64_t shots = 16;
  int check_index = 0;
  for (const int m : {1, 4}) {
    const int dim = 2 * m;
    const RealVector mean = RealVector::Zero(dim);
    const RealMatrix cov = RealMatrix::Identity(dim, dim);
    const double radius =
        (std::sqrt(2.0 * m) + std::sqrt(2.0 * std::log(1.0 / delta))) /
        std::sqrt(static_cast<double>(shots));
    int violations = 0;
    double sum_sq = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      Xoshiro256pp rng = Xoshiro256pp::derive(
          seed, Stream::analysis, static_cast<std::uint64_t>(1000 * check_index + rep));
      const RealVector mu =
          gaussian_mean_estimate(mean, cov, shots, rng, SamplerMode::per_shot);
      if (mu.norm() > radius) ++violations;
      sum_sq += shots * mu.squaredNorm();
    }
    const double rate = static_cast<double>(violations) / reps;
    const double allowed = delta + 3.0 * std::sqrt(delta * (1.0 - delta) / reps);
    report.add("radius violation rate (m=" + std::to_string(m) + ")", rate, allowed);
    // sum of reps * dim independent squared standard normals, scaled back.
    const double pooled_var = sum_sq / (static_cast<double>(reps) * dim);
    const double var_tol = 5.0 * std::sqrt(2.0 / (static_cast<double>(reps) * dim));
    report.add("variance calibration (m=" + std::to_string(m) + ")",
               std::abs(pooled_var - 1.0), var_tol);
    ++check_index;
  }
  return report;
}

} // namespace detail

//! Run one of the named invariant suites ("moments", "regularize",
//! "passive", "concentration") and return its measured margins.
inline SuiteReport verify_suite(const std::string& suite_name, std::uint64_t seed) {
  if (suite_name == "moments") return detail::suite_moments(seed);
  if (suite_name == "regularize") return detail::suite_regularize(seed);
  if (suite_name == "passive") return detail::suite_passive(seed);
  if (suite_name == "concentration") return detail::suite_concentration(seed);
  throw InvalidArgument("verify_suite: unknown suite \"" + suite_name + "\"");
}

//! The suite names verify_suite accepts, in canonical order.
inline std::vector<std::string> verify_suite_names() {
  return {"moments", "regularize", "passive", "concentration"};
}

// ---------------------------------------------------------------------------
// Table emission
// ---------------------------------------------------------------------------

namespace detail {

inline std::string csv_bool(bool b) { return b ? "1" : "0"; }

inline std::string trials_table_csv(const std::vector<TrialRecord>& records) {
  std::ostringstream out;
  out << "trial_index,seed,failed,failure_code,eps_S_true,eps_r_true,combined_bound,"
         "symplectic_ok,displacement_ok,bound_ok,queries_symplectic,queries_displacement,"
         "queries_total,wall_time_seconds\n";
  for (const TrialRecord& rec : records) {
    const TrialReport& r = rec.report;
    out << r.trial_index << ',' << r.seed << ',' << csv_bool(r.failed) << ',' << r.failure_code
        << ',' << format_double(r.eps_S_true) << ',' << format_double(r.eps_r_true) << ','
        << format_double(r.combined_bound) << ',' << csv_bool(r.symplectic_ok) << ','
        << csv_bool(r.displacement_ok) << ',' << csv_bool(r.bound_ok) << ','
        << r.queries_symplectic << ',' << r.queries_displacement << ',' << r.queries_total << ','
        << format_double(r.wall_time_seconds) << '\n';
  }
  return out.str();
}

inline std::string summary_table_csv(const ExperimentSummary& s, const std::string& config_hash) {
  std::ostringstream out;
  out << "config_hash,trials,certified,symplectic_within,displacement_within,failures,"
         "success_rate,ci_low,ci_high,mean_eps_S,p50_eps_S,p90_eps_S,mean_eps_r,p50_eps_r,"
         "p90_eps_r,total_queries,N_S,N_r,N_tot\n";
  out << config_hash << ',' << s.trials << ',' << s.certified << ',' << s.symplectic_within << ','
      << s.displacement_within << ',' << s.failures << ',' << format_double(s.success_rate) << ','
      << format_double(s.ci_low) << ',' << format_double(s.ci_high) << ','
      << format_double(s.mean_eps_S) << ',' << format_double(s.p50_eps_S) << ','
      << format_double(s.p90_eps_S) << ',' << format_double(s.mean_eps_r) << ','
      << format_double(s.p50_eps_r) << ',' << format_double(s.p90_eps_r) << ','
      << s.total_queries << ',' << s.plan.N_S << ',' << s.plan.N_r << ',' << s.plan.N_tot << '\n';
  return out.str();
}

} // namespace detail

//! Aggregate a reports directory (config.json + trial_*.json, as written by
//! run_experiment) into flat tables: "csv" emits trials.csv and summary.csv,
//! "json" emits tables.json with a config echo.  Deterministic byte-for-byte
//! given the same inputs; returns the written file paths.
inline std::vector<std::string> emit_tables(const std::string& reports_dir,
                                            const std::string& format) {
  if (format != "csv" && format != "json")
    throw ConfigError("emit_tables: format must be \"csv\" or \"json\"");
  namespace fs = std::filesystem;
  const fs::path dir(reports_dir);
  const fs::path config_path = dir / "config.json";
  if (!fs::exists(config_path))
    throw ConfigError("emit_tables: missing config file " + config_path.string());
  const Json config_json = load_json_file(config_path.string());
  const ExperimentConfig config = config_from_json(config_json);
  // Hash the canonical re-emission, not the file bytes, so formatting
  // differences do not change the key.
  const std::string config_hash = detail::hex_hash(config_to_json(config).dump());

  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("trial_", 0) == 0 && entry.path().extension() == ".json")
      paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty())
    throw ConfigError("emit_tables: no trial reports in " + dir.string());

  std::vector<TrialRecord> records;
  records.reserve(paths.size());
  for (const fs::path& p : paths) {
    try {
      records.push_back(record_from_json(load_json_file(p.string())));
    } catch (const ConfigError& e) {
      throw ConfigError("emit_tables: corrupt report " + p.string() + ": " + e.what());
    }
  }

  const QueryPlan plan = plan_queries(config.m, config.z, config.n_bar, config.n_bar_in,
                                      config.epsilon, config.delta, config.sym_variant,
                                      config.disp_variant);
  const ExperimentSummary summary = summarize(records, plan);

  std::vector<std::string> written;
  if (format == "csv") {
    const std::string trials_path = (dir / "trials.csv").string();
    const std::string summary_path = (dir / "summary.csv").string();
    save_text_file(trials_path, detail::trials_table_csv(records));
    save_text_file(summary_path, detail::summary_table_csv(summary, config_hash));
    written.push_back(trials_path);
    written.push_back(summary_path);
  } else {
    Json trials = Json::array();
    for (const TrialRecord& rec : records) trials.push_back(record_to_json(rec));
    const Json doc{{"config_hash", config_hash},
                   {"config", config_to_json(config)},
                   {"summary", summary_to_json(summary)},
                   {"trials", std::move(trials)}};
    const std::string path = (dir / "tables.json").string();
    save_json_file(path, doc);
    written.push_back(path);
  }
  return written;
}

} // namespace symplearn

#endif // SYMPLEARN_HARNESS_HPP
