#include "modlik/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "modlik/errors.hpp"
#include "modlik/rng.hpp"
#include "modlik/stats.hpp"

namespace modlik {

namespace {

// Rethrows `error` with `prefix` prepended to its message, keeping its type.
[[noreturn]] void rethrow_annotated(const std::exception_ptr& error, const std::string& prefix) {
  try {
    std::rethrow_exception(error);
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(prefix + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(prefix + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(prefix + e.what());
  }
}

// Runs fn(i) for i in [0, count). Output slots are indexed, so completion
// order never leaks into results. The lowest failing index is rethrown.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, const std::string& label, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));

  std::vector<std::exception_ptr> errors(count);
  auto work = [&](std::atomic<std::size_t>& next) {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  std::atomic<std::size_t> next{0};
  if (threads <= 1) {
    work(next);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back([&] { work(next); });
  }

  for (std::size_t i = 0; i < count; ++i) {
    if (errors[i]) rethrow_annotated(errors[i], label + " " + std::to_string(i + 1) + ": ");
  }
}

}  // namespace

Aggregate aggregate(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("aggregate: empty input");
  Aggregate out;
  out.mean = stats::mean(values);
  if (values.size() >= 2) out.sample_std = stats::sample_std(values);
  return out;
}

std::uint64_t replicate_seed(std::uint64_t study_seed, std::size_t k) {
  return derive_seed(study_seed, k);
}

ReplicateReport run_study(const StudyConfig& config, const Execution& exec) {
  if (config.replicates == 0) throw InvalidArgument("replicates: must be >= 1");
  if (!(config.alpha_true > 0.0)) throw InvalidArgument("alpha_true: must be > 0");

  ReplicateReport report;
  report.config = config;
  report.seeds_used.resize(config.replicates);
  for (std::size_t k = 0; k < config.replicates; ++k) {
    report.seeds_used[k] = replicate_seed(config.study_seed, k + 1);
    if (report.seeds_used[k] == config.data_seed) {
      throw InvalidArgument("study_seed: replicate " + std::to_string(k + 1) +
                            " would reuse data_seed; choose another study_seed");
    }
  }

  const SignalModel signal = make_sinusoid_signal(config.signal);
  const NoiseSequence data_noise =
      gaussian_sequence(config.data_seed, signal.size(), config.standardize);
  const Spectrum spectrum = synthesize_spectrum(signal, config.alpha_true, data_noise);
  report.ls_baseline = ls_estimate(spectrum, signal, config.weights);

  report.replicate_alphas.resize(config.replicates);
  report.per_replicate_uncertainties.resize(config.replicates);
  SolveOptions options;
  options.variant = config.uncertainty;
  parallel_for(config.replicates, exec.threads, "replicate", [&](std::size_t k) {
    const NoiseSequence noise =
        gaussian_sequence(report.seeds_used[k], signal.size(), config.standardize);
    const Estimate est = solve_alpha(spectrum, signal, noise, options);
    report.replicate_alphas[k] = est.alpha;
    report.per_replicate_uncertainties[k] = est.delta_alpha;
  });

  const Aggregate agg = aggregate(report.replicate_alphas);
  report.mean = agg.mean;
  report.sample_std = agg.sample_std;
  return report;
}

MatchedRecovery matched_recovery_check(const SinusoidParams& params, double alpha_true,
                                       std::uint64_t seed, bool standardize) {
  if (!(alpha_true > 0.0)) throw InvalidArgument("alpha_true: must be > 0");
  const SignalModel signal = make_sinusoid_signal(params);
  const NoiseSequence noise = gaussian_sequence(seed, signal.size(), standardize);
  const Spectrum spectrum = synthesize_spectrum(signal, alpha_true, noise);
  const Estimate est = solve_alpha(spectrum, signal, noise);
  return {est.alpha, std::abs(est.alpha - alpha_true) / alpha_true};
}

Quantiles summarize(const std::vector<double>& values) {
  Quantiles q;
  q.min = stats::quantile(values, 0.0);
  q.q25 = stats::quantile(values, 0.25);
  q.median = stats::quantile(values, 0.5);
  q.q75 = stats::quantile(values, 0.75);
  q.max = stats::quantile(values, 1.0);
  return q;
}

StudyConfig trial_config(const StudyConfig& base, std::size_t trial) {
  StudyConfig cfg = base;
  cfg.data_seed = derive_seed(base.data_seed, trial);
  cfg.study_seed = derive_seed(base.study_seed, trial);
  return cfg;
}

ComparisonReport compare_estimators(const StudyConfig& config, std::size_t trials,
                                    const Execution& exec) {
  if (trials == 0) throw InvalidArgument("trials: must be >= 1");

  ComparisonReport out;
  out.config = config;
  out.rows.resize(trials);
  parallel_for(trials, exec.threads, "trial", [&](std::size_t t) {
    const StudyConfig cfg = trial_config(config, t);
    const ReplicateReport rep = run_study(cfg);
    ComparisonRow& row = out.rows[t];
    row.trial = t;
    row.data_seed = cfg.data_seed;
    row.study_seed = cfg.study_seed;
    row.ls_alpha = rep.ls_baseline.alpha;
    row.ls_delta_alpha = rep.ls_baseline.delta_alpha;
    row.ls_abs_error = std::abs(rep.ls_baseline.alpha - config.alpha_true);
    row.study_mean = rep.mean;
    row.study_sample_std = rep.sample_std;
    row.study_abs_error = std::abs(rep.mean - config.alpha_true);
  });

  std::vector<double> ls_err, study_err, ls_alpha, ls_delta;
  for (const auto& row : out.rows) {
    ls_err.push_back(row.ls_abs_error);
    study_err.push_back(row.study_abs_error);
    ls_alpha.push_back(row.ls_alpha);
    ls_delta.push_back(row.ls_delta_alpha);
  }
  out.ls_abs_error = summarize(ls_err);
  out.study_abs_error = summarize(study_err);
  if (out.study_abs_error.median > 0.0) {
    out.improvement_ratio = out.ls_abs_error.median / out.study_abs_error.median;
  }
  if (trials >= 2) out.ls_alpha_std = stats::sample_std(ls_alpha);
  out.ls_delta_alpha_mean = stats::mean(ls_delta);
  return out;
}

}  // namespace modlik
