#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "modlik/estimators.hpp"
#include "modlik/model.hpp"

namespace modlik {

// Replication protocol: one spectrum synthesized from data_seed, then K
// re-estimations of alpha, each with a fresh noise sequence drawn from
// derive_seed(study_seed, k), k = 1..K.
struct StudyConfig {
  SinusoidParams signal;
  double alpha_true = 1.0;
  std::uint64_t data_seed = 1;
  std::uint64_t study_seed = 2;
  std::size_t replicates = 10;
  bool standardize = false;
  WeightMode weights = WeightMode::measured();
  UncertaintyVariant uncertainty = UncertaintyVariant::standard;

  bool operator==(const StudyConfig&) const = default;
};

struct ReplicateReport {
  Estimate ls_baseline;
  std::vector<double> replicate_alphas;
  double mean = 0.0;
  std::optional<double> sample_std;  // absent when K == 1
  std::vector<double> per_replicate_uncertainties;
  std::vector<std::uint64_t> seeds_used;
  StudyConfig config;

  bool operator==(const ReplicateReport&) const = default;
};

// Worker threads for replicate or trial loops. 0 picks the hardware count.
// Results never depend on this value.
struct Execution {
  unsigned threads = 1;
};

struct Aggregate {
  double mean = 0.0;
  std::optional<double> sample_std;
};

Aggregate aggregate(std::span<const double> values);

// Seed of replicate k (1-based) for a study.
std::uint64_t replicate_seed(std::uint64_t study_seed, std::size_t k);

ReplicateReport run_study(const StudyConfig& config, const Execution& exec = {});

struct MatchedRecovery {
  double alpha_hat = 0.0;
  double rel_error = 0.0;
};

// Synthesizes with noise from `seed` and solves with that same noise.
MatchedRecovery matched_recovery_check(const SinusoidParams& params, double alpha_true,
                                       std::uint64_t seed, bool standardize = false);

struct ComparisonRow {
  std::size_t trial = 0;
  std::uint64_t data_seed = 0;
  std::uint64_t study_seed = 0;
  double ls_alpha = 0.0;
  double ls_delta_alpha = 0.0;
  double ls_abs_error = 0.0;
  double study_mean = 0.0;
  std::optional<double> study_sample_std;
  double study_abs_error = 0.0;

  bool operator==(const ComparisonRow&) const = default;
};

struct Quantiles {
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;

  bool operator==(const Quantiles&) const = default;
};

Quantiles summarize(const std::vector<double>& values);

struct ComparisonReport {
  StudyConfig config;
  std::vector<ComparisonRow> rows;
  Quantiles ls_abs_error;
  Quantiles study_abs_error;
  // Median LS error over median study-mean error. Measured, not asserted;
  // absent when the study median error is zero.
  std::optional<double> improvement_ratio;
  // Spread of the LS estimates across trials next to their mean reported delta.
  std::optional<double> ls_alpha_std;
  double ls_delta_alpha_mean = 0.0;

  bool operator==(const ComparisonReport&) const = default;
};

// Configuration of trial t (0-based): data and study seeds are derived from
// the base config's seeds so trials use independent spectra.
StudyConfig trial_config(const StudyConfig& base, std::size_t trial);

ComparisonReport compare_estimators(const StudyConfig& config, std::size_t trials,
                                    const Execution& exec = {});

}  // namespace modlik
