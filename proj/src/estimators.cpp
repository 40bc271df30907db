#include "modlik/estimators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "modlik/errors.hpp"

namespace modlik {

namespace {

constexpr double kModelRelTol = 1e-10;
constexpr int kModelMaxIterations = 100;
constexpr double kBracketFactor = 100.0;

void require_same_size(const Spectrum& spectrum, const SignalModel& signal, const char* what) {
  if (spectrum.size() != signal.size()) {
    throw InvalidArgument(std::string(what) + ": spectrum has " + std::to_string(spectrum.size()) +
                          " channels, signal has " + std::to_string(signal.size()));
  }
}

void require_same_size(const Spectrum& spectrum, const SignalModel& signal,
                       const NoiseSequence& noise, const char* what) {
  require_same_size(spectrum, signal, what);
  if (noise.size() != signal.size()) {
    throw InvalidArgument(std::string(what) + ": noise has " + std::to_string(noise.size()) +
                          " values, signal has " + std::to_string(signal.size()));
  }
}

void require_positive_alpha(double alpha, const char* what) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidArgument(std::string(what) + ": alpha must be finite and > 0");
  }
}

struct WeightedFit {
  double alpha;
  double delta;
};

WeightedFit weighted_fit(const Spectrum& spectrum, const SignalModel& signal,
                         const std::vector<double>& variances) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < signal.size(); ++i) {
    num += spectrum[i] * signal[i] / variances[i];
    den += signal[i] * signal[i] / variances[i];
  }
  if (!(den > 0.0) || !std::isfinite(den)) {
    throw NumericalError("ls_estimate: sum F^2/sigma^2 is zero or not finite");
  }
  return {num / den, 1.0 / std::sqrt(den)};
}

// The five channel sums the reduced score depends on.
struct ReducedSums {
  double f = 0.0;         // sum F
  double m = 0.0;         // sum m
  double sqrt_f_bg = 0.0; // sum sqrt(F) bg
  double m_bg = 0.0;      // sum m bg / sqrt(F)
  double bg2 = 0.0;       // sum bg^2

  ReducedSums(const Spectrum& spectrum, const SignalModel& signal, const NoiseSequence& noise) {
    for (std::size_t i = 0; i < signal.size(); ++i) {
      const double root_f = std::sqrt(signal[i]);
      f += signal[i];
      m += spectrum[i];
      sqrt_f_bg += root_f * noise[i];
      m_bg += spectrum[i] * noise[i] / root_f;
      bg2 += noise[i] * noise[i];
    }
  }

  // u * score(u^2)
  double cubic(double u) const {
    return ((-f * u - 0.5 * sqrt_f_bg) * u + (m + 0.5 * bg2)) * u - 0.5 * m_bg;
  }

  // Real roots of d(cubic)/du = -3 f u^2 - sqrt_f_bg u + (m + bg2/2).
  std::vector<double> stationary_points() const {
    const double a = 3.0 * f;
    const double b = sqrt_f_bg;
    const double c = -(m + 0.5 * bg2);
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return {};
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    std::vector<double> out;
    out.push_back(q / a);
    if (q != 0.0) out.push_back(c / q);
    return out;
  }
};

bool opposite_signs(double a, double b) { return (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0); }

// Bisection on a bracket with a strict sign change, finished with one
// regula-falsi step inside the last bracket.
double bisect(const ReducedSums& sums, double lo, double hi, double rel_tol) {
  double g_lo = sums.cubic(lo);
  double g_hi = sums.cubic(hi);
  for (int iter = 0; iter < 2000; ++iter) {
    // Width on u of rel_tol/4 keeps alpha = u^2 within rel_tol/2.
    if (hi - lo <= 0.25 * rel_tol * lo) break;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double g_mid = sums.cubic(mid);
    if (g_mid == 0.0) return mid;
    if (opposite_signs(g_lo, g_mid)) {
      hi = mid;
      g_hi = g_mid;
    } else {
      lo = mid;
      g_lo = g_mid;
    }
  }
  const double step = g_lo * (hi - lo) / (g_lo - g_hi);
  return std::clamp(lo + step, lo, hi);
}

}  // namespace

std::vector<double> channel_variances(const WeightMode& weights, const Spectrum& spectrum,
                                      const SignalModel& signal, double alpha) {
  require_same_size(spectrum, signal, "channel_variances");
  std::vector<double> out(signal.size());
  switch (weights.kind) {
    case WeightMode::Kind::measured:
      if (!(weights.floor > 0.0)) throw InvalidArgument("weights: floor must be > 0");
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(spectrum[i], weights.floor);
      break;
    case WeightMode::Kind::model:
      require_positive_alpha(alpha, "model weights");
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha * signal[i];
      break;
    case WeightMode::Kind::unit:
      std::fill(out.begin(), out.end(), 1.0);
      break;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] > 0.0) || !std::isfinite(out[i])) {
      throw NumericalError("variance at channel " + std::to_string(i) + " is not positive");
    }
  }
  return out;
}

Estimate ls_estimate(const Spectrum& spectrum, const SignalModel& signal,
                     const WeightMode& weights) {
  require_same_size(spectrum, signal, "ls_estimate");

  if (weights.kind != WeightMode::Kind::model) {
    const auto fit = weighted_fit(spectrum, signal, channel_variances(weights, spectrum, signal, 1.0));
    Estimate est;
    est.alpha = fit.alpha;
    est.delta_alpha = fit.delta;
    est.method = Method::ls;
    return est;
  }

  // Model weights depend on alpha; start from measured weights and iterate.
  auto fit = weighted_fit(spectrum, signal,
                          channel_variances(WeightMode::measured(weights.floor), spectrum, signal, 1.0));
  for (int iter = 1; iter <= kModelMaxIterations; ++iter) {
    if (!(fit.alpha > 0.0)) {
      throw NumericalError("ls_estimate: model-weight iteration reached alpha <= 0");
    }
    const auto next =
        weighted_fit(spectrum, signal, channel_variances(WeightMode::model(), spectrum, signal, fit.alpha));
    const bool converged = std::abs(next.alpha - fit.alpha) <= kModelRelTol * std::abs(next.alpha);
    fit = next;
    if (converged) {
      if (!(fit.alpha > 0.0)) {
        throw NumericalError("ls_estimate: model-weight iteration reached alpha <= 0");
      }
      Estimate est;
      est.alpha = fit.alpha;
      est.delta_alpha = fit.delta;
      est.method = Method::ls;
      est.iterations = iter;
      return est;
    }
  }
  throw NumericalError("ls_estimate: model-weight iteration did not converge in 100 steps");
}

double loglik_modified(double alpha, const Spectrum& spectrum, const SignalModel& signal,
                       const NoiseSequence& noise, const WeightMode& weights) {
  require_same_size(spectrum, signal, noise, "loglik_modified");
  require_positive_alpha(alpha, "loglik_modified");
  const auto s2 = channel_variances(weights, spectrum, signal, alpha);

  const double log_root_two_pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double misfit = 0.0;
  double norm = 0.0;
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const double expected = alpha * signal[i];
    const double r = spectrum[i] - expected - noise[i] * std::sqrt(expected);
    misfit += r * r / s2[i];
    norm -= log_root_two_pi + 0.5 * std::log(s2[i]);
  }
  return -misfit + norm;
}

double score_general(double alpha, const Spectrum& spectrum, const SignalModel& signal,
                     const NoiseSequence& noise, const WeightMode& weights) {
  require_same_size(spectrum, signal, noise, "score_general");
  require_positive_alpha(alpha, "score_general");
  const auto s2 = channel_variances(weights, spectrum, signal, alpha);

  double mf = 0.0, ff = 0.0, f32bg = 0.0, mrfbg = 0.0, fbg2 = 0.0;
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const double f = signal[i];
    const double m = spectrum[i];
    const double bg = noise[i];
    const double root_f = std::sqrt(f);
    mf += m * f / s2[i];
    ff += f * f / s2[i];
    f32bg += f * root_f * bg / s2[i];
    mrfbg += m * root_f * bg / s2[i];
    fbg2 += f * bg * bg / s2[i];
  }
  const double root_alpha = std::sqrt(alpha);
  return mf - alpha * ff - 0.5 * root_alpha * f32bg - mrfbg / (2.0 * root_alpha) + 0.5 * fbg2;
}

double score_reduced(double alpha, const Spectrum& spectrum, const SignalModel& signal,
                     const NoiseSequence& noise) {
  require_same_size(spectrum, signal, noise, "score_reduced");
  require_positive_alpha(alpha, "score_reduced");
  const ReducedSums sums(spectrum, signal, noise);
  const double root_alpha = std::sqrt(alpha);
  return sums.m - alpha * sums.f - 0.5 * root_alpha * sums.sqrt_f_bg -
         sums.m_bg / (2.0 * root_alpha) + 0.5 * sums.bg2;
}

Estimate solve_alpha(const Spectrum& spectrum, const SignalModel& signal,
                     const NoiseSequence& noise, const SolveOptions& options) {
  require_same_size(spectrum, signal, noise, "solve_alpha");
  if (!(options.rel_tol > 0.0)) throw InvalidArgument("solve_alpha: rel_tol must be > 0");

  double seed = 0.0;
  if (options.init) {
    require_positive_alpha(*options.init, "solve_alpha init");
    seed = *options.init;
  } else {
    seed = ls_estimate(spectrum, signal, WeightMode::measured()).alpha;
    if (!(seed > 0.0)) {
      std::ostringstream msg;
      msg << "solve_alpha: least-squares seed is not positive (" << seed << ")";
      throw NumericalError(msg.str());
    }
  }

  const ReducedSums sums(spectrum, signal, noise);
  const double u_lo = std::sqrt(seed / kBracketFactor);
  const double u_hi = std::sqrt(seed * kBracketFactor);

  std::vector<double> knots{u_lo};
  for (double p : sums.stationary_points()) {
    if (p > u_lo && p < u_hi) knots.push_back(p);
  }
  knots.push_back(u_hi);
  std::sort(knots.begin(), knots.end());

  std::vector<double> roots;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double a = knots[k];
    const double b = knots[k + 1];
    const double ga = sums.cubic(a);
    const double gb = sums.cubic(b);
    if (ga == 0.0) {
      roots.push_back(a);
    } else if (opposite_signs(ga, gb)) {
      roots.push_back(bisect(sums, a, b, options.rel_tol));
    }
  }
  if (sums.cubic(u_hi) == 0.0) roots.push_back(u_hi);
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());

  if (roots.empty()) {
    std::ostringstream msg;
    msg << "solve_alpha: no positive root of the reduced score for alpha in [" << u_lo * u_lo
        << ", " << u_hi * u_hi << "]";
    throw NumericalError(msg.str());
  }

  double best = roots.front() * roots.front();
  for (double u : roots) {
    if (std::abs(u * u - seed) < std::abs(best - seed)) best = u * u;
  }

  Estimate est;
  est.alpha = best;
  est.method = Method::modlik;
  est.variant = options.variant;
  est.seed_alpha = seed;
  est.positive_roots = static_cast<int>(roots.size());
  est.score_residual = std::abs(score_reduced(best, spectrum, signal, noise));
  est.delta_alpha =
      alpha_uncertainty(best, spectrum, signal, noise, WeightMode::model(), options.variant);
  return est;
}

double alpha_uncertainty(double alpha, const Spectrum& spectrum, const SignalModel& signal,
                         const NoiseSequence& noise, const WeightMode& weights,
                         UncertaintyVariant variant) {
  require_same_size(spectrum, signal, noise, "alpha_uncertainty");
  require_positive_alpha(alpha, "alpha_uncertainty");
  const auto s2 = channel_variances(weights, spectrum, signal, alpha);

  const double root_alpha = std::sqrt(alpha);
  double sum_sq = 0.0;    // sum (c dm)^2 + sum d^2
  double sum_c_dm = 0.0;  // sum c dm
  double sum_d = 0.0;     // sum d
  double den = 0.0;
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const double f = signal[i];
    const double m = spectrum[i];
    const double bg = noise[i];
    const double root_f = std::sqrt(f);
    // Sensitivities of the score to m_i and bg_i, and its slope in alpha.
    const double c = (f - root_f * bg / (2.0 * root_alpha)) / s2[i];
    const double d = (root_alpha * f * root_f / 2.0 + m * root_f / (2.0 * root_alpha) - f * bg) / s2[i];
    den += (f * f + f * root_f * bg / (4.0 * root_alpha) -
            bg * m * root_f / (4.0 * alpha * root_alpha)) / s2[i];

    const double dm = std::sqrt(alpha * f);
    sum_sq += (c * dm) * (c * dm) + d * d;
    sum_c_dm += c * dm;
    sum_d += d;
  }
  if (den == 0.0 || !std::isfinite(den)) {
    throw NumericalError("alpha_uncertainty: zero or non-finite denominator");
  }
  const double num =
      variant == UncertaintyVariant::standard ? sum_sq : sum_c_dm * sum_c_dm + sum_d * sum_d;
  return std::sqrt(num) / std::abs(den);
}

ResidualReport residual_diagnostics(const Spectrum& spectrum, const SignalModel& signal,
                                    double alpha) {
  require_same_size(spectrum, signal, "residual_diagnostics");
  require_positive_alpha(alpha, "residual_diagnostics");

  ResidualReport report;
  const std::size_t n = signal.size();
  report.residuals.resize(n);
  report.normalized.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double expected = alpha * signal[i];
    const double eps = spectrum[i] - expected;
    report.residuals[i] = eps;
    report.normalized[i] = eps / std::sqrt(expected);
    if (eps > 0.0) ++report.positive_count;
    if (eps < 0.0) ++report.negative_count;
  }

  double sum = 0.0;
  for (double z : report.normalized) sum += z;
  report.normalized_mean = sum / static_cast<double>(n);
  if (n >= 2) {
    double ss = 0.0;
    for (double z : report.normalized) ss += (z - report.normalized_mean) * (z - report.normalized_mean);
    report.normalized_std = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return report;
}

std::pair<std::size_t, std::size_t> sign_balance_band(std::size_t nonzero, double z) {
  const double half = 0.5 * static_cast<double>(nonzero);
  const double spread = 0.5 * z * std::sqrt(static_cast<double>(nonzero));
  const double lo = std::max(0.0, std::floor(half - spread));
  const double hi = std::min(static_cast<double>(nonzero), std::ceil(half + spread));
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

ResidualChecks assess_residuals(const ResidualReport& report) {
  ResidualChecks checks;
  const std::size_t nonzero = report.positive_count + report.negative_count;
  const auto [lo, hi] = sign_balance_band(nonzero);
  checks.sign_band_low = lo;
  checks.sign_band_high = hi;
  checks.exact_fit = nonzero == 0;
  checks.sign_balance_ok = report.positive_count >= lo && report.positive_count <= hi;

  const auto n = static_cast<double>(report.residuals.size());
  checks.mean_bound = kResidualBandZ / std::sqrt(n);
  checks.mean_ok = std::abs(report.normalized_mean) <= checks.mean_bound;
  checks.std_ok = checks.exact_fit || (report.normalized_std >= kNormalizedStdLow &&
                                       report.normalized_std <= kNormalizedStdHigh);
  return checks;
}

}  // namespace modlik
