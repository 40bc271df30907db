#include "modlik/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>

#include "modlik/errors.hpp"
#include "modlik/estimators.hpp"
#include "modlik/io.hpp"
#include "modlik/model.hpp"
#include "modlik/report.hpp"
#include "modlik/study.hpp"

namespace modlik::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::size_t kScoreCurvePoints = 400;

void emit(const json& doc, const std::string& output, std::ostream& out) {
  const std::string text = serialize_document(doc);
  if (output.empty()) {
    out << text;
    return;
  }
  std::ofstream file(output, std::ios::binary);
  if (!file) throw IoError("cannot open '" + output + "' for writing");
  file << text;
  if (!file.flush()) throw IoError("failed writing '" + output + "'");
}

void add_signal_options(CLI::App& cmd, SinusoidParams& p) {
  cmd.add_option("--amplitude", p.amplitude, "Sinusoid amplitude a")->capture_default_str();
  cmd.add_option("--offset", p.offset, "Sinusoid offset b")->capture_default_str();
  cmd.add_option("--scale", p.scale, "Channels per radian s")->capture_default_str();
  cmd.add_option("--channels", p.channels, "Channel count n")->capture_default_str();
}

struct WeightOptions {
  std::string kind = "measured";
  double floor = 1.0;

  WeightMode mode() const {
    if (!(floor > 0.0)) throw InvalidArgument("--floor: must be > 0");
    return {weight_kind_from_string(kind), floor};
  }
};

void add_weight_options(CLI::App& cmd, WeightOptions& w) {
  cmd.add_option("--weights", w.kind, "Variance model for least squares")
      ->check(CLI::IsMember({"measured", "model", "unit"}))
      ->capture_default_str();
  cmd.add_option("--floor", w.floor, "Variance floor for measured weights")->capture_default_str();
}

void require_positive(double value, const char* flag) {
  if (!(value > 0.0)) throw InvalidArgument(std::string(flag) + ": must be > 0");
}

// simulate --------------------------------------------------------------------

struct SimulateOptions {
  SinusoidParams signal;
  double alpha = 1.0;
  std::uint64_t seed = 1;
  bool standardize = false;
  std::string spectrum_out;
  std::string noise_out;
};

int cmd_simulate(const SimulateOptions& opt, std::ostream& out) {
  require_positive(opt.alpha, "--alpha");
  const SignalModel signal = make_sinusoid_signal(opt.signal);
  const NoiseSequence noise = gaussian_sequence(opt.seed, signal.size(), opt.standardize);
  const Spectrum spectrum = synthesize_spectrum(signal, opt.alpha, noise);

  io::write_spectrum_file(opt.spectrum_out, signal, spectrum,
                          {{"alpha", io::format_double(opt.alpha)},
                           {"seed", std::to_string(opt.seed)},
                           {"standardized", opt.standardize ? "true" : "false"}});
  io::write_noise_file(opt.noise_out, noise);

  json config{{"signal", opt.signal},
              {"alpha", opt.alpha},
              {"seed", opt.seed},
              {"standardize", opt.standardize},
              {"spectrum_out", opt.spectrum_out},
              {"noise_out", opt.noise_out}};
  json result{{"channels", signal.size()}};
  out << serialize_document(make_document("simulate", std::move(config), std::move(result)));
  return kSuccess;
}

// fit -------------------------------------------------------------------------

struct FitOptions {
  std::string spectrum;
  std::string method = "modlik";
  std::string noise_file;
  std::optional<std::uint64_t> noise_seed;
  bool standardize = false;
  WeightOptions weights;
  std::string uncertainty = "standard";
  std::optional<double> init;
  double rel_tol = 1e-12;
  std::string output;
};

int cmd_fit(const FitOptions& opt, std::ostream& out) {
  const Method method = method_from_string(opt.method);
  const WeightMode weights = opt.weights.mode();
  const UncertaintyVariant variant = variant_from_string(opt.uncertainty);
  require_positive(opt.rel_tol, "--rel-tol");
  if (opt.init) require_positive(*opt.init, "--init");

  const io::SpectrumFile input = io::read_spectrum_file(opt.spectrum);

  json config{{"spectrum", opt.spectrum},
              {"method", opt.method},
              {"weights", weights},
              {"uncertainty", opt.uncertainty},
              {"rel_tol", opt.rel_tol}};
  if (opt.init) config["init"] = *opt.init;

  json result;
  const Estimate ls = ls_estimate(input.spectrum, input.signal, weights);
  result["ls_baseline"] = ls;

  if (method == Method::modlik) {
    std::optional<NoiseSequence> noise;
    if (!opt.noise_file.empty()) {
      noise = io::read_noise_file(opt.noise_file);
      config["noise_file"] = opt.noise_file;
      if (noise->size() != input.signal.size()) {
        throw FormatError(opt.noise_file + ": has " + std::to_string(noise->size()) +
                          " channels, spectrum has " + std::to_string(input.signal.size()));
      }
    } else if (opt.noise_seed) {
      noise = gaussian_sequence(*opt.noise_seed, input.signal.size(), opt.standardize);
      config["noise_seed"] = *opt.noise_seed;
      config["standardize"] = opt.standardize;
    } else {
      throw InvalidArgument("--noise-file or --noise-seed is required for --method modlik");
    }
    SolveOptions solve;
    solve.init = opt.init;
    solve.rel_tol = opt.rel_tol;
    solve.variant = variant;
    result["estimate"] = solve_alpha(input.spectrum, input.signal, *noise, solve);
  } else {
    result["estimate"] = ls;
  }

  emit(make_document("fit", std::move(config), std::move(result)), opt.output, out);
  return kSuccess;
}

// study / compare -------------------------------------------------------------

struct StudyOptions {
  StudyConfig config;
  WeightOptions weights;
  std::string uncertainty = "standard";
  unsigned threads = 1;
  std::size_t trials = 100;
  std::string table;
  std::string plot_dir;
  std::string output;

  StudyConfig resolved() const {
    StudyConfig c = config;
    require_positive(c.alpha_true, "--alpha-true");
    if (c.replicates == 0) throw InvalidArgument("--replicates: must be >= 1");
    c.weights = weights.mode();
    c.uncertainty = variant_from_string(uncertainty);
    return c;
  }
};

void add_study_options(CLI::App& cmd, StudyOptions& opt) {
  add_signal_options(cmd, opt.config.signal);
  cmd.add_option("--alpha-true", opt.config.alpha_true, "Amplitude used to synthesize the spectrum")
      ->capture_default_str();
  cmd.add_option("--data-seed,--seed", opt.config.data_seed, "Seed of the spectrum's noise")
      ->capture_default_str();
  cmd.add_option("--study-seed", opt.config.study_seed, "Base seed of the replicate noise")
      ->capture_default_str();
  cmd.add_option("--replicates", opt.config.replicates, "Replicate count K")->capture_default_str();
  cmd.add_flag("--standardize", opt.config.standardize,
               "Rescale every noise draw to sample mean 0 and std 1");
  add_weight_options(cmd, opt.weights);
  cmd.add_option("--uncertainty", opt.uncertainty, "Error propagation variant")
      ->check(CLI::IsMember({"standard", "paper-literal"}))
      ->capture_default_str();
  cmd.add_option("--threads", opt.threads, "Worker threads (0 = all cores)")->capture_default_str();
  cmd.add_option("--output", opt.output, "Write the report here instead of stdout");
}

io::Table replicate_table(const ReplicateReport& report) {
  io::Table t;
  t.metadata["alpha_true"] = io::format_double(report.config.alpha_true);
  t.header = {"replicate", "alpha", "delta_alpha", "ls_alpha", "alpha_true"};
  for (std::size_t k = 0; k < report.replicate_alphas.size(); ++k) {
    t.rows.push_back({static_cast<double>(k + 1), report.replicate_alphas[k],
                      report.per_replicate_uncertainties[k], report.ls_baseline.alpha,
                      report.config.alpha_true});
  }
  return t;
}

// Tables behind the signal/spectrum, noise, score-curve and replicate plots.
void write_plot_data(const fs::path& dir, const ReplicateReport& report) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());

  const StudyConfig& cfg = report.config;
  const SignalModel signal = make_sinusoid_signal(cfg.signal);
  const NoiseSequence data_noise = gaussian_sequence(cfg.data_seed, signal.size(), cfg.standardize);
  const NoiseSequence rep_noise =
      gaussian_sequence(report.seeds_used.front(), signal.size(), cfg.standardize);
  const Spectrum spectrum = synthesize_spectrum(signal, cfg.alpha_true, data_noise);

  io::write_table(dir / "signal_spectrum.csv", io::spectrum_table(signal, spectrum));

  io::Table noise;
  noise.metadata["data_seed"] = std::to_string(cfg.data_seed);
  noise.metadata["replicate_1_seed"] = std::to_string(report.seeds_used.front());
  noise.header = {"channel", "bg_data", "bg_replicate_1"};
  for (std::size_t i = 0; i < signal.size(); ++i) {
    noise.rows.push_back({static_cast<double>(i), data_noise[i], rep_noise[i]});
  }
  io::write_table(dir / "noise_sequences.csv", noise);

  const double root_matched = solve_alpha(spectrum, signal, data_noise).alpha;
  const double root_rep = report.replicate_alphas.front();
  const double lo = 0.8 * std::min(root_matched, root_rep);
  const double hi = 1.2 * std::max(root_matched, root_rep);
  io::Table curve;
  curve.metadata["root_matched"] = io::format_double(root_matched);
  curve.metadata["root_replicate_1"] = io::format_double(root_rep);
  curve.metadata["alpha_true"] = io::format_double(cfg.alpha_true);
  curve.header = {"alpha", "score_matched", "score_replicate_1"};
  for (std::size_t k = 0; k < kScoreCurvePoints; ++k) {
    const double a = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(kScoreCurvePoints - 1);
    curve.rows.push_back({a, score_reduced(a, spectrum, signal, data_noise),
                          score_reduced(a, spectrum, signal, rep_noise)});
  }
  io::write_table(dir / "score_curve.csv", curve);

  io::write_table(dir / "replicates.csv", replicate_table(report));
}

int cmd_study(const StudyOptions& opt, std::ostream& out) {
  const StudyConfig cfg = opt.resolved();
  const ReplicateReport report = run_study(cfg, Execution{opt.threads});
  if (!opt.table.empty()) io::write_table(opt.table, replicate_table(report));
  if (!opt.plot_dir.empty()) write_plot_data(opt.plot_dir, report);
  emit(make_document("study", json(cfg), json(report)), opt.output, out);
  return kSuccess;
}

int cmd_compare(const StudyOptions& opt, std::ostream& out) {
  const StudyConfig cfg = opt.resolved();
  if (opt.trials == 0) throw InvalidArgument("--trials: must be >= 1");
  const ComparisonReport report = compare_estimators(cfg, opt.trials, Execution{opt.threads});
  if (!opt.table.empty()) {
    io::Table t;
    t.header = {"trial", "ls_alpha", "ls_delta_alpha", "ls_abs_error", "study_mean", "study_abs_error"};
    for (const auto& r : report.rows) {
      t.rows.push_back({static_cast<double>(r.trial), r.ls_alpha, r.ls_delta_alpha, r.ls_abs_error,
                        r.study_mean, r.study_abs_error});
    }
    io::write_table(opt.table, t);
  }
  json config = cfg;
  config["trials"] = opt.trials;
  emit(make_document("compare", std::move(config), json(report)), opt.output, out);
  return kSuccess;
}

// diagnose --------------------------------------------------------------------

struct DiagnoseOptions {
  std::string spectrum;
  std::string signal;
  std::optional<double> alpha;
  std::string output;
};

int cmd_diagnose(const DiagnoseOptions& opt, std::ostream& out) {
  const io::SpectrumFile input = io::read_spectrum_file(opt.spectrum);
  SignalModel signal = input.signal;
  json config{{"spectrum", opt.spectrum}};
  if (!opt.signal.empty()) {
    signal = io::read_spectrum_file(opt.signal).signal;
    config["signal"] = opt.signal;
    if (signal.size() != input.spectrum.size()) {
      throw FormatError(opt.signal + ": channel count differs from " + opt.spectrum);
    }
  }

  double alpha = 0.0;
  if (opt.alpha) {
    require_positive(*opt.alpha, "--alpha");
    alpha = *opt.alpha;
    config["alpha"] = alpha;
  } else {
    alpha = ls_estimate(input.spectrum, signal).alpha;
    config["alpha"] = "ls";
  }

  const ResidualReport residuals = residual_diagnostics(input.spectrum, signal, alpha);
  json result{{"alpha", alpha}, {"residuals", residuals}, {"checks", assess_residuals(residuals)}};
  emit(make_document("diagnose", std::move(config), std::move(result)), opt.output, out);
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Amplitude estimation for counting spectra with a modified likelihood", "modlik"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::function<int()> action;

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Synthesize a spectrum and its noise sequence");
  add_signal_options(*simulate, sim.signal);
  simulate->add_option("--alpha", sim.alpha, "Amplitude alpha")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Noise seed")->capture_default_str();
  simulate->add_flag("--standardize", sim.standardize, "Rescale noise to sample mean 0, std 1");
  simulate->add_option("--spectrum-out", sim.spectrum_out, "Spectrum file to write")->required();
  simulate->add_option("--noise-out", sim.noise_out, "Noise file to write")->required();
  simulate->callback([&] { action = [&] { return cmd_simulate(sim, out); }; });

  FitOptions fit;
  auto* fitcmd = app.add_subcommand("fit", "Estimate alpha from a spectrum file");
  fitcmd->add_option("--spectrum", fit.spectrum, "Spectrum file (channel,F,m)")->required();
  fitcmd->add_option("--method", fit.method, "Estimator")
      ->check(CLI::IsMember({"ls", "modlik"}))
      ->capture_default_str();
  auto* nfile = fitcmd->add_option("--noise-file", fit.noise_file, "Noise file (channel,bg)");
  auto* nseed = fitcmd->add_option("--noise-seed", fit.noise_seed, "Draw the noise from this seed");
  nfile->excludes(nseed);
  fitcmd->add_flag("--standardize", fit.standardize, "Standardize the seeded noise draw");
  add_weight_options(*fitcmd, fit.weights);
  fitcmd->add_option("--uncertainty", fit.uncertainty, "Error propagation variant")
      ->check(CLI::IsMember({"standard", "paper-literal"}))
      ->capture_default_str();
  fitcmd->add_option("--init", fit.init, "Starting alpha (default: least-squares estimate)");
  fitcmd->add_option("--rel-tol", fit.rel_tol, "Relative tolerance on alpha")->capture_default_str();
  fitcmd->add_option("--output", fit.output, "Write the report here instead of stdout");
  fitcmd->callback([&] { action = [&] { return cmd_fit(fit, out); }; });

  StudyOptions study;
  auto* studycmd = app.add_subcommand("study", "Re-estimate alpha from one spectrum with K noise draws");
  add_study_options(*studycmd, study);
  studycmd->add_option("--table", study.table, "Per-replicate table file");
  studycmd->add_option("--emit-plot-data", study.plot_dir, "Directory for plot tables");
  studycmd->callback([&] { action = [&] { return cmd_study(study, out); }; });

  StudyOptions compare;
  auto* comparecmd =
      app.add_subcommand("compare", "Repeat the study over independent spectra against the truth");
  add_study_options(*comparecmd, compare);
  comparecmd->add_option("--trials", compare.trials, "Independent spectra T")->capture_default_str();
  comparecmd->add_option("--table", compare.table, "Per-trial table file");
  comparecmd->callback([&] { action = [&] { return cmd_compare(compare, out); }; });

  DiagnoseOptions diag;
  auto* diagcmd = app.add_subcommand("diagnose", "Residual sign balance and scatter at a given alpha");
  diagcmd->add_option("--spectrum", diag.spectrum, "Spectrum file (channel,F,m)")->required();
  diagcmd->add_option("--signal", diag.signal, "Take F from this spectrum file instead");
  diagcmd->add_option("--alpha", diag.alpha, "Amplitude to test (default: least-squares estimate)");
  diagcmd->add_option("--output", diag.output, "Write the report here instead of stdout");
  diagcmd->callback([&] { action = [&] { return cmd_diagnose(diag, out); }; });

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    return action();
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << '\n';
    return kIoError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace modlik::cli
