#include "modlik/report.hpp"

#include "modlik/errors.hpp"

namespace modlik {

using nlohmann::json;

namespace {

template <class T>
void put_optional(json& j, const char* key, const std::optional<T>& value) {
  if (value) j[key] = *value;
}

template <class T>
void get_optional(const json& j, const char* key, std::optional<T>& value) {
  if (auto it = j.find(key); it != j.end()) {
    value = it->get<T>();
  } else {
    value.reset();
  }
}

}  // namespace

std::string to_string(WeightMode::Kind kind) {
  switch (kind) {
    case WeightMode::Kind::measured: return "measured";
    case WeightMode::Kind::model: return "model";
    case WeightMode::Kind::unit: return "unit";
  }
  return "measured";
}

WeightMode::Kind weight_kind_from_string(const std::string& text) {
  if (text == "measured") return WeightMode::Kind::measured;
  if (text == "model") return WeightMode::Kind::model;
  if (text == "unit") return WeightMode::Kind::unit;
  throw InvalidArgument("weights: expected measured, model or unit, got '" + text + "'");
}

std::string to_string(UncertaintyVariant variant) {
  return variant == UncertaintyVariant::standard ? "standard" : "paper-literal";
}

UncertaintyVariant variant_from_string(const std::string& text) {
  if (text == "standard") return UncertaintyVariant::standard;
  if (text == "paper-literal") return UncertaintyVariant::paper_literal;
  throw InvalidArgument("uncertainty: expected standard or paper-literal, got '" + text + "'");
}

std::string to_string(Method method) { return method == Method::ls ? "ls" : "modlik"; }

Method method_from_string(const std::string& text) {
  if (text == "ls") return Method::ls;
  if (text == "modlik") return Method::modlik;
  throw InvalidArgument("method: expected ls or modlik, got '" + text + "'");
}

void to_json(json& j, const WeightMode& w) {
  j = json{{"kind", to_string(w.kind)}, {"floor", w.floor}};
}

void from_json(const json& j, WeightMode& w) {
  w.kind = weight_kind_from_string(j.at("kind").get<std::string>());
  w.floor = j.at("floor").get<double>();
}

void to_json(json& j, const Estimate& e) {
  j = json{{"alpha", e.alpha}, {"delta_alpha", e.delta_alpha}, {"method", to_string(e.method)}};
  if (e.variant) j["variant"] = to_string(*e.variant);
  put_optional(j, "score_residual", e.score_residual);
  put_optional(j, "positive_roots", e.positive_roots);
  put_optional(j, "seed_alpha", e.seed_alpha);
  put_optional(j, "iterations", e.iterations);
}

void from_json(const json& j, Estimate& e) {
  e.alpha = j.at("alpha").get<double>();
  e.delta_alpha = j.at("delta_alpha").get<double>();
  e.method = method_from_string(j.at("method").get<std::string>());
  if (auto it = j.find("variant"); it != j.end()) {
    e.variant = variant_from_string(it->get<std::string>());
  } else {
    e.variant.reset();
  }
  get_optional(j, "score_residual", e.score_residual);
  get_optional(j, "positive_roots", e.positive_roots);
  get_optional(j, "seed_alpha", e.seed_alpha);
  get_optional(j, "iterations", e.iterations);
}

void to_json(json& j, const SinusoidParams& p) {
  j = json{{"amplitude", p.amplitude},
           {"offset", p.offset},
           {"scale", p.scale},
           {"channels", p.channels}};
}

void from_json(const json& j, SinusoidParams& p) {
  p.amplitude = j.at("amplitude").get<double>();
  p.offset = j.at("offset").get<double>();
  p.scale = j.at("scale").get<double>();
  p.channels = j.at("channels").get<std::size_t>();
}

void to_json(json& j, const StudyConfig& c) {
  j = json{{"signal", c.signal},
           {"alpha_true", c.alpha_true},
           {"data_seed", c.data_seed},
           {"study_seed", c.study_seed},
           {"replicates", c.replicates},
           {"standardize", c.standardize},
           {"weights", c.weights},
           {"uncertainty", to_string(c.uncertainty)}};
}

void from_json(const json& j, StudyConfig& c) {
  c.signal = j.at("signal").get<SinusoidParams>();
  c.alpha_true = j.at("alpha_true").get<double>();
  c.data_seed = j.at("data_seed").get<std::uint64_t>();
  c.study_seed = j.at("study_seed").get<std::uint64_t>();
  c.replicates = j.at("replicates").get<std::size_t>();
  c.standardize = j.at("standardize").get<bool>();
  c.weights = j.at("weights").get<WeightMode>();
  c.uncertainty = variant_from_string(j.at("uncertainty").get<std::string>());
}

void to_json(json& j, const ReplicateReport& r) {
  j = json{{"ls_baseline", r.ls_baseline},
           {"replicate_alphas", r.replicate_alphas},
           {"mean", r.mean},
           {"per_replicate_uncertainties", r.per_replicate_uncertainties},
           {"seeds_used", r.seeds_used},
           {"config", r.config}};
  put_optional(j, "sample_std", r.sample_std);
}

void from_json(const json& j, ReplicateReport& r) {
  r.ls_baseline = j.at("ls_baseline").get<Estimate>();
  r.replicate_alphas = j.at("replicate_alphas").get<std::vector<double>>();
  r.mean = j.at("mean").get<double>();
  get_optional(j, "sample_std", r.sample_std);
  r.per_replicate_uncertainties = j.at("per_replicate_uncertainties").get<std::vector<double>>();
  r.seeds_used = j.at("seeds_used").get<std::vector<std::uint64_t>>();
  r.config = j.at("config").get<StudyConfig>();
}

void to_json(json& j, const ResidualReport& r) {
  j = json{{"residuals", r.residuals},
           {"normalized", r.normalized},
           {"positive_count", r.positive_count},
           {"negative_count", r.negative_count},
           {"normalized_mean", r.normalized_mean},
           {"normalized_std", r.normalized_std}};
}

void from_json(const json& j, ResidualReport& r) {
  r.residuals = j.at("residuals").get<std::vector<double>>();
  r.normalized = j.at("normalized").get<std::vector<double>>();
  r.positive_count = j.at("positive_count").get<std::size_t>();
  r.negative_count = j.at("negative_count").get<std::size_t>();
  r.normalized_mean = j.at("normalized_mean").get<double>();
  r.normalized_std = j.at("normalized_std").get<double>();
}

void to_json(json& j, const ResidualChecks& c) {
  j = json{{"sign_balance", c.sign_balance_ok ? "pass" : "warn"},
           {"sign_band", {c.sign_band_low, c.sign_band_high}},
           {"normalized_mean", c.mean_ok ? "pass" : "warn"},
           {"normalized_mean_bound", c.mean_bound},
           {"normalized_std", c.std_ok ? "pass" : "warn"},
           {"normalized_std_band", {kNormalizedStdLow, kNormalizedStdHigh}},
           {"exact_fit", c.exact_fit},
           {"warn", c.warn()}};
}

void to_json(json& j, const ComparisonRow& r) {
  j = json{{"trial", r.trial},
           {"data_seed", r.data_seed},
           {"study_seed", r.study_seed},
           {"ls_alpha", r.ls_alpha},
           {"ls_delta_alpha", r.ls_delta_alpha},
           {"ls_abs_error", r.ls_abs_error},
           {"study_mean", r.study_mean},
           {"study_abs_error", r.study_abs_error}};
  put_optional(j, "study_sample_std", r.study_sample_std);
}

void from_json(const json& j, ComparisonRow& r) {
  r.trial = j.at("trial").get<std::size_t>();
  r.data_seed = j.at("data_seed").get<std::uint64_t>();
  r.study_seed = j.at("study_seed").get<std::uint64_t>();
  r.ls_alpha = j.at("ls_alpha").get<double>();
  r.ls_delta_alpha = j.at("ls_delta_alpha").get<double>();
  r.ls_abs_error = j.at("ls_abs_error").get<double>();
  r.study_mean = j.at("study_mean").get<double>();
  r.study_abs_error = j.at("study_abs_error").get<double>();
  get_optional(j, "study_sample_std", r.study_sample_std);
}

void to_json(json& j, const Quantiles& q) {
  j = json{{"min", q.min}, {"q25", q.q25}, {"median", q.median}, {"q75", q.q75}, {"max", q.max}};
}

void from_json(const json& j, Quantiles& q) {
  q.min = j.at("min").get<double>();
  q.q25 = j.at("q25").get<double>();
  q.median = j.at("median").get<double>();
  q.q75 = j.at("q75").get<double>();
  q.max = j.at("max").get<double>();
}

void to_json(json& j, const ComparisonReport& r) {
  j = json{{"config", r.config},
           {"rows", r.rows},
           {"ls_abs_error", r.ls_abs_error},
           {"study_abs_error", r.study_abs_error},
           {"ls_delta_alpha_mean", r.ls_delta_alpha_mean}};
  put_optional(j, "improvement_ratio", r.improvement_ratio);
  put_optional(j, "ls_alpha_std", r.ls_alpha_std);
}

void from_json(const json& j, ComparisonReport& r) {
  r.config = j.at("config").get<StudyConfig>();
  r.rows = j.at("rows").get<std::vector<ComparisonRow>>();
  r.ls_abs_error = j.at("ls_abs_error").get<Quantiles>();
  r.study_abs_error = j.at("study_abs_error").get<Quantiles>();
  r.ls_delta_alpha_mean = j.at("ls_delta_alpha_mean").get<double>();
  get_optional(j, "improvement_ratio", r.improvement_ratio);
  get_optional(j, "ls_alpha_std", r.ls_alpha_std);
}

json make_document(const std::string& command, json config, json result) {
  return json{{"format", kReportFormat},
              {"format_version", kReportFormatVersion},
              {"tool_version", kToolVersion},
              {"command", command},
              {"config", std::move(config)},
              {"result", std::move(result)}};
}

std::string serialize_document(const json& doc) { return doc.dump(2) + "\n"; }

json parse_document(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("report: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != kReportFormat) {
    throw FormatError("report: not a modlik report document");
  }
  if (doc.value("format_version", 0) != kReportFormatVersion) {
    throw FormatError("report: unsupported format_version");
  }
  return doc;
}

}  // namespace modlik
