#include "arrkit/json_io.hpp"

#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include "arrkit/errors.hpp"

namespace arrkit {

namespace {

// nlohmann serializes non-finite doubles as null, so they get an explicit
// string encoding instead.
ordered_json jnum(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double jdouble(const ordered_json& j, const char* ctx) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw SchemaError(std::string("expected number for ") + ctx);
}

const ordered_json& member(const ordered_json& j, const char* key, const char* ctx) {
    auto it = j.find(key);
    if (it == j.end())
        throw SchemaError(std::string(ctx) + ": missing field '" + key + "'");
    return *it;
}

std::vector<double> to_vec(const ordered_json& j, const char* ctx) {
    if (!j.is_array()) throw SchemaError(std::string(ctx) + ": expected array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) out.push_back(jdouble(v, ctx));
    return out;
}

ordered_json from_eigen(const Eigen::VectorXd& v) {
    ordered_json arr = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(jnum(v(i)));
    return arr;
}

Eigen::VectorXd to_eigen(const ordered_json& j, const char* ctx) {
    const auto vec = to_vec(j, ctx);
    return Eigen::Map<const Eigen::VectorXd>(vec.data(), static_cast<Eigen::Index>(vec.size()));
}

std::string transform_name(Transform t) {
    return t == Transform::integral ? "integral" : "identity";
}

Transform transform_value(const std::string& s) {
    if (s == "identity") return Transform::identity;
    if (s == "integral") return Transform::integral;
    throw SchemaError("unknown transform '" + s + "'");
}

std::string kind_name(FaultKind k) {
    switch (k) {
        case FaultKind::incipient: return "incipient";
        case FaultKind::abrupt: return "abrupt";
        default: return "none";
    }
}

FaultKind kind_value(const std::string& s) {
    if (s == "none") return FaultKind::none;
    if (s == "incipient") return FaultKind::incipient;
    if (s == "abrupt") return FaultKind::abrupt;
    throw SchemaError("unknown fault kind '" + s + "'");
}

std::string tank_name(TankId t) {
    switch (t) {
        case TankId::tank1: return "tank1";
        case TankId::tank2: return "tank2";
        case TankId::tank3: return "tank3";
        default: return "tank4";
    }
}

TankId tank_value(const std::string& s) {
    if (s == "tank1") return TankId::tank1;
    if (s == "tank2") return TankId::tank2;
    if (s == "tank3") return TankId::tank3;
    if (s == "tank4") return TankId::tank4;
    throw SchemaError("unknown tank '" + s + "'");
}

std::string mode_name(SearchMode m) {
    return m == SearchMode::exhaustive ? "exhaustive" : "forward";
}

SearchMode mode_value(const std::string& s) {
    if (s == "forward") return SearchMode::forward;
    if (s == "exhaustive") return SearchMode::exhaustive;
    throw SchemaError("unknown search mode '" + s + "'");
}

}  // namespace

// ============================================================================
// Value conversions
// ============================================================================

ordered_json to_json(const FeatureRef& f) {
    return {{"variable", f.variable}, {"lag", f.lag}, {"transform", transform_name(f.transform)}};
}

FeatureRef feature_from_json(const ordered_json& j) {
    FeatureRef f;
    f.variable = member(j, "variable", "feature").get<std::string>();
    f.lag = member(j, "lag", "feature").get<int>();
    f.transform = transform_value(member(j, "transform", "feature").get<std::string>());
    return f;
}

ordered_json to_json(const LinearModel& m) {
    ordered_json features = ordered_json::array();
    for (const auto& f : m.feature_schema) features.push_back(to_json(f));
    return {{"coefficients", from_eigen(m.coefficients)},
            {"intercept", jnum(m.intercept)},
            {"features", std::move(features)},
            {"train_score", jnum(m.train_score)},
            {"valid_score", jnum(m.valid_score)},
            {"rank_deficient", m.rank_deficient}};
}

LinearModel linear_model_from_json(const ordered_json& j) {
    LinearModel m;
    m.coefficients = to_eigen(member(j, "coefficients", "model"), "coefficients");
    m.intercept = jdouble(member(j, "intercept", "model"), "intercept");
    for (const auto& f : member(j, "features", "model")) m.feature_schema.push_back(feature_from_json(f));
    m.train_score = jdouble(member(j, "train_score", "model"), "train_score");
    m.valid_score = jdouble(member(j, "valid_score", "model"), "valid_score");
    m.rank_deficient = member(j, "rank_deficient", "model").get<bool>();
    if (static_cast<std::size_t>(m.coefficients.size()) != m.feature_schema.size())
        throw SchemaError("model: coefficient/feature count mismatch");
    return m;
}

ordered_json to_json(const ResidualSpec& spec) {
    ordered_json loads = ordered_json::array();
    for (const auto& f : spec.loads) loads.push_back(to_json(f));
    return {{"target", spec.target},
            {"loads", std::move(loads)},
            {"model", to_json(spec.model)},
            {"valid_score", jnum(spec.valid_score)},
            {"minimal", spec.minimal}};
}

ResidualSpec residual_spec_from_json(const ordered_json& j) {
    ResidualSpec spec;
    spec.target = member(j, "target", "residual").get<std::string>();
    for (const auto& f : member(j, "loads", "residual")) spec.loads.push_back(feature_from_json(f));
    spec.model = linear_model_from_json(member(j, "model", "residual"));
    spec.valid_score = jdouble(member(j, "valid_score", "residual"), "valid_score");
    spec.minimal = member(j, "minimal", "residual").get<bool>();
    return spec;
}

ordered_json to_json(const SearchConfig& cfg) {
    return {{"r2_min", jnum(cfg.r2_min)},
            {"improvement_margin", jnum(cfg.improvement_margin)},
            {"max_loads", cfg.max_loads},
            {"delays", cfg.delays},
            {"candidate_variables", cfg.candidate_variables},
            {"train_fraction", jnum(cfg.train_fraction)},
            {"subset_budget", cfg.subset_budget}};
}

SearchConfig search_config_from_json(const ordered_json& j) {
    SearchConfig cfg;
    cfg.r2_min = jdouble(j.value("r2_min", ordered_json(cfg.r2_min)), "r2_min");
    cfg.improvement_margin =
        jdouble(j.value("improvement_margin", ordered_json(cfg.improvement_margin)),
                "improvement_margin");
    cfg.max_loads = j.value("max_loads", cfg.max_loads);
    cfg.delays = j.value("delays", cfg.delays);
    cfg.candidate_variables = j.value("candidate_variables", cfg.candidate_variables);
    cfg.train_fraction = jdouble(j.value("train_fraction", ordered_json(cfg.train_fraction)),
                                 "train_fraction");
    cfg.subset_budget = j.value("subset_budget", cfg.subset_budget);
    return cfg;
}

ordered_json to_json(const ZTestResult& r) {
    return {{"statistic", jnum(r.statistic)},
            {"p_value", jnum(r.p_value)},
            {"significant", r.significant},
            {"n_normal", r.n_normal},
            {"n_fault", r.n_fault}};
}

ZTestResult z_test_from_json(const ordered_json& j) {
    ZTestResult r;
    r.statistic = jdouble(member(j, "statistic", "z_test"), "statistic");
    r.p_value = jdouble(member(j, "p_value", "z_test"), "p_value");
    r.significant = member(j, "significant", "z_test").get<bool>();
    r.n_normal = member(j, "n_normal", "z_test").get<std::size_t>();
    r.n_fault = member(j, "n_fault", "z_test").get<std::size_t>();
    return r;
}

ordered_json to_json(const SignatureMatrix& m) {
    ordered_json cells = ordered_json::array();
    for (const auto& row : m.cells) {
        ordered_json jrow = ordered_json::array();
        for (const auto& cell : row) jrow.push_back(to_json(cell));
        cells.push_back(std::move(jrow));
    }
    return {{"residuals", m.residuals}, {"faults", m.faults}, {"cells", std::move(cells)}};
}

SignatureMatrix signature_from_json(const ordered_json& j) {
    SignatureMatrix m;
    m.residuals = member(j, "residuals", "signature").get<std::vector<std::string>>();
    m.faults = member(j, "faults", "signature").get<std::vector<std::string>>();
    for (const auto& jrow : member(j, "cells", "signature")) {
        std::vector<ZTestResult> row;
        for (const auto& cell : jrow) row.push_back(z_test_from_json(cell));
        m.cells.push_back(std::move(row));
    }
    return m;
}

ordered_json to_json(const Thresholds& th) {
    return {{"mean", jnum(th.mean)},
            {"sigma", jnum(th.sigma)},
            {"upper", jnum(th.upper)},
            {"lower", jnum(th.lower)},
            {"persistence", th.persistence}};
}

Thresholds thresholds_from_json(const ordered_json& j) {
    Thresholds th;
    th.mean = jdouble(member(j, "mean", "thresholds"), "mean");
    th.sigma = jdouble(member(j, "sigma", "thresholds"), "sigma");
    th.upper = jdouble(member(j, "upper", "thresholds"), "upper");
    th.lower = jdouble(member(j, "lower", "thresholds"), "lower");
    th.persistence = member(j, "persistence", "thresholds").get<int>();
    return th;
}

ordered_json to_json(const DetectionReport& report) {
    ordered_json residuals = ordered_json::array();
    for (const auto& rd : report.residuals) {
        residuals.push_back(
            {{"residual", rd.residual},
             {"first_alarm_time",
              rd.first_alarm_time ? ordered_json(jnum(*rd.first_alarm_time)) : ordered_json()},
             {"detection_delay",
              rd.detection_delay ? ordered_json(jnum(*rd.detection_delay)) : ordered_json()},
             {"false_alarms_before_onset", rd.false_alarms_before_onset},
             {"alarm_count", rd.alarm_count}});
    }
    return {{"onset", report.onset ? ordered_json(jnum(*report.onset)) : ordered_json()},
            {"detected", report.detected},
            {"residuals", std::move(residuals)}};
}

DetectionReport detection_report_from_json(const ordered_json& j) {
    DetectionReport report;
    const auto& onset = member(j, "onset", "report");
    if (!onset.is_null()) report.onset = jdouble(onset, "onset");
    report.detected = member(j, "detected", "report").get<bool>();
    for (const auto& jr : member(j, "residuals", "report")) {
        ResidualDetection rd;
        rd.residual = member(jr, "residual", "report").get<std::string>();
        const auto& fat = member(jr, "first_alarm_time", "report");
        if (!fat.is_null()) rd.first_alarm_time = jdouble(fat, "first_alarm_time");
        const auto& dd = member(jr, "detection_delay", "report");
        if (!dd.is_null()) rd.detection_delay = jdouble(dd, "detection_delay");
        rd.false_alarms_before_onset =
            member(jr, "false_alarms_before_onset", "report").get<std::size_t>();
        rd.alarm_count = member(jr, "alarm_count", "report").get<std::size_t>();
        report.residuals.push_back(std::move(rd));
    }
    return report;
}

ordered_json to_json(const RocCurve& curve) {
    ordered_json points = ordered_json::array();
    for (const auto& [fpr, tpr] : curve.points)
        points.push_back(ordered_json::array({jnum(fpr), jnum(tpr)}));
    return {{"auc", jnum(curve.auc)}, {"points", std::move(points)}};
}

RocCurve roc_curve_from_json(const ordered_json& j) {
    RocCurve curve;
    curve.auc = jdouble(member(j, "auc", "roc"), "auc");
    for (const auto& p : member(j, "points", "roc")) {
        if (!p.is_array() || p.size() != 2) throw SchemaError("roc: point must be [fpr, tpr]");
        curve.points.emplace_back(jdouble(p[0], "fpr"), jdouble(p[1], "tpr"));
    }
    return curve;
}

ordered_json to_json(const MultisineSpec& s) {
    return {{"offset", jnum(s.offset)}, {"amp", jnum(s.amp)},       {"base", jnum(s.base)},
            {"ratio", jnum(s.ratio)},   {"phase0", jnum(s.phase0)}, {"tones", s.tones}};
}

MultisineSpec multisine_from_json(const ordered_json& j) {
    MultisineSpec s;
    s.offset = jdouble(j.value("offset", ordered_json(s.offset)), "offset");
    s.amp = jdouble(j.value("amp", ordered_json(s.amp)), "amp");
    s.base = jdouble(j.value("base", ordered_json(s.base)), "base");
    s.ratio = jdouble(j.value("ratio", ordered_json(s.ratio)), "ratio");
    s.phase0 = jdouble(j.value("phase0", ordered_json(s.phase0)), "phase0");
    s.tones = j.value("tones", s.tones);
    return s;
}

ordered_json to_json(const TankParams& p) {
    return {{"capacity", std::vector<double>(p.capacity.begin(), p.capacity.end())},
            {"resistance", std::vector<double>(p.resistance.begin(), p.resistance.end())},
            {"u1", to_json(p.u1)},
            {"u2", to_json(p.u2)},
            {"dt", jnum(p.dt)},
            {"duration", jnum(p.duration)},
            {"noise_fraction", jnum(p.noise_fraction)}};
}

TankParams tank_params_from_json(const ordered_json& j) {
    TankParams p;
    if (j.contains("capacity")) {
        const auto v = to_vec(j["capacity"], "capacity");
        if (v.size() != 4) throw SchemaError("capacity: expected 4 entries");
        std::copy(v.begin(), v.end(), p.capacity.begin());
    }
    if (j.contains("resistance")) {
        const auto v = to_vec(j["resistance"], "resistance");
        if (v.size() != 4) throw SchemaError("resistance: expected 4 entries");
        std::copy(v.begin(), v.end(), p.resistance.begin());
    }
    if (j.contains("u1")) p.u1 = multisine_from_json(j["u1"]);
    if (j.contains("u2")) p.u2 = multisine_from_json(j["u2"]);
    p.dt = jdouble(j.value("dt", ordered_json(p.dt)), "dt");
    p.duration = jdouble(j.value("duration", ordered_json(p.duration)), "duration");
    p.noise_fraction =
        jdouble(j.value("noise_fraction", ordered_json(p.noise_fraction)), "noise_fraction");
    return p;
}

ordered_json to_json(const FaultScenario& s) {
    return {{"component", tank_name(s.component)},
            {"kind", kind_name(s.kind)},
            {"onset", jnum(s.onset)},
            {"magnitude", jnum(s.magnitude)},
            {"ramp_duration", jnum(s.ramp_duration)}};
}

FaultScenario fault_scenario_from_json(const ordered_json& j) {
    FaultScenario s;
    if (j.contains("component")) s.component = tank_value(j["component"].get<std::string>());
    if (j.contains("kind")) s.kind = kind_value(j["kind"].get<std::string>());
    s.onset = jdouble(j.value("onset", ordered_json(s.onset)), "onset");
    s.magnitude = jdouble(j.value("magnitude", ordered_json(s.magnitude)), "magnitude");
    s.ramp_duration =
        jdouble(j.value("ramp_duration", ordered_json(s.ramp_duration)), "ramp_duration");
    return s;
}

ordered_json to_json(const RunConfig& cfg) {
    ordered_json faults = ordered_json::object();
    for (const auto& [name, path] : cfg.fault_paths) faults[name] = path;
    ordered_json scenarios = ordered_json::array();
    for (const auto& sc : cfg.scenarios) {
        ordered_json js = to_json(sc.fault);
        js["name"] = sc.name;
        scenarios.push_back(std::move(js));
    }
    return {{"datasets", {{"normal", cfg.normal_path}, {"faults", std::move(faults)}}},
            {"search", to_json(cfg.search)},
            {"evaluation",
             {{"alpha", jnum(cfg.evaluation.alpha)},
              {"bonferroni", cfg.evaluation.bonferroni},
              {"window", jnum(cfg.evaluation.window)}}},
            {"detection",
             {{"persistence", cfg.detection.persistence}, {"dataset", cfg.detection.dataset}}},
            {"roc",
             {{"residual", cfg.roc.residual}, {"train", cfg.roc.train}, {"test", cfg.roc.test}}},
            {"simulator",
             {{"params", to_json(cfg.params)},
              {"scenarios", std::move(scenarios)},
              {"seed", cfg.seed},
              {"save_states", cfg.save_states}}},
            {"mode", mode_name(cfg.mode)},
            {"out_dir", cfg.out_dir}};
}

RunConfig run_config_from_json(const ordered_json& j) {
    if (!j.is_object()) throw SchemaError("config: expected a JSON object");
    static const std::vector<std::string> known = {"datasets",  "search", "evaluation",
                                                   "detection", "roc",    "simulator",
                                                   "mode",      "out_dir"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw SchemaError("config: unknown field '" + it.key() + "'");

    RunConfig cfg;
    if (j.contains("datasets")) {
        const auto& d = j["datasets"];
        cfg.normal_path = d.value("normal", cfg.normal_path);
        if (d.contains("faults"))
            for (auto it = d["faults"].begin(); it != d["faults"].end(); ++it)
                cfg.fault_paths.emplace_back(it.key(), it.value().get<std::string>());
    }
    if (j.contains("search")) cfg.search = search_config_from_json(j["search"]);
    if (j.contains("evaluation")) {
        const auto& e = j["evaluation"];
        cfg.evaluation.alpha =
            jdouble(e.value("alpha", ordered_json(cfg.evaluation.alpha)), "alpha");
        cfg.evaluation.bonferroni = e.value("bonferroni", cfg.evaluation.bonferroni);
        cfg.evaluation.window =
            jdouble(e.value("window", ordered_json(cfg.evaluation.window)), "window");
    }
    if (j.contains("detection")) {
        const auto& d = j["detection"];
        cfg.detection.persistence = d.value("persistence", cfg.detection.persistence);
        cfg.detection.dataset = d.value("dataset", cfg.detection.dataset);
    }
    if (j.contains("roc")) {
        const auto& r = j["roc"];
        cfg.roc.residual = r.value("residual", cfg.roc.residual);
        cfg.roc.train = r.value("train", cfg.roc.train);
        cfg.roc.test = r.value("test", cfg.roc.test);
    }
    if (j.contains("simulator")) {
        const auto& s = j["simulator"];
        if (s.contains("params")) cfg.params = tank_params_from_json(s["params"]);
        if (s.contains("scenarios")) {
            for (const auto& js : s["scenarios"]) {
                ScenarioEntry entry;
                entry.fault = fault_scenario_from_json(js);
                entry.name = js.value("name", std::string());
                if (entry.name.empty())
                    entry.name = tank_name(entry.fault.component) + "_" + kind_name(entry.fault.kind);
                cfg.scenarios.push_back(std::move(entry));
            }
        }
        cfg.seed = s.value("seed", cfg.seed);
        cfg.save_states = s.value("save_states", cfg.save_states);
    }
    if (j.contains("mode")) cfg.mode = mode_value(j["mode"].get<std::string>());
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    return cfg;
}

// ============================================================================
// Artifact files
// ============================================================================

ordered_json bank_to_json(const std::vector<ResidualSpec>& bank, const SearchConfig& cfg,
                          std::uint64_t seed, const std::string& generated_at) {
    ordered_json residuals = ordered_json::array();
    for (const auto& spec : bank) residuals.push_back(to_json(spec));
    return {{"schema", "arrkit.bank/1"},
            {"metadata", {{"generated_at", generated_at}, {"seed", seed}}},
            {"search", to_json(cfg)},
            {"residuals", std::move(residuals)}};
}

std::vector<ResidualSpec> bank_from_json(const ordered_json& j, SearchConfig* cfg_out) {
    if (member(j, "schema", "bank").get<std::string>() != "arrkit.bank/1")
        throw SchemaError("bank: unsupported schema tag");
    if (cfg_out) *cfg_out = search_config_from_json(member(j, "search", "bank"));
    std::vector<ResidualSpec> bank;
    for (const auto& spec : member(j, "residuals", "bank"))
        bank.push_back(residual_spec_from_json(spec));
    return bank;
}

ordered_json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open " + path);
    try {
        return ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }
}

void save_json(const ordered_json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << '\n';
}

std::string iso_utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace arrkit
