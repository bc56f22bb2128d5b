#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>

#include <unistd.h>

#include "arrkit/json_io.hpp"
#include "doctest.h"

using namespace arrkit;

namespace {

bool same_bits(double a, double b) {
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

LinearModel sample_model() {
    LinearModel m;
    m.coefficients = Eigen::VectorXd(3);
    m.coefficients << 0.1 + 0.2, 1.0 / 3.0, std::nextafter(2.0, 3.0);
    m.intercept = -7.25e-13;
    m.feature_schema = {{"y1", 0, Transform::identity},
                        {"y1", 1, Transform::identity},
                        {"u1", 0, Transform::integral}};
    m.train_score = 0.999999123;
    m.valid_score = 0.991;
    m.rank_deficient = true;
    return m;
}

ResidualSpec sample_spec() {
    ResidualSpec spec;
    spec.target = "int_u1";
    spec.loads = {{"y1", 0, Transform::identity}, {"int_y2", 2, Transform::identity}};
    spec.model = sample_model();
    spec.model.coefficients = Eigen::VectorXd(2);
    spec.model.coefficients << 10.0, -10.0;
    spec.model.feature_schema = {{"y1", 0, Transform::identity},
                                 {"int_y2", 2, Transform::identity}};
    spec.valid_score = 0.9973;
    spec.minimal = true;
    return spec;
}

std::string temp_path(const char* stem) {
    return std::string("/tmp/arrkit_json_") + stem + "_" + std::to_string(::getpid()) + ".json";
}

}  // namespace

// ============================================================================
// value round trips
// ============================================================================

TEST_CASE("linear model survives a JSON round trip bit for bit") {
    const LinearModel m = sample_model();
    const LinearModel back = linear_model_from_json(to_json(m));
    REQUIRE(back.coefficients.size() == m.coefficients.size());
    for (Eigen::Index i = 0; i < m.coefficients.size(); ++i)
        CHECK(same_bits(back.coefficients(i), m.coefficients(i)));
    CHECK(same_bits(back.intercept, m.intercept));
    CHECK(back.feature_schema.size() == 3);
    CHECK(back.feature_schema[2].variable == "u1");
    CHECK(back.feature_schema[2].transform == Transform::integral);
    CHECK(back.feature_schema[1].lag == 1);
    CHECK(same_bits(back.train_score, m.train_score));
    CHECK(same_bits(back.valid_score, m.valid_score));
    CHECK(back.rank_deficient == m.rank_deficient);
}

TEST_CASE("residual spec round trip preserves loads and scores") {
    const ResidualSpec spec = sample_spec();
    const ResidualSpec back = residual_spec_from_json(to_json(spec));
    CHECK(back.target == spec.target);
    REQUIRE(back.loads.size() == 2);
    CHECK(back.loads[1].variable == "int_y2");
    CHECK(back.loads[1].lag == 2);
    CHECK(same_bits(back.valid_score, spec.valid_score));
    CHECK(back.minimal == spec.minimal);
    CHECK(same_bits(back.model.coefficients(0), 10.0));
}

TEST_CASE("z-test results round trip including infinities") {
    ZTestResult r;
    r.statistic = std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
    r.significant = true;
    r.n_normal = 31;
    r.n_fault = 77;
    ZTestResult back = z_test_from_json(to_json(r));
    CHECK(back.statistic == std::numeric_limits<double>::infinity());
    CHECK(same_bits(back.p_value, 0.0));
    CHECK(back.significant);
    CHECK(back.n_normal == 31);
    CHECK(back.n_fault == 77);

    r.statistic = -std::numeric_limits<double>::infinity();
    back = z_test_from_json(to_json(r));
    CHECK(back.statistic == -std::numeric_limits<double>::infinity());

    r.statistic = std::numeric_limits<double>::quiet_NaN();
    back = z_test_from_json(to_json(r));
    CHECK(std::isnan(back.statistic));
}

TEST_CASE("search config round trips and fills defaults from an empty object") {
    SearchConfig cfg;
    cfg.r2_min = 0.97;
    cfg.improvement_margin = 0.001;
    cfg.max_loads = 3;
    cfg.delays = {0, 2};
    cfg.candidate_variables = {"y1", "y2"};
    cfg.train_fraction = 0.8;
    cfg.subset_budget = 111;
    const SearchConfig back = search_config_from_json(to_json(cfg));
    CHECK(same_bits(back.r2_min, 0.97));
    CHECK(same_bits(back.improvement_margin, 0.001));
    CHECK(back.max_loads == 3);
    CHECK(back.delays == std::vector<int>{0, 2});
    CHECK(back.candidate_variables == std::vector<std::string>{"y1", "y2"});
    CHECK(same_bits(back.train_fraction, 0.8));
    CHECK(back.subset_budget == 111);

    const SearchConfig defaults = search_config_from_json(ordered_json::object());
    CHECK(defaults.r2_min == 0.99);
    CHECK(defaults.improvement_margin == 0.005);
    CHECK(defaults.max_loads == 5);
    CHECK(defaults.delays == std::vector<int>{0, 1, 2, 3});
    CHECK(defaults.candidate_variables.empty());
    CHECK(defaults.train_fraction == 0.7);
    CHECK(defaults.subset_budget == 20000);
}

TEST_CASE("signature matrix round trip") {
    SignatureMatrix m;
    m.residuals = {"int_u1", "y1"};
    m.faults = {"tank1_abrupt", "tank3_abrupt"};
    ZTestResult hit{33.31, 0.0, true, 6000, 6000};
    ZTestResult miss{-0.034, 0.97, false, 6000, 6000};
    m.cells = {{hit, miss}, {miss, hit}};
    const SignatureMatrix back = signature_from_json(to_json(m));
    CHECK(back.residuals == m.residuals);
    CHECK(back.faults == m.faults);
    REQUIRE(back.cells.size() == 2);
    REQUIRE(back.cells[0].size() == 2);
    CHECK(same_bits(back.cells[0][0].statistic, 33.31));
    CHECK(back.cells[0][1].significant == false);
    CHECK(back.cells[1][0].p_value == doctest::Approx(0.97));
}

TEST_CASE("thresholds and detection report round trip with optional fields") {
    Thresholds th{0.002, 0.081, 0.245, -0.241, 5};
    const Thresholds tback = thresholds_from_json(to_json(th));
    CHECK(same_bits(tback.mean, th.mean));
    CHECK(same_bits(tback.sigma, th.sigma));
    CHECK(same_bits(tback.upper, th.upper));
    CHECK(same_bits(tback.lower, th.lower));
    CHECK(tback.persistence == 5);

    DetectionReport report;
    report.onset = 2500.0;
    report.detected = true;
    report.residuals = {{"int_u1", 2500.3, 0.3, 0, 412}, {"y1", std::nullopt, std::nullopt, 0, 0}};
    const DetectionReport back = detection_report_from_json(to_json(report));
    REQUIRE(back.onset.has_value());
    CHECK(same_bits(*back.onset, 2500.0));
    CHECK(back.detected);
    REQUIRE(back.residuals.size() == 2);
    REQUIRE(back.residuals[0].first_alarm_time.has_value());
    CHECK(same_bits(*back.residuals[0].first_alarm_time, 2500.3));
    CHECK(same_bits(*back.residuals[0].detection_delay, 0.3));
    CHECK(back.residuals[0].alarm_count == 412);
    CHECK(!back.residuals[1].first_alarm_time.has_value());
    CHECK(!back.residuals[1].detection_delay.has_value());

    DetectionReport clean;
    clean.detected = false;
    const DetectionReport cback = detection_report_from_json(to_json(clean));
    CHECK(!cback.onset.has_value());
    CHECK(!cback.detected);
    CHECK(cback.residuals.empty());
}

TEST_CASE("roc curve round trip") {
    RocCurve curve;
    curve.points = {{0.0, 0.0}, {0.0, 0.6}, {0.25, 1.0}, {1.0, 1.0}};
    curve.auc = 0.9125;
    const RocCurve back = roc_curve_from_json(to_json(curve));
    CHECK(back.points == curve.points);
    CHECK(same_bits(back.auc, curve.auc));

    ordered_json bad = to_json(curve);
    bad["points"][1] = ordered_json::array({0.5});
    CHECK_THROWS_AS(roc_curve_from_json(bad), SchemaError);
}

TEST_CASE("simulator configuration round trips and fills defaults") {
    TankParams p;
    p.capacity = {1.5, 2.0, 4.5, 2.25};
    p.resistance = {0.25, 3.0, 0.75, 1.125};
    p.u1.phase0 = 0.125;
    p.u2.tones = 5;
    p.dt = 0.05;
    p.duration = 1200.0;
    p.noise_fraction = 0.02;
    const TankParams back = tank_params_from_json(to_json(p));
    CHECK(back.capacity == p.capacity);
    CHECK(back.resistance == p.resistance);
    CHECK(same_bits(back.u1.phase0, 0.125));
    CHECK(back.u2.tones == 5);
    CHECK(same_bits(back.dt, 0.05));
    CHECK(same_bits(back.duration, 1200.0));
    CHECK(same_bits(back.noise_fraction, 0.02));

    const TankParams defaults = tank_params_from_json(ordered_json::object());
    CHECK(defaults.capacity == TankParams{}.capacity);
    CHECK(defaults.dt == 0.1);
    CHECK(defaults.duration == 5000.0);

    FaultScenario s{TankId::tank3, FaultKind::incipient, 2000.0, 0.01, 500.0};
    const FaultScenario sback = fault_scenario_from_json(to_json(s));
    CHECK(sback.component == TankId::tank3);
    CHECK(sback.kind == FaultKind::incipient);
    CHECK(same_bits(sback.onset, 2000.0));
    CHECK(same_bits(sback.magnitude, 0.01));
    CHECK(same_bits(sback.ramp_duration, 500.0));

    const FaultScenario sdefaults = fault_scenario_from_json(ordered_json::object());
    CHECK(sdefaults.kind == FaultKind::none);
    CHECK(sdefaults.component == TankId::tank1);
}

TEST_CASE("run config round trips every block") {
    RunConfig cfg;
    cfg.normal_path = "data/normal.csv";
    cfg.fault_paths = {{"tank1_incipient", "data/t1.csv"}, {"tank3_abrupt", "data/t3.csv"}};
    cfg.search.max_loads = 4;
    cfg.evaluation.alpha = 0.05;
    cfg.evaluation.bonferroni = true;
    cfg.evaluation.window = 450.0;
    cfg.detection.persistence = 7;
    cfg.detection.dataset = "tank1_incipient";
    cfg.roc.residual = "y4";
    cfg.roc.train = "tank1_abrupt";
    cfg.roc.test = "tank1_incipient";
    cfg.params.duration = 800.0;
    cfg.scenarios = {{"leaky", {TankId::tank2, FaultKind::abrupt, 400.0, 0.01, 100.0}}};
    cfg.seed = 99;
    cfg.save_states = true;
    cfg.mode = SearchMode::exhaustive;
    cfg.out_dir = "artifacts";

    const RunConfig back = run_config_from_json(to_json(cfg));
    CHECK(back.normal_path == cfg.normal_path);
    CHECK(back.fault_paths == cfg.fault_paths);
    CHECK(back.search.max_loads == 4);
    CHECK(same_bits(back.evaluation.alpha, 0.05));
    CHECK(back.evaluation.bonferroni);
    CHECK(same_bits(back.evaluation.window, 450.0));
    CHECK(back.detection.persistence == 7);
    CHECK(back.detection.dataset == "tank1_incipient");
    CHECK(back.roc.residual == "y4");
    CHECK(back.roc.train == "tank1_abrupt");
    CHECK(back.roc.test == "tank1_incipient");
    CHECK(same_bits(back.params.duration, 800.0));
    REQUIRE(back.scenarios.size() == 1);
    CHECK(back.scenarios[0].name == "leaky");
    CHECK(back.scenarios[0].fault.component == TankId::tank2);
    CHECK(back.seed == 99);
    CHECK(back.save_states);
    CHECK(back.mode == SearchMode::exhaustive);
    CHECK(back.out_dir == "artifacts");
}

TEST_CASE("an empty config object yields pure defaults") {
    const RunConfig cfg = run_config_from_json(ordered_json::object());
    CHECK(cfg.normal_path.empty());
    CHECK(cfg.fault_paths.empty());
    CHECK(cfg.search.r2_min == 0.99);
    CHECK(cfg.evaluation.alpha == 0.01);
    CHECK(cfg.detection.persistence == 3);
    CHECK(cfg.roc.residual == "int_u1");
    CHECK(cfg.params.dt == 0.1);
    CHECK(cfg.scenarios.empty());
    CHECK(cfg.seed == 1);
    CHECK(!cfg.save_states);
    CHECK(cfg.mode == SearchMode::forward);
    CHECK(cfg.out_dir == ".");
}

TEST_CASE("a scenario without a name derives one from tank and kind") {
    ordered_json j = {{"simulator",
                       {{"scenarios",
                         ordered_json::array({{{"component", "tank3"}, {"kind", "abrupt"}}})}}}};
    const RunConfig cfg = run_config_from_json(j);
    REQUIRE(cfg.scenarios.size() == 1);
    CHECK(cfg.scenarios[0].name == "tank3_abrupt");
}

// ============================================================================
// schema rejection
// ============================================================================

TEST_CASE("malformed documents are rejected with schema errors") {
    CHECK_THROWS_AS(run_config_from_json({{"serach", ordered_json::object()}}), SchemaError);
    CHECK_THROWS_AS(run_config_from_json(ordered_json::array()), SchemaError);
    CHECK_THROWS_AS(run_config_from_json({{"mode", "breadth_first"}}), SchemaError);

    CHECK_THROWS_AS(fault_scenario_from_json({{"kind", "gradual"}}), SchemaError);
    CHECK_THROWS_AS(fault_scenario_from_json({{"component", "tank5"}}), SchemaError);
    CHECK_THROWS_AS(tank_params_from_json({{"capacity", {1.0, 2.0, 3.0}}}), SchemaError);
    CHECK_THROWS_AS(tank_params_from_json({{"dt", "fast"}}), SchemaError);

    ordered_json f = to_json(FeatureRef{"y1", 0, Transform::identity});
    f["transform"] = "log";
    CHECK_THROWS_AS(feature_from_json(f), SchemaError);

    ordered_json z = to_json(ZTestResult{});
    z.erase("statistic");
    CHECK_THROWS_AS(z_test_from_json(z), SchemaError);

    ordered_json m = to_json(sample_model());
    m["coefficients"] = ordered_json::array({1.0});
    CHECK_THROWS_AS(linear_model_from_json(m), SchemaError);
}

// ============================================================================
// bank files
// ============================================================================

TEST_CASE("bank files round trip through their schema tag") {
    SearchConfig cfg;
    cfg.max_loads = 2;
    const std::vector<ResidualSpec> bank = {sample_spec()};
    const ordered_json j = bank_to_json(bank, cfg, 17, "2026-01-02T03:04:05Z");
    CHECK(j["schema"] == "arrkit.bank/1");
    CHECK(j["metadata"]["generated_at"] == "2026-01-02T03:04:05Z");
    CHECK(j["metadata"]["seed"] == 17);

    SearchConfig cfg_back;
    const std::vector<ResidualSpec> back = bank_from_json(j, &cfg_back);
    REQUIRE(back.size() == 1);
    CHECK(back[0].target == "int_u1");
    CHECK(same_bits(back[0].valid_score, bank[0].valid_score));
    CHECK(cfg_back.max_loads == 2);

    ordered_json wrong = j;
    wrong["schema"] = "arrkit.bank/2";
    CHECK_THROWS_AS(bank_from_json(wrong), SchemaError);
    ordered_json missing = j;
    missing.erase("schema");
    CHECK_THROWS_AS(bank_from_json(missing), SchemaError);
}

// ============================================================================
// files on disk
// ============================================================================

TEST_CASE("save and load are inverse and reject broken files") {
    const std::string path = temp_path("roundtrip");
    const ordered_json doc = to_json(sample_spec());
    save_json(doc, path);

    const ordered_json loaded = load_json(path);
    CHECK(loaded == doc);
    const ResidualSpec back = residual_spec_from_json(loaded);
    CHECK(same_bits(back.model.coefficients(0), 10.0));

    std::ifstream in(path, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(!text.empty());
    CHECK(text.back() == '\n');
    CHECK(text.find("  \"target\"") != std::string::npos);  // 2-space indent
    std::remove(path.c_str());

    CHECK_THROWS_AS(load_json("/tmp/arrkit_json_does_not_exist.json"), SchemaError);

    const std::string broken = temp_path("broken");
    std::ofstream(broken) << "{ not json";
    CHECK_THROWS_AS(load_json(broken), SchemaError);
    std::remove(broken.c_str());
}

TEST_CASE("timestamps use ISO-8601 UTC") {
    const std::string ts = iso_utc_now();
    REQUIRE(ts.size() == 20);
    CHECK(ts[4] == '-');
    CHECK(ts[7] == '-');
    CHECK(ts[10] == 'T');
    CHECK(ts[13] == ':');
    CHECK(ts[16] == ':');
    CHECK(ts[19] == 'Z');
    for (int i : {0, 1, 2, 3, 5, 6, 8, 9, 11, 12, 14, 15, 17, 18})
        CHECK((ts[i] >= '0' && ts[i] <= '9'));
}
