#pragma once

// JSON artifact serialization. Every artifact writer is deterministic: keys
// are emitted in a fixed order and doubles round-trip bit-faithfully, so two
// runs with the same inputs produce byte-identical files except for the
// `generated_at` metadata field.

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "arrkit/arrgen.hpp"
#include "arrkit/detect.hpp"
#include "arrkit/evaluate.hpp"
#include "arrkit/tanksim.hpp"

namespace arrkit {

using ordered_json = nlohmann::ordered_json;

// ============================================================================
// Top-level run configuration (CLI input file)
// ============================================================================

struct EvaluationConfig {
    double alpha = 0.01;
    bool bonferroni = false;  // divide alpha by the number of matrix cells
    double window = 600.0;    // seconds of post-onset data per fault column
};

struct DetectionConfig {
    int persistence = 3;  // consecutive out-of-bounds samples per alarm
    std::string dataset;  // scenario/fault name to monitor; empty = first
                          // configured scenario, or the normal run if none
};

struct RocConfig {
    std::string residual = "int_u1";  // bank target appended as a feature
    std::string train;  // scenario names; empty = first abrupt / first
    std::string test;   // incipient scenario in the list
};

struct ScenarioEntry {
    std::string name;  // artifact base name (e.g. tank1_incipient)
    FaultScenario fault;
};

struct RunConfig {
    // Dataset paths for stages run without `simulate`; empty entries resolve
    // to <out_dir>/normal.csv and <out_dir>/<scenario name>.csv.
    std::string normal_path;
    std::vector<std::pair<std::string, std::string>> fault_paths;

    SearchConfig search;
    EvaluationConfig evaluation;
    DetectionConfig detection;
    RocConfig roc;

    TankParams params;
    std::vector<ScenarioEntry> scenarios;
    std::uint64_t seed = 1;
    bool save_states = false;  // also write clean-state debug CSVs

    SearchMode mode = SearchMode::forward;
    std::string out_dir = ".";
};

// ============================================================================
// Value conversions
// ============================================================================

ordered_json to_json(const FeatureRef& f);
FeatureRef feature_from_json(const ordered_json& j);

ordered_json to_json(const LinearModel& m);
LinearModel linear_model_from_json(const ordered_json& j);

ordered_json to_json(const ResidualSpec& spec);
ResidualSpec residual_spec_from_json(const ordered_json& j);

ordered_json to_json(const SearchConfig& cfg);
SearchConfig search_config_from_json(const ordered_json& j);

ordered_json to_json(const ZTestResult& r);
ZTestResult z_test_from_json(const ordered_json& j);

ordered_json to_json(const SignatureMatrix& m);
SignatureMatrix signature_from_json(const ordered_json& j);

ordered_json to_json(const Thresholds& th);
Thresholds thresholds_from_json(const ordered_json& j);

ordered_json to_json(const DetectionReport& report);
DetectionReport detection_report_from_json(const ordered_json& j);

ordered_json to_json(const RocCurve& curve);
RocCurve roc_curve_from_json(const ordered_json& j);

ordered_json to_json(const MultisineSpec& s);
MultisineSpec multisine_from_json(const ordered_json& j);

ordered_json to_json(const TankParams& p);
TankParams tank_params_from_json(const ordered_json& j);

ordered_json to_json(const FaultScenario& s);
FaultScenario fault_scenario_from_json(const ordered_json& j);

ordered_json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const ordered_json& j);

// ============================================================================
// Artifact files
// ============================================================================

// Residual bank with search-config snapshot and metadata. `generated_at` is
// the only field that varies between identical runs.
ordered_json bank_to_json(const std::vector<ResidualSpec>& bank, const SearchConfig& cfg,
                          std::uint64_t seed, const std::string& generated_at);
std::vector<ResidualSpec> bank_from_json(const ordered_json& j, SearchConfig* cfg_out = nullptr);

ordered_json load_json(const std::string& path);                  // SchemaError on bad JSON
void save_json(const ordered_json& j, const std::string& path);   // 2-space indent, trailing \n

std::string iso_utc_now();

}  // namespace arrkit
