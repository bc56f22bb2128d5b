// arrkit — command-line pipeline: simulate -> generate -> evaluate -> detect
// -> roc. Stages communicate only through files in the output directory
// (normal.csv, <scenario>.csv, bank.json, ...), so any stage can be re-run
// in isolation.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "arrkit/arrgen.hpp"
#include "arrkit/detect.hpp"
#include "arrkit/evaluate.hpp"
#include "arrkit/json_io.hpp"
#include "arrkit/tanksim.hpp"
#include "arrkit/timeseries.hpp"

namespace fs = std::filesystem;
using namespace arrkit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitDetected = 10;

// ============================================================================
// Config plumbing
// ============================================================================

std::string normal_path(const RunConfig& cfg) {
    return cfg.normal_path.empty() ? cfg.out_dir + "/normal.csv" : cfg.normal_path;
}

std::vector<std::pair<std::string, std::string>> fault_paths(const RunConfig& cfg) {
    if (!cfg.fault_paths.empty()) return cfg.fault_paths;
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& sc : cfg.scenarios)
        out.emplace_back(sc.name, cfg.out_dir + "/" + sc.name + ".csv");
    return out;
}

const FaultScenario* find_scenario(const RunConfig& cfg, const std::string& name) {
    for (const auto& sc : cfg.scenarios)
        if (sc.name == name) return &sc.fault;
    return nullptr;
}

// Every dataset enters the pipeline with int_* columns materialized over its
// full history, before any window slicing.
Dataset load_augmented(const std::string& path) {
    Dataset ds = read_csv(path);
    return add_integral_columns(ds, ds.names);
}

// Rows with time in [t_begin, t_end).
Dataset slice_time(const Dataset& ds, double t_begin, double t_end) {
    const auto n = ds.n_samples();
    const double lo = (t_begin - ds.t0) / ds.dt;
    const double hi = (t_end - ds.t0) / ds.dt;
    const std::size_t i0 =
        lo <= 0.0 ? 0 : std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(lo - 1e-9)));
    const std::size_t i1 =
        hi <= 0.0 ? 0 : std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(hi - 1e-9)));
    if (i0 + 2 > i1)
        throw InsufficientDataError("time window [" + std::to_string(t_begin) + ", " +
                                    std::to_string(t_end) + ") selects fewer than 2 samples");
    Dataset out;
    out.names = ds.names;
    out.dt = ds.dt;
    out.t0 = ds.time(i0);
    for (const auto& s : ds.samples)
        out.samples.emplace_back(s.begin() + static_cast<std::ptrdiff_t>(i0),
                                 s.begin() + static_cast<std::ptrdiff_t>(i1));
    return out;
}

std::string fmt_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, ptr};
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << text;
}

ordered_json metadata_block(const RunConfig& cfg) {
    return {{"generated_at", iso_utc_now()}, {"seed", cfg.seed}};
}

std::vector<ResidualSpec> load_bank(const RunConfig& cfg) {
    const std::string path = cfg.out_dir + "/bank.json";
    if (!fs::exists(path))
        throw ValidationError("missing residual bank " + path + " (run `generate` first)");
    return bank_from_json(load_json(path));
}

// ============================================================================
// simulate
// ============================================================================

int cmd_simulate(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    cfg.params.validate();
    for (const auto& sc : cfg.scenarios) sc.fault.validate(cfg.params.duration);

    // The baseline uses the master seed; scenario k uses seed + k + 1 so each
    // fault run carries an independent noise realization.
    const auto write_run = [&](const std::string& name, const FaultScenario& fault,
                               std::uint64_t seed) {
        const SimResult res = simulate_full(cfg.params, fault, seed);
        const std::string path = cfg.out_dir + "/" + name + ".csv";
        write_csv(res.measurements, path);
        std::cout << "wrote " << path << " (" << res.measurements.n_samples() << " samples)\n";
        if (cfg.save_states) write_csv(res.states, cfg.out_dir + "/" + name + "_states.csv");
    };

    FaultScenario none;
    none.kind = FaultKind::none;
    write_run("normal", none, cfg.seed);
    for (std::size_t k = 0; k < cfg.scenarios.size(); ++k)
        write_run(cfg.scenarios[k].name, cfg.scenarios[k].fault,
                  cfg.seed + static_cast<std::uint64_t>(k) + 1);
    return kExitOk;
}

// ============================================================================
// generate
// ============================================================================

std::string render_load(const FeatureRef& f) {
    if (f.lag == 0) return f.variable;
    return f.variable + "(t-" + std::to_string(f.lag) + ")";
}

std::string render_bank_table(const std::vector<std::string>& targets,
                              const std::vector<ResidualSpec>& bank) {
    std::size_t width = 8;
    for (const auto& t : targets) width = std::max(width, t.size() + 2);

    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(width)) << "target"
       << std::setw(44) << "selected loads" << "validation R2\n";
    os << std::string(width + 44 + 13, '-') << '\n';
    for (const auto& t : targets) {
        const auto it = std::find_if(bank.begin(), bank.end(),
                                     [&](const ResidualSpec& s) { return s.target == t; });
        os << std::setw(static_cast<int>(width)) << t;
        if (it == bank.end()) {
            os << std::setw(44) << "x" << "-\n";
            continue;
        }
        std::string loads;
        for (const auto& f : it->loads) {
            if (!loads.empty()) loads += ", ";
            loads += render_load(f);
        }
        os << std::setw(44) << loads << std::fixed << std::setprecision(5) << it->valid_score
           << '\n';
        os.unsetf(std::ios::fixed);
    }
    return os.str();
}

int cmd_generate(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const Dataset ds = load_augmented(normal_path(cfg));
    const auto bank = generate_residual_bank(ds, cfg.search, cfg.mode);
    if (bank.empty()) std::cerr << "warning: residual bank is empty\n";

    save_json(bank_to_json(bank, cfg.search, cfg.seed, iso_utc_now()), cfg.out_dir + "/bank.json");

    const auto& targets =
        cfg.search.candidate_variables.empty() ? ds.names : cfg.search.candidate_variables;
    const std::string table = render_bank_table(targets, bank);
    write_text(cfg.out_dir + "/bank_table.txt", table);
    std::cout << table << "wrote " << cfg.out_dir << "/bank.json (" << bank.size()
              << " residuals)\n";
    return kExitOk;
}

// ============================================================================
// evaluate
// ============================================================================

int cmd_evaluate(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const auto bank = load_bank(cfg);
    if (bank.empty()) throw ValidationError("evaluate: residual bank is empty");

    const Dataset normal = load_augmented(normal_path(cfg));
    const Dataset normal_valid =
        chrono_split(normal, SplitSpec{cfg.search.train_fraction}).second;

    std::map<std::string, Dataset> fault_windows;
    for (const auto& [name, path] : fault_paths(cfg)) {
        const FaultScenario* sc = find_scenario(cfg, name);
        if (!sc)
            throw ValidationError("evaluate: no scenario named '" + name +
                                  "' to provide the fault onset");
        const Dataset full = load_augmented(path);
        fault_windows.emplace(name,
                              slice_time(full, sc->onset, sc->onset + cfg.evaluation.window));
    }
    if (fault_windows.empty())
        throw ValidationError("evaluate: no fault datasets configured");

    double alpha = cfg.evaluation.alpha;
    if (cfg.evaluation.bonferroni)
        alpha /= static_cast<double>(bank.size() * fault_windows.size());

    const SignatureMatrix sig = isolability_matrix(bank, fault_windows, normal_valid, alpha);

    // CSV: residuals as rows, faults as columns, entries 0/1.
    std::ostringstream csv;
    csv << "residual";
    for (const auto& f : sig.faults) csv << ',' << f;
    csv << '\n';
    for (std::size_t i = 0; i < sig.residuals.size(); ++i) {
        csv << "r_" << sig.residuals[i];
        for (std::size_t j = 0; j < sig.faults.size(); ++j)
            csv << ',' << (sig.sensitive(i, j) ? 1 : 0);
        csv << '\n';
    }
    write_text(cfg.out_dir + "/signature.csv", csv.str());

    ordered_json pairs = ordered_json::array();
    for (std::size_t i = 0; i < sig.faults.size(); ++i)
        for (std::size_t j = i + 1; j < sig.faults.size(); ++j)
            pairs.push_back({{"fault_a", sig.faults[i]},
                             {"fault_b", sig.faults[j]},
                             {"isolable", sig.isolable(i, j)}});
    ordered_json doc = {{"schema", "arrkit.signature/1"},
                        {"metadata", metadata_block(cfg)},
                        {"alpha", alpha},
                        {"window", cfg.evaluation.window},
                        {"signature", to_json(sig)},
                        {"pairwise_isolability", std::move(pairs)}};
    save_json(doc, cfg.out_dir + "/signature.json");

    std::cout << csv.str() << "wrote " << cfg.out_dir << "/signature.{csv,json}\n";
    return kExitOk;
}

// ============================================================================
// detect
// ============================================================================

int cmd_detect(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const auto bank = load_bank(cfg);
    if (bank.empty()) throw ValidationError("detect: residual bank is empty");

    const Dataset normal = load_augmented(normal_path(cfg));
    const Dataset normal_valid =
        chrono_split(normal, SplitSpec{cfg.search.train_fraction}).second;

    std::map<std::string, Thresholds> thresholds;
    for (const auto& spec : bank)
        thresholds[spec.target] =
            learn_thresholds(residual_signal(spec, normal_valid), cfg.detection.persistence);

    // Pick the monitored dataset: explicit name, else the first configured
    // scenario, else the normal run itself.
    std::string name = cfg.detection.dataset;
    const auto paths = fault_paths(cfg);
    if (name.empty() && !paths.empty()) name = paths.front().first;

    Dataset monitored;
    FaultScenario scenario;  // kind == none
    std::string monitored_path = normal_path(cfg);
    if (name.empty()) {
        monitored = normal;
    } else {
        const auto it = std::find_if(paths.begin(), paths.end(),
                                     [&](const auto& p) { return p.first == name; });
        if (it == paths.end())
            throw ValidationError("detect: no dataset named '" + name + "'");
        monitored_path = it->second;
        monitored = load_augmented(monitored_path);
        if (const FaultScenario* sc = find_scenario(cfg, name)) scenario = *sc;
    }

    const DetectionReport report = detection_report(bank, monitored, scenario, thresholds);

    ordered_json jth = ordered_json::object();
    for (const auto& [target, th] : thresholds) jth["r_" + target] = to_json(th);
    ordered_json doc = {{"schema", "arrkit.detection/1"},
                        {"metadata", metadata_block(cfg)},
                        {"dataset", monitored_path},
                        {"thresholds", std::move(jth)},
                        {"report", to_json(report)}};
    save_json(doc, cfg.out_dir + "/detection.json");

    for (const auto& rd : report.residuals) {
        std::cout << "r_" << rd.residual << ": ";
        if (!rd.first_alarm_time) {
            std::cout << "no alarms\n";
        } else {
            std::cout << rd.alarm_count << " alarm samples, first at t=" << *rd.first_alarm_time
                      << " s";
            if (rd.detection_delay) std::cout << " (delay " << *rd.detection_delay << " s)";
            if (report.onset) std::cout << ", " << rd.false_alarms_before_onset << " pre-onset";
            std::cout << '\n';
        }
    }
    std::cout << (report.detected ? "FAULT DETECTED" : "no fault detected") << '\n';
    std::cout << "wrote " << cfg.out_dir << "/detection.json\n";
    return report.detected ? kExitDetected : kExitOk;
}

// ============================================================================
// roc
// ============================================================================

std::vector<int> onset_labels(const Dataset& ds, double onset) {
    std::vector<int> labels(ds.n_samples());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = ds.time(i) >= onset ? 1 : 0;
    return labels;
}

std::string roc_points_csv(const RocCurve& curve) {
    std::string out = "fpr,tpr\n";
    for (const auto& [fpr, tpr] : curve.points)
        out += fmt_double(fpr) + "," + fmt_double(tpr) + "\n";
    return out;
}

int cmd_roc(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const auto bank = load_bank(cfg);

    std::string train_name = cfg.roc.train;
    std::string test_name = cfg.roc.test;
    for (const auto& sc : cfg.scenarios) {
        if (train_name.empty() && sc.fault.kind == FaultKind::abrupt) train_name = sc.name;
        if (test_name.empty() && sc.fault.kind == FaultKind::incipient) test_name = sc.name;
    }
    if (train_name.empty() || test_name.empty())
        throw ValidationError("roc: needs an abrupt training scenario and an incipient test "
                              "scenario (or explicit roc.train / roc.test names)");

    const auto paths = fault_paths(cfg);
    const auto path_of = [&](const std::string& name) {
        const auto it = std::find_if(paths.begin(), paths.end(),
                                     [&](const auto& p) { return p.first == name; });
        if (it == paths.end()) throw ValidationError("roc: no dataset named '" + name + "'");
        return it->second;
    };
    const FaultScenario* sc_train = find_scenario(cfg, train_name);
    const FaultScenario* sc_test = find_scenario(cfg, test_name);
    if (!sc_train || !sc_test)
        throw ValidationError("roc: train/test names must match configured scenarios");

    const auto spec_it = std::find_if(bank.begin(), bank.end(), [&](const ResidualSpec& s) {
        return s.target == cfg.roc.residual;
    });
    if (spec_it == bank.end())
        throw ValidationError("roc: residual '" + cfg.roc.residual + "' not in bank");

    const Dataset train_ds = load_augmented(path_of(train_name));
    const Dataset test_ds = load_augmented(path_of(test_name));
    const auto [without, with] =
        roc_experiment(train_ds, onset_labels(train_ds, sc_train->onset), test_ds,
                       onset_labels(test_ds, sc_test->onset), *spec_it);

    ordered_json doc = {{"schema", "arrkit.roc/1"},
                        {"metadata", metadata_block(cfg)},
                        {"residual", cfg.roc.residual},
                        {"train", train_name},
                        {"test", test_name},
                        {"without_residual", to_json(without)},
                        {"with_residual", to_json(with)},
                        {"auc_gap", with.auc - without.auc}};
    save_json(doc, cfg.out_dir + "/roc.json");
    write_text(cfg.out_dir + "/roc_without.csv", roc_points_csv(without));
    write_text(cfg.out_dir + "/roc_with.csv", roc_points_csv(with));

    std::cout << std::fixed << std::setprecision(4) << "AUC sensors only:      " << without.auc
              << "\nAUC sensors+" << cfg.roc.residual << ": " << with.auc
              << "\ngap: " << with.auc - without.auc << '\n'
              << "wrote " << cfg.out_dir << "/roc.json and roc_{with,without}.csv\n";
    return kExitOk;
}

}  // namespace

// ============================================================================
// main
// ============================================================================

int main(int argc, char** argv) {
    CLI::App app{"data-driven residual generation and fault detection toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir, mode;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "JSON configuration file")
        ->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (overrides config)");
    auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides config)");
    app.add_option("--mode", mode, "residual search mode (overrides config)")
        ->check(CLI::IsMember({"forward", "exhaustive"}));

    auto* sim = app.add_subcommand("simulate", "write normal + per-scenario datasets");
    auto* gen = app.add_subcommand("generate", "search the normal dataset for residuals");
    auto* eva = app.add_subcommand("evaluate", "z-test residuals against fault datasets");
    auto* det = app.add_subcommand("detect", "threshold alarms on a monitored dataset");
    auto* roc = app.add_subcommand("roc", "classifier comparison with/without a residual");
    for (auto* sub : {sim, gen, eva, det, roc}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = run_config_from_json(load_json(config_path));
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (seed_opt->count() > 0) cfg.seed = seed;
        if (!mode.empty())
            cfg.mode = mode == "exhaustive" ? SearchMode::exhaustive : SearchMode::forward;

        if (sim->parsed()) return cmd_simulate(cfg);
        if (gen->parsed()) return cmd_generate(cfg);
        if (eva->parsed()) return cmd_evaluate(cfg);
        if (det->parsed()) return cmd_detect(cfg);
        return cmd_roc(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
}
