#include "arrkit/arrgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace arrkit {

namespace {

// ============================================================================
// Helpers
// ============================================================================

bool is_constant(const std::vector<double>& s) {
    for (double v : s)
        if (v != s.front()) return false;
    return true;
}

bool self_reference(const std::string& target, const std::vector<FeatureRef>& features) {
    for (const auto& f : features)
        if (f.variable == target && f.lag == 0 && f.transform == Transform::identity)
            return true;
    return false;
}

// Candidate variable pool: configured list (or every column), minus the
// target at all lags, minus constant columns.
std::vector<std::string> candidate_pool(const Dataset& ds, const std::string& target,
                                        const SearchConfig& config) {
    std::vector<std::string> pool;
    const auto& base = config.candidate_variables.empty() ? ds.names
                                                          : config.candidate_variables;
    for (const auto& name : base) {
        if (name == target) continue;
        if (is_constant(ds.col(name))) continue;
        pool.push_back(name);
    }
    return pool;
}

struct FitResult {
    bool accepted = false;
    LinearModel model;
};

FitResult fit_features(const Dataset& train, const Dataset& valid, const std::string& target,
                       const std::vector<FeatureRef>& features, const SearchConfig& config) {
    FitResult r;
    try {
        auto [Xt, yt] = build_design_matrix(train, features, target);
        auto [Xv, yv] = build_design_matrix(valid, features, target);
        r.model = fit_least_squares(Xt, yt);
        r.model.feature_schema = features;
        r.model.valid_score = r2_score(yv, predict(r.model, Xv));
        r.accepted = r.model.valid_score >= config.r2_min;
    } catch (const DegenerateDataError&) {
        r.accepted = false;  // constant target: no ARR possible
    }
    return r;
}

}  // namespace

// ============================================================================
// is_arr
// ============================================================================

std::pair<bool, LinearModel> is_arr(const Dataset& ds_train, const Dataset& ds_valid,
                                    const std::string& target,
                                    const std::vector<FeatureRef>& features,
                                    const SearchConfig& config) {
    if (features.empty()) throw ValidationError("is_arr: empty feature list");
    if (self_reference(target, features))
        throw ValidationError("is_arr: target self-reference at lag 0");
    FitResult r = fit_features(ds_train, ds_valid, target, features, config);
    return {r.accepted, std::move(r.model)};
}

// ============================================================================
// Forward selection (with delays)
// ============================================================================

std::optional<ResidualSpec> forward_select_with_delays(const Dataset& ds,
                                                       const std::string& target,
                                                       const SearchConfig& config) {
    if (!ds.has(target)) throw SchemaError("forward_select: unknown target " + target);
    if (is_constant(ds.col(target))) return std::nullopt;

    auto [train, valid] = chrono_split(ds, SplitSpec{config.train_fraction});
    const auto pool = candidate_pool(ds, target, config);
    if (pool.empty()) throw ValidationError("forward_select: no candidate features");

    std::vector<FeatureRef> loads;
    LinearModel best_model;
    double score = 0.0;
    bool have_score = false;

    for (int round = 0; round < config.max_loads; ++round) {
        bool found = false;
        double cand_score = 0.0;
        FeatureRef cand;
        LinearModel cand_model;

        for (const auto& name : pool) {
            for (int d : config.delays) {
                FeatureRef f{name, d, Transform::identity};
                if (std::find(loads.begin(), loads.end(), f) != loads.end()) continue;
                auto features = loads;
                features.push_back(f);
                FitResult r = fit_features(train, valid, target, features, config);
                if (!std::isfinite(r.model.valid_score)) continue;
                const double s = r.model.valid_score;
                // Ties within 1e-12: smaller lag wins, then smaller name.
                const bool better =
                    !found || s > cand_score + 1e-12 ||
                    (std::abs(s - cand_score) <= 1e-12 &&
                     (f.lag < cand.lag || (f.lag == cand.lag && f.variable < cand.variable)));
                if (better) {
                    found = true;
                    cand_score = s;
                    cand = f;
                    cand_model = std::move(r.model);
                }
            }
        }
        if (!found) break;
        const double current = have_score ? score : 0.0;
        if (cand_score <= current + config.improvement_margin) break;
        loads.push_back(cand);
        best_model = std::move(cand_model);
        score = cand_score;
        have_score = true;
        if (score >= config.r2_min) break;
    }

    if (!have_score || score < config.r2_min) return std::nullopt;

    ResidualSpec spec;
    spec.target = target;
    spec.loads = loads;
    spec.model = std::move(best_model);
    spec.valid_score = score;
    return prune_loads(ds, spec, config);
}

// ============================================================================
// Pruning
// ============================================================================

ResidualSpec prune_loads(const Dataset& ds, const ResidualSpec& spec,
                         const SearchConfig& config) {
    if (spec.valid_score < config.r2_min)
        throw ValidationError("prune_loads: spec below acceptance threshold");

    auto [train, valid] = chrono_split(ds, SplitSpec{config.train_fraction});
    ResidualSpec out = spec;

    // One backward sweep in reverse order of addition.
    for (std::size_t k = spec.loads.size(); k-- > 0;) {
        if (out.loads.size() == 1) break;
        auto it = std::find(out.loads.begin(), out.loads.end(), spec.loads[k]);
        if (it == out.loads.end()) continue;
        auto reduced = out.loads;
        reduced.erase(reduced.begin() + (it - out.loads.begin()));
        FitResult r = fit_features(train, valid, spec.target, reduced, config);
        if (r.accepted) {
            out.loads = std::move(reduced);
            out.model = std::move(r.model);
            out.valid_score = out.model.valid_score;
        }
    }

    // Single-deletion minimality check.
    out.minimal = true;
    if (out.loads.size() > 1) {
        for (std::size_t k = 0; k < out.loads.size() && out.minimal; ++k) {
            auto reduced = out.loads;
            reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(k));
            if (fit_features(train, valid, spec.target, reduced, config).accepted)
                out.minimal = false;
        }
    }
    return out;
}

// ============================================================================
// Exhaustive minimal-ARR search
// ============================================================================

namespace {

struct ExhaustiveState {
    const Dataset* train = nullptr;
    const Dataset* valid = nullptr;
    const std::string* target = nullptr;
    const SearchConfig* config = nullptr;
    std::vector<std::string> vars;                  // candidate pool, fixed order
    std::map<std::vector<char>, FitResult> memo;    // subset mask -> fit
    std::set<std::vector<char>> visited;
    std::vector<ResidualSpec> minimal;
    int fits = 0;

    std::vector<FeatureRef> features_of(const std::vector<char>& mask) const {
        std::vector<FeatureRef> f;
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (mask[i])
                for (int d : config->delays)
                    f.push_back({vars[i], d, Transform::identity});
        return f;
    }

    const FitResult& fit(const std::vector<char>& mask) {
        auto it = memo.find(mask);
        if (it != memo.end()) return it->second;
        if (++fits > config->subset_budget)
            throw BudgetExceededError(
                "exhaustive search exceeded its fitted-subset budget; "
                "use forward selection for this dataset");
        FitResult r = fit_features(*train, *valid, *target, features_of(mask), *config);
        return memo.emplace(mask, std::move(r)).first->second;
    }

    void descend(const std::vector<char>& mask, std::size_t popcount) {
        if (!visited.insert(mask).second) return;
        bool any_child_arr = false;
        if (popcount >= 2) {
            for (std::size_t i = 0; i < vars.size(); ++i) {
                if (!mask[i]) continue;
                auto child = mask;
                child[i] = 0;
                // Subsets of a failing set are assumed to fail too, so only
                // accepted children are descended into.
                if (fit(child).accepted) {
                    any_child_arr = true;
                    descend(child, popcount - 1);
                }
            }
        }
        if (!any_child_arr) {
            const FitResult& r = fit(mask);
            ResidualSpec spec;
            spec.target = *target;
            spec.loads = features_of(mask);
            spec.model = r.model;
            spec.valid_score = r.model.valid_score;
            spec.minimal = true;
            minimal.push_back(std::move(spec));
        }
    }
};

}  // namespace

std::vector<ResidualSpec> exhaustive_minimal_arrs(const Dataset& ds,
                                                  const std::string& target,
                                                  const SearchConfig& config) {
    if (!ds.has(target)) throw SchemaError("exhaustive search: unknown target " + target);
    if (is_constant(ds.col(target))) return {};

    auto [train, valid] = chrono_split(ds, SplitSpec{config.train_fraction});
    ExhaustiveState st;
    st.train = &train;
    st.valid = &valid;
    st.target = &target;
    st.config = &config;
    st.vars = candidate_pool(ds, target, config);
    if (st.vars.size() < 2)
        throw ValidationError("exhaustive search needs >= 2 candidate variables");

    std::vector<char> full(st.vars.size(), 1);
    if (!st.fit(full).accepted) return {};  // no residual exists for this target
    st.descend(full, st.vars.size());
    return st.minimal;
}

// ============================================================================
// Residual bank
// ============================================================================

std::vector<ResidualSpec> generate_residual_bank(const Dataset& ds,
                                                 const SearchConfig& config,
                                                 SearchMode mode) {
    ds.validate();
    std::vector<std::string> targets =
        config.candidate_variables.empty() ? ds.names : config.candidate_variables;

    std::vector<ResidualSpec> bank;
    for (const auto& target : targets) {
        if (is_constant(ds.col(target))) continue;
        if (mode == SearchMode::forward) {
            if (auto spec = forward_select_with_delays(ds, target, config))
                bank.push_back(std::move(*spec));
        } else {
            auto specs = exhaustive_minimal_arrs(ds, target, config);
            bank.insert(bank.end(), std::make_move_iterator(specs.begin()),
                        std::make_move_iterator(specs.end()));
        }
    }
    return bank;
}

}  // namespace arrkit
