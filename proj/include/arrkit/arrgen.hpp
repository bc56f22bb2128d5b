#ifndef ARRKIT_ARRGEN_HPP
#define ARRKIT_ARRGEN_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "arrkit/regress.hpp"
#include "arrkit/timeseries.hpp"

namespace arrkit {

// ============================================================================
// Search configuration
// ============================================================================

struct SearchConfig {
    double r2_min = 0.99;            // validation-R^2 acceptance threshold
    double improvement_margin = 0.005;  // required per-step greedy gain
    int max_loads = 5;
    std::vector<int> delays = {0, 1, 2, 3};  // sample lags
    std::vector<std::string> candidate_variables;  // empty = all columns
    double train_fraction = 0.7;     // chronological split used for scoring
    int subset_budget = 20000;       // exhaustive search: max fitted subsets
};

// A learned ARR: target, selected loads, fitted model, validation score.
struct ResidualSpec {
    std::string target;
    std::vector<FeatureRef> loads;
    LinearModel model;
    double valid_score = 0.0;
    bool minimal = false;  // no single load can be removed (greedy path) /
                           // no proper variable subset is an ARR (exhaustive)
};

enum class SearchMode { forward, exhaustive };

// ============================================================================
// Operations
// ============================================================================

// Fits on ds_train, scores on ds_valid. True iff validation R^2 >= r2_min.
// The fitted model is returned either way. A constant target is reported as
// "no ARR possible" (false) rather than an error.
std::pair<bool, LinearModel> is_arr(const Dataset& ds_train, const Dataset& ds_valid,
                                    const std::string& target,
                                    const std::vector<FeatureRef>& features,
                                    const SearchConfig& config);

// Greedy forward selection over (variable, delay) candidates; the target
// variable is excluded at every lag. Adopts the best candidate only when it
// beats the current score by improvement_margin; stops early at r2_min;
// prunes before returning. Empty optional = "no residual for this target".
std::optional<ResidualSpec> forward_select_with_delays(const Dataset& ds,
                                                       const std::string& target,
                                                       const SearchConfig& config);

// Backward pass in reverse order of addition: drop any load whose removal
// keeps validation R^2 >= r2_min. Sets minimal=true iff afterwards no single
// remaining load can be removed.
ResidualSpec prune_loads(const Dataset& ds, const ResidualSpec& spec,
                         const SearchConfig& config);

// Top-down recursion from the full candidate-variable set; a subset's
// feature list is the subset crossed with every configured delay. Returns
// exactly the subset-minimal ARRs. Memoized; throws BudgetExceededError when
// more than subset_budget distinct subsets get fitted.
std::vector<ResidualSpec> exhaustive_minimal_arrs(const Dataset& ds,
                                                  const std::string& target,
                                                  const SearchConfig& config);

// Runs the selected search for every candidate target column (constant
// columns are skipped). Deterministic given dataset and config.
std::vector<ResidualSpec> generate_residual_bank(const Dataset& ds,
                                                 const SearchConfig& config,
                                                 SearchMode mode);

}  // namespace arrkit

#endif  // ARRKIT_ARRGEN_HPP
