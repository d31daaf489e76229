#pragma once

#include "lgdlab/gbt.hpp"
#include "lgdlab/matrix.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lgdlab::search {

enum class DimKind {
    List,         // explicit values
    IntRange,     // every integer in [lo, hi]
    UniformReal,  // `draws` seeded draws from U(lo, hi)
    UniformInt,   // `draws` seeded draws from the integers in [lo, hi]
};

struct Dimension {
    std::string name;  // a GbtParams field name
    DimKind kind = DimKind::List;
    std::vector<double> values;
    double lo = 0.0;
    double hi = 0.0;
    int draws = 15;

    bool operator==(const Dimension&) const = default;
};

struct ParamSpace {
    std::vector<Dimension> dims;
    gbt::GbtParams base;  // fields not covered by a dimension

    // Throws ConfigError for unknown names, duplicates, empty lists or
    // values that would break GbtParams invariants.
    void validate() const;
    bool is_finite() const;  // only List and IntRange dimensions
    // Interval dimensions replaced by their seeded draws.
    ParamSpace materialize(std::uint64_t seed) const;
    // Product of dimension sizes; requires a finite space.
    std::size_t grid_size() const;
    // Params for one value index per dimension of a finite space.
    gbt::GbtParams at(const std::vector<std::size_t>& choice) const;

    bool operator==(const ParamSpace&) const = default;
};

// Hyperparameter lists used for model tuning.
ParamSpace tuning_space();
// Wider interval space for the hyperparameter sensitivity run.
ParamSpace sensitivity_space();

inline constexpr std::array<std::string_view, 7> kTunableNames{
    "learning_rate", "max_depth", "n_estimators", "subsample", "min_child_weight", "colsample_bytree", "reg_lambda"};

// Fold id in [0, k) per element; equal keys share a fold. Groups are
// shuffled and dealt round-robin, so fold group counts differ by at most 1.
// Throws ConfigError when k < 2 or there are fewer than k distinct keys.
std::vector<int> kfold_split(std::span<const std::string> keys, int k, std::uint64_t seed);

struct CvScore {
    double mean_mse = 0.0;
    double mean_mae = 0.0;
    double sd_error = 0.0;  // population sd of the per-fold MSE
    std::vector<double> fold_mse;
    std::vector<double> fold_mae;

    bool operator==(const CvScore&) const = default;
};

// Cancellation hook polled before each fit.
using StopToken = std::function<bool()>;

// Trains on k-1 folds and scores the held-out one, for every fold.
CvScore cv_score(const Matrix& x, std::span<const double> y, std::span<const int> folds, int k,
                 const gbt::GbtParams& params, std::size_t workers = 1);
CvScore cv_score(const Matrix& x, std::span<const double> y, std::span<const std::string> groups,
                 const gbt::GbtParams& params, int k, std::uint64_t seed);

struct Candidate {
    gbt::GbtParams params;
    CvScore score;

    bool operator==(const Candidate&) const = default;
};

struct SearchResult {
    std::string mode;  // "random" or "grid"
    std::vector<Candidate> candidates;
    std::size_t best_index = 0;
    std::uint64_t seed = 0;
    int n_folds = 0;
    int n_iter = 0;
    std::size_t fits = 0;  // model fits actually executed
    std::vector<std::string> feature_schema;

    const Candidate& best() const { return candidates.at(best_index); }
    bool operator==(const SearchResult&) const = default;
};

struct SearchOptions {
    int k = 5;
    std::uint64_t seed = 0;
    bool row_level_folds = false;  // folds over rows instead of spell groups
    std::size_t workers = 0;       // 0: worker_count()
    std::size_t grid_budget = 5000;
    StopToken stop;
};

struct SearchData {
    const Matrix& x;
    std::span<const double> y;
    std::span<const std::string> groups;  // spell key per row
    std::vector<std::string> feature_schema;
};

// Candidate i is a pure function of (seed, i); values are drawn with
// replacement from the materialised space.
std::vector<gbt::GbtParams> random_candidates(const ParamSpace& space, int n_iter, std::uint64_t seed);

// n_iter candidates, each scored with k-fold CV; best = lowest mean MSE,
// earliest on ties. Throws ConfigError on an invalid space, Error when the
// stop token fires.
SearchResult random_search(const ParamSpace& space, int n_iter, const SearchData& data, const SearchOptions& opt);

// Full Cartesian product in lexicographic order (last dimension fastest).
// Refuses spaces larger than opt.grid_budget.
SearchResult grid_search(const ParamSpace& space, const SearchData& data, const SearchOptions& opt);

std::string to_json(const SearchResult& result);
SearchResult search_result_from_json(const std::string& text);
// One line per candidate: index, params, mean_mse, mean_mae, sd_error, best flag.
std::string to_csv(const SearchResult& result);

}  // namespace lgdlab::search
