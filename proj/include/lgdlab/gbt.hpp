#pragma once

#include "lgdlab/matrix.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lgdlab::gbt {

// Hyperparameters of the squared-error booster.
struct GbtParams {
    double learning_rate = 0.3;
    int max_depth = 6;
    int n_estimators = 100;
    double subsample = 1.0;
    double min_child_weight = 1.0;
    double colsample_bytree = 1.0;
    double reg_lambda = 1.0;
    std::optional<double> base_score;  // unset: mean of the training targets
    std::uint64_t seed = 0;

    // Throws ConfigError naming the violated bound.
    void validate() const;

    bool operator==(const GbtParams&) const = default;
};

// A regression tree as flat node arrays; node 0 is the root. Leaves have
// feature == -1. Rows with x[feature] < threshold go left.
struct Tree {
    std::vector<int> feature;
    std::vector<double> threshold;
    std::vector<int> left;
    std::vector<int> right;
    std::vector<double> value;  // leaf weight before shrinkage
    std::vector<double> cover;  // training hessian sum reaching the node

    std::size_t size() const { return feature.size(); }
    bool is_leaf(std::size_t node) const { return feature[node] < 0; }
    int depth() const;

    // Leaf weight for row r of a column-major matrix.
    double leaf_value(const Matrix& x, std::size_t r) const {
        std::size_t n = 0;
        while (feature[n] >= 0) {
            n = x.at(r, static_cast<std::size_t>(feature[n])) < threshold[n] ? static_cast<std::size_t>(left[n])
                                                                               : static_cast<std::size_t>(right[n]);
        }
        return value[n];
    }

    bool operator==(const Tree&) const = default;
};

// prediction(x) = base_score + learning_rate * sum_k tree_k.leaf_value(x)
struct GbtModel {
    GbtParams params;
    double base_score = 0.0;
    std::vector<std::string> feature_schema;
    std::vector<Tree> trees;

    bool operator==(const GbtModel&) const = default;
};

// Optional diagnostics from train().
struct TrainLog {
    std::vector<double> train_mse;  // after each boosting round, over all training rows
};

// -G / (H + lambda); throws NumericError when H + lambda <= 0.
double leaf_weight(double gradient_sum, double hessian_sum, double reg_lambda);

// 1/2 [G_L^2/(H_L+l) + G_R^2/(H_R+l) - (G_L+G_R)^2/(H_L+H_R+l)]
inline double split_gain(double g_left, double h_left, double g_right, double h_right, double reg_lambda) {
    const double g = g_left + g_right;
    const double h = h_left + h_right;
    return 0.5 * (g_left * g_left / (h_left + reg_lambda) + g_right * g_right / (h_right + reg_lambda) -
                  g * g / (h + reg_lambda));
}

struct SplitCandidate {
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
};

// Exact greedy search over the given rows and candidate features. Thresholds
// are midpoints between adjacent distinct values. Returns nothing when no
// split has positive gain with both children meeting min_child_weight. Ties
// go to the lowest feature index, then the lowest threshold.
std::optional<SplitCandidate> best_split(const Matrix& x, std::span<const std::size_t> rows,
                                         std::span<const double> gradients, std::span<const double> hessians,
                                         std::span<const std::size_t> features, double min_child_weight,
                                         double reg_lambda);

// Fits a squared-error booster. Throws ValidationError on empty or
// non-finite input and ConfigError on invalid params. An empty schema is
// replaced by f0..f{p-1}.
GbtModel train(const Matrix& x, std::span<const double> y, const GbtParams& params,
               std::vector<std::string> feature_schema = {}, TrainLog* log = nullptr);

// Throws ValidationError when the column count differs from the schema.
std::vector<double> predict(const GbtModel& model, const Matrix& x);
// Also checks column names against the schema.
std::vector<double> predict(const GbtModel& model, const Matrix& x, std::span<const std::string> columns);

// Per-tree leaf weights, rows x trees.
Matrix tree_contributions(const GbtModel& model, const Matrix& x);

std::string to_json(const GbtModel& model);
// Throws ParseError on malformed documents.
GbtModel from_json(const std::string& text);

}  // namespace lgdlab::gbt
