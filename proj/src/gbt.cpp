#include "lgdlab/gbt.hpp"

#include "lgdlab/error.hpp"
#include "lgdlab/parallel.hpp"

#include "json_params.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace lgdlab::gbt {

namespace {

double midpoint(double lo, double hi) {
    double mid = lo + (hi - lo) / 2.0;
    // Adjacent doubles: the midpoint may round onto `lo`.
    return mid > lo ? mid : hi;
}

void require_finite(const Matrix& x, std::span<const double> y) {
    if (x.rows() == 0 || x.cols() == 0) throw ValidationError("training data is empty");
    if (y.size() != x.rows()) {
        throw ValidationError("target length " + std::to_string(y.size()) + " != row count " +
                              std::to_string(x.rows()));
    }
    for (std::size_t c = 0; c < x.cols(); ++c) {
        auto col = x.column(c);
        for (std::size_t r = 0; r < col.size(); ++r) {
            if (!std::isfinite(col[r])) {
                throw ValidationError("non-finite feature value at row " + std::to_string(r) + ", column " +
                                      std::to_string(c));
            }
        }
    }
    for (std::size_t r = 0; r < y.size(); ++r) {
        if (!std::isfinite(y[r])) throw ValidationError("non-finite target at row " + std::to_string(r));
    }
}

// Grows one tree level by level. Each sampled feature keeps the sampled rows
// sorted by value; a level scans every live node's segment and then stably
// partitions the segments of split nodes, so ordering never has to be redone.
class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, const GbtParams& params) : x_(x), params_(params) {
        const std::size_t n = x.rows();
        order_.resize(x.cols());
        for (std::size_t f = 0; f < x.cols(); ++f) {
            auto col = x.column(f);
            auto& ord = order_[f];
            ord.resize(n);
            std::iota(ord.begin(), ord.end(), 0u);
            std::stable_sort(ord.begin(), ord.end(), [&col](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
        }
        go_right_.assign(n, 0);
        tmp_idx_.resize(n);
        tmp_val_.resize(n);
    }

    Tree build(std::span<const double> grad, const std::vector<std::uint8_t>& in_sample,
               const std::vector<std::size_t>& features) {
        const std::size_t slots = features.size();
        idx_.resize(slots);
        val_.resize(slots);
        std::size_t m = 0;
        for (std::size_t s = 0; s < slots; ++s) {
            auto col = x_.column(features[s]);
            auto& ix = idx_[s];
            auto& vv = val_[s];
            ix.clear();
            vv.clear();
            for (std::uint32_t r : order_[features[s]]) {
                if (in_sample[r]) {
                    ix.push_back(r);
                    vv.push_back(col[r]);
                }
            }
            m = ix.size();
        }

        double g_root = 0.0;
        for (std::size_t r = 0; r < in_sample.size(); ++r) {
            if (in_sample[r]) g_root += grad[r];
        }

        Tree tree;
        add_node(tree, static_cast<double>(m));
        std::vector<Segment> live{{0, 0, static_cast<std::uint32_t>(m), g_root, static_cast<double>(m), 0}};
        std::vector<Pending> splits;
        std::vector<Segment> next;
        while (!live.empty()) {
            splits.clear();
            next.clear();
            for (const auto& seg : live) {
                auto found = find_split(seg, grad);
                if (!found) {
                    tree.value[seg.node] = leaf_weight(seg.g, seg.h, params_.reg_lambda);
                    continue;
                }
                const int l = add_node(tree, found->h_left);
                const int r = add_node(tree, seg.h - found->h_left);
                tree.feature[seg.node] = static_cast<int>(features[found->slot]);
                tree.threshold[seg.node] = found->threshold;
                tree.left[seg.node] = l;
                tree.right[seg.node] = r;
                splits.push_back({seg, *found});
                const std::uint32_t mid = seg.begin + found->n_left;
                next.push_back({l, seg.begin, mid, found->g_left, found->h_left, seg.depth + 1});
                next.push_back({r, mid, seg.end, seg.g - found->g_left, seg.h - found->h_left, seg.depth + 1});
            }
            if (!splits.empty()) partition(splits);
            live.swap(next);
        }
        return tree;
    }

private:
    struct Segment {
        int node;
        std::uint32_t begin, end;
        double g, h;
        int depth;
    };
    struct Found {
        std::size_t slot;
        std::uint32_t n_left;
        double threshold;
        double gain;
        double g_left, h_left;
    };
    struct Pending {
        Segment seg;
        Found split;
    };

    static int add_node(Tree& t, double cover) {
        t.feature.push_back(-1);
        t.threshold.push_back(0.0);
        t.left.push_back(-1);
        t.right.push_back(-1);
        t.value.push_back(0.0);
        t.cover.push_back(cover);
        return static_cast<int>(t.feature.size() - 1);
    }

    std::optional<Found> find_split(const Segment& seg, std::span<const double> grad) const {
        const double mcw = params_.min_child_weight;
        const double lambda = params_.reg_lambda;
        const std::uint32_t count = seg.end - seg.begin;
        if (seg.depth >= params_.max_depth || count < 2 || seg.h < 2.0 * mcw) return std::nullopt;

        std::optional<Found> best;
        double best_gain = 0.0;
        double best_score = -1.0;
        for (std::size_t s = 0; s < idx_.size(); ++s) {
            const std::uint32_t* ix = idx_[s].data() + seg.begin;
            const double* v = val_[s].data() + seg.begin;
            double g_left = 0.0;
            for (std::uint32_t k = 0; k + 1 < count; ++k) {
                g_left += grad[ix[k]];
                const double h_left = static_cast<double>(k + 1);
                const double h_right = seg.h - h_left;
                if (h_right < mcw) break;
                if (v[k] == v[k + 1] || h_left < mcw) continue;
                // The parent term is constant within the node, so children
                // scores rank candidates; the gain is only formed for leaders.
                const double g_right = seg.g - g_left;
                const double score = g_left * g_left / (h_left + lambda) + g_right * g_right / (h_right + lambda);
                if (score <= best_score) continue;
                const double gain = split_gain(g_left, h_left, g_right, h_right, lambda);
                if (gain > best_gain) {
                    best_score = score;
                    best_gain = gain;
                    best = Found{s, k + 1, midpoint(v[k], v[k + 1]), gain, g_left, h_left};
                }
            }
        }
        return best;
    }

    void partition(const std::vector<Pending>& splits) {
        for (const auto& p : splits) {
            const auto& ix = idx_[p.split.slot];
            for (std::uint32_t k = p.seg.begin; k < p.seg.end; ++k) {
                go_right_[ix[k]] = k >= p.seg.begin + p.split.n_left ? 1 : 0;
            }
        }
        for (std::size_t s = 0; s < idx_.size(); ++s) {
            auto& ix = idx_[s];
            auto& vv = val_[s];
            for (const auto& p : splits) {
                if (p.split.slot == s) continue;  // already ordered left | right
                std::uint32_t out = p.seg.begin;
                std::uint32_t spill = 0;
                for (std::uint32_t k = p.seg.begin; k < p.seg.end; ++k) {
                    const std::uint32_t r = ix[k];
                    if (go_right_[r]) {
                        tmp_idx_[spill] = r;
                        tmp_val_[spill] = vv[k];
                        ++spill;
                    } else {
                        ix[out] = r;
                        vv[out] = vv[k];
                        ++out;
                    }
                }
                std::copy_n(tmp_idx_.begin(), spill, ix.begin() + out);
                std::copy_n(tmp_val_.begin(), spill, vv.begin() + out);
            }
        }
    }

    const Matrix& x_;
    const GbtParams& params_;
    std::vector<std::vector<std::uint32_t>> order_;
    std::vector<std::vector<std::uint32_t>> idx_;
    std::vector<std::vector<double>> val_;
    std::vector<std::uint8_t> go_right_;
    std::vector<std::uint32_t> tmp_idx_;
    std::vector<double> tmp_val_;
};

std::size_t sample_count(double fraction, std::size_t n) {
    auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
    return std::clamp<std::size_t>(k, 1, n);
}

}  // namespace

void GbtParams::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("invalid GBT params: " + what); };
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) fail("learning_rate must be in (0, 1]");
    if (max_depth < 1) fail("max_depth must be >= 1");
    if (n_estimators < 1) fail("n_estimators must be >= 1");
    if (!(subsample > 0.0 && subsample <= 1.0)) fail("subsample must be in (0, 1]");
    if (!(colsample_bytree > 0.0 && colsample_bytree <= 1.0)) fail("colsample_bytree must be in (0, 1]");
    if (!(min_child_weight >= 0.0)) fail("min_child_weight must be >= 0");
    if (!(reg_lambda >= 0.0)) fail("reg_lambda must be >= 0");
    if (base_score && !std::isfinite(*base_score)) fail("base_score must be finite");
}

int Tree::depth() const {
    if (feature.empty()) return 0;
    std::vector<int> d(feature.size(), 0);
    int deepest = 0;
    for (std::size_t n = 0; n < feature.size(); ++n) {
        deepest = std::max(deepest, d[n]);
        if (feature[n] >= 0) {
            d[static_cast<std::size_t>(left[n])] = d[n] + 1;
            d[static_cast<std::size_t>(right[n])] = d[n] + 1;
        }
    }
    return deepest;
}

double leaf_weight(double gradient_sum, double hessian_sum, double reg_lambda) {
    const double denom = hessian_sum + reg_lambda;
    if (!(denom > 0.0)) throw NumericError("leaf weight denominator H + lambda must be positive");
    return -gradient_sum / denom;
}

std::optional<SplitCandidate> best_split(const Matrix& x, std::span<const std::size_t> rows,
                                         std::span<const double> gradients, std::span<const double> hessians,
                                         std::span<const std::size_t> features, double min_child_weight,
                                         double reg_lambda) {
    if (rows.size() < 2) return std::nullopt;
    double g_total = 0.0;
    double h_total = 0.0;
    for (std::size_t r : rows) {
        g_total += gradients[r];
        h_total += hessians[r];
    }
    std::vector<std::size_t> feats(features.begin(), features.end());
    std::sort(feats.begin(), feats.end());

    std::optional<SplitCandidate> best;
    std::vector<std::size_t> sorted(rows.begin(), rows.end());
    for (std::size_t f : feats) {
        auto col = x.column(f);
        std::sort(sorted.begin(), sorted.end());
        std::stable_sort(sorted.begin(), sorted.end(), [&col](std::size_t a, std::size_t b) { return col[a] < col[b]; });
        double g_left = 0.0;
        double h_left = 0.0;
        for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
            g_left += gradients[sorted[k]];
            h_left += hessians[sorted[k]];
            const double lo = col[sorted[k]];
            const double hi = col[sorted[k + 1]];
            if (lo == hi) continue;
            const double h_right = h_total - h_left;
            if (h_left < min_child_weight || h_right < min_child_weight) continue;
            const double gain = split_gain(g_left, h_left, g_total - g_left, h_right, reg_lambda);
            if (gain > (best ? best->gain : 0.0)) best = SplitCandidate{f, midpoint(lo, hi), gain};
        }
    }
    return best;
}

GbtModel train(const Matrix& x, std::span<const double> y, const GbtParams& params,
               std::vector<std::string> feature_schema, TrainLog* log) {
    params.validate();
    require_finite(x, y);
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    if (feature_schema.empty()) {
        for (std::size_t c = 0; c < p; ++c) feature_schema.push_back("f" + std::to_string(c));
    }
    if (feature_schema.size() != p) throw ValidationError("feature schema size does not match column count");

    GbtModel model;
    model.params = params;
    model.feature_schema = std::move(feature_schema);
    model.base_score = params.base_score ? *params.base_score
                                         : std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    model.trees.reserve(static_cast<std::size_t>(params.n_estimators));

    std::vector<double> pred(n, model.base_score);
    std::vector<double> grad(n);
    std::vector<std::uint8_t> in_sample(n);
    std::vector<std::size_t> perm(n);
    std::vector<std::size_t> all_features(p);
    std::iota(all_features.begin(), all_features.end(), 0);
    const std::size_t n_rows = sample_count(params.subsample, n);
    const std::size_t n_cols = sample_count(params.colsample_bytree, p);

    TreeBuilder builder(x, params);
    for (int k = 0; k < params.n_estimators; ++k) {
        std::mt19937_64 rng(derive_seed(params.seed, static_cast<std::uint64_t>(k)));
        if (n_rows == n) {
            std::fill(in_sample.begin(), in_sample.end(), 1);
        } else {
            std::fill(in_sample.begin(), in_sample.end(), 0);
            std::iota(perm.begin(), perm.end(), 0);
            for (std::size_t i = 0; i < n_rows; ++i) {
                std::size_t j = std::uniform_int_distribution<std::size_t>(i, n - 1)(rng);
                std::swap(perm[i], perm[j]);
                in_sample[perm[i]] = 1;
            }
        }
        std::vector<std::size_t> features = all_features;
        if (n_cols < p) {
            for (std::size_t i = 0; i < n_cols; ++i) {
                std::size_t j = std::uniform_int_distribution<std::size_t>(i, p - 1)(rng);
                std::swap(features[i], features[j]);
            }
            features.resize(n_cols);
            std::sort(features.begin(), features.end());
        }

        for (std::size_t r = 0; r < n; ++r) grad[r] = pred[r] - y[r];
        Tree tree = builder.build(grad, in_sample, features);
        for (std::size_t r = 0; r < n; ++r) pred[r] += params.learning_rate * tree.leaf_value(x, r);
        model.trees.push_back(std::move(tree));

        if (log) {
            double sse = 0.0;
            for (std::size_t r = 0; r < n; ++r) sse += (pred[r] - y[r]) * (pred[r] - y[r]);
            log->train_mse.push_back(sse / static_cast<double>(n));
        }
    }
    return model;
}

std::vector<double> predict(const GbtModel& model, const Matrix& x) {
    if (x.cols() != model.feature_schema.size()) {
        throw ValidationError("matrix has " + std::to_string(x.cols()) + " columns, model expects " +
                              std::to_string(model.feature_schema.size()));
    }
    std::vector<double> sums(x.rows(), 0.0);
    for (const auto& tree : model.trees) {
        for (std::size_t r = 0; r < x.rows(); ++r) sums[r] += tree.leaf_value(x, r);
    }
    for (auto& s : sums) s = model.base_score + model.params.learning_rate * s;
    return sums;
}

std::vector<double> predict(const GbtModel& model, const Matrix& x, std::span<const std::string> columns) {
    if (!std::equal(columns.begin(), columns.end(), model.feature_schema.begin(), model.feature_schema.end())) {
        std::string got;
        for (const auto& c : columns) got += (got.empty() ? "" : ",") + c;
        throw ValidationError("column names [" + got + "] do not match the model schema");
    }
    return predict(model, x);
}

Matrix tree_contributions(const GbtModel& model, const Matrix& x) {
    if (x.cols() != model.feature_schema.size()) throw ValidationError("column count does not match model schema");
    Matrix out(x.rows(), model.trees.size());
    for (std::size_t k = 0; k < model.trees.size(); ++k) {
        auto col = out.column(k);
        for (std::size_t r = 0; r < x.rows(); ++r) col[r] = model.trees[k].leaf_value(x, r);
    }
    return out;
}

std::string to_json(const GbtModel& model) {
    using nlohmann::json;
    json params = detail::params_to_json(model.params);
    json trees = json::array();
    for (const auto& t : model.trees) {
        trees.push_back({{"feature", t.feature},
                         {"threshold", t.threshold},
                         {"left", t.left},
                         {"right", t.right},
                         {"value", t.value},
                         {"cover", t.cover}});
    }
    json doc = {{"format", "lgdlab.gbt"},
                {"version", 1},
                {"params", params},
                {"base_score", model.base_score},
                {"feature_schema", model.feature_schema},
                {"trees", trees}};
    return doc.dump(1);
}

GbtModel from_json(const std::string& text) {
    using nlohmann::json;
    try {
        const json doc = json::parse(text);
        if (doc.at("format") != "lgdlab.gbt" || doc.at("version") != 1) throw ParseError("not an lgdlab.gbt v1 model");
        GbtModel m;
        m.params = detail::params_from_json(doc.at("params"));
        m.base_score = doc.at("base_score").get<double>();
        m.feature_schema = doc.at("feature_schema").get<std::vector<std::string>>();
        for (const auto& t : doc.at("trees")) {
            Tree tree;
            tree.feature = t.at("feature").get<std::vector<int>>();
            tree.threshold = t.at("threshold").get<std::vector<double>>();
            tree.left = t.at("left").get<std::vector<int>>();
            tree.right = t.at("right").get<std::vector<int>>();
            tree.value = t.at("value").get<std::vector<double>>();
            tree.cover = t.at("cover").get<std::vector<double>>();
            const std::size_t n = tree.feature.size();
            if (n == 0 || tree.threshold.size() != n || tree.left.size() != n || tree.right.size() != n ||
                tree.value.size() != n || tree.cover.size() != n) {
                throw ParseError("tree node arrays are empty or of unequal length");
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (tree.feature[i] < 0) continue;
                if (static_cast<std::size_t>(tree.feature[i]) >= m.feature_schema.size() || tree.left[i] <= static_cast<int>(i) ||
                    tree.right[i] <= static_cast<int>(i) || static_cast<std::size_t>(tree.left[i]) >= n ||
                    static_cast<std::size_t>(tree.right[i]) >= n) {
                    throw ParseError("tree node " + std::to_string(i) + " has invalid links");
                }
            }
            m.trees.push_back(std::move(tree));
        }
        m.params.validate();
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed model JSON: ") + e.what());
    } catch (const ConfigError& e) {
        throw ParseError(std::string("model JSON has invalid params: ") + e.what());
    }
}

}  // namespace lgdlab::gbt
