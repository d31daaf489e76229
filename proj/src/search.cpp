#include "lgdlab/search.hpp"

#include "json_params.hpp"
#include "lgdlab/bench.hpp"
#include "lgdlab/error.hpp"
#include "lgdlab/format.hpp"
#include "lgdlab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace lgdlab::search {

namespace {

bool is_integer_param(std::string_view name) { return name == "max_depth" || name == "n_estimators"; }

void set_param(gbt::GbtParams& p, std::string_view name, double v) {
    if (name == "learning_rate") p.learning_rate = v;
    else if (name == "max_depth") p.max_depth = static_cast<int>(std::lround(v));
    else if (name == "n_estimators") p.n_estimators = static_cast<int>(std::lround(v));
    else if (name == "subsample") p.subsample = v;
    else if (name == "min_child_weight") p.min_child_weight = v;
    else if (name == "colsample_bytree") p.colsample_bytree = v;
    else if (name == "reg_lambda") p.reg_lambda = v;
    else throw ConfigError("unknown hyperparameter '" + std::string(name) + "'");
}

std::vector<double> values_of(const Dimension& d) {
    if (d.kind == DimKind::List) return d.values;
    if (d.kind == DimKind::IntRange) {
        std::vector<double> out;
        for (auto v = static_cast<long long>(d.lo); v <= static_cast<long long>(d.hi); ++v) out.push_back(static_cast<double>(v));
        return out;
    }
    throw ConfigError("dimension '" + d.name + "' is an interval; materialise the space first");
}

Dimension list_dim(std::string name, std::vector<double> values) {
    return Dimension{std::move(name), DimKind::List, std::move(values), 0.0, 0.0, 15};
}

Dimension range_dim(std::string name, DimKind kind, double lo, double hi, int draws = 15) {
    return Dimension{std::move(name), kind, {}, lo, hi, draws};
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

void ParamSpace::validate() const {
    std::set<std::string> seen;
    if (dims.empty()) throw ConfigError("parameter space has no dimensions");
    for (const auto& d : dims) {
        if (std::find(kTunableNames.begin(), kTunableNames.end(), d.name) == kTunableNames.end()) {
            throw ConfigError("unknown hyperparameter '" + d.name + "'");
        }
        if (!seen.insert(d.name).second) throw ConfigError("duplicate dimension '" + d.name + "'");
        std::vector<double> probe;
        switch (d.kind) {
            case DimKind::List:
                if (d.values.empty()) throw ConfigError("dimension '" + d.name + "' has no values");
                probe = d.values;
                break;
            case DimKind::IntRange:
            case DimKind::UniformInt:
                if (d.lo != std::floor(d.lo) || d.hi != std::floor(d.hi)) {
                    throw ConfigError("dimension '" + d.name + "' needs integer bounds");
                }
                [[fallthrough]];
            case DimKind::UniformReal:
                if (!(d.lo <= d.hi)) throw ConfigError("dimension '" + d.name + "' has lo > hi");
                if (d.kind != DimKind::IntRange && d.draws < 1) throw ConfigError("dimension '" + d.name + "' needs draws >= 1");
                probe = {d.lo, d.hi};
                break;
        }
        for (double v : probe) {
            if (is_integer_param(d.name) && v != std::floor(v)) {
                throw ConfigError("dimension '" + d.name + "' needs integer values");
            }
            gbt::GbtParams p = base;
            set_param(p, d.name, v);
            try {
                p.validate();
            } catch (const ConfigError& e) {
                throw ConfigError("dimension '" + d.name + "': " + e.what());
            }
        }
    }
    base.validate();
}

bool ParamSpace::is_finite() const {
    return std::all_of(dims.begin(), dims.end(),
                       [](const Dimension& d) { return d.kind == DimKind::List || d.kind == DimKind::IntRange; });
}

ParamSpace ParamSpace::materialize(std::uint64_t seed) const {
    ParamSpace out = *this;
    for (std::size_t i = 0; i < out.dims.size(); ++i) {
        auto& d = out.dims[i];
        if (d.kind != DimKind::UniformReal && d.kind != DimKind::UniformInt) continue;
        std::mt19937_64 rng(derive_seed(seed, 0x5ea7c0de00000000ULL + i));
        std::vector<double> drawn;
        for (int k = 0; k < d.draws; ++k) {
            if (d.kind == DimKind::UniformReal) {
                drawn.push_back(std::uniform_real_distribution<double>(d.lo, d.hi)(rng));
            } else {
                drawn.push_back(static_cast<double>(std::uniform_int_distribution<long long>(
                    static_cast<long long>(d.lo), static_cast<long long>(d.hi))(rng)));
            }
        }
        d.kind = DimKind::List;
        d.values = std::move(drawn);
    }
    return out;
}

std::size_t ParamSpace::grid_size() const {
    std::size_t total = 1;
    for (const auto& d : dims) total *= values_of(d).size();
    return total;
}

gbt::GbtParams ParamSpace::at(const std::vector<std::size_t>& choice) const {
    if (choice.size() != dims.size()) throw ConfigError("choice length does not match the space");
    gbt::GbtParams p = base;
    for (std::size_t i = 0; i < dims.size(); ++i) set_param(p, dims[i].name, values_of(dims[i]).at(choice[i]));
    return p;
}

ParamSpace tuning_space() {
    ParamSpace s;
    s.dims = {
        list_dim("learning_rate", {0.01, 0.05, 0.075, 0.1, 0.2}),
        range_dim("max_depth", DimKind::IntRange, 7, 15),
        list_dim("n_estimators", {700, 800, 900, 1000, 1100, 1150, 1200, 1250, 1300}),
        list_dim("subsample", {0.6, 0.7, 0.75, 0.8, 0.85}),
        range_dim("min_child_weight", DimKind::IntRange, 2, 6),
        list_dim("colsample_bytree", {0.7, 0.8, 0.85, 0.9, 0.91, 0.92, 0.95}),
    };
    return s;
}

ParamSpace sensitivity_space() {
    ParamSpace s;
    s.dims = {
        range_dim("n_estimators", DimKind::UniformInt, 900, 1400),
        range_dim("max_depth", DimKind::IntRange, 6, 16),
        range_dim("learning_rate", DimKind::UniformReal, 0.01, 0.2),
        range_dim("subsample", DimKind::UniformReal, 0.6, 0.9),
        range_dim("colsample_bytree", DimKind::UniformReal, 0.7, 0.95),
        range_dim("min_child_weight", DimKind::IntRange, 3, 7),
    };
    return s;
}

std::vector<int> kfold_split(std::span<const std::string> keys, int k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("k-fold needs k >= 2, got " + std::to_string(k));
    std::map<std::string_view, int> group_of;
    std::vector<std::string_view> groups;
    for (const auto& key : keys) {
        if (group_of.emplace(key, 0).second) groups.push_back(key);
    }
    if (groups.size() < static_cast<std::size_t>(k)) {
        throw ConfigError("k-fold with k = " + std::to_string(k) + " needs at least k groups, found " +
                          std::to_string(groups.size()));
    }
    std::mt19937_64 rng(seed);
    std::shuffle(groups.begin(), groups.end(), rng);
    for (std::size_t i = 0; i < groups.size(); ++i) group_of[groups[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    std::vector<int> out(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) out[i] = group_of[keys[i]];
    return out;
}

namespace {

struct FoldResult {
    double mse = 0.0;
    double mae = 0.0;
};

FoldResult fit_fold(const Matrix& x, std::span<const double> y, std::span<const int> folds, int fold,
                    const gbt::GbtParams& params) {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    for (std::size_t r = 0; r < folds.size(); ++r) (folds[r] == fold ? test_rows : train_rows).push_back(r);
    if (train_rows.empty() || test_rows.empty()) throw ConfigError("fold " + std::to_string(fold) + " is empty");
    std::vector<double> y_train(train_rows.size());
    std::vector<double> y_test(test_rows.size());
    for (std::size_t i = 0; i < train_rows.size(); ++i) y_train[i] = y[train_rows[i]];
    for (std::size_t i = 0; i < test_rows.size(); ++i) y_test[i] = y[test_rows[i]];
    const Matrix x_test = x.select_rows(test_rows);
    const auto model = gbt::train(x.select_rows(train_rows), y_train, params);
    const auto m = bench::compute_metrics(gbt::predict(model, x_test), y_test);
    return {m.mse, m.mae};
}

CvScore aggregate(const std::vector<FoldResult>& folds) {
    CvScore s;
    for (const auto& f : folds) {
        s.fold_mse.push_back(f.mse);
        s.fold_mae.push_back(f.mae);
    }
    s.mean_mse = mean(s.fold_mse);
    s.mean_mae = mean(s.fold_mae);
    double ss = 0.0;
    for (double v : s.fold_mse) ss += (v - s.mean_mse) * (v - s.mean_mse);
    s.sd_error = std::sqrt(ss / static_cast<double>(s.fold_mse.size()));
    return s;
}

void check_data(const SearchData& data) {
    if (data.y.size() != data.x.rows() || data.groups.size() != data.x.rows()) {
        throw ValidationError("search data: X, y and group keys differ in length");
    }
}

SearchResult run_candidates(std::string mode, std::vector<gbt::GbtParams> params, int n_iter, const SearchData& data,
                            const SearchOptions& opt) {
    check_data(data);
    std::vector<int> folds;
    if (opt.row_level_folds) {
        std::vector<std::string> rows(data.x.rows());
        for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = std::to_string(r);
        folds = kfold_split(rows, opt.k, opt.seed);
    } else {
        folds = kfold_split(data.groups, opt.k, opt.seed);
    }
    const std::size_t k = static_cast<std::size_t>(opt.k);
    std::vector<FoldResult> results(params.size() * k);
    std::atomic<std::size_t> fits{0};
    parallel_for(
        results.size(),
        [&](std::size_t task) {
            if (opt.stop && opt.stop()) throw Error("search stopped after " + std::to_string(fits.load()) + " fits");
            results[task] = fit_fold(data.x, data.y, folds, static_cast<int>(task % k), params[task / k]);
            ++fits;
        },
        opt.workers == 0 ? worker_count() : opt.workers);

    SearchResult out;
    out.mode = std::move(mode);
    out.seed = opt.seed;
    out.n_folds = opt.k;
    out.n_iter = n_iter;
    out.fits = fits.load();
    out.feature_schema = data.feature_schema;
    for (std::size_t c = 0; c < params.size(); ++c) {
        std::vector<FoldResult> per(results.begin() + static_cast<std::ptrdiff_t>(c * k),
                                    results.begin() + static_cast<std::ptrdiff_t>((c + 1) * k));
        out.candidates.push_back({params[c], aggregate(per)});
        if (out.candidates[c].score.mean_mse < out.candidates[out.best_index].score.mean_mse) out.best_index = c;
    }
    return out;
}

}  // namespace

CvScore cv_score(const Matrix& x, std::span<const double> y, std::span<const int> folds, int k,
                 const gbt::GbtParams& params, std::size_t workers) {
    if (folds.size() != x.rows() || y.size() != x.rows()) throw ValidationError("cv_score: inconsistent input lengths");
    std::vector<FoldResult> results(static_cast<std::size_t>(k));
    parallel_for(
        results.size(), [&](std::size_t f) { results[f] = fit_fold(x, y, folds, static_cast<int>(f), params); },
        workers == 0 ? worker_count() : workers);
    return aggregate(results);
}

CvScore cv_score(const Matrix& x, std::span<const double> y, std::span<const std::string> groups,
                 const gbt::GbtParams& params, int k, std::uint64_t seed) {
    if (groups.size() != x.rows()) throw ValidationError("cv_score: one group key per row required");
    const auto folds = kfold_split(groups, k, seed);
    return cv_score(x, y, folds, k, params, 0);
}

std::vector<gbt::GbtParams> random_candidates(const ParamSpace& space, int n_iter, std::uint64_t seed) {
    if (n_iter < 1) throw ConfigError("n_iter must be >= 1");
    space.validate();
    const ParamSpace finite = space.materialize(seed);
    std::vector<std::vector<double>> lists;
    for (const auto& d : finite.dims) lists.push_back(values_of(d));
    std::vector<gbt::GbtParams> out;
    for (int i = 0; i < n_iter; ++i) {
        const std::uint64_t stream = derive_seed(seed, static_cast<std::uint64_t>(i));
        std::mt19937_64 rng(stream);
        std::vector<std::size_t> choice;
        for (const auto& l : lists) choice.push_back(std::uniform_int_distribution<std::size_t>(0, l.size() - 1)(rng));
        auto p = finite.at(choice);
        p.seed = derive_seed(stream, 1);
        out.push_back(p);
    }
    return out;
}

SearchResult random_search(const ParamSpace& space, int n_iter, const SearchData& data, const SearchOptions& opt) {
    return run_candidates("random", random_candidates(space, n_iter, opt.seed), n_iter, data, opt);
}

SearchResult grid_search(const ParamSpace& space, const SearchData& data, const SearchOptions& opt) {
    space.validate();
    if (!space.is_finite()) throw ConfigError("grid search needs finite value lists in every dimension");
    const std::size_t total = space.grid_size();
    if (total > opt.grid_budget) {
        throw ConfigError("grid has " + std::to_string(total) + " candidates, above the budget of " +
                          std::to_string(opt.grid_budget));
    }
    std::vector<std::size_t> sizes;
    for (const auto& d : space.dims) sizes.push_back(values_of(d).size());
    std::vector<gbt::GbtParams> params;
    std::vector<std::size_t> choice(sizes.size(), 0);
    for (std::size_t i = 0; i < total; ++i) {
        auto p = space.at(choice);
        p.seed = derive_seed(opt.seed, i);
        params.push_back(p);
        for (std::size_t d = sizes.size(); d-- > 0;) {
            if (++choice[d] < sizes[d]) break;
            choice[d] = 0;
        }
    }
    return run_candidates("grid", std::move(params), static_cast<int>(total), data, opt);
}

std::string to_json(const SearchResult& r) {
    nlohmann::json cands = nlohmann::json::array();
    for (const auto& c : r.candidates) {
        cands.push_back({{"params", detail::params_to_json(c.params)},
                         {"fold_mse", c.score.fold_mse},
                         {"fold_mae", c.score.fold_mae},
                         {"mean_mse", c.score.mean_mse},
                         {"mean_mae", c.score.mean_mae},
                         {"sd_error", c.score.sd_error}});
    }
    nlohmann::json doc = {{"format", "lgdlab.search"},
                          {"version", 1},
                          {"mode", r.mode},
                          {"seed", r.seed},
                          {"n_folds", r.n_folds},
                          {"n_iter", r.n_iter},
                          {"fits", r.fits},
                          {"best_index", r.best_index},
                          {"feature_schema", r.feature_schema},
                          {"candidates", cands}};
    return doc.dump(1);
}

SearchResult search_result_from_json(const std::string& text) {
    try {
        const auto doc = nlohmann::json::parse(text);
        if (doc.at("format") != "lgdlab.search") throw ParseError("not an lgdlab.search document");
        SearchResult r;
        r.mode = doc.at("mode").get<std::string>();
        r.seed = doc.at("seed").get<std::uint64_t>();
        r.n_folds = doc.at("n_folds").get<int>();
        r.n_iter = doc.at("n_iter").get<int>();
        r.fits = doc.at("fits").get<std::size_t>();
        r.best_index = doc.at("best_index").get<std::size_t>();
        r.feature_schema = doc.at("feature_schema").get<std::vector<std::string>>();
        for (const auto& c : doc.at("candidates")) {
            Candidate cand;
            cand.params = detail::params_from_json(c.at("params"));
            cand.score.fold_mse = c.at("fold_mse").get<std::vector<double>>();
            cand.score.fold_mae = c.at("fold_mae").get<std::vector<double>>();
            cand.score.mean_mse = c.at("mean_mse").get<double>();
            cand.score.mean_mae = c.at("mean_mae").get<double>();
            cand.score.sd_error = c.at("sd_error").get<double>();
            r.candidates.push_back(std::move(cand));
        }
        if (r.best_index >= r.candidates.size()) throw ParseError("best_index out of range");
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed search result JSON: ") + e.what());
    } catch (const ConfigError& e) {
        throw ParseError(std::string("search result JSON: ") + e.what());
    }
}

std::string to_csv(const SearchResult& r) {
    std::ostringstream out;
    out << "candidate,learning_rate,max_depth,n_estimators,subsample,min_child_weight,colsample_bytree,reg_lambda,"
           "mean_mse,mean_mae,sd_error,best\n";
    for (std::size_t i = 0; i < r.candidates.size(); ++i) {
        const auto& c = r.candidates[i];
        const auto& p = c.params;
        out << i << ',' << format_number(p.learning_rate) << ',' << p.max_depth << ',' << p.n_estimators << ','
            << format_number(p.subsample) << ',' << format_number(p.min_child_weight) << ','
            << format_number(p.colsample_bytree) << ',' << format_number(p.reg_lambda) << ','
            << format_number(c.score.mean_mse) << ',' << format_number(c.score.mean_mae) << ','
            << format_number(c.score.sd_error) << ',' << (i == r.best_index ? 1 : 0) << '\n';
    }
    return out.str();
}

}  // namespace lgdlab::search
