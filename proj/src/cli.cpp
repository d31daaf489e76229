#include "lgdlab/cli.hpp"

#include "json_params.hpp"
#include "lgdlab/error.hpp"
#include "lgdlab/features.hpp"
#include "lgdlab/format.hpp"
#include "lgdlab/io.hpp"
#include "lgdlab/lgd_delta_os.hpp"
#include "lgdlab/parallel.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <set>

namespace lgdlab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Offsets of the derived RNG streams under the master seed.
constexpr std::uint64_t kSplitStream = 101;
constexpr std::uint64_t kSearchStream = 202;
constexpr std::uint64_t kScatterStream = 303;

void reject_unknown(const json& obj, std::string_view section, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) throw ConfigError("config section '" + std::string(section) + "' must be an object");
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown config key '" + (section.empty() ? key : std::string(section) + "." + key) + "'");
        }
    }
}

template <class T>
void read(const json& obj, std::string_view key, T& into) {
    if (auto it = obj.find(key); it != obj.end()) into = it->get<T>();
}

json space_to_json(const search::ParamSpace& s) {
    json out = json::object();
    for (const auto& d : s.dims) {
        switch (d.kind) {
            case search::DimKind::List: out[d.name] = d.values; break;
            case search::DimKind::IntRange: out[d.name] = {{"int_range", {d.lo, d.hi}}}; break;
            case search::DimKind::UniformReal: out[d.name] = {{"uniform_real", {d.lo, d.hi}}, {"draws", d.draws}}; break;
            case search::DimKind::UniformInt: out[d.name] = {{"uniform_int", {d.lo, d.hi}}, {"draws", d.draws}}; break;
        }
    }
    return out;
}

// Dimension order follows the canonical hyperparameter order so that the
// (key-sorted) JSON form maps to a single space.
search::ParamSpace space_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("a parameter space must be an object");
    search::ParamSpace s;
    for (const auto& [key, _] : j.items()) {
        if (std::find(search::kTunableNames.begin(), search::kTunableNames.end(), key) == search::kTunableNames.end()) {
            throw ConfigError("unknown hyperparameter '" + key + "' in parameter space");
        }
    }
    for (auto name : search::kTunableNames) {
        auto it = j.find(name);
        if (it == j.end()) continue;
        search::Dimension d;
        d.name = std::string(name);
        const json& v = *it;
        if (v.is_array()) {
            d.kind = search::DimKind::List;
            d.values = v.get<std::vector<double>>();
        } else if (v.is_object()) {
            reject_unknown(v, d.name, {"int_range", "uniform_real", "uniform_int", "draws"});
            int kinds = 0;
            for (auto [k, kind] : {std::pair{"int_range", search::DimKind::IntRange},
                                   std::pair{"uniform_real", search::DimKind::UniformReal},
                                   std::pair{"uniform_int", search::DimKind::UniformInt}}) {
                if (!v.contains(k)) continue;
                ++kinds;
                const auto bounds = v.at(k).get<std::vector<double>>();
                if (bounds.size() != 2) throw ConfigError(d.name + "." + k + " needs [lo, hi]");
                d.kind = kind;
                d.lo = bounds[0];
                d.hi = bounds[1];
            }
            if (kinds != 1) throw ConfigError(d.name + " needs exactly one of int_range, uniform_real, uniform_int");
            read(v, "draws", d.draws);
        } else {
            throw ConfigError(d.name + " must be a value list or an interval object");
        }
        s.dims.push_back(std::move(d));
    }
    return s;
}

json gen_to_json(const GenConfig& g) {
    json mix = json::object();
    for (int i = 0; i < kFinalStatusCount; ++i) mix[std::string(to_string(static_cast<FinalStatus>(i)))] = g.status_mix[i];
    return {{"n_borrowers", g.n_borrowers},
            {"start", g.start.to_string()},
            {"end", g.end.to_string()},
            {"status_mix", mix},
            {"multi_default_rate", g.multi_default_rate},
            {"writeoff_borrower_rate", g.writeoff_borrower_rate},
            {"max_duration_months", g.max_duration_months},
            {"cost_rate", g.cost_rate},
            {"cashflow_exact", g.cashflow_exact}};
}

void gen_from_json(const json& j, GenConfig& g) {
    reject_unknown(j, "gen",
                   {"n_borrowers", "start", "end", "status_mix", "multi_default_rate", "writeoff_borrower_rate",
                    "max_duration_months", "cost_rate", "cashflow_exact"});
    read(j, "n_borrowers", g.n_borrowers);
    if (j.contains("start")) g.start = MonthIndex::parse(j.at("start").get<std::string>());
    if (j.contains("end")) g.end = MonthIndex::parse(j.at("end").get<std::string>());
    if (j.contains("status_mix")) {
        const json& mix = j.at("status_mix");
        reject_unknown(mix, "gen.status_mix", {"Cured", "ExitNoLoss", "NotResolved", "ExitWithLoss"});
        if (mix.size() != kFinalStatusCount) throw ConfigError("gen.status_mix must list all four statuses");
        for (const auto& [key, v] : mix.items()) g.status_mix[static_cast<int>(parse_final_status(key))] = v.get<double>();
    }
    read(j, "multi_default_rate", g.multi_default_rate);
    read(j, "writeoff_borrower_rate", g.writeoff_borrower_rate);
    read(j, "max_duration_months", g.max_duration_months);
    read(j, "cost_rate", g.cost_rate);
    read(j, "cashflow_exact", g.cashflow_exact);
}

json to_json_value(const RunConfig& c) {
    return {
        {"seed", c.seed},
        {"threads", c.threads},
        {"data_dir", c.data_dir},
        {"out_dir", c.out_dir},
        {"input", c.input},
        {"gen", gen_to_json(c.gen)},
        {"discount",
         {{"source", std::string(to_string(c.discount.source))}, {"fixed_rate", c.discount.fixed_rate}, {"addon", c.discount_addon}}},
        {"split",
         {{"ood_months", c.split.ood_months},
          {"train_fraction", c.split.train_fraction},
          {"unit", std::string(bench::to_string(c.split.unit))}}},
        {"search",
         {{"n_iter", c.n_iter},
          {"folds", c.folds},
          {"mode", c.grid ? "grid" : "random"},
          {"cv_unit", c.row_level_folds ? "by_row" : "by_spell"},
          {"grid_budget", c.grid_budget},
          {"space", space_to_json(c.space)}}},
        {"sensitivity", {{"n_iter", c.sensitivity_n_iter}, {"space", space_to_json(c.sensitivity_space)}}},
        {"train", detail::params_to_json(c.train)},
        {"plots", {{"scatter_points", c.scatter_points}, {"lgd_bins", c.lgd_bins}, {"duration_bins", c.duration_bins}}},
        {"lgd", {{"expanded_table", c.expanded_table}}},
    };
}

RunConfig from_json_value(const json& j) {
    RunConfig c;
    reject_unknown(j, "",
                   {"seed", "threads", "data_dir", "out_dir", "input", "gen", "discount", "split", "search", "sensitivity",
                    "train", "plots", "lgd"});
    read(j, "seed", c.seed);
    read(j, "threads", c.threads);
    read(j, "data_dir", c.data_dir);
    read(j, "out_dir", c.out_dir);
    read(j, "input", c.input);
    if (j.contains("gen")) gen_from_json(j.at("gen"), c.gen);
    if (j.contains("discount")) {
        const json& d = j.at("discount");
        reject_unknown(d, "discount", {"source", "fixed_rate", "addon"});
        if (d.contains("source")) c.discount.source = parse_rate_source(d.at("source").get<std::string>());
        read(d, "fixed_rate", c.discount.fixed_rate);
        read(d, "addon", c.discount_addon);
    }
    if (j.contains("split")) {
        const json& s = j.at("split");
        reject_unknown(s, "split", {"ood_months", "train_fraction", "unit"});
        read(s, "ood_months", c.split.ood_months);
        read(s, "train_fraction", c.split.train_fraction);
        if (s.contains("unit")) c.split.unit = bench::parse_split_unit(s.at("unit").get<std::string>());
    }
    if (j.contains("search")) {
        const json& s = j.at("search");
        reject_unknown(s, "search", {"n_iter", "folds", "mode", "cv_unit", "grid_budget", "space"});
        read(s, "n_iter", c.n_iter);
        read(s, "folds", c.folds);
        if (s.contains("mode")) {
            const auto mode = s.at("mode").get<std::string>();
            if (mode != "random" && mode != "grid") throw ConfigError("search.mode must be random or grid");
            c.grid = mode == "grid";
        }
        if (s.contains("cv_unit")) c.row_level_folds = bench::parse_split_unit(s.at("cv_unit").get<std::string>()) == bench::SplitUnit::ByRow;
        read(s, "grid_budget", c.grid_budget);
        if (s.contains("space")) c.space = space_from_json(s.at("space"));
    }
    if (j.contains("sensitivity")) {
        const json& s = j.at("sensitivity");
        reject_unknown(s, "sensitivity", {"n_iter", "space"});
        read(s, "n_iter", c.sensitivity_n_iter);
        if (s.contains("space")) c.sensitivity_space = space_from_json(s.at("space"));
    }
    if (j.contains("train")) {
        if (!j.at("train").is_object()) throw ConfigError("config section 'train' must be an object");
        c.train = detail::params_from_json(j.at("train"), c.train);
    }
    if (j.contains("plots")) {
        const json& p = j.at("plots");
        reject_unknown(p, "plots", {"scatter_points", "lgd_bins", "duration_bins"});
        read(p, "scatter_points", c.scatter_points);
        read(p, "lgd_bins", c.lgd_bins);
        read(p, "duration_bins", c.duration_bins);
    }
    if (j.contains("lgd")) {
        const json& l = j.at("lgd");
        reject_unknown(l, "lgd", {"expanded_table"});
        read(l, "expanded_table", c.expanded_table);
    }
    c.gen.seed = c.seed;
    return c;
}

}  // namespace

RunConfig::RunConfig() {
    // Tuned "All" column used when training a single model.
    train.learning_rate = 0.05;
    train.max_depth = 8;
    train.n_estimators = 1300;
    train.subsample = 0.8;
    train.min_child_weight = 5;
    train.colsample_bytree = 0.91;
    gen.seed = seed;
}

void RunConfig::validate() const {
    gen.validate();
    split.validate();
    if (discount.source == RateSource::FixedRate && !(discount.fixed_rate >= 0.0)) {
        throw ConfigError("discount.fixed_rate must be non-negative");
    }
    if (!(discount_addon >= 0.0)) throw ConfigError("discount.addon must be non-negative");
    space.validate();
    sensitivity_space.validate();
    if (n_iter < 1 || sensitivity_n_iter < 1) throw ConfigError("n_iter must be >= 1");
    if (folds < 2) throw ConfigError("search.folds must be >= 2");
    train.validate();
    if (scatter_points < 1 || lgd_bins < 1 || duration_bins < 1) throw ConfigError("plot sizes must be >= 1");
}

RunConfig config_from_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        return from_json_value(j);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config JSON: ") + e.what());
    } catch (const ParseError& e) {
        throw ConfigError(std::string("invalid config value: ") + e.what());
    }
}

std::string config_to_json(const RunConfig& cfg) { return to_json_value(cfg).dump(); }

// Paths and the worker count do not change results, so they stay out of the hash.
std::string config_hash(const RunConfig& cfg) {
    auto j = json::parse(config_to_json(cfg));
    for (const char* key : {"threads", "data_dir", "out_dir", "input"}) j.erase(key);
    return fnv1a_hex(j.dump());
}

bench::BenchConfig bench_config(const RunConfig& cfg) {
    bench::BenchConfig b;
    b.split = cfg.split;
    b.split.seed = derive_seed(cfg.seed, kSplitStream);
    b.space = cfg.space;
    b.n_iter = cfg.n_iter;
    b.grid = cfg.grid;
    b.search.k = cfg.folds;
    b.search.seed = derive_seed(cfg.seed, kSearchStream);
    b.search.row_level_folds = cfg.row_level_folds;
    b.search.workers = cfg.threads;
    b.search.grid_budget = cfg.grid_budget;
    b.sensitivity_space = cfg.sensitivity_space;
    b.sensitivity_n_iter = cfg.sensitivity_n_iter;
    return b;
}

namespace {

// Drops leading "#" lines of an emitted artifact.
std::string strip_comments(const std::string& text) {
    std::size_t pos = 0;
    while (pos < text.size() && text[pos] == '#') {
        auto nl = text.find('\n', pos);
        pos = nl == std::string::npos ? text.size() : nl + 1;
    }
    return text.substr(pos);
}

class Runner {
public:
    Runner(RunConfig cfg, std::ostream& out, std::ostream& err)
        : cfg_(std::move(cfg)), prov_{cfg_.seed, config_hash(cfg_)}, out_(out), err_(err) {}

    void emit(std::string_view name, const std::string& body) {
        const fs::path path = fs::path(cfg_.out_dir) / name;
        io::write_text(path, prov_.line() + '\n' + body + (body.empty() || body.back() == '\n' ? "" : "\n"));
        out_ << "wrote " << path.string() << '\n';
    }

    void gen() {
        const auto macro = generate_macro(cfg_.seed, cfg_.gen.start, cfg_.gen.end);
        io::Portfolio p{generate_portfolio(cfg_.gen, macro), macro};
        p.macro.discount_addon = cfg_.discount_addon;
        io::save_portfolio(cfg_.out_dir, p, prov_);
        std::size_t rows = 0;
        for (const auto& s : p.spells) rows += s.observations.size();
        out_ << "generated " << p.spells.size() << " spells, " << rows << " rows into " << cfg_.out_dir << '\n';
    }

    void lgd() {
        const auto p = load();
        const auto cash = realized_lgd_portfolio(p.spells, cfg_.discount, p.macro);
        const auto os = rlgd_delta_os_portfolio(p.spells, cfg_.discount, p.macro);
        emit("lgd_records.csv", io::lgd_records_csv(cash, os));
        const auto rows = build_feature_matrix(p.spells, cash, os, p.macro);
        emit("scatter.csv", io::scatter_csv(bench::scatter_points(rows, cfg_.scatter_points,
                                                                   derive_seed(cfg_.seed, kScatterStream))));
        std::vector<double> lgd;
        for (const auto& r : cash) lgd.push_back(cap_unit(r.rlgd));
        emit("lgd_histogram.csv", io::histogram_csv(bench::histogram(lgd, 0.0, 1.0, cfg_.lgd_bins)));
        std::vector<double> durations;
        for (const auto& s : p.spells) durations.push_back(s.duration_months());
        emit("duration_histogram.csv",
             io::histogram_csv(bench::histogram(durations, 0.0, cfg_.gen.max_duration_months, cfg_.duration_bins)));
        if (cfg_.expanded_table) {
            std::vector<ExpandedRow> all;
            for (const auto& s : p.spells) {
                auto t = delta_os_table(s, cfg_.discount, p.macro);
                all.insert(all.end(), t.begin(), t.end());
            }
            emit("expanded_table.csv", io::expanded_table_csv(all));
        }
    }

    void features() {
        const auto rows = dataset().rows;
        emit("feature_matrix.csv", io::feature_csv(rows));
        emit("correlations.csv", bench::correlation_csv(rows));
    }

    void train() {
        const auto rows = dataset().rows;
        const auto b = bench_config(cfg_);
        const auto split = bench::temporal_split(rows, b.split);
        const auto names = all_predictors();
        std::vector<FeatureRow> train_rows;
        for (std::size_t i : split.train) train_rows.push_back(rows[i]);
        auto params = cfg_.train;
        params.seed = b.search.seed;
        const auto model = gbt::train(design_matrix(train_rows, names), targets(train_rows), params, names);
        emit("model.json", gbt::to_json(model));
        std::string metrics = "sample,mae,mse,sd_error,n\n";
        for (auto [label, idx] : {std::pair{bench::kOutOfSample, &split.out_of_sample},
                                  std::pair{bench::kOutOfDate, &split.out_of_date}}) {
            if (idx->empty()) continue;
            std::vector<FeatureRow> sample;
            for (std::size_t i : *idx) sample.push_back(rows[i]);
            const auto m = bench::compute_metrics(gbt::predict(model, design_matrix(sample, names), names), targets(sample));
            metrics += std::string(label) + ',' + format_number(m.mae) + ',' + format_number(m.mse) + ',' +
                       format_number(m.sd_error) + ',' + std::to_string(m.n) + '\n';
        }
        emit("train_metrics.csv", metrics);
    }

    void tune() {
        const auto rows = dataset().rows;
        const auto b = bench_config(cfg_);
        const auto split = bench::temporal_split(rows, b.split);
        const auto names = all_predictors();
        std::vector<FeatureRow> train_rows;
        std::vector<std::string> groups;
        for (std::size_t i : split.train) {
            train_rows.push_back(rows[i]);
            groups.push_back(spell_key(rows[i]));
        }
        const Matrix x = design_matrix(train_rows, names);
        const auto y = targets(train_rows);
        search::SearchData data{x, y, groups, names};
        const auto result = b.grid ? search::grid_search(b.space, data, b.search)
                                   : search::random_search(b.space, b.n_iter, data, b.search);
        emit("search_result.json", search::to_json(result));
        emit("search_result.csv", search::to_csv(result));
        out_ << "fits: " << result.fits << ", best candidate " << result.best_index
             << " cv mse " << format_number(result.best().score.mean_mse) << '\n';
    }

    void bench(bool sensitivity) {
        const auto rows = dataset().rows;
        const auto b = bench_config(cfg_);
        auto report = bench::run_benchmark(rows, b);
        if (sensitivity) bench::run_sensitivity(rows, b, report);
        const std::string stem = sensitivity ? "sensitivity_report" : "bench_report";
        emit(stem + ".json", bench::to_json(report));
        emit(stem + ".csv", bench::to_csv(report));
        emit(stem + ".txt", bench::to_table(report));
        out_ << bench::to_table(report);
    }

    void report() {
        if (cfg_.input.empty()) throw ConfigError("report needs --in <artifact.json>");
        const auto text = strip_comments(io::read_text(cfg_.input));
        const auto doc = json::parse(text, nullptr, false);
        if (doc.is_discarded() || !doc.is_object() || !doc.contains("format")) {
            throw ParseError(cfg_.input + " is not an lgdlab JSON artifact");
        }
        const auto format = doc.at("format").get<std::string>();
        const auto stem = fs::path(cfg_.input).stem().string();
        if (format == "lgdlab.bench") {
            const auto r = bench::report_from_json(text);
            emit(stem + ".csv", bench::to_csv(r));
            emit(stem + ".txt", bench::to_table(r));
        } else if (format == "lgdlab.search") {
            emit(stem + ".csv", search::to_csv(search::search_result_from_json(text)));
        } else if (format == "lgdlab.gbt") {
            const auto m = gbt::from_json(text);
            std::string s = "tree,nodes,leaves,depth\n";
            for (std::size_t t = 0; t < m.trees.size(); ++t) {
                std::size_t leaves = 0;
                for (std::size_t n = 0; n < m.trees[t].size(); ++n) leaves += m.trees[t].is_leaf(n);
                s += std::to_string(t) + ',' + std::to_string(m.trees[t].size()) + ',' + std::to_string(leaves) + ',' +
                     std::to_string(m.trees[t].depth()) + '\n';
            }
            emit(stem + "_trees.csv", s);
        } else {
            throw ParseError("unsupported artifact format '" + format + "'");
        }
    }

private:
    io::Portfolio load() const { return io::load_portfolio(cfg_.data_dir, cfg_.discount_addon); }

    bench::Dataset dataset() const {
        const auto p = load();
        return bench::build_dataset(p.spells, p.macro, cfg_.discount);
    }

    RunConfig cfg_;
    io::Provenance prov_;
    std::ostream& out_;
    std::ostream& err_;
};

struct Overrides {
    std::string config;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    std::string out, data, input, discount, search_mode, cv_unit, split_unit;
    double fixed_rate = 0.0;
    int n_borrowers = 0, n_iter = 0, folds = 0, ood_months = 0, sensitivity_n_iter = 0;
    bool cashflow_exact = false, expanded_table = false;
};

void add_options(CLI::App& sub, Overrides& o) {
    sub.add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
    sub.add_option("--seed", o.seed, "master seed (seed)");
    sub.add_option("--threads", o.threads, "worker threads, 0 = all cores (threads)");
    sub.add_option("--out", o.out, "output directory (out_dir)");
    sub.add_option("--data", o.data, "portfolio directory (data_dir)");
    sub.add_option("--in", o.input, "artifact to re-render (input)");
    sub.add_option("--n-borrowers", o.n_borrowers, "borrowers to generate (gen.n_borrowers)");
    sub.add_flag("--cashflow-exact", o.cashflow_exact, "balance decreases are cash recoveries (gen.cashflow_exact)");
    sub.add_option("--discount", o.discount, "base_rate_plus_addon|base_rate|fixed|per_flow (discount.source)");
    sub.add_option("--fixed-rate", o.fixed_rate, "annual rate for --discount fixed (discount.fixed_rate)");
    sub.add_option("--n-iter", o.n_iter, "search candidates (search.n_iter)");
    sub.add_option("--folds", o.folds, "cross-validation folds (search.folds)");
    sub.add_option("--search-mode", o.search_mode, "random|grid (search.mode)");
    sub.add_option("--cv-unit", o.cv_unit, "by_spell|by_row (search.cv_unit)");
    sub.add_option("--split-unit", o.split_unit, "by_spell|by_row (split.unit)");
    sub.add_option("--ood-months", o.ood_months, "out-of-date window (split.ood_months)");
    sub.add_option("--sensitivity-n-iter", o.sensitivity_n_iter, "candidates of the interval search (sensitivity.n_iter)");
    sub.add_flag("--expanded-table", o.expanded_table, "also dump the delta-outstanding expansion (lgd.expanded_table)");
}

json merged_config(const CLI::App& sub, const Overrides& o) {
    json j = json::object();
    if (!o.config.empty()) {
        j = json::parse(io::read_text(o.config), nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw ConfigError(o.config + " is not a JSON object");
    }
    auto given = [&sub](const char* flag) { return sub.count(flag) > 0; };
    if (given("--seed")) j["seed"] = o.seed;
    if (given("--threads")) j["threads"] = o.threads;
    if (given("--out")) j["out_dir"] = o.out;
    if (given("--data")) j["data_dir"] = o.data;
    if (given("--in")) j["input"] = o.input;
    if (given("--n-borrowers")) j["gen"]["n_borrowers"] = o.n_borrowers;
    if (given("--cashflow-exact")) j["gen"]["cashflow_exact"] = o.cashflow_exact;
    if (given("--discount")) j["discount"]["source"] = o.discount;
    if (given("--fixed-rate")) j["discount"]["fixed_rate"] = o.fixed_rate;
    if (given("--n-iter")) j["search"]["n_iter"] = o.n_iter;
    if (given("--folds")) j["search"]["folds"] = o.folds;
    if (given("--search-mode")) j["search"]["mode"] = o.search_mode;
    if (given("--cv-unit")) j["search"]["cv_unit"] = o.cv_unit;
    if (given("--split-unit")) j["split"]["unit"] = o.split_unit;
    if (given("--ood-months")) j["split"]["ood_months"] = o.ood_months;
    if (given("--sensitivity-n-iter")) j["sensitivity"]["n_iter"] = o.sensitivity_n_iter;
    if (given("--expanded-table")) j["lgd"]["expanded_table"] = o.expanded_table;
    return j;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"lgdlab: realized LGD engines, gradient-boosted approximation and benchmarks"};
    app.require_subcommand(1, 1);
    Overrides o;
    const std::vector<std::pair<const char*, const char*>> commands{
        {"gen", "generate a synthetic portfolio and macro series"},
        {"lgd", "cash-flow and delta-outstanding realized LGD, plot CSVs"},
        {"features", "feature matrix and correlation report"},
        {"train", "fit one model on the training split and serialise it"},
        {"tune", "hyperparameter search with cross-validation"},
        {"bench", "benchmark report: delta outstanding vs boosted models"},
        {"sensitivity", "benchmark plus hyperparameter and variable sensitivity"},
        {"report", "re-render CSV/text from a stored JSON artifact"},
    };
    for (const auto& [name, help] : commands) add_options(*app.add_subcommand(name, help), o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }
    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();

    RunConfig cfg;
    try {
        cfg = from_json_value(merged_config(*sub, o));
        cfg.validate();
    } catch (const Error& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    }

    const auto started = std::chrono::steady_clock::now();
    try {
        Runner run(cfg, out, err);
        if (command == "gen") run.gen();
        else if (command == "lgd") run.lgd();
        else if (command == "features") run.features();
        else if (command == "train") run.train();
        else if (command == "tune") run.tune();
        else if (command == "bench") run.bench(false);
        else if (command == "sensitivity") run.bench(true);
        else if (command == "report") run.report();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    err << command << " finished in " << secs << " s\n";
    return 0;
}

}  // namespace lgdlab::cli
