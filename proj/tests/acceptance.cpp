#include "helpers.hpp"

#include "lgdlab/bench.hpp"
#include "lgdlab/cli.hpp"
#include "lgdlab/error.hpp"
#include "lgdlab/features.hpp"
#include "lgdlab/gbt.hpp"
#include "lgdlab/io.hpp"
#include "lgdlab/lgd_cashflow.hpp"
#include "lgdlab/lgd_delta_os.hpp"
#include "lgdlab/search.hpp"
#include "lgdlab/synthgen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

using namespace lgdlab;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("lgdlab_acceptance_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "lgdlab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    if (code != 0) throw Error("lgdlab " + args[1] + " failed: " + err.str());
    return code;
}

struct Generated {
    MacroSeries macro;
    std::vector<DefaultSpell> spells;
};

Generated generate(GenConfig cfg) {
    Generated g;
    g.macro = generate_macro(cfg.seed, cfg.start, cfg.end);
    g.spells = generate_portfolio(cfg, g.macro);
    return g;
}

const bench::Dataset& default_dataset() {
    static const bench::Dataset d = [] {
        const auto g = generate(GenConfig{});
        return bench::build_dataset(g.spells, g.macro, DiscountPolicy{});
    }();
    return d;
}

Outcome oracle_equivalence() {
    const auto t0 = Clock::now();
    GenConfig cfg;
    cfg.cashflow_exact = true;
    const auto g = generate(cfg);
    const auto cash = realized_lgd_portfolio(g.spells, DiscountPolicy{}, g.macro);
    const auto os = rlgd_delta_os_portfolio(g.spells, DiscountPolicy{}, g.macro);
    const double secs = seconds_since(t0);
    if (cash.size() != os.size()) return {false, "record counts differ"};
    double worst = 0.0;
    for (std::size_t i = 0; i < cash.size(); ++i) {
        if (cash[i].borrower_id != os[i].borrower_id || cash[i].reference_date != os[i].reference_date)
            return {false, "record keys differ at " + std::to_string(i)};
        worst = std::max({worst, std::abs(cash[i].rlgd_raw - os[i].rlgd_raw), std::abs(cash[i].rlgd - os[i].rlgd)});
    }
    const bool ok = g.spells.size() >= 500 && worst <= 1e-9 && secs < 30.0;
    return {ok, std::to_string(g.spells.size()) + " spells, " + std::to_string(cash.size()) +
                    " records, max |diff| " + fmt("%.3g", worst) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome telescoping() {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> len(1, 80);
    std::uniform_int_distribution<int> step(-4000, 1500);
    const auto macro = testkit::flat_macro(0.0);
    const auto policy = DiscountPolicy::fixed(0.0);
    std::size_t pairs = 0;
    for (int s = 0; s < 100; ++s) {
        std::vector<double> path{static_cast<double>(10000 + rng() % 90000)};
        const int n = len(rng);
        for (int i = 1; i < n; ++i) path.push_back(std::max(0.0, path.back() + step(rng)));
        auto spell = testkit::make_spell(path, FinalStatus::ExitWithLoss, testkit::ym(2010, 1), "T" + std::to_string(s));
        const double final_os = path.back();
        const auto recs = rlgd_delta_os(spell, policy, macro);
        if (recs.size() != path.size()) return {false, "record count mismatch on spell " + std::to_string(s)};
        for (std::size_t r = 0; r < path.size(); ++r) {
            double brute = path[r];
            for (std::size_t t = r + 1; t < path.size(); ++t, ++pairs) brute -= (path[t - 1] - path[t]);
            if (brute != final_os || recs[r].el != final_os)
                return {false, "spell " + std::to_string(s) + " ref " + std::to_string(r) + ": EL " +
                                   fmt("%.17g", recs[r].el) + ", brute force " + fmt("%.17g", brute) +
                                   ", final " + fmt("%.17g", final_os)};
        }
        for (const auto& row : delta_os_table(spell, policy, macro))
            if (row.reporting_date == spell.observations.back().reporting_date && row.el_running != final_os)
                return {false, "expanded table disagrees on spell " + std::to_string(s)};
    }
    return {true, "100 spells, " + std::to_string(pairs) + " summed pairs, exact"};
}

Outcome cured_bias() {
    const auto dir = scratch("c3");
    run_cli({"gen", "--out", (dir / "data").string()});
    run_cli({"lgd", "--data", (dir / "data").string(), "--out", (dir / "lgd").string()});
    const auto p = io::load_portfolio(dir / "data");
    std::size_t cured_spells = 0;
    for (const auto& s : p.spells) cured_spells += s.final_status == FinalStatus::Cured;
    const double cure_share = static_cast<double>(cured_spells) / p.spells.size();

    const auto& rows = default_dataset().rows;
    double err = 0.0;
    std::size_t n = 0;
    for (const auto& r : rows) {
        if (r.final_status != FinalStatus::Cured) continue;
        err += r.rlgd_os - r.target_rlgd;
        ++n;
    }
    const double mean_err = n ? err / n : 0.0;

    std::istringstream in(io::read_text(dir / "lgd" / "scatter.csv"));
    std::string line;
    std::size_t cured_points = 0, above = 0, points = 0;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            if (line != "borrower_id,spell_index,reference_date,final_status,rlgd_cashflow,rlgd_delta_os")
                return {false, "unexpected scatter header " + line};
            continue;
        }
        std::vector<std::string> c;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) c.push_back(cell);
        ++points;
        if (c.at(3) != "Cured") continue;
        ++cured_points;
        above += std::stod(c.at(5)) > std::stod(c.at(4));
    }
    fs::remove_all(dir);
    const double above_share = cured_points ? static_cast<double>(above) / cured_points : 0.0;
    const bool ok = cure_share >= 0.20 && mean_err > 0.0 && above_share >= 0.95;
    return {ok, "cured spells " + fmt("%.1f%%", 100 * cure_share) + ", mean signed error on " + std::to_string(n) +
                    " cured rows " + fmt("%.4f", mean_err) + ", scatter " + std::to_string(points) + " points, " +
                    fmt("%.1f%%", 100 * above_share) + " of " + std::to_string(cured_points) + " cured above diagonal"};
}

Outcome expansion_counts() {
    const auto macro = testkit::flat_macro(0.02);
    std::string detail;
    bool ok = true;
    for (auto [n, expected] : {std::pair{1, 1}, {4, 10}, {10, 55}, {130, 8515}}) {
        auto spell = testkit::make_spell(std::vector<double>(n, 100.0));
        const auto pairs = expand_spell(spell).size();
        const auto rows = delta_os_table(spell, DiscountPolicy{}, macro).size();
        ok = ok && pairs == static_cast<std::size_t>(expected) && rows == pairs;
        detail += (detail.empty() ? "" : ", ") + std::string("n=") + std::to_string(n) + ": " + std::to_string(pairs);
    }
    return {ok, detail + " (n(n+1)/2, not n!)"};
}

Outcome rlgd_floor() {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> len(1, 60);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto macro = testkit::flat_macro(0.03);
    std::size_t records = 0, raw_negative = 0, spells = 0;
    const std::vector<DiscountPolicy> policies{DiscountPolicy{}, DiscountPolicy::fixed(0.0),
                                               DiscountPolicy{RateSource::PerFlowRates, 0.0}};
    while (records < 1000000) {
        const int n = len(rng);
        std::vector<double> path{1.0 + 1000.0 * u(rng)};
        for (int i = 1; i < n; ++i) path.push_back(std::max(0.0, path.back() * (0.7 + 0.6 * u(rng)) - 50.0 * u(rng)));
        const auto status = static_cast<FinalStatus>(rng() % kFinalStatusCount);
        auto spell = testkit::make_spell(path, status, testkit::ym(2005, 1) + static_cast<int>(rng() % 120),
                                         "R" + std::to_string(spells));
        for (std::size_t i = 1; i < spell.observations.size(); ++i) {
            auto& o = spell.observations[i];
            o.cash_recovery = u(rng) < 0.5 ? 2.0 * path[0] * u(rng) : 0.0;
            o.collateral_recovery = u(rng) < 0.1 ? path[0] * u(rng) : 0.0;
            o.cost = u(rng) < 0.2 ? 10.0 * u(rng) : 0.0;
        }
        const auto& policy = policies[spells % policies.size()];
        ++spells;
        for (const auto& recs : {realized_lgd_series(spell, policy, macro), rlgd_delta_os(spell, policy, macro)}) {
            for (const auto& r : recs) {
                ++records;
                raw_negative += r.rlgd_raw < 0.0;
                if (!(r.rlgd >= 0.0)) return {false, "negative rlgd " + fmt("%.6g", r.rlgd) + " on " + r.borrower_id};
            }
        }
    }
    return {true, std::to_string(records) + " records from " + std::to_string(spells) + " spells, " +
                      std::to_string(raw_negative) + " negative before flooring, none after"};
}

Outcome gbt_correctness() {
    std::string detail;
    bool ok = true;
    // depth-1 stumps on y = 1[x > 0]
    Matrix x(4, 1);
    const std::vector<double> xs{-2, -1, 1, 2};
    for (std::size_t i = 0; i < 4; ++i) x.at(i, 0) = xs[i];
    const std::vector<double> y{0, 0, 1, 1};
    double worst = 0.0;
    for (auto [lambda, lo, hi] : {std::tuple{0.0, 0.0, 1.0}, {1.0, 1.0 / 6.0, 5.0 / 6.0}}) {
        gbt::GbtParams p;
        p.learning_rate = 1.0;
        p.max_depth = 1;
        p.n_estimators = 1;
        p.min_child_weight = 0.0;
        p.reg_lambda = lambda;
        p.base_score = 0.5;
        const auto pred = gbt::predict(gbt::train(x, y, p), x);
        for (std::size_t i = 0; i < 4; ++i) worst = std::max(worst, std::abs(pred[i] - (i < 2 ? lo : hi)));
    }
    ok = ok && worst <= 1e-12;
    detail += "stump max error " + fmt("%.2g", worst);

    // monotone loss and decomposition on a nonlinear target
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix xn(1000, 4);
    std::vector<double> yn(1000);
    for (std::size_t i = 0; i < 1000; ++i) {
        for (std::size_t c = 0; c < 4; ++c) xn.at(i, c) = u(rng);
        yn[i] = std::sin(6 * xn.at(i, 0)) + xn.at(i, 1) * xn.at(i, 2) + 0.1 * u(rng);
    }
    gbt::GbtParams full;
    full.n_estimators = 60;
    full.max_depth = 4;
    full.learning_rate = 0.3;
    gbt::TrainLog log;
    const auto m = gbt::train(xn, yn, full, {}, &log);
    bool monotone = true;
    for (std::size_t k = 1; k < log.train_mse.size(); ++k) monotone = monotone && log.train_mse[k] <= log.train_mse[k - 1];
    const auto pred = gbt::predict(m, xn);
    const auto contrib = gbt::tree_contributions(m, xn);
    bool identity = true;
    for (std::size_t i = 0; i < xn.rows(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < contrib.cols(); ++k) s += contrib.at(i, k);
        identity = identity && pred[i] == m.base_score + full.learning_rate * s;
    }
    ok = ok && monotone && identity;
    detail += std::string(", loss ") + (monotone ? "non-increasing" : "INCREASED") + ", decomposition " +
              (identity ? "exact" : "BROKEN");

    // linear target with the tuned "All" hyperparameters
    std::normal_distribution<double> noise(0.0, 0.01);
    auto make = [&](std::size_t n, Matrix& mx, std::vector<double>& my) {
        mx = Matrix(n, 2);
        my.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            mx.at(i, 0) = u(rng);
            mx.at(i, 1) = u(rng);
            my[i] = 3 * mx.at(i, 0) - 2 * mx.at(i, 1) + noise(rng);
        }
    };
    Matrix xtr, xte;
    std::vector<double> ytr, yte;
    make(5000, xtr, ytr);
    make(2000, xte, yte);
    gbt::GbtParams all;
    all.learning_rate = 0.05;
    all.max_depth = 8;
    all.n_estimators = 1300;
    all.subsample = 0.8;
    all.min_child_weight = 5;
    all.colsample_bytree = 0.91;
    const auto t0 = Clock::now();
    const auto lin = gbt::train(xtr, ytr, all);
    const double secs = seconds_since(t0);
    const auto m2 = bench::compute_metrics(gbt::predict(lin, xte), yte);
    ok = ok && m2.mse < 1e-3 && secs < 60.0;
    detail += ", linear fit OOS MSE " + fmt("%.3g", m2.mse) + " in " + fmt("%.2f", secs) + " s";
    return {ok, detail};
}

Outcome search_protocol() {
    GenConfig cfg;
    cfg.n_borrowers = 150;
    const auto g = generate(cfg);
    const auto rows = bench::build_dataset(g.spells, g.macro, DiscountPolicy{}).rows;
    const auto names = all_predictors();
    const Matrix x = design_matrix(rows, names);
    const auto y = targets(rows);
    std::vector<std::string> groups;
    for (const auto& r : rows) groups.push_back(spell_key(r));
    search::ParamSpace space;
    space.dims = {{"learning_rate", search::DimKind::List, {0.1, 0.2, 0.3}},
                  {"max_depth", search::DimKind::List, {2, 3, 4}},
                  {"n_estimators", search::DimKind::List, {5, 10, 15}},
                  {"subsample", search::DimKind::List, {0.8, 1.0}},
                  {"colsample_bytree", search::DimKind::List, {0.7, 1.0}}};
    search::SearchOptions opt;
    opt.k = 5;
    opt.seed = 31;
    const search::SearchData data{x, y, groups, names};
    const auto r25 = search::random_search(space, 25, data, opt);
    const auto r60 = search::random_search(space, 60, data, opt);
    bool shared = true;
    for (std::size_t i = 0; i < 25; ++i) shared = shared && r60.candidates[i] == r25.candidates[i];
    const bool monotone = r60.best().score.mean_mse <= r25.best().score.mean_mse;
    const bool ok = r25.fits == 125 && r60.fits == 300 && shared && monotone;
    return {ok, "fits " + std::to_string(r25.fits) + " and " + std::to_string(r60.fits) + ", shared prefix " +
                    (shared ? "identical" : "DIFFERS") + ", best CV MSE " + fmt("%.6f", r25.best().score.mean_mse) +
                    " -> " + fmt("%.6f", r60.best().score.mean_mse)};
}

Outcome split_protocol() {
    const auto& rows = default_dataset().rows;
    const auto spec = cli::bench_config(cli::RunConfig{}).split;
    const auto s = bench::temporal_split(rows, spec);
    std::vector<int> seen(rows.size(), 0);
    for (const auto* part : {&s.train, &s.out_of_sample, &s.out_of_date})
        for (auto i : *part) ++seen[i];
    const bool partition = std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });

    int last = rows.front().reference_date.value;
    for (const auto& r : rows) last = std::max(last, r.reference_date.value);
    std::set<int> ood_months;
    for (auto i : s.out_of_date) ood_months.insert(rows[i].reference_date.value);
    std::size_t late_elsewhere = 0;
    for (const auto* part : {&s.train, &s.out_of_sample})
        for (auto i : *part) late_elsewhere += rows[i].reference_date.value > last - 6;
    const bool ood_exact = ood_months.size() == 6 && *ood_months.begin() == last - 5 && late_elsewhere == 0;

    auto key = [&](std::size_t i) { return spell_key(rows[i]) + "#" + rows[i].reference_date.to_string(); };
    std::set<std::string> train_keys, train_spells;
    for (auto i : s.train) {
        train_keys.insert(key(i));
        train_spells.insert(spell_key(rows[i]));
    }
    std::size_t leaks = 0;
    for (const auto* part : {&s.out_of_sample, &s.out_of_date})
        for (auto i : *part) leaks += train_keys.contains(key(i));
    for (auto i : s.out_of_sample) leaks += train_spells.contains(spell_key(rows[i]));

    const double n = static_cast<double>(rows.size());
    const double tr = s.train.size() / n, oos = s.out_of_sample.size() / n, ood = s.out_of_date.size() / n;
    const bool props = std::abs(tr - 0.75) <= 0.05 && std::abs(oos - 0.20) <= 0.05 && std::abs(ood - 0.05) <= 0.05;
    const bool ok = partition && ood_exact && leaks == 0 && props;
    return {ok, "train/OOS/OOD " + fmt("%.1f", 100 * tr) + "/" + fmt("%.1f", 100 * oos) + "/" + fmt("%.1f", 100 * ood) +
                    "%, OOD months " + std::to_string(ood_months.size()) + (ood_exact ? " (last 6)" : " (WRONG)") +
                    ", partition " + (partition ? "ok" : "BROKEN") + ", leaked keys " + std::to_string(leaks)};
}

std::string orderings(const bench::BenchReport& r, bool& all_hold) {
    const double do_mse = r.at("DeltaOutstanding", bench::kOutOfSample).mse;
    const double tot_mse = r.at("GBT_total", bench::kOutOfSample).mse;
    const double tot_mae = r.at("GBT_total", bench::kOutOfSample).mae;
    const double split_mae = r.at("GBT_loss_plus_noloss", bench::kOutOfSample).mae;
    const double v1 = r.at("GBT_SA_var1", bench::kOutOfSample).mse;
    const double v2 = r.at("GBT_SA_var2", bench::kOutOfSample).mse;
    const bool a = tot_mse < do_mse, b = split_mae <= tot_mae, c = v1 > v2;
    all_hold = a && b && c;
    return "GBT_total MSE " + fmt("%.5f", tot_mse) + (a ? " < " : " >= ") + "DeltaOutstanding " + fmt("%.5f", do_mse) +
           "; loss+noloss MAE " + fmt("%.5f", split_mae) + (b ? " <= " : " > ") + "GBT_total " + fmt("%.5f", tot_mae) +
           "; SA_var1 MSE " + fmt("%.5f", v1) + (c ? " > " : " <= ") + "SA_var2 " + fmt("%.5f", v2);
}

Outcome directional_benchmark() {
    constexpr double kBudget = 600.0;
    const auto t0 = Clock::now();
    const auto deadline = t0 + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(kBudget));
    const cli::RunConfig run;
    auto cfg = cli::bench_config(run);
    cfg.search.stop = [deadline] { return Clock::now() >= deadline; };
    std::string full;
    bool ok = false;
    try {
        const auto g = generate(run.gen);
        const auto rows = bench::build_dataset(g.spells, g.macro, run.discount).rows;
        auto report = bench::run_benchmark(rows, cfg);
        bench::run_sensitivity(rows, cfg, report);
        const double secs = seconds_since(t0);
        bool hold = false;
        full = orderings(report, hold) + "; full pipeline " + fmt("%.0f", secs) + " s";
        ok = hold && secs < kBudget;
    } catch (const Error& e) {
        full = "full pipeline (" + std::to_string(default_dataset().rows.size()) + " rows, 25-candidate search) " +
               "stopped at the " + fmt("%.0f", kBudget) + " s budget after " + fmt("%.0f", seconds_since(t0)) + " s";
    }

    // Reduced run: fixed small hyperparameters, so only the orderings are informative.
    std::string reduced;
    try {
        const auto t1 = Clock::now();
        auto small = cli::bench_config(run);
        small.space.dims = {{"learning_rate", search::DimKind::List, {0.1}},
                            {"max_depth", search::DimKind::List, {6}},
                            {"n_estimators", search::DimKind::List, {150}},
                            {"subsample", search::DimKind::List, {0.8}},
                            {"min_child_weight", search::DimKind::List, {5}},
                            {"colsample_bytree", search::DimKind::List, {0.9}}};
        small.sensitivity_space = small.space;
        small.n_iter = 1;
        small.sensitivity_n_iter = 1;
        small.search.k = 2;
        const auto& rows = default_dataset().rows;
        auto report = bench::run_benchmark(rows, small);
        bench::run_sensitivity(rows, small, report);
        bool hold = false;
        reduced = "; reduced run (1 candidate, 150 trees, 2 folds, " + fmt("%.0f", seconds_since(t1)) + " s): " +
                  orderings(report, hold);
    } catch (const std::exception& e) {
        reduced = std::string("; reduced run failed: ") + e.what();
    }
    return {ok, full + reduced};
}

Outcome determinism() {
    const auto root = scratch("c10");
    io::write_text(root / "cfg.json", R"({
  "search": {"n_iter": 2, "folds": 3,
             "space": {"max_depth": [3, 4], "n_estimators": [10, 20], "learning_rate": [0.3]}},
  "sensitivity": {"n_iter": 2,
                  "space": {"max_depth": {"int_range": [2, 4]}, "n_estimators": {"uniform_int": [5, 15], "draws": 3},
                            "learning_rate": {"uniform_real": [0.1, 0.4], "draws": 3}}},
  "train": {"n_estimators": 20, "max_depth": 4},
  "lgd": {"expanded_table": true}
})");
    const std::string cfg = (root / "cfg.json").string();
    auto snapshot = [](const fs::path& dir) {
        std::map<std::string, std::string> files;
        for (const auto& e : fs::recursive_directory_iterator(dir))
            if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = io::read_text(e.path());
        return files;
    };
    std::size_t files = 0;
    std::string differing;
    for (const char* tag : {"a", "b"}) {
        const auto base = root / tag;
        const std::string data = (base / "data").string();
        run_cli({"gen", "--config", cfg, "--out", data});
        for (const std::string cmd : {"lgd", "features", "train", "tune", "bench", "sensitivity"})
            run_cli({cmd, "--config", cfg, "--data", data, "--out", (base / cmd).string()});
        run_cli({"report", "--config", cfg, "--in", (base / "bench" / "bench_report.json").string(), "--out",
                 (base / "report").string()});
    }
    const auto a = snapshot(root / "a");
    const auto b = snapshot(root / "b");
    for (const auto& [name, body] : a) {
        auto it = b.find(name);
        if (it == b.end() || it->second != body) differing += " " + name;
    }
    files = a.size();
    const bool ok = differing.empty() && a.size() == b.size() && files > 0;
    fs::remove_all(root);
    return {ok, std::to_string(files) + " files from 8 subcommands" +
                    (differing.empty() ? std::string(", bit-identical") : ", differing:" + differing)};
}

}  // namespace

int main() {
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
        {1, oracle_equivalence}, {2, telescoping},     {3, cured_bias},    {4, expansion_counts},
        {5, rlgd_floor},         {6, gbt_correctness}, {7, search_protocol}, {8, split_protocol},
        {9, directional_benchmark}, {10, determinism}};
    int failures = 0;
    for (const auto& [id, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
