#include "lgdlab/bench.hpp"

#include "json_params.hpp"
#include "lgdlab/error.hpp"
#include "lgdlab/format.hpp"
#include "lgdlab/lgd_delta_os.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace lgdlab::bench {

std::string_view to_string(SplitUnit unit) { return unit == SplitUnit::BySpell ? "by_spell" : "by_row"; }

SplitUnit parse_split_unit(std::string_view text) {
    if (text == "by_spell") return SplitUnit::BySpell;
    if (text == "by_row") return SplitUnit::ByRow;
    throw ConfigError("unknown split unit '" + std::string(text) + "' (expected by_spell or by_row)");
}

void SplitSpec::validate() const {
    if (ood_months < 1) throw ConfigError("ood_months must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must be in (0, 1)");
}

SplitIndices temporal_split(const std::vector<FeatureRow>& rows, const SplitSpec& spec) {
    spec.validate();
    if (rows.empty()) throw ConfigError("cannot split an empty feature set");
    auto [lo, hi] = std::minmax_element(rows.begin(), rows.end(), [](const FeatureRow& a, const FeatureRow& b) {
        return a.reference_date < b.reference_date;
    });
    const MonthIndex first = lo->reference_date;
    const MonthIndex last = hi->reference_date;
    const int span = months_between(first, last) + 1;
    if (span <= spec.ood_months) {
        throw ConfigError("data spans " + std::to_string(span) + " months, need more than ood_months = " +
                          std::to_string(spec.ood_months));
    }
    const MonthIndex ood_start = last - (spec.ood_months - 1);

    SplitIndices out;
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        (rows[i].reference_date >= ood_start ? out.out_of_date : rest).push_back(i);
    }

    // Units (spells or single rows) in first-seen order, then shuffled.
    std::vector<std::vector<std::size_t>> units;
    if (spec.unit == SplitUnit::ByRow) {
        for (std::size_t i : rest) units.push_back({i});
    } else {
        std::map<std::string, std::size_t> unit_of;
        for (std::size_t i : rest) {
            auto [it, fresh] = unit_of.emplace(spell_key(rows[i]), units.size());
            if (fresh) units.emplace_back();
            units[it->second].push_back(i);
        }
    }
    std::mt19937_64 rng(spec.seed);
    std::shuffle(units.begin(), units.end(), rng);
    const double target = spec.train_fraction * static_cast<double>(rest.size());
    std::size_t taken = 0;
    for (const auto& u : units) {
        auto& dst = static_cast<double>(taken) < target ? out.train : out.out_of_sample;
        if (&dst == &out.train) taken += u.size();
        dst.insert(dst.end(), u.begin(), u.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.out_of_sample.begin(), out.out_of_sample.end());
    return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_by_final_status(
    const std::vector<FeatureRow>& rows, const std::vector<std::size_t>& subset) {
    std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out;
    for (std::size_t i : subset) (is_loss_group(rows.at(i).final_status) ? out.second : out.first).push_back(i);
    return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_by_final_status(const std::vector<FeatureRow>& rows) {
    std::vector<std::size_t> all(rows.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return split_by_final_status(rows, all);
}

Metrics compute_metrics(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size()) {
        throw ValidationError("metrics: " + std::to_string(predictions.size()) + " predictions for " +
                              std::to_string(targets.size()) + " targets");
    }
    if (predictions.empty()) throw ValidationError("metrics: no rows");
    const double n = static_cast<double>(predictions.size());
    Metrics m;
    m.n = predictions.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double e = predictions[i] - targets[i];
        m.mae += std::abs(e);
        m.mse += e * e;
        sum += e;
    }
    m.mae /= n;
    m.mse /= n;
    if (m.n > 1) {
        const double mean = sum / n;
        double ss = 0.0;
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            const double d = predictions[i] - targets[i] - mean;
            ss += d * d;
        }
        m.sd_error = std::sqrt(ss / (n - 1.0));
    }
    return m;
}

Dataset build_dataset(const std::vector<DefaultSpell>& spells, const MacroSeries& macro, const DiscountPolicy& policy) {
    Dataset d;
    d.cashflow = realized_lgd_portfolio(spells, policy, macro);
    d.delta_os = rlgd_delta_os_portfolio(spells, policy, macro);
    d.rows = build_feature_matrix(spells, d.cashflow, d.delta_os, macro);
    return d;
}

bool BenchReport::has(std::string_view model, std::string_view sample) const {
    return std::any_of(cells.begin(), cells.end(), [&](const MetricCell& c) { return c.model == model && c.sample == sample; });
}

const Metrics& BenchReport::at(std::string_view model, std::string_view sample) const {
    for (const auto& c : cells) {
        if (c.model == model && c.sample == sample) return c.metrics;
    }
    throw LookupError("report has no cell " + std::string(model) + "/" + std::string(sample));
}

const ModelSummary& BenchReport::summary(std::string_view model) const {
    for (const auto& m : models) {
        if (m.model == model) return m;
    }
    throw LookupError("report has no model " + std::string(model));
}

std::vector<std::string> sa_var1_features() { return {"rlgd_os", "eao", "discount_rate"}; }

std::vector<std::string> sa_var2_features() {
    std::vector<std::string> out;
    for (auto name : kPredictorNames) {
        if (name != "rlgd_os") out.emplace_back(name);
    }
    return out;
}

namespace {

std::string row_key(const FeatureRow& r) { return spell_key(r) + "#" + std::to_string(r.reference_date.value); }

std::vector<FeatureRow> pick(const std::vector<FeatureRow>& rows, const std::vector<std::size_t>& idx) {
    std::vector<FeatureRow> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(rows[i]);
    return out;
}

// Training rows must never reach an evaluation sample.
void assert_no_leakage(const std::vector<FeatureRow>& rows, const std::vector<std::size_t>& train,
                       const SplitIndices& split, SplitUnit unit) {
    std::set<std::string> train_rows;
    std::set<std::string> train_spells;
    for (std::size_t i : train) {
        train_rows.insert(row_key(rows[i]));
        train_spells.insert(spell_key(rows[i]));
    }
    for (const auto* eval : {&split.out_of_sample, &split.out_of_date}) {
        for (std::size_t i : *eval) {
            if (train_rows.count(row_key(rows[i]))) throw Error("leakage: training row " + row_key(rows[i]) + " is evaluated");
        }
    }
    if (unit == SplitUnit::BySpell) {
        for (std::size_t i : split.out_of_sample) {
            if (train_spells.count(spell_key(rows[i]))) {
                throw Error("leakage: spell " + spell_key(rows[i]) + " is in both train and out-of-sample");
            }
        }
    }
}

struct Fitted {
    gbt::GbtModel model;
    search::SearchResult search;
};

Fitted tune_and_fit(const std::vector<FeatureRow>& train, const std::vector<std::string>& features,
                    const search::ParamSpace& space, int n_iter, bool grid, const search::SearchOptions& opt) {
    const Matrix x = design_matrix(train, features);
    const auto y = targets(train);
    std::vector<std::string> groups;
    groups.reserve(train.size());
    for (const auto& r : train) groups.push_back(spell_key(r));
    search::SearchData data{x, y, groups, features};
    Fitted f;
    f.search = grid ? search::grid_search(space, data, opt) : search::random_search(space, n_iter, data, opt);
    f.model = gbt::train(x, y, f.search.best().params, features);
    return f;
}

std::vector<double> predict_rows(const gbt::GbtModel& model, const std::vector<FeatureRow>& rows,
                                 const std::vector<std::size_t>& idx) {
    if (idx.empty()) return {};
    return gbt::predict(model, design_matrix(pick(rows, idx), model.feature_schema), model.feature_schema);
}

std::vector<double> target_of(const std::vector<FeatureRow>& rows, const std::vector<std::size_t>& idx) {
    std::vector<double> out;
    for (std::size_t i : idx) out.push_back(rows[i].target_rlgd);
    return out;
}

void add_cell(BenchReport& r, std::string_view model, std::string_view sample, const Metrics& m) {
    r.cells.push_back({std::string(model), std::string(sample), m});
}

void add_cv_cell(BenchReport& r, std::string_view model, const search::SearchResult& s, std::size_t n) {
    const auto& best = s.best().score;
    add_cell(r, model, kCrossValidation, Metrics{best.mean_mae, best.mean_mse, best.sd_error, n});
}

void add_summary(BenchReport& r, std::string_view model, const Fitted& f) {
    r.models.push_back({std::string(model), f.model.feature_schema, f.search.best().params, f.search.fits,
                        f.search.n_iter, f.search.best().score.mean_mse});
}

// Single searched model on all training rows, scored on both test samples.
void run_single(const std::vector<FeatureRow>& rows, const SplitIndices& split, const BenchConfig& cfg,
                std::string_view label, const std::vector<std::string>& features, const search::ParamSpace& space,
                int n_iter, bool grid, BenchReport& report) {
    assert_no_leakage(rows, split.train, split, cfg.split.unit);
    const auto fitted = tune_and_fit(pick(rows, split.train), features, space, n_iter, grid, cfg.search);
    add_cv_cell(report, label, fitted.search, split.train.size());
    for (auto [sample, idx] : {std::pair{kOutOfSample, &split.out_of_sample}, std::pair{kOutOfDate, &split.out_of_date}}) {
        if (idx->empty()) continue;
        add_cell(report, label, sample, compute_metrics(predict_rows(fitted.model, rows, *idx), target_of(rows, *idx)));
    }
    add_summary(report, label, fitted);
}

}  // namespace

BenchReport run_benchmark(const std::vector<FeatureRow>& rows, const BenchConfig& cfg) {
    const auto split = temporal_split(rows, cfg.split);
    if (split.train.empty()) throw ConfigError("training sample is empty");
    BenchReport report;
    report.seed = cfg.search.seed;
    report.n_train = split.train.size();
    report.n_out_of_sample = split.out_of_sample.size();
    report.n_out_of_date = split.out_of_date.size();

    for (auto [sample, idx] : {std::pair{kOutOfSample, &split.out_of_sample}, std::pair{kOutOfDate, &split.out_of_date}}) {
        if (idx->empty()) continue;
        std::vector<double> pred;
        for (std::size_t i : *idx) pred.push_back(rows[i].rlgd_os);
        add_cell(report, "DeltaOutstanding", sample, compute_metrics(pred, target_of(rows, *idx)));
    }

    const auto features = all_predictors();
    run_single(rows, split, cfg, "GBT_total", features, cfg.space, cfg.n_iter, cfg.grid, report);

    // Status-split models: each tuned on its own training subsample, test
    // predictions pooled back into the sample's row order.
    const auto [train_noloss, train_loss] = split_by_final_status(rows, split.train);
    std::map<bool, Fitted> by_group;
    for (auto [loss, idx] : {std::pair{false, &train_noloss}, std::pair{true, &train_loss}}) {
        if (idx->empty()) throw ConfigError(std::string("training sample has no ") + (loss ? "loss" : "no-loss") + " rows");
        assert_no_leakage(rows, *idx, split, cfg.split.unit);
        auto fitted = tune_and_fit(pick(rows, *idx), features, cfg.space, cfg.n_iter, cfg.grid, cfg.search);
        const char* label = loss ? "GBT_loss" : "GBT_noloss";
        add_cv_cell(report, label, fitted.search, idx->size());
        add_summary(report, label, fitted);
        by_group.emplace(loss, std::move(fitted));
    }
    for (auto [sample, idx] : {std::pair{kOutOfSample, &split.out_of_sample}, std::pair{kOutOfDate, &split.out_of_date}}) {
        if (idx->empty()) continue;
        const auto [noloss, loss] = split_by_final_status(rows, *idx);
        const auto p_noloss = predict_rows(by_group.at(false).model, rows, noloss);
        const auto p_loss = predict_rows(by_group.at(true).model, rows, loss);
        std::map<std::size_t, double> pooled;
        for (std::size_t i = 0; i < noloss.size(); ++i) pooled.emplace(noloss[i], p_noloss[i]);
        for (std::size_t i = 0; i < loss.size(); ++i) {
            if (!pooled.emplace(loss[i], p_loss[i]).second) throw Error("pooled predictions overlap");
        }
        if (pooled.size() != idx->size()) throw Error("pooled predictions do not cover the sample");
        std::vector<double> pred;
        for (std::size_t i : *idx) pred.push_back(pooled.at(i));
        add_cell(report, "GBT_loss_plus_noloss", sample, compute_metrics(pred, target_of(rows, *idx)));
    }
    return report;
}

void run_sensitivity(const std::vector<FeatureRow>& rows, const BenchConfig& cfg, BenchReport& report) {
    const auto split = temporal_split(rows, cfg.split);
    if (split.train.size() != report.n_train) throw ConfigError("sensitivity split differs from the base benchmark");
    run_single(rows, split, cfg, "GBT_SA_hyp", all_predictors(), cfg.sensitivity_space, cfg.sensitivity_n_iter, false,
               report);
    run_single(rows, split, cfg, "GBT_SA_var1", sa_var1_features(), cfg.space, cfg.n_iter, cfg.grid, report);
    run_single(rows, split, cfg, "GBT_SA_var2", sa_var2_features(), cfg.space, cfg.n_iter, cfg.grid, report);
}

std::string to_json(const BenchReport& r) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : r.cells) {
        cells.push_back({{"model", c.model},
                         {"sample", c.sample},
                         {"mae", c.metrics.mae},
                         {"mse", c.metrics.mse},
                         {"sd_error", c.metrics.sd_error},
                         {"n", c.metrics.n}});
    }
    nlohmann::json models = nlohmann::json::array();
    for (const auto& m : r.models) {
        models.push_back({{"model", m.model},
                          {"features", m.features},
                          {"params", detail::params_to_json(m.params)},
                          {"fits", m.fits},
                          {"n_iter", m.n_iter},
                          {"cv_mse", m.cv_mse}});
    }
    nlohmann::json doc = {{"format", "lgdlab.bench"},
                          {"version", 1},
                          {"seed", r.seed},
                          {"n_train", r.n_train},
                          {"n_out_of_sample", r.n_out_of_sample},
                          {"n_out_of_date", r.n_out_of_date},
                          {"cells", cells},
                          {"models", models}};
    return doc.dump(1);
}

BenchReport report_from_json(const std::string& text) {
    try {
        const auto doc = nlohmann::json::parse(text);
        if (doc.at("format") != "lgdlab.bench") throw ParseError("not an lgdlab.bench document");
        BenchReport r;
        r.seed = doc.at("seed").get<std::uint64_t>();
        r.n_train = doc.at("n_train").get<std::size_t>();
        r.n_out_of_sample = doc.at("n_out_of_sample").get<std::size_t>();
        r.n_out_of_date = doc.at("n_out_of_date").get<std::size_t>();
        for (const auto& c : doc.at("cells")) {
            r.cells.push_back({c.at("model").get<std::string>(), c.at("sample").get<std::string>(),
                               Metrics{c.at("mae").get<double>(), c.at("mse").get<double>(),
                                       c.at("sd_error").get<double>(), c.at("n").get<std::size_t>()}});
        }
        for (const auto& m : doc.at("models")) {
            r.models.push_back({m.at("model").get<std::string>(), m.at("features").get<std::vector<std::string>>(),
                                detail::params_from_json(m.at("params")), m.at("fits").get<std::size_t>(),
                                m.at("n_iter").get<int>(), m.at("cv_mse").get<double>()});
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed bench report JSON: ") + e.what());
    } catch (const ConfigError& e) {
        throw ParseError(std::string("bench report JSON: ") + e.what());
    }
}

std::string to_csv(const BenchReport& r) {
    std::ostringstream out;
    out << "model,sample,metric,value\n";
    for (const auto& c : r.cells) {
        out << c.model << ',' << c.sample << ",mae," << format_number(c.metrics.mae) << '\n';
        out << c.model << ',' << c.sample << ",mse," << format_number(c.metrics.mse) << '\n';
        out << c.model << ',' << c.sample << ",sd_error," << format_number(c.metrics.sd_error) << '\n';
        out << c.model << ',' << c.sample << ",n," << c.metrics.n << '\n';
    }
    return out.str();
}

std::string to_table(const BenchReport& r) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-22s %-17s %10s %10s %10s %8s\n", "model", "sample", "MAE", "MSE", "sd.error", "n");
    out << line;
    for (const auto& c : r.cells) {
        std::snprintf(line, sizeof line, "%-22s %-17s %10.6f %10.6f %10.6f %8zu\n", c.model.c_str(), c.sample.c_str(),
                      c.metrics.mae, c.metrics.mse, c.metrics.sd_error, c.metrics.n);
        out << line;
    }
    return out.str();
}

namespace {

// NaN when either side has zero variance.
double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    if (a.size() < 2) return std::nan("");
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return std::nan("");
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

std::string correlation_csv(const std::vector<FeatureRow>& rows) {
    const auto [noloss, loss] = split_by_final_status(rows);
    std::vector<std::size_t> total(rows.size());
    for (std::size_t i = 0; i < total.size(); ++i) total[i] = i;
    const auto& total_idx = total;
    std::ostringstream out;
    out << "feature,noloss,loss,total\n";
    for (std::size_t f = 0; f < kPredictorNames.size(); ++f) {
        out << kPredictorNames[f];
        for (const std::vector<std::size_t>* idx : {&noloss, &loss, &total_idx}) {
            std::vector<double> x, y;
            for (std::size_t i : *idx) {
                x.push_back(rows[i].predictor(f));
                y.push_back(rows[i].target_rlgd);
            }
            const double c = pearson(x, y);
            out << ',' << (std::isnan(c) ? std::string() : format_number(c));
        }
        out << '\n';
    }
    return out.str();
}

std::vector<HistogramBin> histogram(std::span<const double> values, double lo, double hi, std::size_t bins) {
    if (bins == 0 || !(hi > lo)) throw ConfigError("histogram needs bins >= 1 and hi > lo");
    std::vector<HistogramBin> out(bins);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        out[b].lo = lo + width * static_cast<double>(b);
        out[b].hi = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
    }
    for (double v : values) {
        auto b = static_cast<long long>(std::floor((v - lo) / width));
        b = std::clamp<long long>(b, 0, static_cast<long long>(bins) - 1);
        ++out[static_cast<std::size_t>(b)].count;
    }
    return out;
}

std::vector<ScatterPoint> scatter_points(const std::vector<FeatureRow>& rows, std::size_t max_points, std::uint64_t seed) {
    std::vector<std::size_t> idx(rows.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (rows.size() > max_points) {
        std::mt19937_64 rng(seed);
        for (std::size_t i = 0; i < max_points; ++i) {
            std::swap(idx[i], idx[std::uniform_int_distribution<std::size_t>(i, idx.size() - 1)(rng)]);
        }
        idx.resize(max_points);
        std::sort(idx.begin(), idx.end());
    }
    std::vector<ScatterPoint> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) {
        const auto& r = rows[i];
        out.push_back({r.borrower_id, r.spell_index, r.reference_date, r.final_status, cap_unit(r.target_rlgd),
                       cap_unit(r.rlgd_os)});
    }
    return out;
}

}  // namespace lgdlab::bench
