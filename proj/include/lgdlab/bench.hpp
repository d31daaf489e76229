#pragma once

#include "lgdlab/domain.hpp"
#include "lgdlab/features.hpp"
#include "lgdlab/gbt.hpp"
#include "lgdlab/lgd_cashflow.hpp"
#include "lgdlab/search.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace lgdlab::bench {

enum class SplitUnit { BySpell, ByRow };

std::string_view to_string(SplitUnit unit);
SplitUnit parse_split_unit(std::string_view text);

struct SplitSpec {
    int ood_months = 6;
    double train_fraction = 75.0 / 95.0;  // share of the non-OOD rows used for training
    SplitUnit unit = SplitUnit::BySpell;
    std::uint64_t seed = 0;

    void validate() const;  // throws ConfigError
};

// Row indices into the feature rows.
struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> out_of_sample;
    std::vector<std::size_t> out_of_date;
};

// Out-of-date = rows whose reference date falls in the last ood_months months
// of the data; the rest is split into train and out-of-sample by unit.
// Throws ConfigError when the data spans no more than ood_months months.
SplitIndices temporal_split(const std::vector<FeatureRow>& rows, const SplitSpec& spec);

// (no-loss rows, loss rows) as indices into `subset` order.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_by_final_status(
    const std::vector<FeatureRow>& rows, const std::vector<std::size_t>& subset);
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_by_final_status(const std::vector<FeatureRow>& rows);

struct Metrics {
    double mae = 0.0;
    double mse = 0.0;
    double sd_error = 0.0;  // sample sd (ddof 1) of signed errors; 0 for a single row
    std::size_t n = 0;

    bool operator==(const Metrics&) const = default;
};

// Throws ValidationError on empty input or a length mismatch.
Metrics compute_metrics(std::span<const double> predictions, std::span<const double> targets);

// Feature rows plus both engines' records for a portfolio.
struct Dataset {
    std::vector<FeatureRow> rows;
    std::vector<LgdRecord> cashflow;
    std::vector<LgdRecord> delta_os;
};

Dataset build_dataset(const std::vector<DefaultSpell>& spells, const MacroSeries& macro, const DiscountPolicy& policy);

struct BenchConfig {
    SplitSpec split;
    search::ParamSpace space = search::tuning_space();
    int n_iter = 25;
    bool grid = false;  // exhaustive grid instead of random candidates
    search::SearchOptions search;
    search::ParamSpace sensitivity_space = search::sensitivity_space();
    int sensitivity_n_iter = 60;
};

inline constexpr std::string_view kCrossValidation = "cross_validation";
inline constexpr std::string_view kOutOfSample = "out_of_sample";
inline constexpr std::string_view kOutOfDate = "out_of_date";

struct MetricCell {
    std::string model;
    std::string sample;
    Metrics metrics;

    bool operator==(const MetricCell&) const = default;
};

struct ModelSummary {
    std::string model;
    std::vector<std::string> features;
    gbt::GbtParams params;  // selected by the search
    std::size_t fits = 0;
    int n_iter = 0;
    double cv_mse = 0.0;

    bool operator==(const ModelSummary&) const = default;
};

struct BenchReport {
    std::uint64_t seed = 0;
    std::size_t n_train = 0;
    std::size_t n_out_of_sample = 0;
    std::size_t n_out_of_date = 0;
    std::vector<MetricCell> cells;
    std::vector<ModelSummary> models;

    bool has(std::string_view model, std::string_view sample) const;
    // Throws LookupError.
    const Metrics& at(std::string_view model, std::string_view sample) const;
    const ModelSummary& summary(std::string_view model) const;

    bool operator==(const BenchReport&) const = default;
};

// DeltaOutstanding, GBT_total and GBT_loss_plus_noloss on both test samples,
// plus cross-validation cells for the searched models. All tuning uses the
// training rows only.
BenchReport run_benchmark(const std::vector<FeatureRow>& rows, const BenchConfig& cfg);

// Adds GBT_SA_hyp (interval space), GBT_SA_var1 (rlgd_os, eao,
// discount_rate) and GBT_SA_var2 (all predictors but rlgd_os).
void run_sensitivity(const std::vector<FeatureRow>& rows, const BenchConfig& cfg, BenchReport& report);

std::vector<std::string> sa_var1_features();
std::vector<std::string> sa_var2_features();

std::string to_json(const BenchReport& report);
BenchReport report_from_json(const std::string& text);
// model,sample,metric,value
std::string to_csv(const BenchReport& report);
// Fixed-width table: one line per model and sample.
std::string to_table(const BenchReport& report);

// Pearson correlation of each predictor with the target on the no-loss,
// loss and total samples: feature,noloss,loss,total.
std::string correlation_csv(const std::vector<FeatureRow>& rows);

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
};

// Equal-width bins over [lo, hi]; values outside are clamped into the end bins.
std::vector<HistogramBin> histogram(std::span<const double> values, double lo, double hi, std::size_t bins);

struct ScatterPoint {
    std::string borrower_id;
    int spell_index = 0;
    MonthIndex reference_date;
    FinalStatus final_status = FinalStatus::NotResolved;
    double rlgd_cashflow = 0.0;
    double rlgd_delta_os = 0.0;
};

// Both engines' rlgd per key, capped to [0, 1]; a seeded subsample of
// max_points rows when there are more.
std::vector<ScatterPoint> scatter_points(const std::vector<FeatureRow>& rows, std::size_t max_points,
                                         std::uint64_t seed);

}  // namespace lgdlab::bench
