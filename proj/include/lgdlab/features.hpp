#pragma once

#include "lgdlab/domain.hpp"
#include "lgdlab/lgd_cashflow.hpp"
#include "lgdlab/matrix.hpp"

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace lgdlab {

struct MacroPoint {
    double gdp = 0.0;
    double employment = 0.0;
    double hpi = 0.0;
    double base_rate = 0.0;
};

// Quarterly values are constant within their quarter. Throws ConfigError.
MacroPoint macro_lookup(const MacroSeries& macro, MonthIndex month);

// The 19 candidate predictors, in column order.
inline constexpr std::array<std::string_view, 19> kPredictorNames{
    "unsecured_recovery_interest",
    "secured_recovery_interest",
    "cover_value_index",
    "eao",
    "discount_rate",
    "os_delta",
    "rlgd_os",
    "default_duration",
    "reason_90days",
    "reason_bankrupt",
    "reason_forbperiod",
    "reason_fraud",
    "reason_restr",
    "reason_unlikepay",
    "gdp",
    "employment",
    "hpi",
    "repayment",
    "redefault",
};

// One row per (spell, reference date). final_status is a sample-splitting
// key and is never used as a predictor.
struct FeatureRow {
    std::string borrower_id;
    int spell_index = 0;
    MonthIndex reference_date;

    double unsecured_recovery_interest = 0.0;
    double secured_recovery_interest = 0.0;
    double cover_value_index = 0.0;
    double eao = 0.0;
    double discount_rate = 0.0;
    double os_delta = 0.0;  // os_t - os_{t-1}, 0 at the default date
    double rlgd_os = 0.0;
    int default_duration = 0;
    std::array<int, kDefaultReasonCount> reason{};  // one-hot, DefaultReason order
    double gdp = 0.0;
    double employment = 0.0;
    double hpi = 0.0;
    double repayment = 1.0;  // os_t / os_{t-1}; 1 at the default date or when os_{t-1} = 0
    int redefault = 0;

    double target_rlgd = 0.0;
    FinalStatus final_status = FinalStatus::NotResolved;

    // Predictor value by position in kPredictorNames.
    double predictor(std::size_t index) const;

    bool operator==(const FeatureRow&) const = default;
};

// Index of a predictor name; throws LookupError.
std::size_t predictor_index(std::string_view name);

// Joins both engines' records onto the spells. Both record lists must hold
// exactly one record per (borrower_id, spell_index, reporting date); any
// mismatch throws JoinError listing the offending keys. Output is ordered by
// (borrower_id, spell_index, reference_date).
std::vector<FeatureRow> build_feature_matrix(const std::vector<DefaultSpell>& spells,
                                             const std::vector<LgdRecord>& cash_lgd,
                                             const std::vector<LgdRecord>& os_lgd, const MacroSeries& macro);

// Design matrix over the named predictors (column order as given).
Matrix design_matrix(const std::vector<FeatureRow>& rows, const std::vector<std::string>& predictors);

std::vector<double> targets(const std::vector<FeatureRow>& rows);

// "borrower_id#spell_index": the unit that keeps a spell's rows together.
std::string spell_key(const FeatureRow& row);

std::vector<std::string> all_predictors();

}  // namespace lgdlab
