#pragma once

#include "lgdlab/domain.hpp"

#include <string>
#include <vector>

namespace lgdlab {

// Realized LGD of one spell as seen from one reference date.
struct LgdRecord {
    std::string borrower_id;
    int spell_index = 0;
    MonthIndex reference_date;
    double el = 0.0;
    double exposure_at_ref = 0.0;
    double rlgd_raw = 0.0;  // el / exposure_at_ref, may be < 0 or > 1
    double rlgd = 0.0;      // max(0, rlgd_raw)
    bool resolved = false;

    bool operator==(const LgdRecord&) const = default;
};

enum class RateSource {
    BaseRatePlusAddon,  // base rate at the reference date + macro.discount_addon
    BaseRate,           // base rate at the reference date
    FixedRate,          // DiscountPolicy::fixed_rate
    PerFlowRates,       // spell's secured rate on collateral, unsecured on cash
};

enum class FlowKind { CashRecovery, CollateralRecovery, Cost, BalanceChange };

struct DiscountPolicy {
    RateSource source = RateSource::BaseRatePlusAddon;
    double fixed_rate = 0.0;

    static DiscountPolicy fixed(double annual_rate) { return {RateSource::FixedRate, annual_rate}; }

    // Annual rate applied to a flow of `kind` discounted to `reference`.
    // Under PerFlowRates costs use base rate + add-on and balance changes use
    // the unsecured rate. Throws ConfigError on a missing base rate or a
    // negative resulting rate.
    double annual_rate(const DefaultSpell& spell, MonthIndex reference, const MacroSeries& macro,
                       FlowKind kind) const;
};

std::string_view to_string(RateSource source);
RateSource parse_rate_source(std::string_view text);

// (1 + annual_rate/12)^t_months. Throws OrderingError for negative t and
// NumericError for a negative rate.
double discount_factor(double annual_rate, int t_months);

// Exposure at the reference date minus discounted recoveries plus discounted
// costs over flows strictly after it. Cured spells add a terminal recovery of
// the balance left at out_date.
double economic_loss(const DefaultSpell& spell, MonthIndex reference_date, const DiscountPolicy& policy,
                     const MacroSeries& macro);

// One record per reporting date of the spell.
std::vector<LgdRecord> realized_lgd_series(const DefaultSpell& spell, const DiscountPolicy& policy,
                                           const MacroSeries& macro);

// Cash-flow records for every spell, ordered by (borrower_id, spell_index, reference_date).
std::vector<LgdRecord> realized_lgd_portfolio(const std::vector<DefaultSpell>& spells,
                                              const DiscountPolicy& policy, const MacroSeries& macro);

// Clamp to [0, 1] for scatter plots.
inline double cap_unit(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace lgdlab
