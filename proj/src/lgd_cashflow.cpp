#include "lgdlab/lgd_cashflow.hpp"

#include "lgdlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace lgdlab {

std::string_view to_string(RateSource source) {
    switch (source) {
        case RateSource::BaseRatePlusAddon: return "base_rate_plus_addon";
        case RateSource::BaseRate: return "base_rate";
        case RateSource::FixedRate: return "fixed";
        case RateSource::PerFlowRates: return "per_flow";
    }
    return "?";
}

RateSource parse_rate_source(std::string_view text) {
    for (auto s : {RateSource::BaseRatePlusAddon, RateSource::BaseRate, RateSource::FixedRate,
                   RateSource::PerFlowRates}) {
        if (to_string(s) == text) return s;
    }
    throw ConfigError("unknown rate source '" + std::string(text) + "'");
}

double DiscountPolicy::annual_rate(const DefaultSpell& spell, MonthIndex reference, const MacroSeries& macro,
                                   FlowKind kind) const {
    double rate = 0.0;
    switch (source) {
        case RateSource::BaseRatePlusAddon:
            rate = macro.base_rate_at(reference) + macro.discount_addon;
            break;
        case RateSource::BaseRate:
            rate = macro.base_rate_at(reference);
            break;
        case RateSource::FixedRate:
            rate = fixed_rate;
            break;
        case RateSource::PerFlowRates:
            switch (kind) {
                case FlowKind::CollateralRecovery: rate = spell.secured_rate; break;
                case FlowKind::CashRecovery:
                case FlowKind::BalanceChange: rate = spell.unsecured_rate; break;
                case FlowKind::Cost: rate = macro.base_rate_at(reference) + macro.discount_addon; break;
            }
            break;
    }
    if (!(rate >= 0.0)) throw ConfigError("discount rate must be non-negative, got " + std::to_string(rate));
    return rate;
}

double discount_factor(double annual_rate, int t_months) {
    if (t_months < 0) throw OrderingError("discount horizon must be non-negative");
    if (!(annual_rate >= 0.0)) throw NumericError("discount rate must be non-negative");
    return std::pow(1.0 + annual_rate / 12.0, t_months);
}

double economic_loss(const DefaultSpell& spell, MonthIndex reference_date, const DiscountPolicy& policy,
                     const MacroSeries& macro) {
    const std::size_t ref = spell.position_of(reference_date);
    const auto& obs = spell.observations;
    const double cash_rate = policy.annual_rate(spell, reference_date, macro, FlowKind::CashRecovery);
    const double collateral_rate = policy.annual_rate(spell, reference_date, macro, FlowKind::CollateralRecovery);
    const double cost_rate = policy.annual_rate(spell, reference_date, macro, FlowKind::Cost);

    double recoveries = 0.0;
    double costs = 0.0;
    for (std::size_t i = ref + 1; i < obs.size(); ++i) {
        const int t = static_cast<int>(i - ref);
        const auto& o = obs[i];
        if (o.cash_recovery != 0.0) recoveries += o.cash_recovery / discount_factor(cash_rate, t);
        if (o.collateral_recovery != 0.0) recoveries += o.collateral_recovery / discount_factor(collateral_rate, t);
        if (o.cost != 0.0) costs += o.cost / discount_factor(cost_rate, t);
    }
    if (spell.final_status == FinalStatus::Cured) {
        // The cured balance counts as recovered when the borrower exits default.
        const int t = static_cast<int>(obs.size() - 1 - ref);
        recoveries += obs.back().outstanding / discount_factor(cash_rate, t);
    }
    return obs[ref].outstanding - recoveries + costs;
}

std::vector<LgdRecord> realized_lgd_series(const DefaultSpell& spell, const DiscountPolicy& policy,
                                           const MacroSeries& macro) {
    std::vector<LgdRecord> out;
    out.reserve(spell.observations.size());
    const bool resolved = spell.final_status != FinalStatus::NotResolved;
    for (const auto& o : spell.observations) {
        LgdRecord rec;
        rec.borrower_id = spell.borrower_id;
        rec.spell_index = spell.spell_index;
        rec.reference_date = o.reporting_date;
        rec.el = economic_loss(spell, o.reporting_date, policy, macro);
        rec.exposure_at_ref = o.outstanding;
        rec.rlgd_raw = o.outstanding > 0.0 ? rec.el / o.outstanding : 0.0;
        rec.rlgd = std::max(0.0, rec.rlgd_raw);
        rec.resolved = resolved;
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<LgdRecord> realized_lgd_portfolio(const std::vector<DefaultSpell>& spells,
                                              const DiscountPolicy& policy, const MacroSeries& macro) {
    std::vector<const DefaultSpell*> order;
    order.reserve(spells.size());
    for (const auto& s : spells) order.push_back(&s);
    std::sort(order.begin(), order.end(), [](const DefaultSpell* a, const DefaultSpell* b) {
        return std::tie(a->borrower_id, a->spell_index) < std::tie(b->borrower_id, b->spell_index);
    });
    std::vector<LgdRecord> out;
    for (const auto* s : order) {
        auto part = realized_lgd_series(*s, policy, macro);
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return out;
}

}  // namespace lgdlab
