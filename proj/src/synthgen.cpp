#include "lgdlab/synthgen.hpp"

#include "lgdlab/error.hpp"
#include "lgdlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace lgdlab {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

bool chance(Rng& rng, double p) { return uniform(rng, 0.0, 1.0) < p; }

int gamma_months(Rng& rng, double shape, double scale) {
    return static_cast<int>(std::floor(std::gamma_distribution<double>(shape, scale)(rng)));
}

double round_to(double v, double step) { return std::round(v / step) * step; }

// Months from default to resolution for a given final status.
int draw_duration(Rng& rng, FinalStatus status) {
    switch (status) {
        case FinalStatus::Cured: return 3 + gamma_months(rng, 2.0, 7.0);
        case FinalStatus::ExitNoLoss: return 1 + gamma_months(rng, 1.5, 19.0);
        case FinalStatus::ExitWithLoss: return 1 + gamma_months(rng, 2.0, 20.0);
        case FinalStatus::NotResolved: return gamma_months(rng, 1.2, 30.0);
    }
    return 0;
}

int min_duration(FinalStatus status) {
    switch (status) {
        case FinalStatus::Cured: return 3;
        case FinalStatus::ExitNoLoss:
        case FinalStatus::ExitWithLoss: return 1;
        case FinalStatus::NotResolved: return 0;
    }
    return 0;
}

DefaultReason draw_reason(Rng& rng, FinalStatus status) {
    // Weights over Days90, Bankrupt, ForbPeriod, Fraud, Restr, UnlikePay.
    static constexpr std::array<std::array<double, kDefaultReasonCount>, kFinalStatusCount> weights{{
        {0.35, 0.00, 0.25, 0.00, 0.25, 0.15},
        {0.50, 0.10, 0.00, 0.00, 0.10, 0.30},
        {0.45, 0.15, 0.05, 0.05, 0.05, 0.25},
        {0.20, 0.40, 0.00, 0.20, 0.00, 0.20},
    }};
    const auto& w = weights[static_cast<int>(status)];
    std::discrete_distribution<int> dist(w.begin(), w.end());
    return static_cast<DefaultReason>(dist(rng));
}

double draw_cover_index(Rng& rng, FinalStatus status) {
    switch (status) {
        case FinalStatus::Cured: return round_to(uniform(rng, 0.9, 1.6), 0.01);
        case FinalStatus::ExitNoLoss: return round_to(uniform(rng, 1.1, 2.0), 0.01);
        case FinalStatus::NotResolved: return round_to(uniform(rng, 0.5, 1.3), 0.01);
        case FinalStatus::ExitWithLoss: return round_to(uniform(rng, 0.3, 0.9), 0.01);
    }
    return 1.0;
}

struct SpellPlan {
    FinalStatus status;
    MonthIndex default_date;
    int duration;
    int writeoff_month = -1;  // partial write-off month offset, -1 for none
};

// Builds the monthly ledger of one spell: os_t = os_{t-1} - cash - collateral - write_off.
DefaultSpell build_spell(Rng& rng, const GenConfig& cfg, const MacroSeries& macro, const std::string& borrower,
                         int spell_index, const SpellPlan& plan, double ead) {
    DefaultSpell s;
    s.borrower_id = borrower;
    s.spell_index = spell_index;
    s.default_date = plan.default_date;
    s.final_status = plan.status;
    s.reason = draw_reason(rng, plan.status);
    s.cover_value_index = draw_cover_index(rng, plan.status);
    s.secured_rate = round_to(macro.base_rate_at(plan.default_date) + 0.03 + 0.0025 * std::uniform_int_distribution<int>(0, 8)(rng), 0.0001);
    s.unsecured_rate = s.secured_rate + 0.02;
    if (plan.status != FinalStatus::NotResolved) s.out_date = plan.default_date + plan.duration;

    const bool exact = cfg.cashflow_exact;
    const double recovery_share = uniform(rng, 0.05, 0.85);
    const bool mid_collateral = plan.status == FinalStatus::NotResolved && chance(rng, 0.08);
    const int mid_collateral_month = plan.duration > 0 ? std::uniform_int_distribution<int>(1, plan.duration)(rng) : -1;

    double os = ead;
    s.observations.push_back(Observation{plan.default_date, os, 0.0, 0.0, 0.0, 0.0});
    for (int t = 1; t <= plan.duration; ++t) {
        Observation o;
        o.reporting_date = plan.default_date + t;
        const bool last = t == plan.duration;
        double cash = 0.0;
        double collateral = 0.0;
        double write_off = 0.0;
        switch (plan.status) {
            case FinalStatus::Cured:
                if (chance(rng, 0.9)) cash = os * uniform(rng, 0.004, 0.012);
                if (last && exact) cash = os;
                break;
            case FinalStatus::ExitNoLoss:
                if (chance(rng, 0.5)) cash = os * uniform(rng, 0.002, 0.01);
                if (last) {
                    if (exact) cash = os;
                    else collateral = os - cash;
                }
                break;
            case FinalStatus::ExitWithLoss:
                if (chance(rng, 0.4)) cash = os * uniform(rng, 0.001, 0.006);
                if (last) {
                    double sale = (os - cash) * recovery_share;
                    if (exact) {
                        cash += sale;
                    } else {
                        collateral = sale;
                        write_off = os - cash - sale;
                    }
                }
                break;
            case FinalStatus::NotResolved:
                if (chance(rng, 0.25)) cash = os * uniform(rng, 0.001, 0.006);
                if (t == mid_collateral_month && mid_collateral) {
                    double sale = (os - cash) * uniform(rng, 0.1, 0.5);
                    if (exact) cash += sale;
                    else collateral = sale;
                }
                break;
        }
        if (!exact && t == plan.writeoff_month && write_off == 0.0) {
            double ratio = chance(rng, 0.9) ? uniform(rng, 0.01, 0.2) : uniform(rng, 0.2, 1.0);
            write_off = std::min(os - cash - collateral, ratio * ead);
        }
        o.cash_recovery = cash;
        o.collateral_recovery = collateral;
        o.write_off = write_off;
        o.cost = exact ? 0.0 : cfg.cost_rate * (cash + collateral);
        os = os - cash - collateral - write_off;
        const bool clears = last && (plan.status == FinalStatus::ExitNoLoss ||
                                     (plan.status == FinalStatus::ExitWithLoss && !exact) ||
                                     (plan.status == FinalStatus::Cured && exact));
        if (clears || os < 0.0) os = 0.0;
        o.outstanding = os;
        s.observations.push_back(o);
    }
    return s;
}

}  // namespace

void GenConfig::validate() const {
    if (n_borrowers < 0) throw ConfigError("n_borrowers must be non-negative");
    if (!(end > start)) throw ConfigError("generator end must be after start");
    double sum = 0.0;
    for (double p : status_mix) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("status_mix entries must lie in [0,1]");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("status_mix must sum to 1");
    for (double p : {multi_default_rate, writeoff_borrower_rate}) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("probabilities must lie in [0,1]");
    }
    if (max_duration_months < 3) throw ConfigError("max_duration_months must be at least 3");
    if (!(cost_rate >= 0.0)) throw ConfigError("cost_rate must be non-negative");
}

MacroSeries generate_macro(std::uint64_t seed, MonthIndex start, MonthIndex end) {
    if (!(end > start)) throw ConfigError("macro end must be after start");
    Rng rng(derive_seed(seed, 0x6d6163726fULL));
    std::normal_distribution<double> z(0.0, 1.0);
    MacroSeries macro;
    double gdp = 100.0, growth = 0.004;
    double employment = 0.64;
    double hpi = 100.0, hpi_growth = 0.005;
    for (int q = start.quarter_ordinal(); q <= end.quarter_ordinal(); ++q) {
        growth = 0.004 + 0.6 * (growth - 0.004) + 0.006 * z(rng);
        gdp *= std::exp(growth);
        employment = std::clamp(0.64 + 0.8 * (employment - 0.64) + 0.004 * z(rng), 0.5, 0.8);
        hpi_growth = 0.005 + 0.7 * (hpi_growth - 0.005) + 0.012 * z(rng);
        hpi *= std::exp(hpi_growth);
        macro.quarterly[q] = MacroQuarter{gdp, employment, hpi};
    }
    double rate = 0.04;
    for (int m = start.value; m <= end.value; ++m) {
        rate = std::clamp(0.02 + 0.97 * (rate - 0.02) + 0.0015 * z(rng), 0.0, 0.10);
        macro.base_rate[m] = rate;
    }
    macro.discount_addon = 0.05;
    return macro;
}

std::vector<DefaultSpell> generate_portfolio(const GenConfig& cfg, const MacroSeries& macro) {
    cfg.validate();
    macro.require_coverage(cfg.start, cfg.end);
    const int window = months_between(cfg.start, cfg.end);
    const double ewl_share = cfg.status_mix[static_cast<int>(FinalStatus::ExitWithLoss)];
    const double extra_writeoff_p =
        ewl_share >= 1.0 ? 0.0 : std::clamp((cfg.writeoff_borrower_rate - ewl_share) / (1.0 - ewl_share), 0.0, 1.0);

    std::vector<DefaultSpell> out;
    for (int b = 0; b < cfg.n_borrowers; ++b) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(b)));
        char id[16];
        std::snprintf(id, sizeof id, "B%06d", b + 1);

        std::discrete_distribution<int> status_dist(cfg.status_mix.begin(), cfg.status_mix.end());
        const auto last_status = static_cast<FinalStatus>(status_dist(rng));
        const bool multi = chance(rng, cfg.multi_default_rate);
        const bool extra_writeoff = !cfg.cashflow_exact && last_status != FinalStatus::ExitWithLoss &&
                                    chance(rng, extra_writeoff_p);

        std::vector<SpellPlan> plans;
        if (multi) plans.push_back({FinalStatus::Cured, {}, 0});
        plans.push_back({last_status, {}, 0});
        for (auto& p : plans) {
            p.duration = std::clamp(draw_duration(rng, p.status), min_duration(p.status), cfg.max_duration_months);
        }
        if (extra_writeoff) plans.back().duration = std::max(plans.back().duration, 2);
        const int gap = multi ? kConsolidationGapMonths + 1 + std::uniform_int_distribution<int>(0, 20)(rng) : 0;

        // Squeeze durations into the observation window.
        auto total = [&] {
            int t = gap;
            for (const auto& p : plans) t += p.duration;
            return t;
        };
        while (total() > window) {
            auto& longest = *std::max_element(plans.begin(), plans.end(),
                                              [](const SpellPlan& a, const SpellPlan& b) { return a.duration < b.duration; });
            if (longest.duration <= min_duration(longest.status)) break;
            longest.duration = std::max(min_duration(longest.status), longest.duration - (total() - window));
        }
        if (total() > window && plans.size() > 1) plans.erase(plans.begin());

        MonthIndex first_default;
        if (last_status == FinalStatus::NotResolved) {
            first_default = cfg.end - total();
        } else {
            first_default = cfg.start + std::uniform_int_distribution<int>(0, window - total())(rng);
        }
        MonthIndex cursor = first_default;
        for (std::size_t i = 0; i < plans.size(); ++i) {
            plans[i].default_date = cursor;
            cursor = cursor + plans[i].duration + (i + 1 < plans.size() ? gap : 0);
        }
        if (extra_writeoff) {
            auto& p = plans.back();
            p.writeoff_month = std::uniform_int_distribution<int>(1, std::max(1, p.duration - 1))(rng);
        }

        double ead = std::exp(std::normal_distribution<double>(std::log(100000.0), 0.5)(rng));
        ead = round_to(ead, 0.01);
        for (std::size_t i = 0; i < plans.size(); ++i) {
            auto spell = build_spell(rng, cfg, macro, id, static_cast<int>(i), plans[i], ead);
            ead = spell.observations.back().outstanding * uniform(rng, 0.93, 0.99);
            if (!(ead > 0.0)) ead = 1000.0;
            out.push_back(std::move(spell));
        }
    }
    for (const auto& s : out) {
        auto issues = validate_spell(s);
        if (!issues.empty()) {
            throw ValidationError("generator produced invalid spell " + s.borrower_id + ": " + issues.front());
        }
    }
    return out;
}

}  // namespace lgdlab
