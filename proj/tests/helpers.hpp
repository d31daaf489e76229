#pragma once

#include "lgdlab/domain.hpp"

#include <string>
#include <vector>

namespace testkit {

using lgdlab::DefaultSpell;
using lgdlab::FinalStatus;
using lgdlab::MonthIndex;

inline MonthIndex ym(int y, int m) { return MonthIndex::from_ym(y, m); }

// Spell with the given balances from `start`; flows default to zero.
inline DefaultSpell make_spell(std::vector<double> outstanding, FinalStatus status = FinalStatus::ExitWithLoss,
                               MonthIndex start = ym(2010, 1), std::string id = "B1", int index = 0) {
    DefaultSpell s;
    s.borrower_id = std::move(id);
    s.spell_index = index;
    s.default_date = start;
    s.final_status = status;
    s.unsecured_rate = 0.08;
    s.secured_rate = 0.04;
    s.cover_value_index = 1.2;
    for (std::size_t i = 0; i < outstanding.size(); ++i) {
        lgdlab::Observation o;
        o.reporting_date = start + static_cast<int>(i);
        o.outstanding = outstanding[i];
        s.observations.push_back(o);
    }
    if (status != FinalStatus::NotResolved) s.out_date = s.observations.back().reporting_date;
    return s;
}

// Every balance decrease booked as a same-month cash recovery.
inline DefaultSpell exact_spell(std::vector<double> outstanding, FinalStatus status = FinalStatus::ExitWithLoss,
                                MonthIndex start = ym(2010, 1)) {
    auto s = make_spell(std::move(outstanding), status, start);
    for (std::size_t i = 1; i < s.observations.size(); ++i) {
        const double drop = s.observations[i - 1].outstanding - s.observations[i].outstanding;
        s.observations[i].cash_recovery = drop > 0.0 ? drop : 0.0;
    }
    return s;
}

// Flat macro series over [first, last] with a constant base rate.
inline lgdlab::MacroSeries flat_macro(double base_rate, MonthIndex first = ym(2000, 1), MonthIndex last = ym(2030, 12),
                                      double addon = 0.05) {
    lgdlab::MacroSeries m;
    m.discount_addon = addon;
    for (int v = first.value; v <= last.value; ++v) {
        m.base_rate[v] = base_rate;
        m.quarterly[MonthIndex{v}.quarter_ordinal()] = {100.0 + v * 0.1, 0.6, 90.0 + v * 0.2};
    }
    return m;
}

}  // namespace testkit
