#pragma once

#include "lgdlab/domain.hpp"
#include "lgdlab/lgd_cashflow.hpp"

#include <utility>
#include <vector>

namespace lgdlab {

// One (reference date, reporting date) pair of the triangular expansion.
struct ExpandedRow {
    std::string borrower_id;
    int spell_index = 0;
    MonthIndex reference_date;
    MonthIndex reporting_date;
    double os_ref = 0.0;
    double os_prev = 0.0;  // balance at the previous reporting date, 0 at the default date
    double delta_os = 0.0;  // os_prev - os at reporting date; 0 when reporting == reference
    double disc_delta = 0.0;
    double cum_disc_delta = 0.0;  // running sum over reporting dates for this reference
    double el_running = 0.0;      // os_ref - cum_disc_delta
    double rlgd_running = 0.0;    // el_running / os_ref, 0 when os_ref == 0
};

// All pairs (r, t) of reporting dates with r <= t, ordered by (r, t).
// n observations give n(n+1)/2 pairs. Throws ValidationError when empty.
std::vector<std::pair<MonthIndex, MonthIndex>> expand_spell(const DefaultSpell& spell);

// Full audit table of the delta-outstanding computation.
std::vector<ExpandedRow> delta_os_table(const DefaultSpell& spell, const DiscountPolicy& policy,
                                        const MacroSeries& macro);

// Final row per reference date (maximal reporting date) as an LgdRecord,
// computed without materialising the expansion.
std::vector<LgdRecord> rlgd_delta_os(const DefaultSpell& spell, const DiscountPolicy& policy,
                                     const MacroSeries& macro);

std::vector<LgdRecord> rlgd_delta_os_portfolio(const std::vector<DefaultSpell>& spells,
                                               const DiscountPolicy& policy, const MacroSeries& macro);

}  // namespace lgdlab
