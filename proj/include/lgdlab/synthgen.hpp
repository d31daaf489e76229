#pragma once

#include "lgdlab/domain.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace lgdlab {

// Knobs of the synthetic portfolio generator. Defaults give a portfolio of
// the same scale as the reference mortgage book: 1891 borrowers over
// 2008-01..2019-12, about 5.5% repeat defaulters, under 3% with write-offs.
struct GenConfig {
    std::uint64_t seed = 42;
    int n_borrowers = 1891;
    MonthIndex start = MonthIndex::from_ym(2008, 1);
    MonthIndex end = MonthIndex::from_ym(2019, 12);
    // Borrower-level final status probabilities, indexed by FinalStatus.
    std::array<double, kFinalStatusCount> status_mix{0.32, 0.22, 0.44, 0.02};
    double multi_default_rate = 0.055;
    double writeoff_borrower_rate = 0.03;
    int max_duration_months = 130;
    double cost_rate = 0.02;
    // Every balance decrease is a same-month cash recovery; no costs, no write-offs.
    bool cashflow_exact = false;

    // Throws ConfigError.
    void validate() const;
};

// Mean-reverting quarterly GDP/employment/HPI and monthly base rate in [0, 0.10].
MacroSeries generate_macro(std::uint64_t seed, MonthIndex start, MonthIndex end);

// Consolidated, validated spells ordered by (borrower_id, spell_index).
// The borrower's last spell carries the sampled final status; an earlier
// spell of a repeat defaulter is always Cured. Throws ConfigError when the
// macro series does not cover [cfg.start, cfg.end].
std::vector<DefaultSpell> generate_portfolio(const GenConfig& cfg, const MacroSeries& macro);

}  // namespace lgdlab
