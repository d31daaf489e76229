#include "lgdlab/lgd_delta_os.hpp"

#include "lgdlab/error.hpp"

#include <algorithm>
#include <tuple>

namespace lgdlab {

namespace {

void require_observations(const DefaultSpell& spell) {
    if (spell.observations.empty()) {
        throw ValidationError("spell " + spell.borrower_id + "/" + std::to_string(spell.spell_index) +
                              " has no observations");
    }
}

// Recovery-signed balance change at position i: a falling balance is positive.
double delta_at(const std::vector<Observation>& obs, std::size_t ref, std::size_t i) {
    return i == ref ? 0.0 : obs[i - 1].outstanding - obs[i].outstanding;
}

}  // namespace

std::vector<std::pair<MonthIndex, MonthIndex>> expand_spell(const DefaultSpell& spell) {
    require_observations(spell);
    const auto& obs = spell.observations;
    std::vector<std::pair<MonthIndex, MonthIndex>> pairs;
    pairs.reserve(obs.size() * (obs.size() + 1) / 2);
    for (std::size_t r = 0; r < obs.size(); ++r) {
        for (std::size_t t = r; t < obs.size(); ++t) {
            pairs.emplace_back(obs[r].reporting_date, obs[t].reporting_date);
        }
    }
    return pairs;
}

std::vector<ExpandedRow> delta_os_table(const DefaultSpell& spell, const DiscountPolicy& policy,
                                        const MacroSeries& macro) {
    require_observations(spell);
    const auto& obs = spell.observations;
    std::vector<ExpandedRow> rows;
    rows.reserve(obs.size() * (obs.size() + 1) / 2);
    for (std::size_t r = 0; r < obs.size(); ++r) {
        const double rate = policy.annual_rate(spell, obs[r].reporting_date, macro, FlowKind::BalanceChange);
        const double os_ref = obs[r].outstanding;
        double cum = 0.0;
        for (std::size_t t = r; t < obs.size(); ++t) {
            ExpandedRow row;
            row.borrower_id = spell.borrower_id;
            row.spell_index = spell.spell_index;
            row.reference_date = obs[r].reporting_date;
            row.reporting_date = obs[t].reporting_date;
            row.os_ref = os_ref;
            row.os_prev = t == 0 ? 0.0 : obs[t - 1].outstanding;
            row.delta_os = delta_at(obs, r, t);
            row.disc_delta = row.delta_os / discount_factor(rate, static_cast<int>(t - r));
            cum += row.disc_delta;
            row.cum_disc_delta = cum;
            row.el_running = os_ref - cum;
            row.rlgd_running = os_ref != 0.0 ? row.el_running / os_ref : 0.0;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::vector<LgdRecord> rlgd_delta_os(const DefaultSpell& spell, const DiscountPolicy& policy,
                                     const MacroSeries& macro) {
    require_observations(spell);
    const auto& obs = spell.observations;
    const bool resolved = spell.final_status != FinalStatus::NotResolved;
    std::vector<LgdRecord> out;
    out.reserve(obs.size());
    for (std::size_t r = 0; r < obs.size(); ++r) {
        const double rate = policy.annual_rate(spell, obs[r].reporting_date, macro, FlowKind::BalanceChange);
        double cum = 0.0;
        for (std::size_t t = r + 1; t < obs.size(); ++t) {
            cum += delta_at(obs, r, t) / discount_factor(rate, static_cast<int>(t - r));
        }
        LgdRecord rec;
        rec.borrower_id = spell.borrower_id;
        rec.spell_index = spell.spell_index;
        rec.reference_date = obs[r].reporting_date;
        rec.exposure_at_ref = obs[r].outstanding;
        rec.el = obs[r].outstanding - cum;
        rec.rlgd_raw = obs[r].outstanding != 0.0 ? rec.el / obs[r].outstanding : 0.0;
        rec.rlgd = std::max(0.0, rec.rlgd_raw);
        rec.resolved = resolved;
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<LgdRecord> rlgd_delta_os_portfolio(const std::vector<DefaultSpell>& spells,
                                               const DiscountPolicy& policy, const MacroSeries& macro) {
    std::vector<const DefaultSpell*> order;
    order.reserve(spells.size());
    for (const auto& s : spells) order.push_back(&s);
    std::sort(order.begin(), order.end(), [](const DefaultSpell* a, const DefaultSpell* b) {
        return std::tie(a->borrower_id, a->spell_index) < std::tie(b->borrower_id, b->spell_index);
    });
    std::vector<LgdRecord> out;
    for (const auto* s : order) {
        auto part = rlgd_delta_os(*s, policy, macro);
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return out;
}

}  // namespace lgdlab
