#include "lgdlab/domain.hpp"

#include "lgdlab/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace lgdlab {

namespace {

int floor_div(int a, int b) {
    int q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

MonthIndex MonthIndex::from_ym(int year, int month) {
    if (month < 1 || month > 12) throw ValidationError("month out of range: " + std::to_string(month));
    return MonthIndex{(year - 2000) * 12 + (month - 1)};
}

MonthIndex MonthIndex::parse(std::string_view text) {
    int year = 0;
    int month = 0;
    bool ok = text.size() == 7 && text[4] == '-';
    if (ok) {
        auto [p1, e1] = std::from_chars(text.data(), text.data() + 4, year);
        auto [p2, e2] = std::from_chars(text.data() + 5, text.data() + 7, month);
        ok = e1 == std::errc{} && e2 == std::errc{} && p1 == text.data() + 4 &&
             p2 == text.data() + 7 && month >= 1 && month <= 12;
    }
    if (!ok) throw ParseError("invalid month '" + std::string(text) + "', expected YYYY-MM");
    return from_ym(year, month);
}

int MonthIndex::year() const { return 2000 + floor_div(value, 12); }

int MonthIndex::month() const { return value - floor_div(value, 12) * 12 + 1; }

int MonthIndex::quarter_ordinal() const { return year() * 4 + (month() - 1) / 3; }

std::string MonthIndex::to_string() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year(), month());
    return buf;
}

int months_between(MonthIndex from, MonthIndex to) {
    if (to < from) {
        throw OrderingError("months_between: " + to.to_string() + " precedes " + from.to_string());
    }
    return to.value - from.value;
}

std::string quarter_label(int quarter_ordinal) {
    return std::to_string(floor_div(quarter_ordinal, 4)) + "Q" +
           std::to_string(quarter_ordinal - floor_div(quarter_ordinal, 4) * 4 + 1);
}

std::string_view to_string(FinalStatus status) {
    switch (status) {
        case FinalStatus::Cured: return "Cured";
        case FinalStatus::ExitNoLoss: return "ExitNoLoss";
        case FinalStatus::NotResolved: return "NotResolved";
        case FinalStatus::ExitWithLoss: return "ExitWithLoss";
    }
    return "?";
}

std::string_view to_string(DefaultReason reason) {
    switch (reason) {
        case DefaultReason::Days90: return "Days90";
        case DefaultReason::Bankrupt: return "Bankrupt";
        case DefaultReason::ForbPeriod: return "ForbPeriod";
        case DefaultReason::Fraud: return "Fraud";
        case DefaultReason::Restr: return "Restr";
        case DefaultReason::UnlikePay: return "UnlikePay";
    }
    return "?";
}

FinalStatus parse_final_status(std::string_view text) {
    for (int i = 0; i < kFinalStatusCount; ++i) {
        auto s = static_cast<FinalStatus>(i);
        if (to_string(s) == text) return s;
    }
    throw ParseError("unknown final_status '" + std::string(text) + "'");
}

DefaultReason parse_default_reason(std::string_view text) {
    for (int i = 0; i < kDefaultReasonCount; ++i) {
        auto r = static_cast<DefaultReason>(i);
        if (to_string(r) == text) return r;
    }
    throw ParseError("unknown reason '" + std::string(text) + "'");
}

int DefaultSpell::duration_months() const {
    MonthIndex end = out_date ? *out_date : last_reporting_date();
    return months_between(default_date, end);
}

std::size_t DefaultSpell::position_of(MonthIndex reporting_date) const {
    if (!observations.empty()) {
        int offset = reporting_date.value - observations.front().reporting_date.value;
        if (offset >= 0 && static_cast<std::size_t>(offset) < observations.size() &&
            observations[offset].reporting_date == reporting_date) {
            return static_cast<std::size_t>(offset);
        }
    }
    for (std::size_t i = 0; i < observations.size(); ++i) {
        if (observations[i].reporting_date == reporting_date) return i;
    }
    throw LookupError("reporting date " + reporting_date.to_string() + " not in spell " +
                      borrower_id + "/" + std::to_string(spell_index));
}

std::vector<std::string> validate_spell(const DefaultSpell& spell) {
    std::vector<std::string> out;
    if (spell.borrower_id.empty()) out.emplace_back("borrower_id must not be empty");
    if (spell.spell_index < 0) out.emplace_back("spell_index must be non-negative");
    if (spell.observations.empty()) {
        out.emplace_back("spell has no observations");
        return out;
    }
    const auto& obs = spell.observations;
    if (obs.front().reporting_date != spell.default_date) {
        out.emplace_back("first reporting date must equal default_date");
    }
    bool contiguous = true;
    for (std::size_t i = 1; i < obs.size(); ++i) {
        if (obs[i].reporting_date.value != obs[i - 1].reporting_date.value + 1) contiguous = false;
    }
    if (!contiguous) out.emplace_back("non-contiguous reporting dates");
    if (!(spell.ead() > 0.0)) out.emplace_back("EAD must be positive");

    bool negative = false;
    bool finite = true;
    bool writeoff_ok = true;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const auto& o = obs[i];
        for (double v : {o.outstanding, o.cash_recovery, o.collateral_recovery, o.cost, o.write_off}) {
            if (!std::isfinite(v)) finite = false;
            else if (v < 0.0) negative = true;
        }
        if (i > 0 && o.write_off > obs[i - 1].outstanding + 1e-9 * std::max(1.0, obs[i - 1].outstanding)) {
            writeoff_ok = false;
        }
    }
    if (!finite) out.emplace_back("amounts must be finite");
    if (negative) out.emplace_back("amounts must be non-negative");
    if (!writeoff_ok) out.emplace_back("write_off exceeds previous outstanding");

    if (spell.final_status == FinalStatus::NotResolved) {
        if (spell.out_date) out.emplace_back("unresolved spell must not have out_date");
    } else if (!spell.out_date) {
        out.emplace_back("resolved spell requires out_date");
    } else if (contiguous && *spell.out_date != obs.back().reporting_date) {
        out.emplace_back("out_date must equal last reporting date");
    }
    for (double r : {spell.unsecured_rate, spell.secured_rate}) {
        if (!std::isfinite(r) || r < 0.0) {
            out.emplace_back("recovery rates must be finite and non-negative");
            break;
        }
    }
    if (!std::isfinite(spell.cover_value_index)) out.emplace_back("cover_value_index must be finite");
    return out;
}

std::vector<DefaultSpell> consolidate_defaults(std::vector<DefaultSpell> raw_spells) {
    std::vector<DefaultSpell> merged;
    for (auto& spell : raw_spells) {
        if (spell.observations.empty()) {
            throw ValidationError("spell " + spell.borrower_id + "/" + std::to_string(spell.spell_index) +
                                  " has no observations");
        }
        if (merged.empty()) {
            merged.push_back(std::move(spell));
            continue;
        }
        DefaultSpell& prev = merged.back();
        MonthIndex prev_end = prev.last_reporting_date();
        if (spell.default_date <= prev_end || (!prev.out_date && prev.final_status == FinalStatus::NotResolved)) {
            throw ValidationError("overlapping default spells for borrower " + spell.borrower_id + " at " +
                                  spell.default_date.to_string());
        }
        int gap = spell.default_date.value - prev_end.value;
        if (gap > kConsolidationGapMonths) {
            merged.push_back(std::move(spell));
            continue;
        }
        // Probation months are bridged with the last known balance and no flows.
        double carried = prev.observations.back().outstanding;
        for (int m = prev_end.value + 1; m < spell.default_date.value; ++m) {
            prev.observations.push_back(Observation{MonthIndex{m}, carried, 0.0, 0.0, 0.0, 0.0});
        }
        for (auto& o : spell.observations) prev.observations.push_back(o);
        prev.final_status = spell.final_status;
        prev.out_date = spell.out_date;
    }
    for (std::size_t i = 0; i < merged.size(); ++i) merged[i].spell_index = static_cast<int>(i);
    return merged;
}

const MacroQuarter& MacroSeries::quarter_at(MonthIndex month) const {
    auto it = quarterly.find(month.quarter_ordinal());
    if (it == quarterly.end()) {
        throw ConfigError("macro series missing quarter " + quarter_label(month.quarter_ordinal()));
    }
    return it->second;
}

double MacroSeries::base_rate_at(MonthIndex month) const {
    auto it = base_rate.find(month.value);
    if (it == base_rate.end()) throw ConfigError("base rate missing for month " + month.to_string());
    return it->second;
}

void MacroSeries::require_coverage(MonthIndex first, MonthIndex last) const {
    for (int q = first.quarter_ordinal(); q <= last.quarter_ordinal(); ++q) {
        if (!quarterly.contains(q)) throw ConfigError("macro series missing quarter " + quarter_label(q));
    }
    for (int m = first.value; m <= last.value; ++m) {
        if (!base_rate.contains(m)) throw ConfigError("base rate missing for month " + MonthIndex{m}.to_string());
    }
}

}  // namespace lgdlab
