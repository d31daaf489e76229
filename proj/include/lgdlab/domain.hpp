#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lgdlab {

// Position on a monthly grid: months since 2000-01 (which is 0).
struct MonthIndex {
    int value = 0;

    static MonthIndex from_ym(int year, int month);
    // Parses "YYYY-MM"; throws ParseError.
    static MonthIndex parse(std::string_view text);

    int year() const;
    int month() const;  // 1..12
    // Quarter ordinal year*4 + (quarter-1); months of one quarter share it.
    int quarter_ordinal() const;
    std::string to_string() const;

    MonthIndex operator+(int months) const { return MonthIndex{value + months}; }
    MonthIndex operator-(int months) const { return MonthIndex{value - months}; }
    auto operator<=>(const MonthIndex&) const = default;
};

// Whole months from `from` to `to`; throws OrderingError when to < from.
int months_between(MonthIndex from, MonthIndex to);

std::string quarter_label(int quarter_ordinal);  // "2010Q2"

enum class FinalStatus { Cured, ExitNoLoss, NotResolved, ExitWithLoss };
inline constexpr int kFinalStatusCount = 4;

enum class DefaultReason { Days90, Bankrupt, ForbPeriod, Fraud, Restr, UnlikePay };
inline constexpr int kDefaultReasonCount = 6;

std::string_view to_string(FinalStatus status);
std::string_view to_string(DefaultReason reason);
FinalStatus parse_final_status(std::string_view text);
DefaultReason parse_default_reason(std::string_view text);

// Cured and ExitNoLoss form the no-loss group; the rest is the loss group.
inline bool is_loss_group(FinalStatus s) {
    return s == FinalStatus::NotResolved || s == FinalStatus::ExitWithLoss;
}

struct Observation {
    MonthIndex reporting_date;
    double outstanding = 0.0;  // gross accounting balance
    double cash_recovery = 0.0;
    double collateral_recovery = 0.0;
    double cost = 0.0;
    double write_off = 0.0;

    bool operator==(const Observation&) const = default;
};

// One in-default episode of a borrower. Observations run monthly from
// default_date to the last reporting month; a resolved spell has
// out_date equal to that last month.
struct DefaultSpell {
    std::string borrower_id;
    int spell_index = 0;
    MonthIndex default_date;
    std::optional<MonthIndex> out_date;
    DefaultReason reason = DefaultReason::Days90;
    FinalStatus final_status = FinalStatus::NotResolved;
    std::vector<Observation> observations;
    double cover_value_index = 0.0;
    double unsecured_rate = 0.0;
    double secured_rate = 0.0;

    double ead() const { return observations.empty() ? 0.0 : observations.front().outstanding; }
    MonthIndex last_reporting_date() const { return observations.back().reporting_date; }
    // Months from default_date to the out date (or last observation when unresolved).
    int duration_months() const;
    // Index into observations for a reporting date; throws LookupError.
    std::size_t position_of(MonthIndex reporting_date) const;

    bool operator==(const DefaultSpell&) const = default;
};

// Consecutive spells whose gap (next default_date - previous end) is at most
// this many months are merged.
inline constexpr int kConsolidationGapMonths = 3;

// Empty iff every DefaultSpell invariant holds.
std::vector<std::string> validate_spell(const DefaultSpell& spell);

// Merges one borrower's spells separated by short probation gaps.
// Input must be sorted by default_date; throws ValidationError on overlap.
std::vector<DefaultSpell> consolidate_defaults(std::vector<DefaultSpell> raw_spells);

struct MacroQuarter {
    double gdp = 0.0;
    double employment = 0.0;
    double hpi = 0.0;

    bool operator==(const MacroQuarter&) const = default;
};

struct MacroSeries {
    std::map<int, MacroQuarter> quarterly;  // keyed by MonthIndex::quarter_ordinal()
    std::map<int, double> base_rate;        // keyed by MonthIndex::value, annual rate
    double discount_addon = 0.05;

    // Both throw ConfigError naming the uncovered quarter or month.
    const MacroQuarter& quarter_at(MonthIndex month) const;
    double base_rate_at(MonthIndex month) const;
    void require_coverage(MonthIndex first, MonthIndex last) const;

    bool operator==(const MacroSeries&) const = default;
};

}  // namespace lgdlab
