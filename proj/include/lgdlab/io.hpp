#pragma once

#include "lgdlab/bench.hpp"
#include "lgdlab/domain.hpp"
#include "lgdlab/features.hpp"
#include "lgdlab/lgd_cashflow.hpp"
#include "lgdlab/lgd_delta_os.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace lgdlab::io {

inline constexpr std::string_view kPortfolioHeader =
    "borrower_id,spell_index,reporting_date,outstanding,cash_recovery,collateral_recovery,cost,write_off,"
    "default_date,out_date,reason,final_status,cover_value_index,unsecured_rate,secured_rate";
inline constexpr std::string_view kMacroQuarterlyHeader = "year,quarter,gdp,employment,hpi";
inline constexpr std::string_view kRatesMonthlyHeader = "year,month,base_rate";

inline constexpr std::string_view kPortfolioFile = "portfolio.csv";
inline constexpr std::string_view kMacroQuarterlyFile = "macro_quarterly.csv";
inline constexpr std::string_view kRatesMonthlyFile = "rates_monthly.csv";

// "# seed=<seed> config=<hash>" first line of every emitted file.
struct Provenance {
    std::uint64_t seed = 0;
    std::string config_hash;

    std::string line() const;
};

std::string read_text(const std::filesystem::path& path);
// Creates parent directories. Throws Error on I/O failure.
void write_text(const std::filesystem::path& path, std::string_view content);

std::string portfolio_csv(const std::vector<DefaultSpell>& spells);
std::string macro_quarterly_csv(const MacroSeries& macro);
std::string rates_monthly_csv(const MacroSeries& macro);

// Parses, consolidates per borrower and validates. Every problem is
// reported with `file` and line numbers; throws ParseError for malformed
// rows and ValidationError for rule violations.
std::vector<DefaultSpell> parse_portfolio(std::string_view text, std::string_view file = kPortfolioFile);
MacroSeries parse_macro(std::string_view quarterly, std::string_view rates, double discount_addon = 0.05);

struct Portfolio {
    std::vector<DefaultSpell> spells;
    MacroSeries macro;
};

void save_portfolio(const std::filesystem::path& dir, const Portfolio& portfolio, const Provenance& prov);
// Also requires the macro series to cover every month of every spell
// (ConfigError naming the first missing quarter or month).
Portfolio load_portfolio(const std::filesystem::path& dir, double discount_addon = 0.05);

// One line per (spell, reference date) with both engines side by side.
std::string lgd_records_csv(const std::vector<LgdRecord>& cashflow, const std::vector<LgdRecord>& delta_os);
std::string expanded_table_csv(const std::vector<ExpandedRow>& rows);
std::string feature_csv(const std::vector<FeatureRow>& rows);
std::string scatter_csv(const std::vector<bench::ScatterPoint>& points);
std::string histogram_csv(const std::vector<bench::HistogramBin>& bins);

}  // namespace lgdlab::io
