#include "lgdlab/io.hpp"

#include "lgdlab/error.hpp"
#include "lgdlab/format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace lgdlab::io {

namespace fs = std::filesystem;

std::string Provenance::line() const { return "# seed=" + std::to_string(seed) + " config=" + config_hash; }

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed for " + path.string());
}

namespace {

struct CsvLine {
    std::size_t number;  // 1-based line in the file
    std::vector<std::string_view> fields;
};

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

// Data lines after the exact header; comment lines start with '#'.
std::vector<CsvLine> read_csv(std::string_view text, std::string_view header, std::string_view file) {
    std::vector<CsvLine> out;
    bool seen_header = false;
    std::size_t number = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++number;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        if (!seen_header) {
            if (line != header) {
                throw ParseError(std::string(file) + " line " + std::to_string(number) + ": expected header '" +
                                 std::string(header) + "', found '" + std::string(line) + "'");
            }
            seen_header = true;
            continue;
        }
        auto fields = split_fields(line);
        const auto expected = split_fields(header).size();
        if (fields.size() != expected) {
            throw ParseError(std::string(file) + " line " + std::to_string(number) + ": expected " +
                             std::to_string(expected) + " fields, found " + std::to_string(fields.size()));
        }
        out.push_back({number, std::move(fields)});
    }
    if (!seen_header) throw ParseError(std::string(file) + ": missing header line");
    return out;
}

std::string where(std::string_view file, std::size_t line) { return std::string(file) + " line " + std::to_string(line); }

template <class F>
auto with_context(std::string_view file, std::size_t line, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ParseError& e) {
        throw ParseError(where(file, line) + ": " + e.what());
    }
}

void check_id(const std::string& id) {
    if (id.empty() || id.find_first_of(",\n\r\"") != std::string::npos || id.front() == '#') {
        throw ValidationError("borrower_id '" + id + "' cannot be written to CSV");
    }
}

}  // namespace

std::string portfolio_csv(const std::vector<DefaultSpell>& spells) {
    std::string out(kPortfolioHeader);
    out += '\n';
    for (const auto& s : spells) {
        check_id(s.borrower_id);
        const std::string tail = s.default_date.to_string() + ',' + (s.out_date ? s.out_date->to_string() : "") + ',' +
                                 std::string(to_string(s.reason)) + ',' + std::string(to_string(s.final_status)) + ',' +
                                 format_number(s.cover_value_index) + ',' + format_number(s.unsecured_rate) + ',' +
                                 format_number(s.secured_rate) + '\n';
        for (const auto& o : s.observations) {
            out += s.borrower_id + ',' + std::to_string(s.spell_index) + ',' + o.reporting_date.to_string() + ',' +
                   format_number(o.outstanding) + ',' + format_number(o.cash_recovery) + ',' +
                   format_number(o.collateral_recovery) + ',' + format_number(o.cost) + ',' + format_number(o.write_off) +
                   ',' + tail;
        }
    }
    return out;
}

std::string macro_quarterly_csv(const MacroSeries& macro) {
    std::string out(kMacroQuarterlyHeader);
    out += '\n';
    for (const auto& [q, v] : macro.quarterly) {
        const int year = q >= 0 ? q / 4 : (q - 3) / 4;
        out += std::to_string(year) + ',' + std::to_string(q - year * 4 + 1) + ',' + format_number(v.gdp) + ',' +
               format_number(v.employment) + ',' + format_number(v.hpi) + '\n';
    }
    return out;
}

std::string rates_monthly_csv(const MacroSeries& macro) {
    std::string out(kRatesMonthlyHeader);
    out += '\n';
    for (const auto& [m, rate] : macro.base_rate) {
        const MonthIndex month{m};
        out += std::to_string(month.year()) + ',' + std::to_string(month.month()) + ',' + format_number(rate) + '\n';
    }
    return out;
}

std::vector<DefaultSpell> parse_portfolio(std::string_view text, std::string_view file) {
    struct Raw {
        DefaultSpell spell;
        std::size_t first_line = 0;
        std::size_t last_line = 0;
        std::map<int, std::size_t> line_of;  // reporting month -> line
    };
    // Spells keyed by borrower then spell index.
    std::map<std::string, std::map<int, Raw>> borrowers;
    for (const auto& line : read_csv(text, kPortfolioHeader, file)) {
        const auto& f = line.fields;
        with_context(file, line.number, [&] {
            const std::string id(f[0]);
            if (id.empty()) throw ParseError("empty borrower_id");
            const int spell_index = static_cast<int>(parse_integer(f[1]));
            Observation o;
            o.reporting_date = MonthIndex::parse(f[2]);
            o.outstanding = parse_number(f[3]);
            o.cash_recovery = parse_number(f[4]);
            o.collateral_recovery = parse_number(f[5]);
            o.cost = parse_number(f[6]);
            o.write_off = parse_number(f[7]);
            DefaultSpell head;
            head.borrower_id = id;
            head.spell_index = spell_index;
            head.default_date = MonthIndex::parse(f[8]);
            if (!f[9].empty()) head.out_date = MonthIndex::parse(f[9]);
            head.reason = parse_default_reason(f[10]);
            head.final_status = parse_final_status(f[11]);
            head.cover_value_index = parse_number(f[12]);
            head.unsecured_rate = parse_number(f[13]);
            head.secured_rate = parse_number(f[14]);

            auto [it, fresh] = borrowers[id].try_emplace(spell_index);
            Raw& raw = it->second;
            if (fresh) {
                raw.spell = head;
                raw.first_line = line.number;
            } else {
                const auto& s = raw.spell;
                if (s.default_date != head.default_date || s.out_date != head.out_date || s.reason != head.reason ||
                    s.final_status != head.final_status || s.cover_value_index != head.cover_value_index ||
                    s.unsecured_rate != head.unsecured_rate || s.secured_rate != head.secured_rate) {
                    throw ParseError("spell attributes differ from line " + std::to_string(raw.first_line));
                }
            }
            if (!raw.line_of.emplace(o.reporting_date.value, line.number).second) {
                throw ParseError("duplicate reporting_date " + o.reporting_date.to_string() + " (first at line " +
                                 std::to_string(raw.line_of[o.reporting_date.value]) + ")");
            }
            raw.last_line = std::max(raw.last_line, line.number);
            raw.spell.observations.push_back(o);
            return 0;
        });
    }

    std::vector<DefaultSpell> out;
    std::vector<std::string> problems;
    for (auto& [id, spells] : borrowers) {
        std::vector<Raw*> ordered;
        for (auto& [idx, raw] : spells) {
            std::sort(raw.spell.observations.begin(), raw.spell.observations.end(),
                      [](const Observation& a, const Observation& b) { return a.reporting_date < b.reporting_date; });
            ordered.push_back(&raw);
        }
        std::stable_sort(ordered.begin(), ordered.end(),
                         [](const Raw* a, const Raw* b) { return a->spell.default_date < b->spell.default_date; });
        std::vector<DefaultSpell> raw_spells;
        std::size_t first = ordered.front()->first_line;
        std::size_t last = 0;
        for (const Raw* r : ordered) {
            raw_spells.push_back(r->spell);
            first = std::min(first, r->first_line);
            last = std::max(last, r->last_line);
        }
        std::vector<DefaultSpell> merged;
        try {
            merged = consolidate_defaults(std::move(raw_spells));
        } catch (const Error& e) {
            problems.push_back(std::string(file) + " lines " + std::to_string(first) + "-" + std::to_string(last) +
                               " (borrower " + id + "): " + e.what());
            continue;
        }
        for (auto& s : merged) {
            const auto violations = validate_spell(s);
            if (!violations.empty()) {
                // Locate the spell's rows through its first observation.
                std::size_t line = first;
                std::size_t end = last;
                for (const Raw* r : ordered) {
                    if (!s.observations.empty() && r->line_of.count(s.observations.front().reporting_date.value)) {
                        line = r->line_of.at(s.observations.front().reporting_date.value);
                        end = r->last_line;
                        break;
                    }
                }
                for (const auto& v : violations) {
                    problems.push_back(where(file, line) + " (borrower " + id + " spell " +
                                       std::to_string(s.spell_index) + ", rows to line " + std::to_string(end) +
                                       "): " + v);
                }
            }
            out.push_back(std::move(s));
        }
    }
    if (!problems.empty()) {
        std::string msg = std::to_string(problems.size()) + " validation problem(s):";
        for (std::size_t i = 0; i < std::min<std::size_t>(problems.size(), 20); ++i) msg += "\n  " + problems[i];
        if (problems.size() > 20) msg += "\n  ...";
        throw ValidationError(msg);
    }
    return out;
}

MacroSeries parse_macro(std::string_view quarterly, std::string_view rates, double discount_addon) {
    MacroSeries m;
    m.discount_addon = discount_addon;
    for (const auto& line : read_csv(quarterly, kMacroQuarterlyHeader, kMacroQuarterlyFile)) {
        with_context(kMacroQuarterlyFile, line.number, [&] {
            const auto year = static_cast<int>(parse_integer(line.fields[0]));
            const auto quarter = static_cast<int>(parse_integer(line.fields[1]));
            if (quarter < 1 || quarter > 4) throw ParseError("quarter must be 1..4");
            MacroQuarter q{parse_number(line.fields[2]), parse_number(line.fields[3]), parse_number(line.fields[4])};
            if (!m.quarterly.emplace(year * 4 + quarter - 1, q).second) throw ParseError("duplicate quarter");
            return 0;
        });
    }
    for (const auto& line : read_csv(rates, kRatesMonthlyHeader, kRatesMonthlyFile)) {
        with_context(kRatesMonthlyFile, line.number, [&] {
            const auto year = static_cast<int>(parse_integer(line.fields[0]));
            const auto month = static_cast<int>(parse_integer(line.fields[1]));
            if (month < 1 || month > 12) throw ParseError("month must be 1..12");
            const double rate = parse_number(line.fields[2]);
            if (!std::isfinite(rate)) throw ParseError("base_rate must be finite");
            if (!m.base_rate.emplace(MonthIndex::from_ym(year, month).value, rate).second) throw ParseError("duplicate month");
            return 0;
        });
    }
    return m;
}

void save_portfolio(const fs::path& dir, const Portfolio& p, const Provenance& prov) {
    const std::string head = prov.line() + '\n';
    write_text(dir / kPortfolioFile, head + portfolio_csv(p.spells));
    write_text(dir / kMacroQuarterlyFile, head + macro_quarterly_csv(p.macro));
    write_text(dir / kRatesMonthlyFile, head + rates_monthly_csv(p.macro));
}

Portfolio load_portfolio(const fs::path& dir, double discount_addon) {
    Portfolio p;
    p.macro = parse_macro(read_text(dir / kMacroQuarterlyFile), read_text(dir / kRatesMonthlyFile), discount_addon);
    p.spells = parse_portfolio(read_text(dir / kPortfolioFile), kPortfolioFile);
    for (const auto& s : p.spells) {
        try {
            p.macro.require_coverage(s.default_date, s.last_reporting_date());
        } catch (const ConfigError& e) {
            throw ConfigError(std::string(e.what()) + " (needed by borrower " + s.borrower_id + " spell " +
                              std::to_string(s.spell_index) + ")");
        }
    }
    return p;
}

std::string lgd_records_csv(const std::vector<LgdRecord>& cashflow, const std::vector<LgdRecord>& delta_os) {
    if (cashflow.size() != delta_os.size()) throw JoinError("engine record counts differ");
    std::string out =
        "borrower_id,spell_index,reference_date,exposure_at_ref,el_cashflow,rlgd_raw_cashflow,rlgd_cashflow,"
        "el_delta_os,rlgd_raw_delta_os,rlgd_delta_os,resolved\n";
    for (std::size_t i = 0; i < cashflow.size(); ++i) {
        const auto& c = cashflow[i];
        const auto& d = delta_os[i];
        if (c.borrower_id != d.borrower_id || c.spell_index != d.spell_index || c.reference_date != d.reference_date) {
            throw JoinError("engine records out of step at " + c.borrower_id + "/" + std::to_string(c.spell_index) + "/" +
                            c.reference_date.to_string());
        }
        out += c.borrower_id + ',' + std::to_string(c.spell_index) + ',' + c.reference_date.to_string() + ',' +
               format_number(c.exposure_at_ref) + ',' + format_number(c.el) + ',' + format_number(c.rlgd_raw) + ',' +
               format_number(c.rlgd) + ',' + format_number(d.el) + ',' + format_number(d.rlgd_raw) + ',' +
               format_number(d.rlgd) + ',' + (c.resolved ? "1" : "0") + '\n';
    }
    return out;
}

std::string expanded_table_csv(const std::vector<ExpandedRow>& rows) {
    std::string out =
        "borrower_id,spell_index,reference_date,reporting_date,os_ref,os_prev,delta_os,disc_delta,cum_disc_delta,"
        "el_running,rlgd_running\n";
    for (const auto& r : rows) {
        out += r.borrower_id + ',' + std::to_string(r.spell_index) + ',' + r.reference_date.to_string() + ',' +
               r.reporting_date.to_string() + ',' + format_number(r.os_ref) + ',' + format_number(r.os_prev) + ',' +
               format_number(r.delta_os) + ',' + format_number(r.disc_delta) + ',' + format_number(r.cum_disc_delta) +
               ',' + format_number(r.el_running) + ',' + format_number(r.rlgd_running) + '\n';
    }
    return out;
}

std::string feature_csv(const std::vector<FeatureRow>& rows) {
    std::string out = "borrower_id,spell_index,reference_date";
    for (auto name : kPredictorNames) out += ',' + std::string(name);
    out += ",target_rlgd,final_status\n";
    for (const auto& r : rows) {
        out += r.borrower_id + ',' + std::to_string(r.spell_index) + ',' + r.reference_date.to_string();
        for (std::size_t i = 0; i < kPredictorNames.size(); ++i) out += ',' + format_number(r.predictor(i));
        out += ',' + format_number(r.target_rlgd) + ',' + std::string(to_string(r.final_status)) + '\n';
    }
    return out;
}

std::string scatter_csv(const std::vector<bench::ScatterPoint>& points) {
    std::string out = "borrower_id,spell_index,reference_date,final_status,rlgd_cashflow,rlgd_delta_os\n";
    for (const auto& p : points) {
        out += p.borrower_id + ',' + std::to_string(p.spell_index) + ',' + p.reference_date.to_string() + ',' +
               std::string(to_string(p.final_status)) + ',' + format_number(p.rlgd_cashflow) + ',' +
               format_number(p.rlgd_delta_os) + '\n';
    }
    return out;
}

std::string histogram_csv(const std::vector<bench::HistogramBin>& bins) {
    std::string out = "bin_lo,bin_hi,count\n";
    for (const auto& b : bins) out += format_number(b.lo) + ',' + format_number(b.hi) + ',' + std::to_string(b.count) + '\n';
    return out;
}

}  // namespace lgdlab::io
