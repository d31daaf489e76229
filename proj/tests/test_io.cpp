#include "helpers.hpp"

#include "lgdlab/error.hpp"
#include "lgdlab/io.hpp"
#include "lgdlab/synthgen.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace lgdlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("lgdlab_io_" + name);
    fs::remove_all(p);
    return p;
}

io::Portfolio small_generated() {
    GenConfig cfg;
    cfg.n_borrowers = 80;
    cfg.seed = 3;
    io::Portfolio p;
    p.macro = generate_macro(cfg.seed, cfg.start, cfg.end);
    p.spells = generate_portfolio(cfg, p.macro);
    return p;
}

std::string replace_line(const std::string& text, std::size_t line_no, const std::string& line) {
    std::istringstream in(text);
    std::string out, l;
    for (std::size_t n = 1; std::getline(in, l); ++n) out += (n == line_no ? line : l) + "\n";
    return out;
}

std::string line_at(const std::string& text, std::size_t line_no) {
    std::istringstream in(text);
    std::string l;
    for (std::size_t n = 1; std::getline(in, l) && n < line_no; ++n) {}
    return l;
}

}  // namespace

TEST_CASE("portfolio round trip") {
    const auto p = small_generated();
    const auto dir = scratch("roundtrip");
    io::save_portfolio(dir, p, io::Provenance{3, "abc"});
    const auto back = io::load_portfolio(dir);
    CHECK(back.spells == p.spells);
    CHECK(back.macro.quarterly == p.macro.quarterly);
    CHECK(back.macro.base_rate == p.macro.base_rate);
    CHECK(io::read_text(dir / io::kPortfolioFile).rfind("# seed=3 config=abc\n", 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("zero EAD is reported with its row") {
    auto spell = testkit::make_spell({100, 50});
    auto text = io::portfolio_csv({spell});
    // line 1 header, line 2 the default-date row
    auto row = line_at(text, 2);
    const auto pos = row.find(",100,");
    REQUIRE(pos != std::string::npos);
    row.replace(pos, 5, ",0,");
    text = replace_line(text, 2, row);
    try {
        io::parse_portfolio(text);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(msg.find("B1") != std::string::npos);
        CHECK(msg.find("EAD must be positive") != std::string::npos);
    }
}

TEST_CASE("malformed portfolio input") {
    const auto text = io::portfolio_csv({testkit::make_spell({100, 50})});
    CHECK_THROWS_AS(io::parse_portfolio(replace_line(text, 1, "borrower,spell")), ParseError);
    CHECK_THROWS_AS(io::parse_portfolio(replace_line(text, 3, "B1,0,2010-02")), ParseError);
    auto row = line_at(text, 3);
    row.replace(row.find("2010-02"), 7, "2010-13");
    try {
        io::parse_portfolio(replace_line(text, 3, row));
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    // duplicated row
    CHECK_THROWS(io::parse_portfolio(text + line_at(text, 3) + "\n"));
    // CRLF and comments are tolerated
    std::string crlf;
    for (char c : text) crlf += c == '\n' ? std::string("\r\n") : std::string(1, c);
    CHECK(io::parse_portfolio("# note\n" + crlf) == io::parse_portfolio(text));
}

TEST_CASE("missing macro quarter is named") {
    auto p = small_generated();
    p.macro.quarterly.erase(MonthIndex::from_ym(2012, 5).quarter_ordinal());
    const auto dir = scratch("missing_quarter");
    io::save_portfolio(dir, p, io::Provenance{});
    try {
        io::load_portfolio(dir);
        FAIL("expected a coverage error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("2012Q2") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("macro parsing") {
    const auto m = testkit::flat_macro(0.03, testkit::ym(2010, 1), testkit::ym(2010, 12));
    const auto back = io::parse_macro(io::macro_quarterly_csv(m), io::rates_monthly_csv(m), 0.05);
    CHECK(back.quarterly == m.quarterly);
    CHECK(back.base_rate == m.base_rate);
    CHECK(back.discount_addon == 0.05);
    CHECK_THROWS_AS(io::parse_macro("year,quarter\n", io::rates_monthly_csv(m)), ParseError);
    CHECK_THROWS_AS(io::parse_macro(io::macro_quarterly_csv(m), "year,month,base_rate\n2010,13,0.01\n"), ParseError);
}

TEST_CASE("report CSV headers") {
    const auto spell = testkit::exact_spell({100, 60, 0});
    const auto macro = testkit::flat_macro(0.02);
    const auto cash = realized_lgd_portfolio({spell}, DiscountPolicy{}, macro);
    const auto os = rlgd_delta_os_portfolio({spell}, DiscountPolicy{}, macro);
    const auto rec = io::lgd_records_csv(cash, os);
    CHECK(rec.rfind("borrower_id,spell_index,reference_date,exposure_at_ref,el_cashflow,rlgd_raw_cashflow,"
                    "rlgd_cashflow,el_delta_os,rlgd_raw_delta_os,rlgd_delta_os,resolved\n",
                    0) == 0);
    CHECK(std::count(rec.begin(), rec.end(), '\n') == 4);
    const std::vector<bench::HistogramBin> bins{{0.0, 0.5, 3}, {0.5, 1.0, 1}};
    CHECK(io::histogram_csv(bins) == "bin_lo,bin_hi,count\n0,0.5,3\n0.5,1,1\n");
}
