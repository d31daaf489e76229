#include "helpers.hpp"

#include "lgdlab/error.hpp"

#include <doctest.h>

#include <random>

using namespace lgdlab;
using testkit::make_spell;
using testkit::ym;

TEST_CASE("months_between counts whole months") {
    CHECK(months_between(ym(2008, 1), ym(2008, 1)) == 0);
    CHECK(months_between(ym(2008, 1), ym(2009, 1)) == 12);
    CHECK(months_between(ym(2010, 3), ym(2010, 7)) == 4);
    CHECK_THROWS_AS(months_between(ym(2010, 7), ym(2010, 3)), OrderingError);
}

TEST_CASE("months_between is additive") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> d(0, 400);
    for (int i = 0; i < 1000; ++i) {
        int v[3] = {d(rng), d(rng), d(rng)};
        std::sort(v, v + 3);
        MonthIndex a{v[0]}, b{v[1]}, c{v[2]};
        CHECK(months_between(a, b) + months_between(b, c) == months_between(a, c));
    }
}

TEST_CASE("MonthIndex text round trip and quarters") {
    const auto m = MonthIndex::parse("2010-05");
    CHECK(m.year() == 2010);
    CHECK(m.month() == 5);
    CHECK(m.to_string() == "2010-05");
    CHECK(ym(2000, 1).value == 0);
    CHECK(ym(1999, 12).value == -1);
    CHECK(ym(1999, 12).to_string() == "1999-12");
    CHECK(quarter_label(ym(2010, 4).quarter_ordinal()) == "2010Q2");
    CHECK(ym(2010, 4).quarter_ordinal() == ym(2010, 6).quarter_ordinal());
    CHECK(ym(2010, 7).quarter_ordinal() != ym(2010, 6).quarter_ordinal());
    CHECK_THROWS_AS(MonthIndex::parse("2010-13"), ParseError);
    CHECK_THROWS_AS(MonthIndex::parse("201005"), ParseError);
}

TEST_CASE("enum text forms round trip") {
    for (int i = 0; i < kFinalStatusCount; ++i) {
        auto s = static_cast<FinalStatus>(i);
        CHECK(parse_final_status(to_string(s)) == s);
    }
    for (int i = 0; i < kDefaultReasonCount; ++i) {
        auto r = static_cast<DefaultReason>(i);
        CHECK(parse_default_reason(to_string(r)) == r);
    }
    CHECK_THROWS_AS(parse_final_status("Lost"), ParseError);
    CHECK(is_loss_group(FinalStatus::NotResolved));
    CHECK(is_loss_group(FinalStatus::ExitWithLoss));
    CHECK_FALSE(is_loss_group(FinalStatus::Cured));
    CHECK_FALSE(is_loss_group(FinalStatus::ExitNoLoss));
}

TEST_CASE("validate_spell") {
    SUBCASE("well formed") { CHECK(validate_spell(make_spell({100, 90, 80})).empty()); }
    SUBCASE("zero EAD") {
        auto v = validate_spell(make_spell({0, 0}));
        REQUIRE(v.size() == 1);
        CHECK(v[0] == "EAD must be positive");
    }
    SUBCASE("month gap") {
        auto s = make_spell({100, 90, 80});
        s.observations[2].reporting_date = s.observations[2].reporting_date + 1;
        s.out_date = s.observations[2].reporting_date;
        auto v = validate_spell(s);
        REQUIRE(v.size() == 1);
        CHECK(v[0] == "non-contiguous reporting dates");
    }
    SUBCASE("unresolved spell with out_date") {
        auto s = make_spell({100, 90}, FinalStatus::NotResolved);
        s.out_date = s.last_reporting_date();
        CHECK(validate_spell(s) == std::vector<std::string>{"unresolved spell must not have out_date"});
    }
    SUBCASE("write-off above previous balance") {
        auto s = make_spell({100, 0});
        s.observations[1].write_off = 150;
        CHECK(validate_spell(s) == std::vector<std::string>{"write_off exceeds previous outstanding"});
    }
    SUBCASE("first date differs from default date") {
        auto s = make_spell({100, 90});
        s.default_date = s.default_date - 1;
        CHECK(validate_spell(s) == std::vector<std::string>{"first reporting date must equal default_date"});
    }
}

TEST_CASE("consolidate_defaults merges short probation gaps") {
    // Jan-Mar and Jun-Aug: two empty months in between.
    auto a = make_spell({100, 95, 90}, FinalStatus::Cured, ym(2010, 1), "B", 0);
    auto b = make_spell({92, 80, 70}, FinalStatus::ExitWithLoss, ym(2010, 6), "B", 1);
    a.reason = DefaultReason::Restr;
    b.reason = DefaultReason::Bankrupt;
    const auto merged = consolidate_defaults({a, b});
    REQUIRE(merged.size() == 1);
    const auto& m = merged[0];
    CHECK(m.default_date == ym(2010, 1));
    CHECK(m.last_reporting_date() == ym(2010, 8));
    CHECK(m.observations.size() == 8);
    CHECK(m.reason == DefaultReason::Restr);
    CHECK(m.final_status == FinalStatus::ExitWithLoss);
    CHECK(m.out_date == ym(2010, 8));
    // Bridged months carry the last balance and no flows.
    CHECK(m.observations[3].outstanding == 90);
    CHECK(m.observations[4].outstanding == 90);
    CHECK(m.observations[3].cash_recovery == 0);
    CHECK(validate_spell(m).empty());
}

TEST_CASE("consolidate_defaults keeps spells apart beyond three months") {
    auto a = make_spell({100, 95, 90}, FinalStatus::Cured, ym(2010, 1), "B", 0);
    auto b = make_spell({92, 80, 70, 60, 50}, FinalStatus::ExitWithLoss, ym(2010, 8), "B", 7);
    const auto out = consolidate_defaults({a, b});
    REQUIRE(out.size() == 2);
    CHECK(out[1].spell_index == 1);
    CHECK(out[0] == a);
}

TEST_CASE("consolidate_defaults boundary and errors") {
    auto a = make_spell({100, 95, 90}, FinalStatus::Cured, ym(2010, 1), "B", 0);
    // Gap of exactly 3 months (next default - last reporting month) merges.
    CHECK(consolidate_defaults({a, make_spell({90, 80}, FinalStatus::Cured, ym(2010, 6), "B", 1)}).size() == 1);
    CHECK(consolidate_defaults({a, make_spell({90, 80}, FinalStatus::Cured, ym(2010, 7), "B", 1)}).size() == 2);
    CHECK(consolidate_defaults({a}) == std::vector<DefaultSpell>{a});
    CHECK_THROWS_AS(consolidate_defaults({a, make_spell({90}, FinalStatus::Cured, ym(2010, 3), "B", 1)}), ValidationError);
}

TEST_CASE("consolidate_defaults is idempotent and leaves gaps above the threshold") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<DefaultSpell> raw;
        MonthIndex at = ym(2008, 1);
        const int n = std::uniform_int_distribution<int>(1, 5)(rng);
        for (int k = 0; k < n; ++k) {
            const int len = std::uniform_int_distribution<int>(1, 8)(rng);
            std::vector<double> path(len, 50.0);
            auto status = k + 1 == n ? FinalStatus::ExitWithLoss : FinalStatus::Cured;
            raw.push_back(make_spell(path, status, at, "B", k));
            at = at + len + std::uniform_int_distribution<int>(1, 7)(rng);
        }
        const auto once = consolidate_defaults(raw);
        CHECK(consolidate_defaults(once) == once);
        for (std::size_t i = 1; i < once.size(); ++i) {
            CHECK(once[i].default_date.value - once[i - 1].last_reporting_date().value > kConsolidationGapMonths);
        }
    }
}

TEST_CASE("MacroSeries coverage errors name the gap") {
    auto m = testkit::flat_macro(0.01, ym(2010, 1), ym(2010, 12));
    CHECK(m.base_rate_at(ym(2010, 5)) == 0.01);
    try {
        m.require_coverage(ym(2010, 1), ym(2011, 2));
        FAIL("expected a coverage error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("2011Q1") != std::string::npos);
    }
    m.quarterly[ym(2011, 1).quarter_ordinal()] = {};
    try {
        m.require_coverage(ym(2010, 1), ym(2011, 2));
        FAIL("expected a coverage error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("2011-01") != std::string::npos);
    }
}
