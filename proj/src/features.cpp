#include "lgdlab/features.hpp"

#include "lgdlab/error.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace lgdlab {

namespace {

using RowKey = std::tuple<std::string, int, int>;

std::string describe(const RowKey& k) {
    return std::get<0>(k) + "/" + std::to_string(std::get<1>(k)) + "/" + MonthIndex{std::get<2>(k)}.to_string();
}

std::map<RowKey, const LgdRecord*> index_records(const std::vector<LgdRecord>& records, std::string_view label) {
    std::map<RowKey, const LgdRecord*> out;
    for (const auto& r : records) {
        RowKey key{r.borrower_id, r.spell_index, r.reference_date.value};
        if (!out.emplace(key, &r).second) {
            throw JoinError(std::string(label) + " records contain duplicate key " + describe(key));
        }
    }
    return out;
}

[[noreturn]] void report_mismatch(std::string_view label, const std::vector<std::string>& missing,
                                  const std::vector<std::string>& unmatched) {
    std::string msg = std::string(label) + " records do not match the portfolio";
    auto list = [&msg](std::string_view what, const std::vector<std::string>& keys) {
        if (keys.empty()) return;
        msg += "; " + std::string(what) + " (" + std::to_string(keys.size()) + "):";
        for (std::size_t i = 0; i < std::min<std::size_t>(keys.size(), 10); ++i) msg += " " + keys[i];
        if (keys.size() > 10) msg += " ...";
    };
    list("missing keys", missing);
    list("keys without a spell row", unmatched);
    throw JoinError(msg);
}

}  // namespace

MacroPoint macro_lookup(const MacroSeries& macro, MonthIndex month) {
    const auto& q = macro.quarter_at(month);
    return MacroPoint{q.gdp, q.employment, q.hpi, macro.base_rate_at(month)};
}

double FeatureRow::predictor(std::size_t index) const {
    switch (index) {
        case 0: return unsecured_recovery_interest;
        case 1: return secured_recovery_interest;
        case 2: return cover_value_index;
        case 3: return eao;
        case 4: return discount_rate;
        case 5: return os_delta;
        case 6: return rlgd_os;
        case 7: return default_duration;
        case 8: case 9: case 10: case 11: case 12: case 13: return reason[index - 8];
        case 14: return gdp;
        case 15: return employment;
        case 16: return hpi;
        case 17: return repayment;
        case 18: return redefault;
    }
    throw LookupError("predictor index out of range: " + std::to_string(index));
}

std::size_t predictor_index(std::string_view name) {
    for (std::size_t i = 0; i < kPredictorNames.size(); ++i) {
        if (kPredictorNames[i] == name) return i;
    }
    throw LookupError("unknown predictor '" + std::string(name) + "'");
}

std::vector<std::string> all_predictors() { return {kPredictorNames.begin(), kPredictorNames.end()}; }

std::vector<FeatureRow> build_feature_matrix(const std::vector<DefaultSpell>& spells,
                                             const std::vector<LgdRecord>& cash_lgd,
                                             const std::vector<LgdRecord>& os_lgd, const MacroSeries& macro) {
    const auto cash = index_records(cash_lgd, "cash-flow");
    const auto delta = index_records(os_lgd, "delta-outstanding");

    std::vector<const DefaultSpell*> order;
    for (const auto& s : spells) order.push_back(&s);
    std::sort(order.begin(), order.end(), [](const DefaultSpell* a, const DefaultSpell* b) {
        return std::tie(a->borrower_id, a->spell_index) < std::tie(b->borrower_id, b->spell_index);
    });

    std::vector<FeatureRow> rows;
    std::vector<std::string> missing_cash, missing_delta;
    std::size_t expected = 0;
    for (const auto* spell : order) {
        const auto& obs = spell->observations;
        expected += obs.size();
        const int duration = spell->duration_months();
        for (std::size_t i = 0; i < obs.size(); ++i) {
            RowKey key{spell->borrower_id, spell->spell_index, obs[i].reporting_date.value};
            auto c = cash.find(key);
            auto d = delta.find(key);
            if (c == cash.end()) missing_cash.push_back(describe(key));
            if (d == delta.end()) missing_delta.push_back(describe(key));
            if (c == cash.end() || d == delta.end()) continue;

            const auto m = macro_lookup(macro, obs[i].reporting_date);
            FeatureRow row;
            row.borrower_id = spell->borrower_id;
            row.spell_index = spell->spell_index;
            row.reference_date = obs[i].reporting_date;
            row.unsecured_recovery_interest = spell->unsecured_rate;
            row.secured_recovery_interest = spell->secured_rate;
            row.cover_value_index = spell->cover_value_index;
            row.eao = obs[i].outstanding;
            row.discount_rate = m.base_rate + macro.discount_addon;
            if (i > 0) {
                row.os_delta = obs[i].outstanding - obs[i - 1].outstanding;
                if (obs[i - 1].outstanding != 0.0) row.repayment = obs[i].outstanding / obs[i - 1].outstanding;
            }
            row.rlgd_os = d->second->rlgd;
            row.default_duration = duration;
            row.reason[static_cast<int>(spell->reason)] = 1;
            row.gdp = m.gdp;
            row.employment = m.employment;
            row.hpi = m.hpi;
            row.redefault = spell->spell_index > 0 ? 1 : 0;
            row.target_rlgd = c->second->rlgd;
            row.final_status = spell->final_status;
            rows.push_back(std::move(row));
        }
    }
    if (!missing_cash.empty() || cash.size() != expected) {
        std::vector<std::string> extra;
        if (cash.size() != expected - missing_cash.size()) extra.emplace_back("(extra cash-flow records present)");
        report_mismatch("cash-flow", missing_cash, extra);
    }
    if (!missing_delta.empty() || delta.size() != expected) {
        std::vector<std::string> extra;
        if (delta.size() != expected - missing_delta.size()) extra.emplace_back("(extra delta-outstanding records present)");
        report_mismatch("delta-outstanding", missing_delta, extra);
    }
    return rows;
}

Matrix design_matrix(const std::vector<FeatureRow>& rows, const std::vector<std::string>& predictors) {
    std::vector<std::size_t> idx;
    idx.reserve(predictors.size());
    for (const auto& p : predictors) idx.push_back(predictor_index(p));
    Matrix m(rows.size(), idx.size());
    for (std::size_t c = 0; c < idx.size(); ++c) {
        auto col = m.column(c);
        for (std::size_t r = 0; r < rows.size(); ++r) col[r] = rows[r].predictor(idx[c]);
    }
    return m;
}

std::vector<double> targets(const std::vector<FeatureRow>& rows) {
    std::vector<double> y;
    y.reserve(rows.size());
    for (const auto& r : rows) y.push_back(r.target_rlgd);
    return y;
}

std::string spell_key(const FeatureRow& row) { return row.borrower_id + "#" + std::to_string(row.spell_index); }

}  // namespace lgdlab
