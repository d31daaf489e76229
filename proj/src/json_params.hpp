#pragma once

#include "lgdlab/error.hpp"
#include "lgdlab/gbt.hpp"

#include <json.hpp>

namespace lgdlab::detail {

inline nlohmann::json params_to_json(const gbt::GbtParams& p) {
    nlohmann::json j = {
        {"learning_rate", p.learning_rate},
        {"max_depth", p.max_depth},
        {"n_estimators", p.n_estimators},
        {"subsample", p.subsample},
        {"min_child_weight", p.min_child_weight},
        {"colsample_bytree", p.colsample_bytree},
        {"reg_lambda", p.reg_lambda},
        {"seed", p.seed},
    };
    j["base_score"] = p.base_score ? nlohmann::json(*p.base_score) : nlohmann::json(nullptr);
    return j;
}

// Fields absent from `j` keep their value in `into`; unknown keys are rejected.
inline gbt::GbtParams params_from_json(const nlohmann::json& j, gbt::GbtParams into = {}) {
    for (const auto& [key, v] : j.items()) {
        if (key == "learning_rate") into.learning_rate = v.get<double>();
        else if (key == "max_depth") into.max_depth = v.get<int>();
        else if (key == "n_estimators") into.n_estimators = v.get<int>();
        else if (key == "subsample") into.subsample = v.get<double>();
        else if (key == "min_child_weight") into.min_child_weight = v.get<double>();
        else if (key == "colsample_bytree") into.colsample_bytree = v.get<double>();
        else if (key == "reg_lambda") into.reg_lambda = v.get<double>();
        else if (key == "seed") into.seed = v.get<std::uint64_t>();
        else if (key == "base_score") into.base_score = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
        else throw ConfigError("unknown GBT parameter '" + key + "'");
    }
    return into;
}

}  // namespace lgdlab::detail
