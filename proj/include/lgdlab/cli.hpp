#pragma once

#include "lgdlab/bench.hpp"
#include "lgdlab/gbt.hpp"
#include "lgdlab/lgd_cashflow.hpp"
#include "lgdlab/search.hpp"
#include "lgdlab/synthgen.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace lgdlab::cli {

struct RunConfig {
    std::uint64_t seed = 42;
    std::size_t threads = 0;  // 0: LGDLAB_THREADS or all cores
    std::string data_dir = "data";
    std::string out_dir = "out";
    std::string input;  // artifact for `report`

    GenConfig gen;
    DiscountPolicy discount;
    double discount_addon = 0.05;
    bench::SplitSpec split;

    search::ParamSpace space = search::tuning_space();
    int n_iter = 25;
    int folds = 5;
    bool grid = false;
    bool row_level_folds = false;
    std::size_t grid_budget = 5000;
    search::ParamSpace sensitivity_space = search::sensitivity_space();
    int sensitivity_n_iter = 60;

    gbt::GbtParams train;  // used by `train`

    std::size_t scatter_points = 10000;
    std::size_t lgd_bins = 20;
    std::size_t duration_bins = 26;
    bool expanded_table = false;

    RunConfig();
    void validate() const;  // throws ConfigError
};

// Rejects unknown keys with ConfigError; missing keys keep defaults.
RunConfig config_from_json(std::string_view text);
// Canonical JSON of the effective configuration.
std::string config_to_json(const RunConfig& cfg);
// FNV-1a of the canonical JSON.
std::string config_hash(const RunConfig& cfg);

bench::BenchConfig bench_config(const RunConfig& cfg);

// Entry point: returns the process exit code (2 for usage errors).
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lgdlab::cli
