#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "linematch/core.hpp"
#include "linematch/instances.hpp"
#include "linematch/stats.hpp"

namespace linematch {

struct SweepConfig {
    std::vector<std::string> models = {"random"};  // random | excess | lower | hgadv
    std::vector<std::size_t> n_list;
    std::vector<PolicyKind> algos = {PolicyKind::greedy};
    std::size_t trials = 10;
    std::uint64_t seed = 1;
    LowerBoundMode mode = LowerBoundMode::demo;
    double eps = 0.2;
    double kappa = 1.0;
    double eps_hat = 0.01;
    bool with_opt = true;
};

SweepConfig parse_sweep_config(const std::string& json_text);

Instance make_instance(const std::string& model, std::size_t n, const SweepConfig& cfg, std::uint64_t seed);

// per-trial raw values of one (model, n) cell
struct SweepCell {
    std::string model;
    std::size_t n = 0;
    std::vector<double> opt;                             // empty if !with_opt
    std::map<PolicyKind, std::vector<double>> cost;
    bool skipped = false;
    std::string note;
};

SweepCell run_cell(const SweepConfig& cfg, const std::string& model, std::size_t n);

struct SweepRow {
    std::string model;
    std::size_t n = 0;
    std::string algo;
    std::size_t trials = 0;
    double mean_cost = 0, stderr_cost = 0;
    double mean_opt = 0, stderr_opt = 0;
    double ratio = 0;
    std::uint64_t seed = 0;
    std::string mode;
    bool skipped = false;
};

std::vector<SweepRow> rows_for(const SweepCell& cell, const SweepConfig& cfg);
std::vector<SweepRow> scaling_sweep(const SweepConfig& cfg);

std::string format_double(double x);  // shortest round-trip
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);
void write_sweep_dat(const std::vector<SweepRow>& rows, std::ostream& out);

// y_i = (3/2)^i n^{-1/5}, i = 0..imax, imax = floor(d1 ln n)
struct IntervalLadder {
    std::vector<double> y;
    double d1 = 0;
    std::size_t imax = 0;
    // index i with x in I_i = (y_{i-1}, y_i]; nullopt if x = 0 or x > y_imax
    std::optional<std::size_t> index_of(Location x) const;
};

IntervalLadder make_ladder(std::size_t n, double eps_hat = 0.01);

struct DepletionReport {
    std::vector<std::optional<std::size_t>> t_i;  // i = 0..imax
    std::optional<std::size_t> t_zero;
    std::size_t limit = 0;  // n - ceil(n^{c3})
    bool order_ok = false;
    bool intervals_before_zero = true;  // t_{(0, y_i]} <= t_zero for every i
};

// hm: trace of H^m on inst (threshold for m steps, then greedy)
DepletionReport depletion_times(const Instance& inst, const MatchTrace& hm, const IntervalLadder& ladder,
                                std::size_t m, double eps_hat = 0.01);

struct GapBoundReport {
    std::size_t checked_until = 0;
    double max_gap = 0;
    double bound = 0;
    std::size_t violations = 0;
    bool delta_m_in_range = true;
};

GapBoundReport gap_bound_check(const Instance& inst, const MatchTrace& hm, std::size_t m, double delta_m,
                               double eps_hat = 0.01);

// delta_m of the pair (H^m, H^{m-1}) without running past step m
double delta_at_switch(const Instance& inst, const PolicySpec& policy_a, std::size_t m);

struct CostProfile {
    std::vector<double> mean;
    std::vector<double> se;
};

CostProfile per_step_cost_profile(const std::string& model, std::size_t n, std::size_t trials, std::uint64_t seed,
                                  double eps = 0.2);

struct MonotoneCheck {
    double rms_residual = 0;
    double rms_se = 0;
    bool ok = false;  // rms_residual <= 2 rms_se
};

MonotoneCheck monotone_check(const CostProfile& p);

// frequency of the stranded-interval event around r_n for each gap z = k*z0
std::vector<double> stranded_interval_frequency(std::size_t n, double eps, std::size_t trials, std::uint64_t seed,
                                                const std::vector<double>& multiples);

// mean number of hierarchical-greedy matches per level, fully random model
std::vector<double> level_histogram(std::size_t n, std::size_t trials, std::uint64_t seed);

}  // namespace linematch
