#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "linematch/core.hpp"
#include "linematch/stats.hpp"

namespace linematch {

// Symmetric difference of two free-server multisets that start equal and lose
// one server each per step.
class DiffTracker {
public:
    void apply(Location removed_a, Location removed_b);
    void seed(Location extra_a, Location extra_b);

    bool differ() const noexcept { return !only_a_.empty() || !only_b_.empty(); }
    // at most one element each side, same count
    bool single_swap() const noexcept { return only_a_.size() == only_b_.size() && only_a_.size() <= 1; }
    const std::vector<Location>& only_a() const noexcept { return only_a_; }
    const std::vector<Location>& only_b() const noexcept { return only_b_; }

private:
    std::vector<Location> only_a_, only_b_;
};

struct HybridStep {
    std::size_t t = 0;
    Location request = 0;
    Location s_m = 0;   // H^m
    Location s_m1 = 0;  // H^{m-1}
    double dcost = 0;   // cost_t(H^{m-1}) - cost_t(H^m)

    // state after step t
    bool differ = false;
    bool single_swap = true;
    Location gL = 0, gR = 0;
    bool left_in_m = false;  // gL is the extra server of H^m
    double delta = 0;
    std::optional<Location> sL, sR;
    bool gap_clear = true;
};

struct HybridTrace {
    std::size_t m = 0;
    std::vector<HybridStep> steps;  // steps[t-1]
    double cost_m = 0, cost_m1 = 0;
    std::optional<ServerPool> pool_m_at_m;   // S_m of H^m, if requested
    std::optional<ServerPool> pool_m1_at_m;  // S'_m
};

struct HybridOptions {
    bool keep_snapshots = false;
    // stop recording once the two runs have merged again (costs stay exact)
    bool stop_when_merged = false;
};

HybridTrace run_hybrid_pair(const Instance& inst, const PolicySpec& policy_a, std::size_t m,
                            const HybridOptions& opt = {});

struct StructureReport {
    std::size_t states_checked = 0;
    std::size_t transitions_checked = 0;
    std::size_t prop1_fail = 0, prop2_fail = 0, prop3_fail = 0, prop4_fail = 0;
    std::size_t prefix_fail = 0;  // S_t != S'_t for some t < m
    std::array<std::size_t, 6> table2_rows{}, table3_rows{}, table4_rows{};
    std::size_t both_absent = 0;
    std::size_t boundary_hits = 0;
    double cost_diff = 0;   // cost(H^{m-1}) - cost(H^m)
    double delta_max = 0;   // over t in m..n-1
    bool cost_bound_ok = true;
    std::optional<std::string> first_violation;

    bool pass() const noexcept {
        return prop1_fail + prop2_fail + prop3_fail + prop4_fail + prefix_fail == 0 && cost_bound_ok;
    }
    void merge(const StructureReport& o);
};

StructureReport verify_structure(const HybridTrace& trace);

struct GapSeries {
    std::vector<double> delta;  // delta[t - m], t = m..n
    double delta_max = 0;       // over t in m..n-1
    std::optional<std::size_t> t_death;
};

// requires the lower-bound shape: extra of H^{m-1} at 0, extra of H^m the
// smallest positive free server
GapSeries gap_series(const HybridTrace& trace);

Estimate estimate_worstcase_bound(Location x, const std::vector<Location>& servers, double y, std::size_t trials,
                                  std::uint64_t seed);

}  // namespace linematch
