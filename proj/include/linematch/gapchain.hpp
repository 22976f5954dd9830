#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "linematch/core.hpp"
#include "linematch/stats.hpp"

namespace linematch {

struct StopFlags {
    std::optional<std::size_t> tau_zero;      // no server left at 0
    std::optional<std::size_t> tau_interval;  // nothing left in (0, y]
    std::optional<std::size_t> tau_w;         // s2 - s1 > s1, or nothing above s1
    std::optional<std::size_t> tau_death;     // gamma = 0
};

struct ChainState {
    double gamma = 0;
    ServerPool T;
    std::size_t t = 0;
    double y = 1.0;
    StopFlags stops;
};

// checks (gamma, T) in X and records the stopping flags that already hold at t = 0
ChainState make_chain_state(double gamma, ServerPool T, double y = 1.0);
ChainState make_chain_state(double gamma, const std::vector<Location>& servers, double y = 1.0);

bool in_state_space(double gamma, const ServerPool& T);

struct ChainStep {
    bool moved = false;  // false iff T was empty
    Location s = 0;      // chosen in T
    Location s_prime = 0;
    double dcost = 0;    // |r - s'| - |r - s|
    bool merged = false; // the two post-sets coincide
};

ChainStep step_chain(ChainState& state, Location r);

// case 1..5 of the transition table; 0 when no case applies
int classify_case(const ChainState& state, Location r);

struct CasePrediction {
    int id = 0;
    std::optional<Location> removed;  // absent for column 5 (some s >= s2)
    Location s2 = 0;
    double gamma_next = 0;
};

CasePrediction predict_case(const ChainState& state, Location r);

// true iff the post-step state agrees with the prediction made before the step
bool prediction_holds(const CasePrediction& p, const ChainStep& st, double gamma_after);

struct ChainRun {
    std::vector<double> gamma;       // gamma_t, t = 0..steps
    std::vector<Location> removed;   // s(r_{t+1})
    std::vector<double> dcost;
    StopFlags stops;
    double gamma_max = 0;
    double sum_dcost = 0;
    std::size_t steps = 0;
};

// horizon 0 means |T_0|
ChainRun run_chain(ChainState init, std::size_t horizon, std::uint64_t seed, bool keep_path = false);
ChainRun run_chain_on(ChainState init, std::span<const Location> requests, bool keep_path = true);

Estimate estimate_front_death(Location x, const std::vector<Location>& servers, double y, std::size_t trials,
                              std::uint64_t seed);

}  // namespace linematch
