#pragma once

#include <span>
#include <utility>
#include <vector>

#include "linematch/core.hpp"

namespace linematch {

struct Assignment {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (request index, server index)
    double cost = 0;
};

// Non-crossing DP over (requests matched, offset into the server list).
// O(|R| (|S|-|R|+1)) time; servers must be sorted.
Assignment opt_dp(std::span<const Location> servers, std::span<const Location> requests);
double opt_dp_cost(std::span<const Location> servers, std::span<const Location> requests);

inline constexpr std::size_t kBruteforceCap = 8;

double opt_bruteforce(std::span<const Location> servers, std::span<const Location> requests);

Assignment opt_rank_match(std::span<const Location> servers, std::span<const Location> requests);

double assignment_cost(const Assignment& a, std::span<const Location> servers, std::span<const Location> requests);

}  // namespace linematch
