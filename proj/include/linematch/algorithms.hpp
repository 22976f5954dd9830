#pragma once

#include <cstdint>
#include <vector>

#include "linematch/core.hpp"

namespace linematch {

// Dyadic counter tree. Leaves are (k/L, (k+1)/L] with the first leaf closed
// at 0, L = 2^ell0. Node 1 is the root, leaves sit at L..2L-1.
class LevelTree {
public:
    LevelTree() = default;
    LevelTree(const ServerPool& pool, std::size_t n_requests);

    unsigned ell0() const noexcept { return ell0_; }
    std::size_t leaves() const noexcept { return leaves_; }
    std::size_t leaf_of(Location x) const noexcept;

    void add(Location s);
    void remove(Location s);

    // lowest ancestor of leaf_of(r) with a free server; 0 if the tree is empty
    std::size_t lowest_nonempty(Location r) const noexcept;
    unsigned level_of_node(std::size_t node) const noexcept;
    // leaf index range [first, last] covered by node
    std::pair<std::size_t, std::size_t> leaf_range(std::size_t node) const noexcept;
    double interval_length(std::size_t node) const noexcept;

    std::uint32_t count(std::size_t node) const noexcept { return counts_[node]; }
    std::size_t total() const noexcept { return counts_.size() > 1 ? counts_[1] : 0; }

    // true iff every internal node equals the sum of its children and the
    // leaves equal a recount of `pool`
    bool consistent_with(const ServerPool& pool) const;

private:
    unsigned ell0_ = 0;
    std::size_t leaves_ = 1;
    std::vector<std::uint32_t> counts_;
};

// closest free server in J(r); does not mutate
Location hierarchical_greedy_choice(const LevelTree& tree, const ServerPool& pool, Location r);
// chooses, removes from pool and tree, returns the server
Location hierarchical_greedy_step(LevelTree& tree, ServerPool& pool, Location r);
unsigned level_of_match(const LevelTree& tree, Location r);

Location threshold_zero_step(const ServerPool& pool, Location r, Location y0);

// Stateful wrapper used by the drivers: pick, then report the consumed server.
class OnlinePolicy {
public:
    OnlinePolicy(const PolicySpec& spec, const ServerPool& initial, std::size_t n_requests);

    // choice for the next request (1-based step t)
    Location choose(const ServerPool& pool, Location r, std::size_t t) const;
    void consumed(Location s, std::size_t t);

    double y0() const noexcept { return y0_; }
    const LevelTree& tree() const noexcept { return tree_; }

private:
    bool base_active(std::size_t t) const noexcept { return !spec_.switch_after || t <= *spec_.switch_after; }

    PolicySpec spec_;
    double y0_ = 0;
    LevelTree tree_;
};

bool is_neighbor_choice(const ServerPool& pool, Location r, Location s);

// replays the free-server state; error if the trace does not belong to the instance
bool check_neighboring(const MatchTrace& trace, const Instance& instance);

}  // namespace linematch
