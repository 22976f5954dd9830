#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "linematch/core.hpp"

namespace linematch {

// 2-D counting over (arrival time, location): merge-sort tree on time.
class GridCounter {
public:
    GridCounter(std::span<const Location> requests, std::span<const Location> servers);

    std::size_t n() const noexcept { return n_; }
    // requests with time in (t, t2] and location in [lo, hi] (closed) or (lo, hi) (open)
    std::size_t requests_closed(Location lo, Location hi, std::size_t t, std::size_t t2) const;
    std::size_t requests_open(Location lo, Location hi, std::size_t t, std::size_t t2) const;
    std::size_t servers_open(Location lo, Location hi) const;

private:
    template <class Pred>
    std::size_t query(std::size_t node, std::size_t nl, std::size_t nr, std::size_t l, std::size_t r, Pred&& p) const;

    std::size_t n_ = 0, size_ = 1;
    std::vector<std::vector<Location>> tree_;
    std::vector<Location> servers_;
};

// x = requests in (l, m) during (t, t2], y = servers in (l, m)
std::pair<std::size_t, std::size_t> interval_counts(const GridCounter& c, Location l, Location m, std::size_t t,
                                                    std::size_t t2);

struct RegularityOptions {
    double log_base = 2.0;
    double eps_hat = 0.01;
    std::vector<std::size_t> extra_times;  // e.g. depletion times
};

struct RegularityWitness {
    double d = 0, d2 = 0;
    std::size_t t = 0, t2 = 0;
    std::size_t count = 0;
    double expected = 0, slack = 0;
    int condition = 0;  // 1 lower, 2 upper
    std::string describe() const;
};

struct RegularityReport {
    bool regular = true;
    std::size_t rectangles = 0;
    std::size_t violations = 0;
    std::optional<RegularityWitness> first;
};

// one rectangle [d, d2] x (t, t2]
std::optional<RegularityWitness> check_rectangle(std::size_t count, double d, double d2, std::size_t t, std::size_t t2,
                                                 std::size_t n, double log_base);

// full mode requires n <= 200
RegularityReport check_regular(std::span<const Location> requests, bool targeted, const RegularityOptions& opt = {});

// grid intervals examined in targeted mode, as index pairs (i, j) meaning [i/n, j/n]
std::vector<std::pair<std::size_t, std::size_t>> targeted_intervals(std::size_t n, double eps_hat);

}  // namespace linematch
