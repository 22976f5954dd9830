#include "linematch/offline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace linematch {

namespace {

void check_sorted(std::span<const Location> servers) {
    if (!std::is_sorted(servers.begin(), servers.end())) throw LinematchError("servers must be sorted");
}

std::vector<std::size_t> sorted_order(std::span<const Location> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    return idx;
}

}  // namespace

double opt_dp_cost(std::span<const Location> servers, std::span<const Location> requests) {
    if (requests.size() > servers.size()) throw LinematchError("more requests than servers");
    check_sorted(servers);
    std::vector<Location> r(requests.begin(), requests.end());
    std::sort(r.begin(), r.end());
    std::size_t k = servers.size() - r.size();
    std::vector<double> row(k + 1, 0.0);
    for (std::size_t i = 1; i <= r.size(); ++i) {
        double ri = r[i - 1];
        row[0] += std::fabs(ri - servers[i - 1]);
        for (std::size_t d = 1; d <= k; ++d) {
            double take = row[d] + std::fabs(ri - servers[i + d - 1]);
            row[d] = std::min(row[d - 1], take);
        }
    }
    return row[k];
}

Assignment opt_dp(std::span<const Location> servers, std::span<const Location> requests) {
    if (requests.size() > servers.size()) throw LinematchError("more requests than servers");
    check_sorted(servers);
    auto order = sorted_order(requests);
    std::size_t nr = requests.size(), k = servers.size() - nr, w = k + 1;
    std::vector<double> row(w, 0.0);
    std::vector<std::uint8_t> skip(nr * w, 0);
    for (std::size_t i = 1; i <= nr; ++i) {
        double ri = requests[order[i - 1]];
        row[0] += std::fabs(ri - servers[i - 1]);
        for (std::size_t d = 1; d <= k; ++d) {
            double take = row[d] + std::fabs(ri - servers[i + d - 1]);
            if (row[d - 1] <= take) {
                row[d] = row[d - 1];
                skip[(i - 1) * w + d] = 1;
            } else {
                row[d] = take;
            }
        }
    }
    Assignment a;
    a.cost = row[k];
    a.pairs.reserve(nr);
    std::size_t i = nr, d = k;
    while (i > 0) {
        if (d > 0 && skip[(i - 1) * w + d]) {
            --d;
        } else {
            a.pairs.emplace_back(order[i - 1], i + d - 1);
            --i;
        }
    }
    std::reverse(a.pairs.begin(), a.pairs.end());
    return a;
}

double opt_bruteforce(std::span<const Location> servers, std::span<const Location> requests) {
    if (requests.size() > kBruteforceCap) throw LinematchError("brute force capped at 8 requests");
    if (requests.size() > servers.size()) throw LinematchError("more requests than servers");
    if (servers.size() > 16) throw LinematchError("brute force capped at 16 servers");
    std::vector<char> used(servers.size(), 0);
    double best = std::numeric_limits<double>::infinity();
    auto dfs = [&](auto&& self, std::size_t i, double acc) -> void {
        if (i == requests.size()) {
            best = std::min(best, acc);
            return;
        }
        for (std::size_t j = 0; j < servers.size(); ++j) {
            if (used[j]) continue;
            used[j] = 1;
            self(self, i + 1, acc + std::fabs(requests[i] - servers[j]));
            used[j] = 0;
        }
    };
    dfs(dfs, 0, 0.0);
    return requests.empty() ? 0.0 : best;
}

Assignment opt_rank_match(std::span<const Location> servers, std::span<const Location> requests) {
    if (servers.size() != requests.size()) throw LinematchError("rank matching needs a balanced instance");
    auto ro = sorted_order(requests);
    auto so = sorted_order(servers);
    Assignment a;
    for (std::size_t i = 0; i < ro.size(); ++i) {
        a.pairs.emplace_back(ro[i], so[i]);
        a.cost += std::fabs(requests[ro[i]] - servers[so[i]]);
    }
    return a;
}

double assignment_cost(const Assignment& a, std::span<const Location> servers, std::span<const Location> requests) {
    std::vector<char> used(servers.size(), 0), covered(requests.size(), 0);
    double c = 0;
    for (auto [ri, si] : a.pairs) {
        if (ri >= requests.size() || si >= servers.size()) throw LinematchError("assignment index out of range");
        if (used[si]++) throw LinematchError("server used twice");
        if (covered[ri]++) throw LinematchError("request matched twice");
        c += std::fabs(requests[ri] - servers[si]);
    }
    if (a.pairs.size() != requests.size()) throw LinematchError("assignment does not cover all requests");
    return c;
}

}  // namespace linematch
