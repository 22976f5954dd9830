#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace linematch {

using Location = double;

bool valid_location(Location x) noexcept;

class LinematchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct InstanceMeta {
    std::string model = "custom";
    std::map<std::string, double> params;
    std::string mode;
    std::uint64_t seed = 0;
};

struct Instance {
    std::vector<Location> servers;   // ascending, duplicates only at 0
    std::vector<Location> requests;  // arrival order
    InstanceMeta meta;

    std::size_t n() const noexcept { return requests.size(); }
};

void validate_instance(const Instance& inst);

struct Neighbors {
    std::optional<Location> left;   // max free server <= r
    std::optional<Location> right;  // min free server >= r
};

// Free servers: a counter at 0 plus the live subset of a fixed sorted universe
// of distinct positive locations (Fenwick tree over alive flags).
class ServerPool {
public:
    ServerPool() = default;

    static ServerPool from_sorted(std::span<const Location> sorted);

    std::size_t size() const noexcept { return zero_count_ + positive_count_; }
    bool empty() const noexcept { return size() == 0; }
    std::size_t zero_count() const noexcept { return zero_count_; }
    std::size_t positive_count() const noexcept { return positive_count_; }

    bool contains(Location s) const;
    Neighbors nearest(Location r) const;
    Location greedy(Location r) const;  // exact ties -> left

    void remove(Location s);
    void add_zero() noexcept { ++zero_count_; }
    void restore(Location s);  // s must belong to the universe

    std::optional<Location> min_positive() const;
    std::optional<Location> next_positive_after(Location x) const;  // strict
    std::optional<Location> prev_before(Location x) const;          // strict, zeros included

    std::size_t count_positive_in(Location lo, Location hi) const;  // (lo, hi]
    std::size_t count_open(Location lo, Location hi) const;         // (lo, hi), zeros included

    std::vector<Location> to_vector() const;

    friend bool operator==(const ServerPool& a, const ServerPool& b);

private:
    std::size_t prefix(std::size_t count) const noexcept;
    std::size_t kth(std::size_t k) const noexcept;  // 1-based k -> universe index
    void fenwick_add(std::size_t idx, int delta) noexcept;
    std::optional<std::size_t> index_of(Location s) const;
    std::size_t alive_le(Location x) const;  // alive positives <= x
    std::size_t alive_lt(Location x) const;

    std::shared_ptr<const std::vector<Location>> universe_;
    std::vector<std::int32_t> tree_;
    std::vector<std::uint8_t> alive_;
    std::size_t zero_count_ = 0;
    std::size_t positive_count_ = 0;
    std::size_t top_bit_ = 0;
};

Neighbors nearest_free(const ServerPool& pool, Location r);
Location greedy_choice(const ServerPool& pool, Location r);
void remove_server(ServerPool& pool, Location s);

struct MatchStep {
    std::size_t t = 0;  // 1-based
    Location request = 0;
    Location server = 0;
    double cost = 0;
};

struct MatchTrace {
    std::vector<MatchStep> steps;
    double total_cost = 0;
};

enum class PolicyKind { greedy, hierarchical_greedy, threshold_zero };

std::string to_string(PolicyKind kind);
PolicyKind parse_policy(const std::string& name);

// With switch_after = m the policy is the hybrid: `kind` for the first m
// requests, greedy afterwards.
struct PolicySpec {
    PolicyKind kind = PolicyKind::greedy;
    std::optional<double> y0;  // threshold; default n^{-1/5}
    std::optional<std::size_t> switch_after;
};

MatchTrace run_policy(const Instance& inst, const PolicySpec& policy, std::uint64_t rng_seed = 0);
double run_policy_cost(const Instance& inst, const PolicySpec& policy);

}  // namespace linematch
