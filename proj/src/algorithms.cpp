#include "linematch/algorithms.hpp"

#include <cmath>

#include "linematch/instances.hpp"

namespace linematch {

LevelTree::LevelTree(const ServerPool& pool, std::size_t n_requests) {
    ell0_ = 0;
    while ((std::size_t{1} << ell0_) < n_requests) ++ell0_;
    leaves_ = std::size_t{1} << ell0_;
    counts_.assign(2 * leaves_, 0);
    for (Location s : pool.to_vector()) add(s);
}

std::size_t LevelTree::leaf_of(Location x) const noexcept {
    double k = std::ceil(x * static_cast<double>(leaves_)) - 1.0;
    if (k < 0) return 0;
    auto i = static_cast<std::size_t>(k);
    return i >= leaves_ ? leaves_ - 1 : i;
}

void LevelTree::add(Location s) {
    for (std::size_t node = leaves_ + leaf_of(s); node >= 1; node >>= 1) ++counts_[node];
}

void LevelTree::remove(Location s) {
    std::size_t leaf = leaves_ + leaf_of(s);
    if (counts_[leaf] == 0) throw LinematchError("level tree underflow");
    for (std::size_t node = leaf; node >= 1; node >>= 1) --counts_[node];
}

std::size_t LevelTree::lowest_nonempty(Location r) const noexcept {
    std::size_t node = leaves_ + leaf_of(r);
    while (node >= 1 && counts_[node] == 0) node >>= 1;
    return node;
}

unsigned LevelTree::level_of_node(std::size_t node) const noexcept {
    unsigned depth = 0;
    while (node > 1) {
        node >>= 1;
        ++depth;
    }
    return ell0_ - depth;
}

std::pair<std::size_t, std::size_t> LevelTree::leaf_range(std::size_t node) const noexcept {
    unsigned lvl = level_of_node(node);
    std::size_t first = (node << lvl) - leaves_;
    return {first, first + (std::size_t{1} << lvl) - 1};
}

double LevelTree::interval_length(std::size_t node) const noexcept {
    return std::ldexp(1.0, static_cast<int>(level_of_node(node)) - static_cast<int>(ell0_));
}

bool LevelTree::consistent_with(const ServerPool& pool) const {
    std::vector<std::uint32_t> leaf(leaves_, 0);
    for (Location s : pool.to_vector()) ++leaf[leaf_of(s)];
    for (std::size_t i = 0; i < leaves_; ++i)
        if (counts_[leaves_ + i] != leaf[i]) return false;
    for (std::size_t node = leaves_ - 1; node >= 1; --node)
        if (counts_[node] != counts_[2 * node] + counts_[2 * node + 1]) return false;
    return true;
}

Location hierarchical_greedy_choice(const LevelTree& tree, const ServerPool& pool, Location r) {
    if (pool.empty()) throw LinematchError("no free servers");
    std::size_t node = tree.lowest_nonempty(r);
    if (node == 0) throw LinematchError("level tree out of sync with pool");
    auto [lo, hi] = tree.leaf_range(node);
    auto inside = [&](const std::optional<Location>& s) {
        if (!s) return false;
        std::size_t l = tree.leaf_of(*s);
        return l >= lo && l <= hi;
    };
    Neighbors nb = pool.nearest(r);
    bool li = inside(nb.left), ri = inside(nb.right);
    if (li && ri) return (r - *nb.left <= *nb.right - r) ? *nb.left : *nb.right;
    if (li) return *nb.left;
    if (ri) return *nb.right;
    throw LinematchError("no free server inside J(r)");
}

Location hierarchical_greedy_step(LevelTree& tree, ServerPool& pool, Location r) {
    Location s = hierarchical_greedy_choice(tree, pool, r);
    pool.remove(s);
    tree.remove(s);
    return s;
}

unsigned level_of_match(const LevelTree& tree, Location r) {
    std::size_t node = tree.lowest_nonempty(r);
    if (node == 0) throw LinematchError("no free servers");
    return tree.level_of_node(node);
}

Location threshold_zero_step(const ServerPool& pool, Location r, Location y0) {
    if (pool.empty()) throw LinematchError("no free servers");
    if (r <= y0 && pool.zero_count() > 0) return 0.0;
    return pool.greedy(r);
}

OnlinePolicy::OnlinePolicy(const PolicySpec& spec, const ServerPool& initial, std::size_t n_requests)
    : spec_(spec) {
    y0_ = spec.y0 ? *spec.y0 : base_threshold(std::max<std::size_t>(n_requests, 1));
    if (spec.kind == PolicyKind::hierarchical_greedy) tree_ = LevelTree(initial, n_requests);
}

Location OnlinePolicy::choose(const ServerPool& pool, Location r, std::size_t t) const {
    if (!base_active(t)) return pool.greedy(r);
    switch (spec_.kind) {
        case PolicyKind::greedy: return pool.greedy(r);
        case PolicyKind::hierarchical_greedy: return hierarchical_greedy_choice(tree_, pool, r);
        case PolicyKind::threshold_zero: return threshold_zero_step(pool, r, y0_);
    }
    throw LinematchError("bad policy");
}

void OnlinePolicy::consumed(Location s, std::size_t t) {
    if (spec_.kind == PolicyKind::hierarchical_greedy && base_active(t + 1)) tree_.remove(s);
}

bool is_neighbor_choice(const ServerPool& pool, Location r, Location s) {
    Neighbors nb = pool.nearest(r);
    return (nb.left && *nb.left == s) || (nb.right && *nb.right == s);
}

bool check_neighboring(const MatchTrace& trace, const Instance& instance) {
    if (trace.steps.size() != instance.requests.size()) throw LinematchError("trace length does not match instance");
    ServerPool pool = ServerPool::from_sorted(instance.servers);
    bool ok = true;
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const MatchStep& st = trace.steps[i];
        if (st.request != instance.requests[i]) throw LinematchError("trace request mismatch at step " + std::to_string(i + 1));
        if (!pool.contains(st.server)) throw LinematchError("trace uses unavailable server at step " + std::to_string(i + 1));
        if (!is_neighbor_choice(pool, st.request, st.server)) ok = false;
        pool.remove(st.server);
    }
    return ok;
}

MatchTrace run_policy(const Instance& inst, const PolicySpec& policy, std::uint64_t /*rng_seed*/) {
    if (inst.requests.size() > inst.servers.size()) throw LinematchError("more requests than servers");
    ServerPool pool = ServerPool::from_sorted(inst.servers);
    OnlinePolicy pol(policy, pool, inst.n());
    MatchTrace tr;
    tr.steps.reserve(inst.n());
    for (std::size_t i = 0; i < inst.n(); ++i) {
        Location r = inst.requests[i];
        Location s = pol.choose(pool, r, i + 1);
        if (!pool.contains(s)) throw LinematchError("policy chose a consumed server");
        pool.remove(s);
        pol.consumed(s, i + 1);
        double c = std::fabs(r - s);
        tr.steps.push_back({i + 1, r, s, c});
        tr.total_cost += c;
    }
    return tr;
}

double run_policy_cost(const Instance& inst, const PolicySpec& policy) {
    if (inst.requests.size() > inst.servers.size()) throw LinematchError("more requests than servers");
    ServerPool pool = ServerPool::from_sorted(inst.servers);
    OnlinePolicy pol(policy, pool, inst.n());
    double total = 0;
    for (std::size_t i = 0; i < inst.n(); ++i) {
        Location r = inst.requests[i];
        Location s = pol.choose(pool, r, i + 1);
        pool.remove(s);
        pol.consumed(s, i + 1);
        total += std::fabs(r - s);
    }
    return total;
}

}  // namespace linematch
