#include "linematch/core.hpp"

#include <algorithm>

namespace linematch {

bool valid_location(Location x) noexcept { return x >= 0.0 && x <= 1.0; }

void validate_instance(const Instance& inst) {
    for (std::size_t i = 0; i < inst.servers.size(); ++i) {
        Location s = inst.servers[i];
        if (!valid_location(s)) throw LinematchError("server " + std::to_string(i) + " outside [0,1]");
        if (i > 0) {
            Location p = inst.servers[i - 1];
            if (s < p) throw LinematchError("servers not sorted at index " + std::to_string(i));
            if (s == p && s > 0) throw LinematchError("duplicate positive server at index " + std::to_string(i));
        }
    }
    for (std::size_t i = 0; i < inst.requests.size(); ++i)
        if (!valid_location(inst.requests[i]))
            throw LinematchError("request " + std::to_string(i) + " outside [0,1]");
    if (inst.requests.size() > inst.servers.size()) throw LinematchError("more requests than servers");
}

ServerPool ServerPool::from_sorted(std::span<const Location> sorted) {
    ServerPool p;
    auto uni = std::make_shared<std::vector<Location>>();
    uni->reserve(sorted.size());
    Location prev = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        Location s = sorted[i];
        if (!valid_location(s)) throw LinematchError("server outside [0,1]");
        if (i > 0 && s < prev) throw LinematchError("servers not sorted");
        if (s == 0) {
            ++p.zero_count_;
        } else {
            if (!uni->empty() && uni->back() == s) throw LinematchError("duplicate positive server");
            uni->push_back(s);
        }
        prev = s;
    }
    std::size_t u = uni->size();
    p.alive_.assign(u, 1);
    p.tree_.assign(u + 1, 0);
    for (std::size_t i = 1; i <= u; ++i) {
        p.tree_[i] += 1;
        std::size_t j = i + (i & (~i + 1));
        if (j <= u) p.tree_[j] += p.tree_[i];
    }
    p.positive_count_ = u;
    p.top_bit_ = 1;
    while (p.top_bit_ * 2 <= u) p.top_bit_ *= 2;
    p.universe_ = std::move(uni);
    return p;
}

std::size_t ServerPool::prefix(std::size_t count) const noexcept {
    std::size_t s = 0;
    for (std::size_t i = count; i > 0; i -= i & (~i + 1)) s += static_cast<std::size_t>(tree_[i]);
    return s;
}

std::size_t ServerPool::kth(std::size_t k) const noexcept {
    std::size_t pos = 0;
    std::size_t u = alive_.size();
    for (std::size_t step = top_bit_; step > 0; step >>= 1) {
        std::size_t nxt = pos + step;
        if (nxt <= u && static_cast<std::size_t>(tree_[nxt]) < k) {
            pos = nxt;
            k -= static_cast<std::size_t>(tree_[nxt]);
        }
    }
    return pos;  // 0-based index of the k-th alive slot
}

void ServerPool::fenwick_add(std::size_t idx, int delta) noexcept {
    for (std::size_t i = idx + 1; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
}

std::optional<std::size_t> ServerPool::index_of(Location s) const {
    if (!universe_) return std::nullopt;
    auto it = std::lower_bound(universe_->begin(), universe_->end(), s);
    if (it == universe_->end() || *it != s) return std::nullopt;
    return static_cast<std::size_t>(it - universe_->begin());
}

std::size_t ServerPool::alive_le(Location x) const {
    if (!universe_) return 0;
    auto it = std::upper_bound(universe_->begin(), universe_->end(), x);
    return prefix(static_cast<std::size_t>(it - universe_->begin()));
}

std::size_t ServerPool::alive_lt(Location x) const {
    if (!universe_) return 0;
    auto it = std::lower_bound(universe_->begin(), universe_->end(), x);
    return prefix(static_cast<std::size_t>(it - universe_->begin()));
}

bool ServerPool::contains(Location s) const {
    if (s == 0) return zero_count_ > 0;
    auto idx = index_of(s);
    return idx && alive_[*idx];
}

Neighbors ServerPool::nearest(Location r) const {
    if (empty()) throw LinematchError("no free servers");
    Neighbors nb;
    std::size_t k = alive_le(r);
    if (k > 0)
        nb.left = (*universe_)[kth(k)];
    else if (zero_count_ > 0 && r >= 0)
        nb.left = 0.0;
    if (r <= 0 && zero_count_ > 0) {
        nb.right = 0.0;
    } else {
        std::size_t below = alive_lt(r);
        if (below < positive_count_) nb.right = (*universe_)[kth(below + 1)];
    }
    return nb;
}

Location ServerPool::greedy(Location r) const {
    Neighbors nb = nearest(r);
    if (!nb.left) return *nb.right;
    if (!nb.right) return *nb.left;
    return (r - *nb.left <= *nb.right - r) ? *nb.left : *nb.right;
}

void ServerPool::remove(Location s) {
    if (s == 0) {
        if (zero_count_ == 0) throw LinematchError("server not available");
        --zero_count_;
        return;
    }
    auto idx = index_of(s);
    if (!idx || !alive_[*idx]) throw LinematchError("server not available");
    alive_[*idx] = 0;
    fenwick_add(*idx, -1);
    --positive_count_;
}

void ServerPool::restore(Location s) {
    if (s == 0) {
        ++zero_count_;
        return;
    }
    auto idx = index_of(s);
    if (!idx) throw LinematchError("location not in server universe");
    if (alive_[*idx]) throw LinematchError("server already free");
    alive_[*idx] = 1;
    fenwick_add(*idx, +1);
    ++positive_count_;
}

std::optional<Location> ServerPool::min_positive() const {
    if (positive_count_ == 0) return std::nullopt;
    return (*universe_)[kth(1)];
}

std::optional<Location> ServerPool::next_positive_after(Location x) const {
    std::size_t k = alive_le(x);
    if (k >= positive_count_) return std::nullopt;
    return (*universe_)[kth(k + 1)];
}

std::optional<Location> ServerPool::prev_before(Location x) const {
    std::size_t k = alive_lt(x);
    if (k > 0) return (*universe_)[kth(k)];
    if (zero_count_ > 0 && x > 0) return 0.0;
    return std::nullopt;
}

std::size_t ServerPool::count_positive_in(Location lo, Location hi) const {
    if (!(hi > lo)) return 0;
    return alive_le(hi) - alive_le(lo);
}

std::size_t ServerPool::count_open(Location lo, Location hi) const {
    if (!(hi > lo)) return 0;
    std::size_t lt = alive_lt(hi), le = alive_le(lo);
    std::size_t c = lt > le ? lt - le : 0;
    if (lo < 0 && hi > 0) c += zero_count_;
    return c;
}

std::vector<Location> ServerPool::to_vector() const {
    std::vector<Location> out(zero_count_, 0.0);
    out.reserve(size());
    for (std::size_t i = 0; i < alive_.size(); ++i)
        if (alive_[i]) out.push_back((*universe_)[i]);
    return out;
}

bool operator==(const ServerPool& a, const ServerPool& b) {
    if (a.zero_count_ != b.zero_count_ || a.positive_count_ != b.positive_count_) return false;
    if (a.universe_ == b.universe_) return a.alive_ == b.alive_;
    return a.to_vector() == b.to_vector();
}

Neighbors nearest_free(const ServerPool& pool, Location r) { return pool.nearest(r); }
Location greedy_choice(const ServerPool& pool, Location r) { return pool.greedy(r); }
void remove_server(ServerPool& pool, Location s) { pool.remove(s); }

std::string to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::greedy: return "greedy";
        case PolicyKind::hierarchical_greedy: return "hgreedy";
        case PolicyKind::threshold_zero: return "threshold";
    }
    return "?";
}

PolicyKind parse_policy(const std::string& name) {
    if (name == "greedy") return PolicyKind::greedy;
    if (name == "hgreedy") return PolicyKind::hierarchical_greedy;
    if (name == "threshold") return PolicyKind::threshold_zero;
    throw LinematchError("unknown algo '" + name + "'");
}

}  // namespace linematch
