#include "linematch/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "linematch/instances.hpp"

namespace linematch {

GridCounter::GridCounter(std::span<const Location> requests, std::span<const Location> servers)
    : n_(requests.size()), servers_(servers.begin(), servers.end()) {
    std::sort(servers_.begin(), servers_.end());
    while (size_ < n_) size_ <<= 1;
    tree_.assign(2 * size_, {});
    for (std::size_t i = 0; i < n_; ++i) tree_[size_ + i] = {requests[i]};
    for (std::size_t node = size_ - 1; node >= 1; --node) {
        const auto& a = tree_[2 * node];
        const auto& b = tree_[2 * node + 1];
        tree_[node].resize(a.size() + b.size());
        std::merge(a.begin(), a.end(), b.begin(), b.end(), tree_[node].begin());
    }
}

template <class Pred>
std::size_t GridCounter::query(std::size_t, std::size_t, std::size_t, std::size_t l, std::size_t r, Pred&& p) const {
    std::size_t c = 0;
    for (l += size_, r += size_; l < r; l >>= 1, r >>= 1) {
        if (l & 1) c += p(tree_[l++]);
        if (r & 1) c += p(tree_[--r]);
    }
    return c;
}

std::size_t GridCounter::requests_closed(Location lo, Location hi, std::size_t t, std::size_t t2) const {
    t2 = std::min(t2, n_);
    if (t >= t2 || hi < lo) return 0;
    return query(1, 0, size_, t, t2, [&](const std::vector<Location>& v) {
        return static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), hi) - std::lower_bound(v.begin(), v.end(), lo));
    });
}

std::size_t GridCounter::requests_open(Location lo, Location hi, std::size_t t, std::size_t t2) const {
    t2 = std::min(t2, n_);
    if (t >= t2 || !(hi > lo)) return 0;
    return query(1, 0, size_, t, t2, [&](const std::vector<Location>& v) {
        auto a = std::upper_bound(v.begin(), v.end(), lo);
        auto b = std::lower_bound(v.begin(), v.end(), hi);
        return b > a ? static_cast<std::size_t>(b - a) : std::size_t{0};
    });
}

std::size_t GridCounter::servers_open(Location lo, Location hi) const {
    if (!(hi > lo)) return 0;
    auto a = std::upper_bound(servers_.begin(), servers_.end(), lo);
    auto b = std::lower_bound(servers_.begin(), servers_.end(), hi);
    return b > a ? static_cast<std::size_t>(b - a) : 0;
}

std::pair<std::size_t, std::size_t> interval_counts(const GridCounter& c, Location l, Location m, std::size_t t,
                                                    std::size_t t2) {
    return {c.requests_open(l, m, t, t2), c.servers_open(l, m)};
}

std::string RegularityWitness::describe() const {
    std::ostringstream os;
    os.precision(10);
    os << "condition " << condition << " fails on [" << d << ", " << d2 << "] x (" << t << ", " << t2 << "]: count "
       << count << ", expected " << expected << ", slack " << slack;
    return os.str();
}

std::optional<RegularityWitness> check_rectangle(std::size_t count, double d, double d2, std::size_t t, std::size_t t2,
                                                 std::size_t n, double log_base) {
    double a = (d2 - d) * static_cast<double>(t2 - t);
    double L = n > 1 ? std::log(static_cast<double>(n)) / std::log(log_base) : 0.0;
    double slack = L * L * std::sqrt(std::max(a, 0.0));
    double c = static_cast<double>(count);
    RegularityWitness w{d, d2, t, t2, count, a, slack, 0};
    if (c < a - slack) {
        w.condition = 1;
        return w;
    }
    if (a >= 1.0 && c > a + slack) {
        w.condition = 2;
        return w;
    }
    return std::nullopt;
}

std::vector<std::pair<std::size_t, std::size_t>> targeted_intervals(std::size_t n, double eps_hat) {
    Constants k = constants_for(eps_hat);
    double nd = static_cast<double>(n);
    double y0 = base_threshold(n);
    auto imax = static_cast<std::size_t>(std::floor(k.d1 * std::log(nd)));
    std::vector<double> ys;
    for (std::size_t i = 0; i <= std::max<std::size_t>(imax, 2); ++i) ys.push_back(std::pow(1.5, static_cast<double>(i)) * y0);
    auto yv = [&](long i) { return i < 0 ? 0.0 : std::min(1.0, ys[static_cast<std::size_t>(i)]); };
    std::set<std::pair<std::size_t, std::size_t>> out;
    auto add = [&](double a, double b) {
        auto fl = [&](double x) { return static_cast<std::size_t>(std::clamp(std::floor(x * nd), 0.0, nd)); };
        auto ce = [&](double x) { return static_cast<std::size_t>(std::clamp(std::ceil(x * nd), 0.0, nd)); };
        std::size_t pl = fl(a), pr = ce(b), ml = ce(a), mr = fl(b);
        if (pl < pr) out.insert({pl, pr});
        if (ml < mr) out.insert({ml, mr});
    };
    for (std::size_t i = 0; i <= imax; ++i) {
        add(yv(static_cast<long>(i) - 1), yv(static_cast<long>(i)));
        if (i >= 1) add(0.75 * yv(static_cast<long>(i) - 1), yv(static_cast<long>(i) - 1));
    }
    add(0.0, yv(2));
    return {out.begin(), out.end()};
}

namespace {

void scan_interval(std::span<const Location> req, std::size_t i, std::size_t j, const std::vector<std::size_t>& times,
                   double log_base, RegularityReport& rep) {
    std::size_t n = req.size();
    double nd = static_cast<double>(n);
    double lo = static_cast<double>(i) / nd, hi = static_cast<double>(j) / nd;
    std::vector<std::size_t> prefix(n + 1, 0);
    for (std::size_t t = 0; t < n; ++t) prefix[t + 1] = prefix[t] + (req[t] >= lo && req[t] <= hi ? 1 : 0);
    for (std::size_t a = 0; a < times.size(); ++a)
        for (std::size_t b = a + 1; b < times.size(); ++b) {
            std::size_t t = times[a], t2 = times[b];
            ++rep.rectangles;
            auto w = check_rectangle(prefix[t2] - prefix[t], lo, hi, t, t2, n, log_base);
            if (w) {
                ++rep.violations;
                rep.regular = false;
                if (!rep.first) rep.first = w;
            }
        }
}

}  // namespace

RegularityReport check_regular(std::span<const Location> requests, bool targeted, const RegularityOptions& opt) {
    RegularityReport rep;
    std::size_t n = requests.size();
    if (n == 0) return rep;
    if (!targeted) {
        if (n > 200) throw LinematchError("full regularity check is limited to n <= 200");
        std::vector<std::size_t> times(n + 1);
        for (std::size_t t = 0; t <= n; ++t) times[t] = t;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t j = i + 1; j <= n; ++j) scan_interval(requests, i, j, times, opt.log_base, rep);
        return rep;
    }
    Constants k = constants_for(opt.eps_hat);
    double nd = static_cast<double>(n);
    std::set<std::size_t> ts = {0, n};
    ts.insert(static_cast<std::size_t>(std::floor(k.c1 * nd)));
    auto tail = static_cast<std::size_t>(std::ceil(std::pow(nd, k.c3)));
    ts.insert(tail < n ? n - tail : 0);
    for (std::size_t t : opt.extra_times)
        if (t <= n) ts.insert(t);
    std::vector<std::size_t> times(ts.begin(), ts.end());
    for (auto [i, j] : targeted_intervals(n, opt.eps_hat)) scan_interval(requests, i, j, times, opt.log_base, rep);
    return rep;
}

}  // namespace linematch
