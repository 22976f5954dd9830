#include "linematch/stats.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "linematch/core.hpp"

namespace linematch {

Estimate binomial_estimate(std::size_t hits, std::size_t trials) {
    if (trials == 0) throw LinematchError("trials must be > 0");
    Estimate e;
    e.hits = hits;
    e.trials = trials;
    e.p = static_cast<double>(hits) / static_cast<double>(trials);
    e.stderr_ = std::sqrt(e.p * (1.0 - e.p) / static_cast<double>(trials));
    return e;
}

MeanSe mean_se(const std::vector<double>& v) {
    MeanSe r;
    r.count = v.size();
    if (v.empty()) return r;
    double s = 0;
    for (double x : v) s += x;
    r.mean = s / static_cast<double>(v.size());
    if (v.size() > 1) {
        double q = 0;
        for (double x : v) q += (x - r.mean) * (x - r.mean);
        r.sd = std::sqrt(q / static_cast<double>(v.size() - 1));
        r.se = r.sd / std::sqrt(static_cast<double>(v.size()));
    }
    return r;
}

Fit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw LinematchError("fit needs at least 2 paired points");
    double k = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= k;
    my /= k;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0)) throw LinematchError("degenerate x values");
    Fit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

Fit regression_loglog(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw LinematchError("regression needs at least 3 points");
    std::vector<double> x, y;
    for (auto [a, b] : points) {
        if (!(a > 0) || !(b > 0)) throw LinematchError("regression needs positive coordinates");
        x.push_back(std::log(a));
        y.push_back(std::log(b));
    }
    return linear_fit(x, y);
}

std::vector<double> isotonic_increasing(const std::vector<double>& y, const std::vector<double>& w) {
    if (y.size() != w.size()) throw LinematchError("isotonic: size mismatch");
    struct Block {
        double sum, weight;
        std::size_t len;
    };
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < y.size(); ++i) {
        blocks.push_back({y[i] * w[i], w[i], 1});
        while (blocks.size() > 1) {
            Block& b = blocks.back();
            Block& a = blocks[blocks.size() - 2];
            if (a.sum / a.weight <= b.sum / b.weight) break;
            a.sum += b.sum;
            a.weight += b.weight;
            a.len += b.len;
            blocks.pop_back();
        }
    }
    std::vector<double> out;
    out.reserve(y.size());
    for (const Block& b : blocks)
        for (std::size_t j = 0; j < b.len; ++j) out.push_back(b.sum / b.weight);
    return out;
}

std::size_t worker_count() {
    if (const char* env = std::getenv("LINEMATCH_THREADS")) {
        try {
            long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (...) {
        }
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

}  // namespace linematch
