#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace linematch {

struct Estimate {
    double p = 0;
    double stderr_ = 0;
    std::size_t hits = 0;
    std::size_t trials = 0;
};

Estimate binomial_estimate(std::size_t hits, std::size_t trials);

struct MeanSe {
    double mean = 0;
    double se = 0;  // sample sd / sqrt(k)
    double sd = 0;
    std::size_t count = 0;
};

MeanSe mean_se(const std::vector<double>& v);

struct Fit {
    double slope = 0, intercept = 0, r2 = 0;
};

Fit linear_fit(const std::vector<double>& x, const std::vector<double>& y);
// least squares on (ln x, ln y)
Fit regression_loglog(const std::vector<std::pair<double, double>>& points);

// weighted pool-adjacent-violators, nondecreasing fit
std::vector<double> isotonic_increasing(const std::vector<double>& y, const std::vector<double>& w);

// LINEMATCH_THREADS if set and positive, else hardware concurrency
std::size_t worker_count();

// f(i) for i in [0, count); results must be written to per-index slots
template <class F>
void parallel_for(std::size_t count, F&& f, std::size_t workers = 0) {
    if (workers == 0) workers = worker_count();
    if (workers > count) workers = count;
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto body = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace linematch
