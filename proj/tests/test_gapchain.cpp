#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "linematch/gapchain.hpp"
#include "linematch/instances.hpp"
#include "linematch/rng.hpp"

using namespace linematch;

namespace {

Location naive_greedy(const std::vector<Location>& v, Location r) {
    Location best = v.front();
    for (Location x : v) {
        double d = std::fabs(r - x), db = std::fabs(r - best);
        if (d < db || (d == db && x < best)) best = x;
    }
    return best;
}

void erase_one(std::vector<Location>& v, Location x) { v.erase(std::find(v.begin(), v.end(), x)); }

ChainState example_state() { return make_chain_state(0.2, std::vector<Location>{0, 0, 0.2, 0.3, 0.8}); }

}  // namespace

TEST_CASE("table examples") {
    {
        auto s = example_state();
        CHECK(classify_case(s, 0.2) == 3);
        auto st = step_chain(s, 0.2);
        CHECK(st.s == 0.2);
        CHECK(s.gamma == 0.3);
        CHECK(s.T.to_vector() == std::vector<Location>{0, 0, 0.3, 0.8});
    }
    {
        auto s = example_state();
        CHECK(classify_case(s, 0.05) == 1);
        step_chain(s, 0.05);
        CHECK(s.gamma == 0.2);
        CHECK(s.T.to_vector() == std::vector<Location>{0, 0.2, 0.3, 0.8});
    }
    {
        auto s = example_state();
        CHECK(classify_case(s, 0.12) == 2);
        auto st = step_chain(s, 0.12);
        CHECK(st.merged);
        CHECK(s.gamma == 0.0);
        CHECK(s.T.to_vector() == std::vector<Location>{0, 0, 0.3, 0.8});
    }
    {
        auto s = example_state();
        CHECK(classify_case(s, 0.27) == 4);
        CHECK(classify_case(s, 0.9) == 5);
    }
    CHECK_THROWS_AS(make_chain_state(0.3, std::vector<Location>{0, 0.2, 0.3}), LinematchError);
}

TEST_CASE("dead gap stays dead") {
    auto s = make_chain_state(0.0, std::vector<Location>{0, 0.1, 0.4, 0.6});
    CHECK(classify_case(s, 0.3) == 0);
    CHECK(s.stops.tau_death == 0u);
    Rng rng(1);
    while (!s.T.empty()) {
        auto st = step_chain(s, rng.uniform());
        CHECK(s.gamma == 0.0);
        CHECK(st.dcost == 0.0);
    }
}

TEST_CASE("chain equals two explicit greedy runs") {
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        Rng rng(seed);
        std::size_t z = rng.between(0, 6), k = rng.between(2, 30);
        std::vector<Location> T(z, 0.0);
        for (std::size_t i = 0; i < k; ++i) T.push_back(rng.uniform());
        nudge_duplicates(T);
        double g = *std::find_if(T.begin(), T.end(), [](double x) { return x > 0; });
        std::vector<Location> A = T, B = T;
        erase_one(B, g);
        B.insert(B.begin(), 0.0);
        auto s = make_chain_state(g, T);
        while (!A.empty()) {
            double r = rng.uniform();
            double gamma_before = s.gamma;
            bool had_zero = s.T.zero_count() > 0;
            auto st = step_chain(s, r);
            Location a = naive_greedy(A, r), b = naive_greedy(B, r);
            REQUIRE(st.s == a);
            REQUIRE(st.s_prime == b);
            REQUIRE(st.dcost == std::fabs(r - b) - std::fabs(r - a));
            erase_one(A, a);
            erase_one(B, b);
            std::vector<Location> sa = A, sb = B;
            std::sort(sa.begin(), sa.end());
            std::sort(sb.begin(), sb.end());
            REQUIRE(s.T.to_vector() == sa);
            if (sa == sb) {
                REQUIRE(s.gamma == 0.0);
            } else {
                REQUIRE(s.gamma > 0.0);
                auto exp = sa;
                erase_one(exp, s.gamma);
                exp.insert(exp.begin(), 0.0);
                REQUIRE(exp == sb);
            }
            if (had_zero) CHECK(st.dcost >= 0.0);
            if (s.gamma != gamma_before && s.gamma != 0) CHECK(s.gamma > gamma_before);
            if (gamma_before == 0) CHECK(s.gamma == 0.0);
        }
    }
}

TEST_CASE("removal of the gap server") {
    Rng rng(4);
    std::vector<Location> T{0, 0, 0};
    for (int i = 0; i < 40; ++i) T.push_back(rng.uniform());
    nudge_duplicates(T);
    auto s = make_chain_state(T[3], T);
    for (int i = 0; i < 30 && !s.T.empty(); ++i) {
        auto before = s.T;
        double g = s.gamma;
        step_chain(s, rng.uniform());
        if (s.gamma != g) {
            before.remove(g);
            CHECK(before == s.T);
        }
    }
}

TEST_CASE("trajectories are reproducible") {
    std::vector<Location> T{0, 0, 0, 0.1, 0.15, 0.3, 0.35, 0.6, 0.9};
    auto init = make_chain_state(0.1, T, 0.4);
    auto a = run_chain(init, 0, 77, true), b = run_chain(init, 0, 77, true);
    CHECK(a.gamma == b.gamma);
    CHECK(a.removed == b.removed);
    CHECK(a.steps == T.size());
}

TEST_CASE("stopping times") {
    auto s = make_chain_state(0.1, std::vector<Location>{0, 0.1, 0.15, 0.5}, 0.2);
    CHECK_FALSE(s.stops.tau_zero.has_value());
    CHECK_FALSE(s.stops.tau_w.has_value());
    step_chain(s, 0.0);  // removes 0
    CHECK(s.stops.tau_zero == 1u);
    auto w = make_chain_state(0.1, std::vector<Location>{0, 0.1, 0.25}, 1.0);
    CHECK(w.stops.tau_w == 0u);
}

TEST_CASE("front death estimator edge cases") {
    std::vector<Location> T{0, 0, 0, 0.1, 0.5, 0.6};
    CHECK(estimate_front_death(0.1, T, 0.4, 500, 1).p == 1.0);
    auto z = estimate_front_death(0.0, std::vector<Location>{0, 0.5}, 0.4, 100, 1);
    CHECK(z.p >= 0.0);
    CHECK(z.p <= 1.0);
    std::vector<Location> U{0, 0, 0, 0, 0.05};
    Rng rng(2);
    for (int i = 0; i < 300; ++i) U.push_back(0.05 + 0.95 * rng.uniform());
    nudge_duplicates(U);
    auto e = estimate_front_death(0.05, U, 0.2, 2000, 3);
    CHECK(e.p >= 0.05 / 0.2 - 3 * e.stderr_);
}
