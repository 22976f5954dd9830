#include "linematch/gapchain.hpp"

#include <cmath>

#include "linematch/rng.hpp"

namespace linematch {

bool in_state_space(double gamma, const ServerPool& T) {
    if (gamma == 0) return true;
    auto mp = T.min_positive();
    return mp && *mp == gamma;
}

namespace {

void update_stops(ChainState& s) {
    StopFlags& f = s.stops;
    if (!f.tau_zero && s.T.zero_count() == 0) f.tau_zero = s.t;
    if (!f.tau_interval && s.T.count_positive_in(0.0, s.y) == 0) f.tau_interval = s.t;
    if (!f.tau_w) {
        auto s1 = s.T.min_positive();
        std::optional<Location> s2;
        if (s1) s2 = s.T.next_positive_after(*s1);
        if (!s1 || !s2 || (*s2 - *s1 > *s1)) f.tau_w = s.t;
    }
    if (!f.tau_death && s.gamma == 0) f.tau_death = s.t;
}

}  // namespace

ChainState make_chain_state(double gamma, ServerPool T, double y) {
    if (!in_state_space(gamma, T)) throw LinematchError("(gamma, T) is not in the state space");
    ChainState s;
    s.gamma = gamma;
    s.T = std::move(T);
    s.y = y;
    update_stops(s);
    return s;
}

ChainState make_chain_state(double gamma, const std::vector<Location>& servers, double y) {
    return make_chain_state(gamma, ServerPool::from_sorted(servers), y);
}

ChainStep step_chain(ChainState& state, Location r) {
    ChainStep st;
    ServerPool& T = state.T;
    if (T.empty()) {
        ++state.t;
        update_stops(state);
        return st;
    }
    st.moved = true;
    st.s = T.greedy(r);
    if (state.gamma == 0) {
        st.s_prime = st.s;
    } else {
        T.remove(state.gamma);
        T.add_zero();
        st.s_prime = T.greedy(r);
        T.remove(0.0);
        T.restore(state.gamma);
    }
    st.merged = (st.s_prime == st.s && state.gamma == 0) || (st.s_prime == 0 && state.gamma == st.s);
    T.remove(st.s);
    if (st.merged) {
        state.gamma = 0;
    } else {
        auto mp = T.min_positive();
        if (!mp) throw LinematchError("chain left the state space");
        state.gamma = *mp;
    }
    st.dcost = std::fabs(r - st.s_prime) - std::fabs(r - st.s);
    ++state.t;
    update_stops(state);
    return st;
}

CasePrediction predict_case(const ChainState& state, Location r) {
    CasePrediction p;
    const ServerPool& T = state.T;
    double g = state.gamma;
    if (T.zero_count() == 0 || g == 0) return p;
    auto s2o = T.next_positive_after(g);
    if (!s2o) return p;
    double s2 = *s2o, w = s2 - g;
    p.s2 = s2;
    p.gamma_next = g;
    if (r <= g / 2) {
        p.id = 1;
        p.removed = 0.0;
    } else if (r <= (g + w) / 2) {
        p.id = 2;
        p.removed = g;
        p.gamma_next = 0;
    } else if (r <= g + w / 2) {
        p.id = 3;
        p.removed = g;
        p.gamma_next = s2;
    } else if (r <= g + w) {
        p.id = 4;
        p.removed = s2;
    } else {
        p.id = 5;
    }
    return p;
}

int classify_case(const ChainState& state, Location r) { return predict_case(state, r).id; }

bool prediction_holds(const CasePrediction& p, const ChainStep& st, double gamma_after) {
    if (p.id == 0) return true;
    if (!st.moved) return false;
    if (p.removed) {
        if (st.s != *p.removed) return false;
    } else if (st.s < p.s2) {
        return false;
    }
    return gamma_after == p.gamma_next;
}

namespace {

void record(ChainRun& run, const ChainState& s, const ChainStep& st, bool keep) {
    run.sum_dcost += st.dcost;
    run.gamma_max = std::max(run.gamma_max, s.gamma);
    if (keep) {
        run.gamma.push_back(s.gamma);
        run.removed.push_back(st.s);
        run.dcost.push_back(st.dcost);
    }
}

}  // namespace

ChainRun run_chain(ChainState init, std::size_t horizon, std::uint64_t seed, bool keep_path) {
    if (horizon == 0) horizon = init.T.size();
    ChainRun run;
    run.gamma_max = init.gamma;
    if (keep_path) run.gamma.push_back(init.gamma);
    Rng rng(seed);
    for (std::size_t k = 0; k < horizon; ++k) {
        ChainStep st = step_chain(init, rng.uniform());
        record(run, init, st, keep_path);
        ++run.steps;
    }
    run.stops = init.stops;
    return run;
}

ChainRun run_chain_on(ChainState init, std::span<const Location> requests, bool keep_path) {
    ChainRun run;
    run.gamma_max = init.gamma;
    if (keep_path) run.gamma.push_back(init.gamma);
    for (Location r : requests) {
        ChainStep st = step_chain(init, r);
        record(run, init, st, keep_path);
        ++run.steps;
    }
    run.stops = init.stops;
    return run;
}

Estimate estimate_front_death(Location x, const std::vector<Location>& servers, double y, std::size_t trials,
                              std::uint64_t seed) {
    if (trials == 0) throw LinematchError("trials must be > 0");
    if (!(y > x) || y > 1) throw LinematchError("need y in (x, 1]");
    ChainState init = make_chain_state(x, servers, y);
    std::vector<char> hit(trials, 0);
    parallel_for(trials, [&](std::size_t k) {
        ChainState s = init;
        Rng rng(derive_seed(seed, k));
        for (;;) {
            const StopFlags& f = s.stops;
            if (f.tau_zero || f.tau_interval) {
                hit[k] = 1;
                return;
            }
            if (f.tau_death) return;
            step_chain(s, rng.uniform());
        }
    });
    std::size_t h = 0;
    for (char c : hit) h += static_cast<std::size_t>(c);
    return binomial_estimate(h, trials);
}

}  // namespace linematch
