// Acceptance checks; `acceptance N` runs criterion N and prints one line.
#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "linematch/algorithms.hpp"
#include "linematch/experiments.hpp"
#include "linematch/gapchain.hpp"
#include "linematch/hybrid.hpp"
#include "linematch/instances.hpp"
#include "linematch/offline.hpp"
#include "linematch/rng.hpp"
#include "linematch/stats.hpp"

using namespace linematch;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

std::vector<std::size_t> pow2(int lo, int hi) {
    std::vector<std::size_t> v;
    for (int k = lo; k <= hi; ++k) v.push_back(std::size_t{1} << k);
    return v;
}

double spread(const std::vector<double>& v) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi / *lo;
}

// ---- 1 ----
Outcome oracle_equivalence() {
    auto t0 = std::chrono::steady_clock::now();
    std::size_t bad = 0, balanced = 0, unbalanced = 0;
    double worst = 0;
    for (std::size_t k = 0; k < 200; ++k) {
        Rng rng(derive_seed(20240601, k));
        std::size_t nr = rng.between(1, 7);
        std::size_t ns = k % 3 == 0 ? nr : rng.between(nr, 9);
        std::vector<Location> s(ns), r(nr);
        for (auto& x : s) x = rng.uniform() < 0.1 ? 0.0 : rng.uniform();
        for (auto& x : r) x = rng.uniform();
        nudge_duplicates(s);
        double dp = opt_dp_cost(s, r), bf = opt_bruteforce(s, r);
        double diff = std::fabs(dp - bf);
        diff = std::max(diff, std::fabs(opt_dp(s, r).cost - dp));
        if (ns == nr) {
            ++balanced;
            diff = std::max(diff, std::fabs(opt_rank_match(s, r).cost - dp));
        } else {
            ++unbalanced;
        }
        worst = std::max(worst, diff);
        if (diff > 1e-12) ++bad;
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {bad == 0 && secs < 5.0 && balanced > 0 && unbalanced > 0,
            fmt("200 cases (%zu balanced), %zu mismatches, max diff %.3g, %.2f s", balanced, bad, worst, secs)};
}

SweepConfig random_sweep() {
    SweepConfig c;
    c.models = {"random"};
    c.n_list = pow2(10, 17);
    c.algos = {PolicyKind::greedy};
    c.trials = 50;
    c.seed = 101;
    return c;
}

// ---- 2 ----
Outcome opt_scaling() {
    auto rows = scaling_sweep(random_sweep());
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows) pts.push_back({double(r.n), r.mean_opt});
    Fit f = regression_loglog(pts);
    return {f.slope >= 0.45 && f.slope <= 0.55 && f.r2 >= 0.98,
            fmt("slope %.4f, r2 %.5f over n=2^10..2^17", f.slope, f.r2)};
}

// ---- 3 ----
Outcome greedy_constant_ratio() {
    auto rows = scaling_sweep(random_sweep());
    std::vector<double> x, y;
    for (const auto& r : rows) {
        x.push_back(std::log(double(r.n)));
        y.push_back(r.ratio);
    }
    Fit f = linear_fit(x, y);
    bool ok = f.slope >= -0.05 && f.slope <= 0.05 && y.back() <= y.front() + 0.5;
    return {ok, fmt("ratio %.4f at 2^10, %.4f at 2^17, slope vs ln n %.4f", y.front(), y.back(), f.slope)};
}

// ---- 4 ----
Outcome excess_boundedness() {
    auto ns = pow2(12, 17);
    std::size_t trials = 200;
    std::vector<double> total, last;
    for (std::size_t n : ns) {
        std::vector<double> tc(trials), lc(trials);
        parallel_for(trials, [&](std::size_t i) {
            auto inst = gen_excess(n, 0.2, derive_seed(404, i, n));
            auto tr = run_policy(inst, {});
            tc[i] = tr.total_cost;
            lc[i] = tr.steps.back().cost;
        });
        total.push_back(mean_se(tc).mean);
        last.push_back(double(n) * mean_se(lc).mean);
    }
    double a = spread(total), b = spread(last);
    std::string d = fmt("total cost spread %.3f (%.3f..%.3f), n*last spread %.3f (%.3f..%.3f)", a,
                        *std::min_element(total.begin(), total.end()), *std::max_element(total.begin(), total.end()),
                        b, *std::min_element(last.begin(), last.end()), *std::max_element(last.begin(), last.end()));
    return {a < 2.0 && b < 3.0, d};
}

// ---- 5 ----
Outcome semi_random_log_growth() {
    SweepConfig c;
    c.models = {"lower"};
    c.n_list = pow2(12, 18);
    c.algos = {PolicyKind::greedy};
    c.trials = 100;
    c.seed = 505;
    c.mode = LowerBoundMode::demo;
    auto rows = scaling_sweep(c);
    std::vector<double> x, y;
    bool increasing = true;
    std::string seq;
    for (const auto& r : rows) {
        if (r.skipped) return {false, fmt("n=%zu infeasible", r.n)};
        if (!y.empty() && !(r.ratio > y.back())) increasing = false;
        x.push_back(std::log(double(r.n)));
        y.push_back(r.ratio);
        seq += fmt("%s%.4f", seq.empty() ? "" : " ", r.ratio);
    }
    Fit f = linear_fit(x, y);
    return {increasing && f.slope > 0 && f.r2 >= 0.8,
            fmt("ratios [%s], slope vs ln n %.4f, r2 %.4f", seq.c_str(), f.slope, f.r2)};
}

// ---- 6 ----
Outcome structural_hybrid() {
    auto t0 = std::chrono::steady_clock::now();
    const std::size_t runs = 1000;
    std::vector<StructureReport> reps(runs);
    PolicySpec ps;
    ps.kind = PolicyKind::threshold_zero;
    SweepConfig cfg;
    parallel_for(runs, [&](std::size_t k) {
        Rng rng(derive_seed(606, k));
        std::size_t n = rng.between(48, 200);
        Instance inst;
        PolicySpec a = ps;
        if (k % 4 < 2) {
            inst = make_instance("lower", n, cfg, rng.next());
        } else if (k % 4 == 2) {
            // uniform servers, those in (0, y0] moved to 0, random threshold
            inst = gen_fully_random(n, rng.next());
            a.y0 = 0.4 * rng.uniform();
            for (auto& s : inst.servers)
                if (s <= *a.y0) s = 0.0;
            std::sort(inst.servers.begin(), inst.servers.end());
        } else {
            inst = make_instance("random", n, cfg, rng.next());
        }
        double y0 = a.y0.value_or(base_threshold(n));
        std::size_t m = rng.between(1, n);
        if (rng.uniform() < 0.5)
            for (int tries = 0; tries < 1000 && inst.requests[m - 1] > y0; ++tries) m = rng.between(1, n);
        reps[k] = verify_structure(run_hybrid_pair(inst, a, m));
    });
    StructureReport total;
    std::size_t bad_runs = 0;
    std::string first;
    for (std::size_t k = 0; k < runs; ++k) {
        if (!reps[k].pass()) {
            ++bad_runs;
            if (first.empty()) first = fmt(" first: run %zu %s", k, reps[k].first_violation.value_or("cost bound").c_str());
        }
        total.merge(reps[k]);
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    auto rows = [](const std::array<std::size_t, 6>& a, int k) {
        std::string s;
        for (int i = 0; i < k; ++i) s += fmt("%s%zu", i ? "/" : "", a[static_cast<std::size_t>(i)]);
        return s;
    };
    std::string d = fmt("%zu runs, %zu transitions, prop fails %zu/%zu/%zu/%zu, cost-bound fails %zu, rows t2 %s t3 %s "
                        "t4 %s both-absent %zu, boundary %zu, %.1f s%s",
                        runs, total.transitions_checked, total.prop1_fail, total.prop2_fail, total.prop3_fail,
                        total.prop4_fail, bad_runs, rows(total.table2_rows, 6).c_str(), rows(total.table3_rows, 4).c_str(),
                        rows(total.table4_rows, 4).c_str(), total.both_absent, total.boundary_hits, secs, first.c_str());
    return {bad_runs == 0 && total.pass() && secs < 30.0, d};
}

// ---- 7 ----
Outcome gap_chain_fidelity() {
    const std::size_t target = 100000;
    std::size_t applicable = 0, agree = 0, round = 0;
    std::array<std::size_t, 6> by_case{};
    std::vector<double> excess;  // dcost - w/2 on case-3 steps with w <= gamma
    while (applicable < target) {
        Rng rng(derive_seed(707, round++));
        std::size_t z = rng.between(1, 25), k = rng.between(3, 80);
        std::vector<Location> s(z, 0.0);
        for (std::size_t i = 0; i < k; ++i) s.push_back(rng.uniform());
        nudge_duplicates(s);
        ServerPool T = ServerPool::from_sorted(s);
        ChainState st = make_chain_state(*T.min_positive(), T);
        while (!st.T.empty()) {
            double r = rng.uniform();
            CasePrediction p = predict_case(st, r);
            double g = st.gamma;
            ChainStep cs = step_chain(st, r);
            if (p.id == 0) continue;
            ++applicable;
            ++by_case[static_cast<std::size_t>(p.id)];
            if (prediction_holds(p, cs, st.gamma)) ++agree;
            double w = p.s2 - g;
            if (p.id == 3 && w <= g) excess.push_back(cs.dcost - w / 2);
        }
    }
    // one fixed state replayed with r uniform on its case-3 band
    ChainState base = make_chain_state(0.2, std::vector<Location>{0, 0, 0.2, 0.3, 0.8});
    std::vector<double> fixed(target);
    Rng rr(7070);
    for (auto& d : fixed) {
        ChainState s = base;
        double r = 0.15 + 0.1 * rr.uniform();
        d = step_chain(s, r).dcost;
    }
    MeanSe pooled = mean_se(excess), one = mean_se(fixed);
    bool ok = agree == applicable && applicable >= target && pooled.mean >= -3 * pooled.se &&
              one.mean >= 0.05 - 3 * one.se;
    return {ok, fmt("%zu applicable steps (cases %zu/%zu/%zu/%zu/%zu), %zu agree; case 3 with w<=gamma: mean(dcost-w/2) "
                    "%.4g (se %.2g, %zu steps); fixed state mean dcost %.5f vs w/2 0.05 (se %.2g)",
                    applicable, by_case[1], by_case[2], by_case[3], by_case[4], by_case[5], agree, pooled.mean,
                    pooled.se, pooled.count, one.mean, one.se)};
}

// the demo pool at n = 1e4 with its lowest positive servers replaced by x
std::vector<Location> pool_with_front(double x) {
    LowerBoundParams p;
    p.n = 10000;
    auto s = lower_bound_servers(p);
    std::vector<Location> out;
    for (double v : s)
        if (v == 0 || v > x) out.push_back(v);
    out.push_back(x);
    std::sort(out.begin(), out.end());
    return out;
}

// ---- 8 ----
Outcome probability_bounds() {
    bool ok = true;
    std::string d;
    for (double x : {0.1, 0.2})
        for (double y : {0.4, 0.8}) {
            auto S = pool_with_front(x);
            Estimate fd = estimate_front_death(x, S, y, 10000, derive_seed(808, std::size_t(x * 10), std::size_t(y * 10)));
            Estimate wc = estimate_worstcase_bound(x, S, y, 10000, derive_seed(809, std::size_t(x * 10), std::size_t(y * 10)));
            bool a = fd.p >= x / y - 3 * fd.stderr_;
            bool b = wc.p <= x / y + 3 * wc.stderr_;
            ok = ok && a && b;
            d += fmt("(x=%.1f,y=%.1f: death %.4f, worst %.4f, x/y %.3f) ", x, y, fd.p, wc.p, x / y);
        }
    std::vector<Location> S{0, 0, 0, 0.1, 0.5, 0.7, 0.9};
    double base = estimate_front_death(0.1, S, 0.45, 1000, 1).p;
    ok = ok && base == 1.0;
    d += fmt("base case %.1f", base);
    return {ok, d};
}

// ---- 9 ----
Outcome coupling_equality() {
    const std::size_t n = 10000, runs = 100;
    LowerBoundParams p;
    p.n = n;
    double y0 = base_threshold(n);
    auto mmax = static_cast<std::size_t>(constants_for(0.01).c1 * double(n));
    PolicySpec ps;
    ps.kind = PolicyKind::threshold_zero;
    std::vector<std::string> fail(runs);
    std::vector<char> positive(runs, 0);
    parallel_for(runs, [&](std::size_t k) {
        Rng rng(derive_seed(909, k));
        Instance inst = gen_lower_bound(p, rng.next());
        std::size_t m = 0;
        for (int tries = 0; tries < 100000 && m == 0; ++tries) {
            std::size_t c = rng.between(1, mmax);
            if (inst.requests[c - 1] <= y0) m = c;
        }
        if (m == 0) {
            fail[k] = "no switch index with r_m <= y0";
            return;
        }
        HybridOptions opt;
        opt.keep_snapshots = true;
        HybridTrace tr;
        GapSeries g;
        try {
            tr = run_hybrid_pair(inst, ps, m, opt);
            g = gap_series(tr);
        } catch (const std::exception& e) {
            fail[k] = e.what();
            return;
        }
        double dm = g.delta.front();
        positive[k] = dm > 0;
        ServerPool T = *tr.pool_m_at_m;
        ChainState cs = make_chain_state(dm, T);
        ServerPool other = T;
        if (dm > 0) {
            other.remove(dm);
            other.add_zero();
        }
        if (!(other == *tr.pool_m1_at_m)) {
            fail[k] = "S'_m is not S_m - {delta_m} + {0}";
            return;
        }
        std::span<const Location> rest(inst.requests.data() + m, n - m);
        ChainRun run = run_chain_on(cs, rest, true);
        for (std::size_t t = 0; t <= n - m; ++t) {
            if (run.gamma[t] != g.delta[t]) {
                fail[k] = fmt("gap differs at t=m+%zu", t);
                return;
            }
            if (t > 0 && run.removed[t - 1] != tr.steps[m + t - 1].s_m) {
                fail[k] = fmt("server differs at t=m+%zu", t);
                return;
            }
        }
        // replay S and compare the final pool
        ServerPool end = T;
        for (std::size_t t = m + 1; t <= n; ++t) end.remove(tr.steps[t - 1].s_m);
        ChainState replay = cs;
        for (Location r : rest) step_chain(replay, r);
        if (!(end == replay.T)) fail[k] = "final pools differ";
    });
    std::size_t bad = 0, pos = 0;
    std::string first;
    for (std::size_t k = 0; k < runs; ++k) {
        pos += positive[k];
        if (!fail[k].empty()) {
            ++bad;
            if (first.empty()) first = fmt(" first: run %zu %s", k, fail[k].c_str());
        }
    }
    return {bad == 0, fmt("%zu runs at n=%zu (%zu with delta_m > 0), %zu mismatches%s", runs, n, pos, bad, first.c_str())};
}

// ---- 10 ----
Outcome depletion_and_gap() {
    const std::size_t n = 100000, trials = 100;
    LowerBoundParams p;
    p.n = n;
    auto L = make_ladder(n);
    double y0 = base_threshold(n);
    auto m = static_cast<std::size_t>(std::floor(constants_for(0.01).c1 * double(n)));
    PolicySpec a;
    a.kind = PolicyKind::threshold_zero;
    PolicySpec hm = a;
    hm.switch_after = m;
    std::vector<char> order(trials, 0), range(trials, 0);
    std::vector<double> cond(trials, 0.0);
    std::vector<std::size_t> t1(trials, 0), tz(trials, 0);
    parallel_for(trials, [&](std::size_t k) {
        Rng rng(derive_seed(1010, k));
        Instance inst = gen_lower_bound(p, rng.next());
        auto tr = run_policy(inst, hm);
        auto rep = depletion_times(inst, tr, L, m);
        order[k] = rep.order_ok;
        t1[k] = rep.t_i.back().value_or(0);
        tz[k] = rep.t_zero.value_or(0);
        double dm = delta_at_switch(inst, a, m);
        range[k] = dm >= 0 && dm <= 2 * y0;
        // same instance with r_m drawn from [0, y0]
        Instance c = inst;
        c.requests[m - 1] = y0 * rng.uniform();
        double dc = delta_at_switch(c, a, m);
        cond[k] = dc;
        if (!(dc >= 0 && dc <= 2 * y0)) range[k] = 0;
    });
    std::size_t ok_order = 0, ok_range = 0;
    for (std::size_t k = 0; k < trials; ++k) {
        ok_order += order[k];
        ok_range += range[k];
    }
    MeanSe e = mean_se(cond);
    double rate = double(ok_order) / trials;
    std::sort(t1.begin(), t1.end());
    std::sort(tz.begin(), tz.end());
    bool ok = rate >= 0.9 && ok_range == trials && e.mean >= y0 / 4 - 3 * e.se;
    return {ok, fmt("order_ok %.2f (m=%zu, median t_1 %zu, median t_zero %zu, limit %zu), delta_m in range %zu/%zu, "
                    "E[delta_m | r_m<=y0] %.5f (se %.2g) vs y0/4 %.5f",
                    rate, m, t1[trials / 2], tz[trials / 2], n - std::size_t(std::ceil(std::pow(double(n), 0.81))),
                    ok_range, trials, e.mean, e.se, y0 / 4)};
}

// ---- 11 ----
Outcome hierarchical_greedy() {
    std::vector<double> gap;
    std::string gs;
    PolicySpec hg;
    hg.kind = PolicyKind::hierarchical_greedy;
    const std::size_t trials = 50;
    for (std::size_t n : pow2(12, 16)) {
        std::vector<double> d(trials);
        parallel_for(trials, [&](std::size_t i) {
            auto inst = gen_fully_random(n, derive_seed(1111, i, n));
            d[i] = run_policy_cost(inst, {}) - run_policy_cost(inst, hg);
        });
        double v = mean_se(d).mean / std::sqrt(double(n));
        gap.push_back(v);
        gs += fmt("%s%.4f", gs.empty() ? "" : " ", v);
    }
    bool same_sign = std::all_of(gap.begin(), gap.end(), [](double v) { return v > 0; }) ||
                     std::all_of(gap.begin(), gap.end(), [](double v) { return v < 0; });
    std::vector<double> absgap(gap.size());
    std::transform(gap.begin(), gap.end(), absgap.begin(), [](double v) { return std::fabs(v); });
    double sp = same_sign ? spread(absgap) : INFINITY;

    std::vector<std::pair<double, double>> pts;
    std::string rs;
    for (std::size_t n : pow2(10, 16)) {
        std::vector<double> c(trials), o(trials);
        parallel_for(trials, [&](std::size_t i) {
            auto inst = gen_hg_adversarial(n, derive_seed(1112, i, n));
            c[i] = run_policy_cost(inst, hg);
            o[i] = opt_dp_cost(inst.servers, inst.requests);
        });
        double ratio = mean_se(c).mean / mean_se(o).mean;
        pts.push_back({double(n), ratio});
        rs += fmt("%s%.3f", rs.empty() ? "" : " ", ratio);
    }
    Fit f = regression_loglog(pts);
    bool ok = sp < 2.0 && f.slope >= 0.15 && f.slope <= 0.35;
    return {ok, fmt("random gap/sqrt(n) [%s] spread %.3f; adversarial ratio [%s] n=2^10..2^16, log-log slope %.4f",
                    gs.c_str(), sp, rs.c_str(), f.slope)};
}

// ---- 12 ----
std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

Outcome determinism() {
    fs::path dir = fs::temp_directory_path() / ("linematch_det_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    auto at = [&](const std::string& s) { return (dir / s).string(); };
    std::ofstream(at("sweep.json"))
        << R"({"model":["random","excess","lower","hgadv"],"n_list":[256,1024],"algos":["greedy","hgreedy","threshold"],"trials":12,"seed":12})";
    std::vector<std::pair<std::string, std::string>> cmds = {
        {"gen.inst", "gen --model lower --n 4000 --seed 12 -o {}"},
        {"gen2.inst", "gen --model excess --eps 0.3 --n 2000 --seed 13 -o {}"},
        {"run.csv", "run -i " + at("gen.inst") + " --algo threshold --m 500 -o {}"},
        {"scale.csv", "scale --config " + at("sweep.json") + " -o {}"},
        {"hybrid.json", "hybrid --n 200 --trials 200 --seed 12 --report {}"},
        {"gap.csv", "gap --init-file " + at("gen.inst") + " --y 0.5 --trials 200 --seed 12 -o {}"},
    };
    std::map<std::string, std::string> ref;
    std::size_t compared = 0, diffs = 0;
    std::string first;
    for (const char* threads : {"1", "2", "4", "7"}) {
        for (int rep = 0; rep < (std::string(threads) == "1" ? 2 : 1); ++rep) {
            for (const auto& [file, tmpl] : cmds) {
                std::string args = tmpl;
                args.replace(args.find("{}"), 2, at(file));
                std::string cmd = std::string("LINEMATCH_THREADS=") + threads + " " + LINEMATCH_CLI_PATH + " " + args +
                                  " > /dev/null 2>&1";
                int rc = std::system(cmd.c_str());
                if (!WIFEXITED(rc) || WEXITSTATUS(rc) != 0) return {false, "command failed: " + cmd};
                std::string out = slurp(at(file));
                if (!ref.count(file)) {
                    ref[file] = out;
                    continue;
                }
                ++compared;
                if (out != ref[file]) {
                    ++diffs;
                    if (first.empty()) first = fmt(" first: %s at %s threads", file.c_str(), threads);
                }
            }
        }
    }
    fs::remove_all(dir);
    return {diffs == 0 && compared > 0,
            fmt("%zu reruns compared across worker counts 1,2,4,7; %zu differ%s", compared, diffs, first.c_str())};
}

const std::map<int, std::pair<const char*, std::function<Outcome()>>>& registry() {
    static const std::map<int, std::pair<const char*, std::function<Outcome()>>> r = {
        {1, {"oracle equivalence", oracle_equivalence}},
        {2, {"OPT scaling", opt_scaling}},
        {3, {"greedy constant ratio", greedy_constant_ratio}},
        {4, {"excess boundedness", excess_boundedness}},
        {5, {"semi-random log growth", semi_random_log_growth}},
        {6, {"structural hybrid suite", structural_hybrid}},
        {7, {"gap chain fidelity", gap_chain_fidelity}},
        {8, {"probability bounds", probability_bounds}},
        {9, {"coupling equality", coupling_equality}},
        {10, {"depletion order and gap bounds", depletion_and_gap}},
        {11, {"hierarchical greedy", hierarchical_greedy}},
        {12, {"determinism", determinism}},
    };
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> which;
    for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
    if (which.empty())
        for (const auto& kv : registry()) which.push_back(kv.first);
    bool all = true;
    for (int c : which) {
        auto it = registry().find(c);
        if (it == registry().end()) {
            std::fprintf(stderr, "unknown criterion %d\n", c);
            return 2;
        }
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = it->second.second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %2d %-32s %s  %s [%.1fs]\n", c, it->second.first, o.pass ? "PASS" : "FAIL",
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
