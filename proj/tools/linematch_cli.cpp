#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "linematch/algorithms.hpp"
#include "linematch/core.hpp"
#include "linematch/experiments.hpp"
#include "linematch/gapchain.hpp"
#include "linematch/hybrid.hpp"
#include "linematch/instances.hpp"
#include "linematch/offline.hpp"
#include "linematch/rng.hpp"
#include "linematch/stats.hpp"

using namespace linematch;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json constants_json(double eps_hat) {
    Constants c = constants_for(eps_hat);
    return {{"eps_hat", c.eps_hat}, {"c1", c.c1}, {"c2", c.c2}, {"c3", c.c3}, {"d1", c.d1}};
}

json meta(const std::string& command, std::uint64_t seed, json params, double eps_hat = 0.01) {
    return {{"tool", "linematch"}, {"version", kVersion},       {"command", command},
            {"seed", seed},        {"rng", kRngName},           {"constants", constants_json(eps_hat)},
            {"params", std::move(params)}};
}

// writes to `path`, or stdout when path is empty or "-"
template <class F>
void emit(const std::string& path, F&& body) {
    if (path.empty() || path == "-") {
        body(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot open '" + path + "' for writing");
    body(f);
    if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot open '" + path + "'");
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

std::string opt_str(const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : "inf"; }

double parse_decimal(const std::string& s) {
    double x = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw UsageError("bad number '" + s + "'");
    return x;
}

// ---- gen ----

struct GenArgs {
    std::string model = "random";
    std::size_t n = 0;
    std::uint64_t seed = 1;
    double eps = 0.2;
    std::string mode = "demo";
    double kappa = 1.0;
    double eps_hat = 0.01;
    std::string out;
};

int cmd_gen(const GenArgs& a) {
    Instance inst;
    try {
        if (a.model == "random")
            inst = gen_fully_random(a.n, a.seed);
        else if (a.model == "excess")
            inst = gen_excess(a.n, a.eps, a.seed);
        else if (a.model == "lower") {
            LowerBoundParams p;
            p.n = a.n;
            p.mode = parse_mode(a.mode);
            p.kappa = a.kappa;
            p.eps_hat = a.eps_hat;
            inst = gen_lower_bound(p, a.seed);
        } else if (a.model == "hgadv")
            inst = gen_hg_adversarial(a.n, a.seed);
        else
            throw UsageError("unknown model '" + a.model + "'");
    } catch (const LinematchError& e) {
        throw UsageError(e.what());
    }
    emit(a.out, [&](std::ostream& os) { write_instance(inst, os); });
    return 0;
}

// ---- run ----

struct RunArgs {
    std::string instance;
    std::string algo = "greedy";
    double y0 = -1;
    std::size_t m = 0;
    bool check_neighboring = false;
    std::string trace_in;
    std::string out;
};

MatchTrace read_trace_csv(const std::string& path) {
    std::istringstream in(read_file(path));
    MatchTrace tr;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line.rfind("t,request,server,cost", 0) != 0) throw UsageError("trace: bad header at line " + std::to_string(lineno));
            header = true;
            continue;
        }
        if (line.rfind("total,", 0) == 0) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 4) throw UsageError("trace: bad row at line " + std::to_string(lineno));
        MatchStep st;
        st.t = static_cast<std::size_t>(parse_decimal(f[0]));
        st.request = parse_decimal(f[1]);
        st.server = parse_decimal(f[2]);
        st.cost = parse_decimal(f[3]);
        tr.total_cost += st.cost;
        tr.steps.push_back(st);
    }
    return tr;
}

int cmd_run(const RunArgs& a) {
    Instance inst;
    try {
        inst = read_instance(a.instance);
        validate_instance(inst);
    } catch (const LinematchError& e) {
        throw UsageError(e.what());
    }
    PolicySpec ps;
    try {
        ps.kind = parse_policy(a.algo);
    } catch (const LinematchError& e) {
        throw UsageError(e.what());
    }
    if (a.y0 >= 0) ps.y0 = a.y0;
    if (a.m > 0) ps.switch_after = a.m;

    if (!a.trace_in.empty()) {
        MatchTrace tr = read_trace_csv(a.trace_in);
        bool ok;
        try {
            ok = check_neighboring(tr, inst);
        } catch (const LinematchError& e) {
            std::cerr << "check failed: " << e.what() << "\n";
            return 1;
        }
        std::cout << "neighboring: " << (ok ? "yes" : "no") << "\n";
        return ok ? 0 : 1;
    }

    MatchTrace tr = run_policy(inst, ps);
    json params = {{"instance", a.instance}, {"algo", a.algo}, {"model", inst.meta.model}, {"n", inst.n()}};
    if (ps.y0) params["y0"] = *ps.y0;
    if (ps.switch_after) params["m"] = *ps.switch_after;
    emit(a.out, [&](std::ostream& os) {
        os << "# " << meta("run", inst.meta.seed, params).dump() << "\n";
        os << "t,request,server,cost\n";
        for (const auto& st : tr.steps)
            os << st.t << ',' << format_double(st.request) << ',' << format_double(st.server) << ','
               << format_double(st.cost) << '\n';
        os << "total," << format_double(tr.total_cost) << '\n';
    });
    if (a.check_neighboring) {
        bool ok = check_neighboring(tr, inst);
        std::cerr << "neighboring: " << (ok ? "yes" : "no") << "\n";
        if (!ok) return 1;
    }
    return 0;
}

// ---- scale ----

struct ScaleArgs {
    std::string config;
    std::string out;
    std::string dat;
};

int cmd_scale(const ScaleArgs& a) {
    SweepConfig cfg;
    try {
        cfg = parse_sweep_config(read_file(a.config));
    } catch (const LinematchError& e) {
        throw UsageError(e.what());
    }
    auto rows = scaling_sweep(cfg);
    json models = cfg.models;
    json algos = json::array();
    for (auto k : cfg.algos) algos.push_back(to_string(k));
    json params = {{"models", models}, {"n_list", cfg.n_list}, {"algos", algos},   {"trials", cfg.trials},
                   {"mode", to_string(cfg.mode)}, {"eps", cfg.eps},  {"kappa", cfg.kappa}, {"with_opt", cfg.with_opt}};
    emit(a.out, [&](std::ostream& os) {
        os << "# " << meta("scale", cfg.seed, params, cfg.eps_hat).dump() << "\n";
        write_sweep_csv(rows, os);
    });
    if (!a.dat.empty()) emit(a.dat, [&](std::ostream& os) { write_sweep_dat(rows, os); });
    bool ok = true;
    for (const auto& r : rows)
        if (!r.skipped && !std::isnan(r.mean_opt) && r.mean_cost < r.mean_opt - 1e-9) ok = false;
    if (!ok) std::cerr << "check failed: a policy mean cost fell below mean OPT\n";
    return ok ? 0 : 1;
}

// ---- hybrid ----

struct HybridArgs {
    std::size_t n = 200;
    std::size_t n_min = 0;
    std::size_t m = 0;
    std::string algo = "threshold";
    std::string model = "lower";
    std::string mode = "demo";
    std::size_t trials = 100;
    std::uint64_t seed = 1;
    std::string report;
};

json report_json(const StructureReport& r) {
    auto arr = [](const std::array<std::size_t, 6>& a, std::size_t k) {
        return std::vector<std::size_t>(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(k));
    };
    json j = {{"states_checked", r.states_checked},
              {"transitions_checked", r.transitions_checked},
              {"prop1_failures", r.prop1_fail},
              {"prop2_failures", r.prop2_fail},
              {"prop3_failures", r.prop3_fail},
              {"prop4_failures", r.prop4_fail},
              {"prefix_failures", r.prefix_fail},
              {"table2_rows", arr(r.table2_rows, 6)},
              {"table3_rows", arr(r.table3_rows, 4)},
              {"table4_rows", arr(r.table4_rows, 4)},
              {"both_absent", r.both_absent},
              {"boundary_hits", r.boundary_hits},
              {"cost_bound_ok", r.cost_bound_ok},
              {"pass", r.pass()}};
    return j;
}

int cmd_hybrid(const HybridArgs& a) {
    if (a.trials == 0) throw UsageError("trials must be > 0");
    std::size_t nmin = a.n_min == 0 ? a.n : a.n_min;
    if (nmin > a.n) throw UsageError("--n-min exceeds --n");
    PolicySpec ps;
    SweepConfig cfg;
    try {
        ps.kind = parse_policy(a.algo);
        cfg.mode = parse_mode(a.mode);
    } catch (const LinematchError& e) {
        throw UsageError(e.what());
    }
    if (a.model != "lower" && a.model != "random") throw UsageError("hybrid supports --model lower|random");
    if (a.model == "lower") {
        LowerBoundParams p;
        p.n = nmin;
        p.mode = cfg.mode;
        if (nmin < 2 || lower_bound_zero_count(p) > nmin) throw UsageError("instance infeasible at this n");
    }
    std::vector<StructureReport> reps(a.trials);
    std::vector<std::string> errors(a.trials);
    parallel_for(a.trials, [&](std::size_t k) {
        Rng rng(derive_seed(a.seed, k));
        auto n = static_cast<std::size_t>(rng.between(nmin, a.n));
        Instance inst = make_instance(a.model, n, cfg, rng.next());
        std::size_t m = a.m > 0 ? std::min(a.m, n) : static_cast<std::size_t>(rng.between(1, n));
        try {
            reps[k] = verify_structure(run_hybrid_pair(inst, ps, m));
        } catch (const LinematchError& e) {
            errors[k] = e.what();
        }
    });
    StructureReport total;
    std::size_t failed_runs = 0;
    json first = nullptr;
    for (std::size_t k = 0; k < a.trials; ++k) {
        if (!errors[k].empty()) {
            ++failed_runs;
            if (first.is_null()) first = {{"trial", k}, {"detail", errors[k]}};
            continue;
        }
        if (!reps[k].pass()) {
            ++failed_runs;
            if (first.is_null()) first = {{"trial", k}, {"detail", reps[k].first_violation.value_or("cost bound")}};
        }
        total.merge(reps[k]);
    }
    bool pass = failed_runs == 0;
    json params = {{"n", a.n}, {"n_min", nmin}, {"m", a.m}, {"algo", a.algo}, {"model", a.model}, {"mode", a.mode},
                   {"trials", a.trials}};
    json out = {{"meta", meta("hybrid", a.seed, params)},
                {"summary", report_json(total)},
                {"failed_runs", failed_runs},
                {"pass", pass},
                {"first_counterexample", first}};
    emit(a.report, [&](std::ostream& os) { os << out.dump(2) << "\n"; });
    if (!pass) std::cerr << "check failed: " << first.dump() << "\n";
    return pass ? 0 : 1;
}

// ---- gap ----

struct GapArgs {
    std::string init_file;
    double y = 1.0;
    double x = -1;
    std::size_t trials = 100;
    std::size_t horizon = 0;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_gap(const GapArgs& a) {
    if (a.trials == 0) throw UsageError("trials must be > 0");
    Instance inst;
    try {
        inst = read_instance(a.init_file);
    } catch (const LinematchError& e) {
        throw UsageError(e.what());
    }
    ServerPool T = ServerPool::from_sorted(inst.servers);
    double gamma = a.x >= 0 ? a.x : T.min_positive().value_or(0.0);
    ChainState init;
    try {
        init = make_chain_state(gamma, T, a.y);
    } catch (const LinematchError& e) {
        throw UsageError(e.what());
    }
    std::vector<ChainRun> runs(a.trials);
    parallel_for(a.trials, [&](std::size_t k) { runs[k] = run_chain(init, a.horizon, derive_seed(a.seed, k)); });
    json params = {{"init_file", a.init_file}, {"x", gamma}, {"y", a.y}, {"trials", a.trials}, {"horizon", a.horizon}};
    emit(a.out, [&](std::ostream& os) {
        os << "# " << meta("gap", a.seed, params).dump() << "\n";
        os << "trial,tau0,tauIy,tauw,taud,gamma_max,sum_dcost\n";
        for (std::size_t k = 0; k < a.trials; ++k) {
            const auto& r = runs[k];
            os << k << ',' << opt_str(r.stops.tau_zero) << ',' << opt_str(r.stops.tau_interval) << ','
               << opt_str(r.stops.tau_w) << ',' << opt_str(r.stops.tau_death) << ',' << format_double(r.gamma_max)
               << ',' << format_double(r.sum_dcost) << '\n';
        }
    });
    return 0;
}

// ---- verify ----

struct VerifyArgs {
    bool oracle = false;
    bool structure = false;
    bool chain = false;
    std::size_t cases = 200;
    std::size_t n = 200;
    std::size_t steps = 100000;
    std::uint64_t seed = 1;
};

bool verify_oracle(std::size_t cases, std::uint64_t seed) {
    std::size_t fails = 0, balanced = 0;
    for (std::size_t k = 0; k < cases; ++k) {
        Rng rng(derive_seed(seed, k));
        auto nr = static_cast<std::size_t>(rng.between(1, 7));
        auto ns = static_cast<std::size_t>(rng.between(nr, 9));
        std::vector<Location> s(ns), r(nr);
        for (auto& x : s) x = rng.uniform();
        for (auto& x : r) x = rng.uniform();
        nudge_duplicates(s);
        double dp = opt_dp_cost(s, r), bf = opt_bruteforce(s, r);
        Assignment as = opt_dp(s, r);
        bool ok = std::fabs(dp - bf) <= 1e-12 && std::fabs(as.cost - dp) <= 1e-12 &&
                  std::fabs(assignment_cost(as, s, r) - dp) <= 1e-12;
        if (ns == nr) {
            ++balanced;
            ok = ok && std::fabs(opt_rank_match(s, r).cost - dp) <= 1e-12;
        }
        if (!ok) {
            if (fails == 0)
                std::cerr << "oracle mismatch in case " << k << ": dp=" << format_double(dp)
                          << " brute=" << format_double(bf) << "\n";
            ++fails;
        }
    }
    std::cout << "oracle: " << cases << " cases (" << balanced << " balanced), " << fails << " mismatches\n";
    return fails == 0;
}

bool verify_chain(std::size_t steps, std::uint64_t seed) {
    std::size_t applicable = 0, agree = 0, round = 0;
    while (applicable < steps) {
        Rng rng(derive_seed(seed, round++));
        auto k = static_cast<std::size_t>(rng.between(5, 60));
        auto z = static_cast<std::size_t>(rng.between(1, 20));
        std::vector<Location> s(z, 0.0);
        for (std::size_t i = 0; i < k; ++i) s.push_back(rng.uniform());
        nudge_duplicates(s);
        ServerPool T = ServerPool::from_sorted(s);
        ChainState st = make_chain_state(T.min_positive().value_or(0.0), T);
        while (!st.T.empty() && applicable < steps) {
            double r = rng.uniform();
            CasePrediction p = predict_case(st, r);
            ChainStep cs = step_chain(st, r);
            if (p.id == 0) continue;
            ++applicable;
            if (prediction_holds(p, cs, st.gamma)) ++agree;
        }
    }
    std::cout << "chain: " << applicable << " applicable steps, " << agree << " agree with the case table\n";
    return agree == applicable;
}

int cmd_verify(VerifyArgs a) {
    if (!a.oracle && !a.structure && !a.chain) a.oracle = true;
    bool ok = true;
    if (a.oracle) ok = verify_oracle(a.cases, a.seed) && ok;
    if (a.structure) {
        HybridArgs h;
        h.n = a.n;
        h.n_min = std::min<std::size_t>(60, a.n);
        h.trials = a.cases;
        h.seed = a.seed;
        h.report = "";
        std::ostringstream sink;
        auto* old = std::cout.rdbuf(sink.rdbuf());
        int rc = 0;
        try {
            rc = cmd_hybrid(h);
        } catch (...) {
            std::cout.rdbuf(old);
            throw;
        }
        std::cout.rdbuf(old);
        std::cout << "structure: " << a.cases << " hybrid runs, " << (rc == 0 ? "all pass" : "FAILED") << "\n";
        ok = ok && rc == 0;
    }
    if (a.chain) ok = verify_chain(a.steps, a.seed) && ok;
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"linematch: online matching on the line"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    GenArgs ga;
    auto* gen = app.add_subcommand("gen", "generate an instance file");
    gen->add_option("--model", ga.model, "random|excess|lower|hgadv")->capture_default_str();
    gen->add_option("--n", ga.n, "size")->required();
    gen->add_option("--seed", ga.seed)->capture_default_str();
    gen->add_option("--eps", ga.eps, "excess model")->capture_default_str();
    gen->add_option("--mode", ga.mode, "faithful|demo (lower model)")->capture_default_str();
    gen->add_option("--kappa", ga.kappa)->capture_default_str();
    gen->add_option("--eps-hat", ga.eps_hat)->capture_default_str();
    gen->add_option("-o,--out", ga.out, "output path (default stdout)");

    RunArgs ra;
    auto* run = app.add_subcommand("run", "run one policy on an instance");
    run->add_option("--instance,-i", ra.instance)->required();
    run->add_option("--algo", ra.algo, "greedy|hgreedy|threshold")->capture_default_str();
    run->add_option("--y0", ra.y0, "threshold (default n^{-1/5})");
    run->add_option("--m", ra.m, "switch to greedy after m requests");
    run->add_flag("--check-neighboring", ra.check_neighboring);
    run->add_option("--trace", ra.trace_in, "check this trace CSV instead of running");
    run->add_option("-o,--out", ra.out);

    ScaleArgs sa;
    auto* scale = app.add_subcommand("scale", "scaling sweep");
    scale->add_option("--config", sa.config)->required();
    scale->add_option("-o,--out", sa.out);
    scale->add_option("--dat", sa.dat, "gnuplot data file");

    HybridArgs ha;
    auto* hyb = app.add_subcommand("hybrid", "H^m vs H^{m-1} structural checks");
    hyb->add_option("--n", ha.n)->capture_default_str();
    hyb->add_option("--n-min", ha.n_min, "draw n uniformly from [n-min, n]");
    hyb->add_option("--m", ha.m, "switch index (default uniform in [1,n])");
    hyb->add_option("--algo", ha.algo)->capture_default_str();
    hyb->add_option("--model", ha.model, "lower|random")->capture_default_str();
    hyb->add_option("--mode", ha.mode)->capture_default_str();
    hyb->add_option("--trials", ha.trials)->capture_default_str();
    hyb->add_option("--seed", ha.seed)->capture_default_str();
    hyb->add_option("--report", ha.report, "json report path (default stdout)");

    GapArgs pa;
    auto* gap = app.add_subcommand("gap", "gap chain trajectories");
    gap->add_option("--init-file", pa.init_file, "instance file; its servers are T_0")->required();
    gap->add_option("--y", pa.y)->capture_default_str();
    gap->add_option("--x", pa.x, "gamma_0 (default: smallest positive server)");
    gap->add_option("--trials", pa.trials)->capture_default_str();
    gap->add_option("--horizon", pa.horizon, "steps (default |T_0|)");
    gap->add_option("--seed", pa.seed)->capture_default_str();
    gap->add_option("--out,-o", pa.out);

    VerifyArgs va;
    auto* ver = app.add_subcommand("verify", "oracle and invariant suites");
    ver->add_flag("--oracle", va.oracle, "DP vs brute force");
    ver->add_flag("--structure", va.structure, "hybrid structural suite");
    ver->add_flag("--chain", va.chain, "gap chain table fidelity");
    ver->add_option("--cases", va.cases)->capture_default_str();
    ver->add_option("--n", va.n)->capture_default_str();
    ver->add_option("--steps", va.steps)->capture_default_str();
    ver->add_option("--seed", va.seed)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*gen) return cmd_gen(ga);
        if (*run) return cmd_run(ra);
        if (*scale) return cmd_scale(sa);
        if (*hyb) return cmd_hybrid(ha);
        if (*gap) return cmd_gap(pa);
        if (*ver) return cmd_verify(va);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
