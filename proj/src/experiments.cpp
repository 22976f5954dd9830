#include "linematch/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "linematch/algorithms.hpp"
#include "linematch/offline.hpp"
#include "linematch/regularity.hpp"
#include "linematch/rng.hpp"

namespace linematch {

SweepConfig parse_sweep_config(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        throw LinematchError(std::string("bad sweep config: ") + e.what());
    }
    if (!j.is_object()) throw LinematchError("sweep config must be a json object");
    SweepConfig c;
    try {
        if (j.contains("model")) {
            const auto& m = j["model"];
            c.models.clear();
            if (m.is_string())
                c.models.push_back(m.get<std::string>());
            else
                for (const auto& x : m) c.models.push_back(x.get<std::string>());
        }
        if (!j.contains("n_list")) throw LinematchError("sweep config needs n_list");
        for (const auto& x : j["n_list"]) c.n_list.push_back(x.get<std::size_t>());
        if (j.contains("algos")) {
            c.algos.clear();
            for (const auto& x : j["algos"]) c.algos.push_back(parse_policy(x.get<std::string>()));
        }
        if (j.contains("trials")) c.trials = j["trials"].get<std::size_t>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("mode")) c.mode = parse_mode(j["mode"].get<std::string>());
        if (j.contains("eps")) c.eps = j["eps"].get<double>();
        if (j.contains("kappa")) c.kappa = j["kappa"].get<double>();
        if (j.contains("eps_hat")) c.eps_hat = j["eps_hat"].get<double>();
        if (j.contains("with_opt")) c.with_opt = j["with_opt"].get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw LinematchError(std::string("bad sweep config: ") + e.what());
    }
    for (const auto& m : c.models)
        if (m != "random" && m != "excess" && m != "lower" && m != "hgadv")
            throw LinematchError("unknown model '" + m + "'");
    if (c.trials == 0) throw LinematchError("trials must be > 0");
    if (c.n_list.empty()) throw LinematchError("n_list is empty");
    return c;
}

namespace {

std::uint64_t model_code(const std::string& m) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : m) h = (h ^ ch) * 1099511628211ULL;
    return h;
}

}  // namespace

Instance make_instance(const std::string& model, std::size_t n, const SweepConfig& cfg, std::uint64_t seed) {
    if (model == "random") return gen_fully_random(n, seed);
    if (model == "excess") return gen_excess(n, cfg.eps, seed);
    if (model == "lower") {
        LowerBoundParams p;
        p.n = n;
        p.mode = cfg.mode;
        p.kappa = cfg.kappa;
        p.eps_hat = cfg.eps_hat;
        return gen_lower_bound(p, seed);
    }
    if (model == "hgadv") return gen_hg_adversarial(n, seed);
    throw LinematchError("unknown model '" + model + "'");
}

SweepCell run_cell(const SweepConfig& cfg, const std::string& model, std::size_t n) {
    SweepCell cell;
    cell.model = model;
    cell.n = n;
    if (model == "lower") {
        LowerBoundParams p;
        p.n = n;
        p.mode = cfg.mode;
        p.kappa = cfg.kappa;
        if (n < 2 || lower_bound_zero_count(p) > n) {
            cell.skipped = true;
            cell.note = "instance infeasible at this n";
            return cell;
        }
    }
    std::size_t k = cfg.trials;
    if (cfg.with_opt) cell.opt.assign(k, 0.0);
    std::vector<std::vector<double>> costs(cfg.algos.size(), std::vector<double>(k, 0.0));
    std::uint64_t mseed = cfg.seed ^ model_code(model);
    parallel_for(k, [&](std::size_t i) {
        Instance inst = make_instance(model, n, cfg, derive_seed(mseed, i, n));
        if (cfg.with_opt) cell.opt[i] = opt_dp_cost(inst.servers, inst.requests);
        for (std::size_t a = 0; a < cfg.algos.size(); ++a) {
            PolicySpec ps;
            ps.kind = cfg.algos[a];
            costs[a][i] = run_policy_cost(inst, ps);
        }
    });
    for (std::size_t a = 0; a < cfg.algos.size(); ++a) cell.cost[cfg.algos[a]] = std::move(costs[a]);
    return cell;
}

std::vector<SweepRow> rows_for(const SweepCell& cell, const SweepConfig& cfg) {
    std::vector<SweepRow> rows;
    for (PolicyKind a : cfg.algos) {
        SweepRow r;
        r.model = cell.model;
        r.n = cell.n;
        r.algo = to_string(a);
        r.trials = cfg.trials;
        r.seed = cfg.seed;
        r.mode = cell.model == "lower" ? to_string(cfg.mode) : "-";
        r.skipped = cell.skipped;
        double nan = std::numeric_limits<double>::quiet_NaN();
        if (cell.skipped) {
            r.mean_cost = r.stderr_cost = r.mean_opt = r.stderr_opt = r.ratio = nan;
        } else {
            MeanSe c = mean_se(cell.cost.at(a));
            r.mean_cost = c.mean;
            r.stderr_cost = c.se;
            if (!cell.opt.empty()) {
                MeanSe o = mean_se(cell.opt);
                r.mean_opt = o.mean;
                r.stderr_opt = o.se;
                r.ratio = o.mean > 0 ? c.mean / o.mean : nan;
            } else {
                r.mean_opt = r.stderr_opt = r.ratio = nan;
            }
        }
        rows.push_back(r);
    }
    return rows;
}

std::vector<SweepRow> scaling_sweep(const SweepConfig& cfg) {
    std::vector<SweepRow> out;
    for (const auto& model : cfg.models)
        for (std::size_t n : cfg.n_list) {
            auto rows = rows_for(run_cell(cfg, model, n), cfg);
            out.insert(out.end(), rows.begin(), rows.end());
        }
    return out;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
    out << "model,n,algo,trials,mean_cost,stderr_cost,mean_opt,stderr_opt,ratio,seed,mode\n";
    for (const auto& r : rows) {
        out << r.model << ',' << r.n << ',' << r.algo << ',' << r.trials << ',' << format_double(r.mean_cost) << ','
            << format_double(r.stderr_cost) << ',' << format_double(r.mean_opt) << ',' << format_double(r.stderr_opt)
            << ',' << format_double(r.ratio) << ',' << r.seed << ',' << r.mode << '\n';
    }
}

void write_sweep_dat(const std::vector<SweepRow>& rows, std::ostream& out) {
    out << "# model algo n mean_cost stderr_cost mean_opt ratio\n";
    for (const auto& r : rows) {
        if (r.skipped) continue;
        out << r.model << ' ' << r.algo << ' ' << r.n << ' ' << format_double(r.mean_cost) << ' '
            << format_double(r.stderr_cost) << ' ' << format_double(r.mean_opt) << ' ' << format_double(r.ratio)
            << '\n';
    }
}

std::optional<std::size_t> IntervalLadder::index_of(Location x) const {
    if (!(x > 0) || y.empty()) return std::nullopt;
    auto it = std::lower_bound(y.begin(), y.end(), x);
    if (it == y.end()) return std::nullopt;
    return static_cast<std::size_t>(it - y.begin());
}

IntervalLadder make_ladder(std::size_t n, double eps_hat) {
    Constants k = constants_for(eps_hat);
    IntervalLadder L;
    L.d1 = k.d1;
    L.imax = static_cast<std::size_t>(std::floor(k.d1 * std::log(static_cast<double>(n))));
    double y0 = base_threshold(n);
    for (std::size_t i = 0; i <= L.imax; ++i) L.y.push_back(std::pow(1.5, static_cast<double>(i)) * y0);
    return L;
}

namespace {

std::size_t tail_limit(std::size_t n, double eps_hat) {
    auto tail = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), constants_for(eps_hat).c3)));
    return tail < n ? n - tail : 0;
}

}  // namespace

DepletionReport depletion_times(const Instance& inst, const MatchTrace& hm, const IntervalLadder& ladder,
                                std::size_t m, double eps_hat) {
    DepletionReport rep;
    std::size_t n = inst.n();
    rep.limit = tail_limit(n, eps_hat);
    std::size_t k = ladder.y.size();
    std::vector<std::size_t> count(k, 0);
    std::size_t zeros = 0;
    for (Location s : inst.servers) {
        if (s == 0)
            ++zeros;
        else if (auto i = ladder.index_of(s))
            ++count[*i];
    }
    rep.t_i.assign(k, std::nullopt);
    for (std::size_t i = 0; i < k; ++i)
        if (count[i] == 0) rep.t_i[i] = 0;
    if (zeros == 0) rep.t_zero = 0;
    for (const MatchStep& st : hm.steps) {
        if (st.server == 0) {
            if (--zeros == 0) rep.t_zero = st.t;
        } else if (auto i = ladder.index_of(st.server)) {
            if (--count[*i] == 0) rep.t_i[*i] = st.t;
        }
    }
    bool ok = !rep.t_zero || *rep.t_zero > m;
    std::size_t prev = m;
    for (std::size_t i = 1; i < k; ++i) {
        if (!rep.t_i[i] || *rep.t_i[i] <= prev) {
            ok = false;
            break;
        }
        prev = *rep.t_i[i];
    }
    if (k > 1 && (!rep.t_i[k - 1] || *rep.t_i[k - 1] > rep.limit)) ok = false;
    rep.order_ok = ok;
    std::size_t depleted = 0;
    bool all = true;
    for (std::size_t i = 0; i < k; ++i) {
        if (!rep.t_i[i]) all = false;
        if (all) depleted = std::max(depleted, *rep.t_i[i]);
        if (all && rep.t_zero && depleted > *rep.t_zero) rep.intervals_before_zero = false;
    }
    return rep;
}

GapBoundReport gap_bound_check(const Instance& inst, const MatchTrace& hm, std::size_t /*m*/, double delta_m,
                               double eps_hat) {
    GapBoundReport rep;
    std::size_t n = inst.n();
    Constants k = constants_for(eps_hat);
    double nd = static_cast<double>(n), ln = std::log(nd);
    rep.bound = 2.0 * std::pow(ln, 4) * std::pow(nd, 1.0 - 2.0 * k.c3);
    rep.checked_until = tail_limit(n, eps_hat);
    ServerPool pool = ServerPool::from_sorted(inst.servers);
    for (const MatchStep& st : hm.steps) {
        if (st.t > rep.checked_until) break;
        pool.remove(st.server);
    }
    // largest gap is nondecreasing in t
    auto v = pool.to_vector();
    Location prev = -1;
    for (Location s : v) {
        if (s <= 0) continue;
        if (prev > 0) rep.max_gap = std::max(rep.max_gap, s - prev);
        prev = s;
    }
    if (rep.max_gap > rep.bound) ++rep.violations;
    rep.delta_m_in_range = delta_m >= 0 && delta_m <= 2.0 * base_threshold(n);
    return rep;
}

double delta_at_switch(const Instance& inst, const PolicySpec& policy_a, std::size_t m) {
    std::size_t n = inst.n();
    if (m < 1 || m > n) throw LinematchError("switch index m must be in [1, n]");
    PolicySpec spec = policy_a;
    spec.switch_after = m;
    ServerPool pool = ServerPool::from_sorted(inst.servers);
    OnlinePolicy pol(spec, pool, n);
    for (std::size_t t = 1; t < m; ++t) {
        Location s = pol.choose(pool, inst.requests[t - 1], t);
        pool.remove(s);
        pol.consumed(s, t);
    }
    Location r = inst.requests[m - 1];
    Location a = pol.choose(pool, r, m), b = pool.greedy(r);
    return std::fabs(a - b);
}

CostProfile per_step_cost_profile(const std::string& model, std::size_t n, std::size_t trials, std::uint64_t seed,
                                  double eps) {
    if (model != "random" && model != "excess") throw LinematchError("cost profile supports random and excess models");
    if (trials == 0) throw LinematchError("trials must be > 0");
    SweepConfig cfg;
    cfg.eps = eps;
    std::vector<double> sum(n, 0.0), sumsq(n, 0.0);
    const std::size_t block = 64;
    std::vector<std::vector<double>> buf(block);
    for (std::size_t start = 0; start < trials; start += block) {
        std::size_t cnt = std::min(block, trials - start);
        parallel_for(cnt, [&](std::size_t j) {
            Instance inst = make_instance(model, n, cfg, derive_seed(seed, start + j, n));
            MatchTrace tr = run_policy(inst, PolicySpec{});
            buf[j].resize(n);
            for (std::size_t t = 0; t < n; ++t) buf[j][t] = tr.steps[t].cost;
        });
        for (std::size_t j = 0; j < cnt; ++j)
            for (std::size_t t = 0; t < n; ++t) {
                sum[t] += buf[j][t];
                sumsq[t] += buf[j][t] * buf[j][t];
            }
    }
    CostProfile p;
    p.mean.resize(n);
    p.se.resize(n);
    double k = static_cast<double>(trials);
    for (std::size_t t = 0; t < n; ++t) {
        p.mean[t] = sum[t] / k;
        double var = trials > 1 ? std::max(0.0, (sumsq[t] - k * p.mean[t] * p.mean[t]) / (k - 1)) : 0.0;
        p.se[t] = std::sqrt(var / k);
    }
    return p;
}

MonotoneCheck monotone_check(const CostProfile& p) {
    std::vector<double> w(p.mean.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = p.se[i] > 0 ? 1.0 / (p.se[i] * p.se[i]) : 1.0;
    auto iso = isotonic_increasing(p.mean, w);
    double r2 = 0, s2 = 0;
    for (std::size_t i = 0; i < iso.size(); ++i) {
        r2 += (p.mean[i] - iso[i]) * (p.mean[i] - iso[i]);
        s2 += p.se[i] * p.se[i];
    }
    MonotoneCheck c;
    double k = static_cast<double>(std::max<std::size_t>(iso.size(), 1));
    c.rms_residual = std::sqrt(r2 / k);
    c.rms_se = std::sqrt(s2 / k);
    c.ok = c.rms_residual <= 2.0 * c.rms_se;
    return c;
}

std::vector<double> stranded_interval_frequency(std::size_t n, double eps, std::size_t trials, std::uint64_t seed,
                                                const std::vector<double>& multiples) {
    if (n < 2) throw LinematchError("n must be >= 2");
    if (trials == 0) throw LinematchError("trials must be > 0");
    double z0 = 8.0 * (4.0 + eps) / (eps * static_cast<double>(n));
    std::vector<std::vector<char>> hit(trials, std::vector<char>(multiples.size(), 0));
    parallel_for(trials, [&](std::size_t k) {
        Instance inst = gen_excess(n, eps, derive_seed(seed, k, n));
        ServerPool pool = ServerPool::from_sorted(inst.servers);
        for (std::size_t t = 0; t + 1 < n; ++t) pool.remove(pool.greedy(inst.requests[t]));
        Location rn = inst.requests[n - 1];
        Neighbors nb = pool.nearest(rn);
        Location l = nb.left.value_or(0.0), m = nb.right.value_or(1.0);
        GridCounter gc(std::span<const Location>(inst.requests).first(n - 1), inst.servers);
        auto [x, y] = interval_counts(gc, l, m, 0, n - 1);
        if (x != y) return;
        for (std::size_t j = 0; j < multiples.size(); ++j) {
            double z = multiples[j] * z0;
            bool left_ok = !nb.left || rn - l >= z;
            bool right_ok = !nb.right || m - rn >= z;
            if (left_ok && right_ok) hit[k][j] = 1;
        }
    });
    std::vector<double> freq(multiples.size(), 0.0);
    for (const auto& h : hit)
        for (std::size_t j = 0; j < h.size(); ++j) freq[j] += h[j];
    for (double& f : freq) f /= static_cast<double>(trials);
    return freq;
}

std::vector<double> level_histogram(std::size_t n, std::size_t trials, std::uint64_t seed) {
    if (trials == 0) throw LinematchError("trials must be > 0");
    std::vector<std::vector<double>> per(trials);
    parallel_for(trials, [&](std::size_t k) {
        Instance inst = gen_fully_random(n, derive_seed(seed, k, n));
        ServerPool pool = ServerPool::from_sorted(inst.servers);
        LevelTree tree(pool, n);
        per[k].assign(tree.ell0() + 1, 0.0);
        for (Location r : inst.requests) {
            per[k][level_of_match(tree, r)] += 1.0;
            hierarchical_greedy_step(tree, pool, r);
        }
    });
    std::vector<double> mean(per[0].size(), 0.0);
    for (const auto& v : per)
        for (std::size_t i = 0; i < v.size(); ++i) mean[i] += v[i];
    for (double& x : mean) x /= static_cast<double>(trials);
    return mean;
}

}  // namespace linematch
