#include "linematch/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "linematch/algorithms.hpp"
#include "linematch/rng.hpp"

namespace linematch {

namespace {

bool erase_one(std::vector<Location>& v, Location x) {
    auto it = std::find(v.begin(), v.end(), x);
    if (it == v.end()) return false;
    v.erase(it);
    return true;
}

}  // namespace

void DiffTracker::seed(Location extra_a, Location extra_b) {
    only_a_.assign(1, extra_a);
    only_b_.assign(1, extra_b);
}

void DiffTracker::apply(Location a, Location b) {
    if (a == b) return;
    if (!erase_one(only_a_, a)) only_b_.push_back(a);
    if (!erase_one(only_b_, b)) only_a_.push_back(b);
    for (std::size_t i = 0; i < only_a_.size();) {
        if (erase_one(only_b_, only_a_[i]))
            only_a_.erase(only_a_.begin() + static_cast<std::ptrdiff_t>(i));
        else
            ++i;
    }
}

namespace {

void fill_markers(HybridStep& st, const DiffTracker& diff, const ServerPool& pm, const ServerPool& pm1) {
    st.differ = diff.differ();
    st.single_swap = diff.single_swap();
    if (!st.differ || !st.single_swap) return;
    Location a = diff.only_a().front();  // extra of H^m
    Location b = diff.only_b().front();  // extra of H^{m-1}
    st.left_in_m = a < b;
    st.gL = std::min(a, b);
    st.gR = std::max(a, b);
    st.delta = st.gR - st.gL;
    const ServerPool& holder = st.left_in_m ? pm : pm1;
    const ServerPool& other = st.left_in_m ? pm1 : pm;
    st.sL = other.nearest(st.gL).left;
    st.sR = holder.nearest(st.gR).right;
    st.gap_clear = pm.count_open(st.gL, st.gR) == 0 && pm1.count_open(st.gL, st.gR) == 0;
}

}  // namespace

HybridTrace run_hybrid_pair(const Instance& inst, const PolicySpec& policy_a, std::size_t m,
                            const HybridOptions& opt) {
    std::size_t n = inst.n();
    if (m < 1 || m > n) throw LinematchError("switch index m must be in [1, n]");
    if (n > inst.servers.size()) throw LinematchError("more requests than servers");
    PolicySpec spec = policy_a;
    spec.switch_after = m;
    ServerPool pm = ServerPool::from_sorted(inst.servers);
    OnlinePolicy pol(spec, pm, n);
    HybridTrace tr;
    tr.m = m;
    tr.steps.reserve(n);

    for (std::size_t t = 1; t < m; ++t) {
        Location r = inst.requests[t - 1];
        Location s = pol.choose(pm, r, t);
        if (!is_neighbor_choice(pm, r, s))
            throw LinematchError("policy A is not neighboring at step " + std::to_string(t));
        pm.remove(s);
        pol.consumed(s, t);
        HybridStep st;
        st.t = t;
        st.request = r;
        st.s_m = st.s_m1 = s;
        double c = std::fabs(r - s);
        tr.cost_m += c;
        tr.cost_m1 += c;
        tr.steps.push_back(st);
    }

    ServerPool pm1 = pm;
    DiffTracker diff;
    for (std::size_t t = m; t <= n; ++t) {
        Location r = inst.requests[t - 1];
        Location a, b;
        if (t == m) {
            a = pol.choose(pm, r, t);
            if (!is_neighbor_choice(pm, r, a))
                throw LinematchError("policy A is not neighboring at step " + std::to_string(t));
        } else {
            a = pm.greedy(r);
        }
        b = pm1.greedy(r);
        pm.remove(a);
        pm1.remove(b);
        diff.apply(a, b);
        HybridStep st;
        st.t = t;
        st.request = r;
        st.s_m = a;
        st.s_m1 = b;
        double ca = std::fabs(r - a), cb = std::fabs(r - b);
        st.dcost = cb - ca;
        tr.cost_m += ca;
        tr.cost_m1 += cb;
        fill_markers(st, diff, pm, pm1);
        tr.steps.push_back(st);
        if (t == m && opt.keep_snapshots) {
            tr.pool_m_at_m = pm;
            tr.pool_m1_at_m = pm1;
        }
        if (opt.stop_when_merged && !st.differ) break;
    }
    return tr;
}

void StructureReport::merge(const StructureReport& o) {
    states_checked += o.states_checked;
    transitions_checked += o.transitions_checked;
    prop1_fail += o.prop1_fail;
    prop2_fail += o.prop2_fail;
    prop3_fail += o.prop3_fail;
    prop4_fail += o.prop4_fail;
    prefix_fail += o.prefix_fail;
    for (int i = 0; i < 6; ++i) {
        table2_rows[i] += o.table2_rows[i];
        table3_rows[i] += o.table3_rows[i];
        table4_rows[i] += o.table4_rows[i];
    }
    both_absent += o.both_absent;
    boundary_hits += o.boundary_hits;
    cost_bound_ok = cost_bound_ok && o.cost_bound_ok;
    if (!first_violation && o.first_violation) first_violation = o.first_violation;
}

namespace {

constexpr double kTol = 1e-12;

struct Prediction {
    bool wildcard = false;  // same server in both runs, markers untouched
    Location hold = 0, other = 0;
    bool vanish = false;
    bool keep = false;
    Location gL2 = 0, gR2 = 0;
    double bound = 0;
};

Prediction keep_row(Location h, Location o, double bound = 0) {
    Prediction p;
    p.hold = h;
    p.other = o;
    p.keep = true;
    p.bound = bound;
    return p;
}

Prediction wildcard_row() {
    Prediction p;
    p.wildcard = true;
    p.keep = true;
    return p;
}

Prediction move_row(Location h, Location o, Location gl2, Location gr2, double bound) {
    Prediction p;
    p.hold = h;
    p.other = o;
    p.gL2 = gl2;
    p.gR2 = gr2;
    p.bound = bound;
    return p;
}

Prediction vanish_row(Location h, Location o, double bound) {
    Prediction p;
    p.hold = h;
    p.other = o;
    p.vanish = true;
    p.bound = bound;
    return p;
}

// which table applies: 2 both neighbours, 3 no sL, 4 no sR, 0 neither
int table_of(const HybridStep& st) {
    if (st.sL && st.sR) return 2;
    if (st.sR) return 3;
    if (st.sL) return 4;
    return 0;
}

// rows are 1-based; boundaries[k] separates row k+1 from row k+2
struct Layout {
    std::vector<Prediction> rows;
    std::vector<double> bounds;
    double value = 0;
    int row = 0;
};

Layout layout_for(const HybridStep& st, Location r) {
    Layout L;
    double gl = st.gL, gr = st.gR, d = st.delta;
    int tbl = table_of(st);
    if (tbl == 2) {
        double sl = *st.sL, sr = *st.sR;
        double dl = gl - sl, dr = sr - gr;
        L.rows = {keep_row(sl, sl),
                  move_row(gl, sl, sl, gr, dl),
                  vanish_row(gl, gr, d),
                  move_row(sr, gr, gl, sr, dr),
                  keep_row(sr, sr),
                  wildcard_row()};
        L.bounds = {dl / 2, (dl + d) / 2, dl + (dr + d) / 2, dl + d + dr / 2, dl + d + dr};
        double x = r - sl;
        L.value = x;
        if (x < 0)
            L.row = 6;
        else {
            L.row = 6;
            for (int k = 0; k < 5; ++k)
                if (x <= L.bounds[k]) {
                    L.row = k + 1;
                    break;
                }
        }
    } else if (tbl == 3) {
        double sr = *st.sR, dr = sr - gr;
        L.rows = {vanish_row(gl, gr, d), move_row(sr, gr, gl, sr, dr), keep_row(sr, sr), wildcard_row()};
        L.bounds = {gl + (dr + d) / 2, gl + d + dr / 2, gl + d + dr};
        L.value = r;
        L.row = 4;
        for (int k = 0; k < 3; ++k)
            if (r <= L.bounds[k]) {
                L.row = k + 1;
                break;
            }
    } else if (tbl == 4) {
        double sl = *st.sL, dl = gl - sl;
        L.rows = {wildcard_row(), keep_row(sl, sl), move_row(gl, sl, sl, gr, dl), vanish_row(gl, gr, d)};
        L.bounds = {sl, gr - (d + dl / 2), gr - (dl + d) / 2};
        L.value = r;
        if (r < sl)
            L.row = 1;
        else if (r <= L.bounds[1])
            L.row = 2;
        else if (r <= L.bounds[2])
            L.row = 3;
        else
            L.row = 4;
    } else {
        L.rows = {vanish_row(gl, gr, d)};
        L.row = 1;
    }
    return L;
}

bool matches(const Prediction& p, const HybridStep& cur, const HybridStep& nxt) {
    Location hold = cur.left_in_m ? nxt.s_m : nxt.s_m1;
    Location other = cur.left_in_m ? nxt.s_m1 : nxt.s_m;
    if (p.wildcard) {
        if (hold != other) return false;
    } else if (hold != p.hold || other != p.other) {
        return false;
    }
    if (std::fabs(nxt.dcost) > p.bound + kTol) return false;
    if (p.vanish) return !nxt.differ;
    if (!nxt.differ || !nxt.single_swap || nxt.left_in_m != cur.left_in_m) return false;
    if (p.keep) return nxt.gL == cur.gL && nxt.gR == cur.gR;
    return nxt.gL == p.gL2 && nxt.gR == p.gR2;
}

std::string describe(std::size_t t, const std::string& what) {
    std::ostringstream os;
    os << "t=" << t << ": " << what;
    return os.str();
}

}  // namespace

StructureReport verify_structure(const HybridTrace& trace) {
    StructureReport rep;
    std::size_t m = trace.m;
    const auto& steps = trace.steps;
    auto note = [&](std::size_t t, const std::string& what) {
        if (!rep.first_violation) rep.first_violation = describe(t, what);
    };
    for (const HybridStep& st : steps) {
        if (st.t >= m) break;
        if (st.s_m != st.s_m1 || st.differ) {
            ++rep.prefix_fail;
            note(st.t, "runs differ before the switch");
        }
    }
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const HybridStep& st = steps[i];
        if (st.t < m) continue;
        ++rep.states_checked;
        if (!st.single_swap) {
            ++rep.prop1_fail;
            note(st.t, "free sets differ in more than one server");
            continue;
        }
        if (st.differ && !st.gap_clear) {
            ++rep.prop2_fail;
            note(st.t, "a free server lies strictly between gL and gR");
        }
        if (i + 1 >= steps.size()) continue;
        const HybridStep& nx = steps[i + 1];
        if (st.t < steps.back().t) rep.delta_max = std::max(rep.delta_max, st.delta);
        if (!st.differ) {
            if (nx.differ) {
                ++rep.prop4_fail;
                note(nx.t, "gap reappeared after vanishing");
            }
            continue;
        }
        ++rep.transitions_checked;
        Layout L = layout_for(st, nx.request);
        int tbl = table_of(st);
        bool ok = matches(L.rows[static_cast<std::size_t>(L.row - 1)], st, nx);
        int used = L.row;
        if (!ok) {
            // boundary hit: accept the neighbouring row when the request sits on the shared edge
            for (int k = 0; k < static_cast<int>(L.bounds.size()) && !ok; ++k) {
                double b = L.bounds[static_cast<std::size_t>(k)];
                if (std::fabs(L.value - b) > kTol * (1.0 + std::fabs(b))) continue;
                for (int cand : {k + 1, k + 2}) {
                    if (cand == L.row || cand < 1 || cand > static_cast<int>(L.rows.size())) continue;
                    if (matches(L.rows[static_cast<std::size_t>(cand - 1)], st, nx)) {
                        ok = true;
                        used = cand;
                        ++rep.boundary_hits;
                        break;
                    }
                }
            }
        }
        if (tbl == 2)
            ++rep.table2_rows[static_cast<std::size_t>(used - 1)];
        else if (tbl == 3)
            ++rep.table3_rows[static_cast<std::size_t>(used - 1)];
        else if (tbl == 4)
            ++rep.table4_rows[static_cast<std::size_t>(used - 1)];
        else
            ++rep.both_absent;
        if (!ok) {
            ++rep.prop3_fail;
            std::ostringstream os;
            os.precision(17);
            if (tbl == 0)
                os << "transition does not match the both-absent case (r=" << nx.request;
            else
                os << "transition does not match table " << tbl << " row " << L.row << " (r=" << nx.request;
            os << ", gL=" << st.gL << ", gR=" << st.gR << ", s=" << nx.s_m << ", s'=" << nx.s_m1 << ")";
            note(nx.t, os.str());
        }
    }
    rep.cost_diff = trace.cost_m1 - trace.cost_m;
    if (rep.cost_diff > 2.0 * rep.delta_max + 1e-9) {
        rep.cost_bound_ok = false;
        note(m, "cost(H^{m-1}) - cost(H^m) exceeds 2*delta_max");
    }
    return rep;
}

GapSeries gap_series(const HybridTrace& trace) {
    GapSeries g;
    std::size_t last_t = trace.steps.empty() ? 0 : trace.steps.back().t;
    for (const HybridStep& st : trace.steps) {
        if (st.t < trace.m) continue;
        double d = 0;
        if (st.differ) {
            if (!st.single_swap || st.gL != 0 || st.left_in_m || !st.gap_clear)
                throw LinematchError("configuration at t=" + std::to_string(st.t) +
                                     " is not {S' = S + {0} - {min positive of S}}");
            d = st.gR;
        } else if (!g.t_death) {
            g.t_death = st.t;
        }
        g.delta.push_back(d);
        if (st.t < last_t) g.delta_max = std::max(g.delta_max, d);
    }
    return g;
}

Estimate estimate_worstcase_bound(Location x, const std::vector<Location>& servers, double y, std::size_t trials,
                                  std::uint64_t seed) {
    if (trials == 0) throw LinematchError("trials must be > 0");
    if (!(x > 0) || !(y >= x) || y > 1) throw LinematchError("need 0 < x <= y <= 1");
    ServerPool base = ServerPool::from_sorted(servers);
    auto mp = base.min_positive();
    if (!mp || *mp != x) throw LinematchError("x must be the smallest positive server of S");
    ServerPool base2 = base;
    base2.remove(x);
    base2.add_zero();
    std::size_t horizon = servers.empty() ? 0 : servers.size() - 1;
    std::vector<char> hit(trials, 0);
    parallel_for(trials, [&](std::size_t k) {
        if (x >= y) {
            hit[k] = 1;
            return;
        }
        Rng rng(derive_seed(seed, k));
        ServerPool a = base, b = base2;
        DiffTracker diff;
        diff.seed(x, 0.0);
        for (std::size_t step = 0; step < horizon; ++step) {
            double r = rng.uniform();
            Location sa = a.greedy(r), sb = b.greedy(r);
            a.remove(sa);
            b.remove(sb);
            diff.apply(sa, sb);
            if (!diff.differ()) return;
            if (!diff.single_swap()) throw LinematchError("worst-case run left the single-swap shape");
            double d = std::fabs(diff.only_a().front() - diff.only_b().front());
            if (d >= y) {
                hit[k] = 1;
                return;
            }
        }
    });
    std::size_t h = 0;
    for (char c : hit) h += static_cast<std::size_t>(c);
    return binomial_estimate(h, trials);
}

}  // namespace linematch
