#include "linematch/instances.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "linematch/rng.hpp"

namespace linematch {

std::string to_string(LowerBoundMode m) { return m == LowerBoundMode::faithful ? "faithful" : "demo"; }

LowerBoundMode parse_mode(const std::string& s) {
    if (s == "faithful") return LowerBoundMode::faithful;
    if (s == "demo") return LowerBoundMode::demo;
    throw LinematchError("unknown mode '" + s + "'");
}

Constants constants_for(double eps) {
    Constants c{};
    c.eps_hat = eps;
    c.c1 = (2.0 / 9.0) * (1.0 - eps);
    c.c2 = (2.0 / 3.0) * ((1.0 + eps) + (1.0 - eps) / 9.0);
    c.c3 = 0.8 + eps;
    c.d1 = (1.0 - c.c3) / std::log(1.0 / (1.0 - c.c2));
    return c;
}

double base_threshold(std::size_t n) { return std::pow(static_cast<double>(n), -0.2); }

double lower_bound_correction(const LowerBoundParams& p) {
    double n = static_cast<double>(p.n);
    double ln = std::log(n);
    double f = p.mode == LowerBoundMode::faithful ? 4.0 * ln * ln : ln;
    return p.kappa * f * std::sqrt(n);
}

std::uint64_t lower_bound_zero_count(const LowerBoundParams& p) {
    double n = static_cast<double>(p.n);
    return static_cast<std::uint64_t>(std::floor(std::pow(n, 0.8) + lower_bound_correction(p)));
}

double lower_bound_ntilde(const LowerBoundParams& p) {
    double n = static_cast<double>(p.n);
    return n - lower_bound_correction(p) / (1.0 - base_threshold(p.n));
}

std::vector<Location> lower_bound_servers(const LowerBoundParams& p) {
    if (p.n < 2) throw LinematchError("lower-bound instance needs n >= 2");
    std::uint64_t z = lower_bound_zero_count(p);
    if (z > p.n) throw LinematchError("instance infeasible at this n");
    double y0 = base_threshold(p.n);
    double nt = lower_bound_ntilde(p);
    std::vector<Location> s(z, 0.0);
    s.reserve(p.n);
    std::size_t spread = p.n - z;
    for (std::size_t j = 1; j <= spread; ++j) s.push_back(std::min(1.0, y0 + static_cast<double>(j) / nt));
    nudge_duplicates(s);
    return s;
}

void nudge_duplicates(std::vector<Location>& s) {
    std::sort(s.begin(), s.end());
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (s[i] > 0 && s[i] <= s[i - 1]) s[i] = std::nextafter(s[i - 1], 2.0);
    }
    // a run of duplicates at 1 goes downward
    for (std::size_t i = s.size(); i-- > 0;) {
        if (s[i] <= 1.0) break;
        Location cap = (i + 1 < s.size()) ? std::nextafter(s[i + 1], -1.0) : 1.0;
        s[i] = cap;
    }
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i] > 0 && s[i] <= s[i - 1]) throw LinematchError("cannot separate duplicate servers");
}

namespace {

std::vector<Location> uniform_points(Rng& rng, std::size_t k) {
    std::vector<Location> v(k);
    for (auto& x : v) x = rng.uniform();
    return v;
}

}  // namespace

Instance gen_fully_random(std::size_t n, std::uint64_t seed) {
    if (n < 1) throw LinematchError("n must be >= 1");
    Rng rng(splitmix64(seed));
    Instance inst;
    inst.servers = uniform_points(rng, n);
    nudge_duplicates(inst.servers);
    inst.requests = uniform_points(rng, n);
    inst.meta.model = "random";
    inst.meta.params["n"] = static_cast<double>(n);
    inst.meta.seed = seed;
    return inst;
}

Instance gen_excess(std::size_t n, double eps, std::uint64_t seed) {
    if (!(eps > 0)) throw LinematchError("eps must be > 0");
    if (n < 1) throw LinematchError("n must be >= 1");
    auto ns = static_cast<std::size_t>(std::floor((1.0 + eps) * static_cast<double>(n) + 1e-9));
    Rng rng(splitmix64(seed));
    Instance inst;
    inst.servers = uniform_points(rng, ns);
    nudge_duplicates(inst.servers);
    inst.requests = uniform_points(rng, n);
    inst.meta.model = "excess";
    inst.meta.params["n"] = static_cast<double>(n);
    inst.meta.params["eps"] = eps;
    inst.meta.params["servers"] = static_cast<double>(ns);
    inst.meta.seed = seed;
    return inst;
}

Instance gen_lower_bound(const LowerBoundParams& p, std::uint64_t seed) {
    Instance inst;
    inst.servers = lower_bound_servers(p);
    Rng rng(splitmix64(seed));
    inst.requests = uniform_points(rng, p.n);
    inst.meta.model = "lower";
    inst.meta.mode = to_string(p.mode);
    inst.meta.params["n"] = static_cast<double>(p.n);
    inst.meta.params["kappa"] = p.kappa;
    inst.meta.params["eps_hat"] = p.eps_hat;
    inst.meta.seed = seed;
    return inst;
}

std::vector<Location> hg_adversarial_servers(std::size_t n) {
    if (n < 16) throw LinematchError("adversarial instance needs n >= 16");
    double nd = static_cast<double>(n);
    auto cluster = static_cast<std::size_t>(std::llround(std::pow(nd, 0.75)));
    std::vector<Location> s;
    s.reserve(2 * n);
    for (std::size_t j = 1; j + cluster <= n; ++j) s.push_back(static_cast<double>(j) / (2.0 * nd));
    double spot = (1.0 + std::pow(nd, -0.25)) / 2.0;
    for (std::size_t j = 0; j < cluster; ++j) s.push_back(spot);
    for (std::size_t j = n + 1; j <= 2 * n; ++j) s.push_back(static_cast<double>(j) / (2.0 * nd));
    nudge_duplicates(s);
    return s;
}

Instance gen_hg_adversarial(std::size_t n, std::uint64_t seed) {
    Instance inst;
    inst.servers = hg_adversarial_servers(n);
    Rng rng(splitmix64(seed));
    inst.requests = uniform_points(rng, 2 * n);
    inst.meta.model = "hgadv";
    inst.meta.params["n"] = static_cast<double>(n);
    inst.meta.seed = seed;
    return inst;
}

std::string format_hex(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::hex);
    return "0x" + std::string(buf, res.ptr);
}

double parse_hex(const std::string& token) {
    std::string_view v = token;
    bool neg = false;
    if (!v.empty() && v.front() == '-') {
        neg = true;
        v.remove_prefix(1);
    }
    if (v.size() >= 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X')) v.remove_prefix(2);
    double x = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), x, std::chars_format::hex);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) throw LinematchError("bad hex float '" + token + "'");
    return neg ? -x : x;
}

void write_instance(const Instance& inst, std::ostream& out) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : inst.meta.params) params[k] = v;
    if (!inst.meta.mode.empty()) params["mode"] = inst.meta.mode;
    params["seed"] = inst.meta.seed;
    out << "linematch-instance v1 " << inst.meta.model << ' ' << params.dump() << '\n';
    out << "S " << inst.servers.size() << '\n';
    for (double s : inst.servers) out << format_hex(s) << '\n';
    out << "R " << inst.requests.size() << '\n';
    for (double r : inst.requests) out << format_hex(r) << '\n';
}

void write_instance(const Instance& inst, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw LinematchError("cannot open '" + path + "' for writing");
    write_instance(inst, f);
    if (!f) throw LinematchError("write failed for '" + path + "'");
}

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& msg) {
    throw LinematchError("parse error at line " + std::to_string(line) + ": " + msg);
}

std::size_t read_section(std::istream& in, std::size_t& line, char tag, std::vector<Location>& out) {
    std::string text;
    if (!std::getline(in, text)) parse_fail(line + 1, std::string("missing '") + tag + "' section");
    ++line;
    std::istringstream hs(text);
    char t = 0;
    long long count = -1;
    std::string rest;
    if (!(hs >> t >> count) || t != tag || count < 0 || (hs >> rest))
        parse_fail(line, std::string("expected '") + tag + " <count>'");
    out.clear();
    out.reserve(static_cast<std::size_t>(count));
    for (long long i = 0; i < count; ++i) {
        if (!std::getline(in, text)) parse_fail(line + 1, "unexpected end of file");
        ++line;
        while (!text.empty() && (text.back() == '\r' || text.back() == ' ')) text.pop_back();
        double x;
        try {
            x = parse_hex(text);
        } catch (const LinematchError& e) {
            parse_fail(line, e.what());
        }
        if (!valid_location(x)) parse_fail(line, "location outside [0,1]");
        out.push_back(x);
    }
    return line;
}

}  // namespace

Instance read_instance(std::istream& in) {
    Instance inst;
    std::size_t line = 0;
    std::string text;
    if (!std::getline(in, text)) parse_fail(1, "empty file");
    line = 1;
    const std::string magic = "linematch-instance v1 ";
    if (text.rfind(magic, 0) != 0) parse_fail(line, "bad header");
    std::string rest = text.substr(magic.size());
    auto sp = rest.find(' ');
    if (sp == std::string::npos || sp == 0) parse_fail(line, "header needs model and params");
    inst.meta.model = rest.substr(0, sp);
    nlohmann::json params;
    try {
        params = nlohmann::json::parse(rest.substr(sp + 1));
    } catch (const std::exception& e) {
        parse_fail(line, std::string("bad params json: ") + e.what());
    }
    if (!params.is_object()) parse_fail(line, "params must be a json object");
    for (auto it = params.begin(); it != params.end(); ++it) {
        if (it.key() == "mode" && it->is_string())
            inst.meta.mode = it->get<std::string>();
        else if (it.key() == "seed" && it->is_number_unsigned())
            inst.meta.seed = it->get<std::uint64_t>();
        else if (it->is_number())
            inst.meta.params[it.key()] = it->get<double>();
    }
    std::size_t s_start = line + 1;
    read_section(in, line, 'S', inst.servers);
    for (std::size_t i = 1; i < inst.servers.size(); ++i) {
        if (inst.servers[i] < inst.servers[i - 1]) parse_fail(s_start + 1 + i, "servers not sorted");
        if (inst.servers[i] == inst.servers[i - 1] && inst.servers[i] > 0)
            parse_fail(s_start + 1 + i, "duplicate positive server");
    }
    read_section(in, line, 'R', inst.requests);
    while (std::getline(in, text)) {
        ++line;
        if (!text.empty() && text != "\r") parse_fail(line, "trailing content");
    }
    if (inst.requests.size() > inst.servers.size()) parse_fail(line, "more requests than servers");
    return inst;
}

Instance read_instance(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw LinematchError("cannot open '" + path + "'");
    return read_instance(f);
}

}  // namespace linematch
