#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "linematch/core.hpp"

namespace linematch {

enum class LowerBoundMode { faithful, demo };

std::string to_string(LowerBoundMode m);
LowerBoundMode parse_mode(const std::string& s);

struct LowerBoundParams {
    std::size_t n = 0;
    LowerBoundMode mode = LowerBoundMode::demo;
    double kappa = 1.0;
    double eps_hat = 0.01;
};

struct Constants {
    double eps_hat, c1, c2, c3, d1;
};

Constants constants_for(double eps_hat);

// n^{-1/5}
double base_threshold(std::size_t n);

// log-correction term: kappa*4 ln^2(n) sqrt(n) (faithful) or kappa*ln(n) sqrt(n) (demo)
double lower_bound_correction(const LowerBoundParams& p);
// floor(n^{4/5} + correction); may exceed n
std::uint64_t lower_bound_zero_count(const LowerBoundParams& p);
double lower_bound_ntilde(const LowerBoundParams& p);
// deterministic server layout of the lower-bound instance
std::vector<Location> lower_bound_servers(const LowerBoundParams& p);

Instance gen_fully_random(std::size_t n, std::uint64_t seed);
Instance gen_excess(std::size_t n, double eps, std::uint64_t seed);
Instance gen_lower_bound(const LowerBoundParams& p, std::uint64_t seed);
Instance gen_hg_adversarial(std::size_t n, std::uint64_t seed);

std::vector<Location> hg_adversarial_servers(std::size_t n);

// sort, then push repeated positive values up by one ulp each
void nudge_duplicates(std::vector<Location>& servers);

std::string format_hex(double x);
double parse_hex(const std::string& token);

void write_instance(const Instance& inst, std::ostream& out);
void write_instance(const Instance& inst, const std::string& path);
Instance read_instance(std::istream& in);
Instance read_instance(const std::string& path);

}  // namespace linematch
