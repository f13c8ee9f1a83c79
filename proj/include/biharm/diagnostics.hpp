#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "biharm/grid_ops.hpp"

namespace biharm {

enum class Verdict { holds, fails, inconclusive };
std::string to_string(Verdict v);

// exponential balance of t^2 exp(-t^2/K) g(t): sign of (growth rate of log g / t^2) - 1/K
enum class RateClass { subcritical, boundary, supercritical };
std::string to_string(RateClass c);

struct GrowthClassification {
    double K = 1;
    double limsup_infinity = 0;  // +inf when diverging
    double limsup_origin = 0;
    double slope_infinity = 0;   // d log10 q / d log10 t over the tail window
    double slope_origin = 0;
    double rate_gap = 0;         // fitted coefficient of t^2 in log q
    RateClass rate_class = RateClass::boundary;
    double t_max_used = 0;
    Verdict bounded_verdict = Verdict::inconclusive;
    Verdict compact_verdict = Verdict::inconclusive;
};

// log-spaced probes on [1e-4, t_max] with t_max set by overflow of g and of exp(t^2/K)
std::vector<double> default_probes(const std::function<double(double)>& g, double K, int count = 400,
                                   double t_cap = 30.0);

GrowthClassification classify_growth(const std::function<double(double)>& g, double K,
                                     const std::vector<double>& t_probe);

struct ProbeResult {
    double max_ratio = 0;
    std::vector<double> ratios;   // per accepted trial, in input order
    std::vector<int> skipped;     // indices violating the energy constraint
};

ProbeResult bounded_functional_probe(const std::function<double(double)>& g, double K,
                                     const std::vector<RadialField>& trials);

struct RadialProfile;
// same probe on explicit profiles, integrated branch by branch
ProbeResult bounded_functional_probe(const std::function<double(double)>& g, double K,
                                     const std::vector<RadialProfile>& trials);

}  // namespace biharm
