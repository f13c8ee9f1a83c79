#pragma once

#include <string>
#include <vector>

#include "biharm/grid_ops.hpp"
#include "biharm/model.hpp"

namespace biharm {

struct MassTerms {
    double l2_sq = 0;
    double lap_l2_sq = 0;     // int |Delta u|^2 (n=4) or int |grad u|^2 (n=2)
    double pot_l2_sq = 0;     // int V u^2
    double exp_mass = 0;      // int (exp(a u^2) - 1)
    double exp_weighted = 0;  // int exp(a u^2) u^2
    double F_mass = 0;        // int F(u)
    double fu_mass = 0;       // int f(u) u
};

struct FunctionalReport {
    double energy_I = 0;
    double pohozaev_G = 0;
    double nehari_N = 0;
    MassTerms mass_terms;
};

// pointwise data of the nonlinearity on a field
struct NodalNonlinearity {
    Vec f, F, fprime, V;
};
NodalNonlinearity nodal_terms(const RadialGrid& g, const Vec& u, const ProblemConfig& config, bool with_fprime);

FunctionalReport evaluate_all(const RadialField& u, const ProblemConfig& config);
FunctionalReport evaluate_all(const RadialGrid& g, const Vec& u, const ProblemConfig& config);

// |I(u) - int (f(u)u/2 - F(u))|, which equals |N(u)|/2 up to round-off
double nehari_energy_identity_gap(const RadialField& u, const ProblemConfig& config);

// discrete gradients with respect to nodal values (dual vectors)
Vec gradient_half_principal(const RadialGrid& g, const Vec& u);  // d/du of 1/2 u^T Q u
Vec gradient_energy(const RadialGrid& g, const Vec& u, const ProblemConfig& config);

double energy_I(const RadialGrid& g, const Vec& u, const ProblemConfig& config);

enum class RatioVerdict { finite_evidence, divergence_evidence };
std::string to_string(RatioVerdict v);

struct RatioSample {
    std::string family;
    double param = 0;   // Gaussian width or Moser height b
    double ratio = 0;
};

struct AdamsRatioReport {
    double L = 0;
    double ratio_lower_bound = 0;
    std::string argmax_family;
    double argmax_param = 0;
    double argmax_amplitude = 0;
    double threshold_R = 0;
    RatioVerdict verdict = RatioVerdict::finite_evidence;
    double moser_tail_slope = 0;   // d log ratio / d log b over the tail of the sweep
    std::vector<RatioSample> samples;
};

AdamsRatioReport adams_ratio_search(const ProblemConfig& config, double L, int budget);

}  // namespace biharm
