#pragma once

#include <memory>

#include "biharm/grid_ops.hpp"

namespace biharm {

// radial Fourier profile on the frequency grid rho_j (same layout as the radial grid)
struct SpectralProfile {
    GridPtr grid;
    Vec values;
};

// unitary self-inverse Hankel matrix for the grid, cached per (r_max, N, n)
std::shared_ptr<const Eigen::MatrixXd> hankel_kernel(const RadialGrid& g);

SpectralProfile fourier_radial(const RadialField& u);
RadialField inverse_fourier_radial(const SpectralProfile& p);

SpectralProfile schwarz_profile(const SpectralProfile& p);

struct RearrangeTolerances {
    double mass_rel = 1e-6;
    double lap_rel = 1e-6;
    double exp_rel = 1e-6;
};

struct RearrangeChecks {
    double l2_u = 0, l2_w = 0, mass_rel_err = 0;
    double lap_u = 0, lap_w = 0;  // ||Delta .||_2
    double exp_u = 0, exp_w = 0;  // int (exp(a .^2) - 1)
    bool mass_ok = false, lap_ok = false, exp_ok = false;
    bool flagged = true;
    bool escalate = false;  // exp-mass decrease beyond 1e-4 relative
};

struct RearrangeResult {
    RadialField w;
    RearrangeChecks checks;
};

// w = inverse(schwarz(fourier(u))) with the three property checks attached;
// exp_rate is a in exp(a u^2), 2 in R^4 and 1 in R^2 by default
RearrangeResult fourier_rearrange(const RadialField& u, const RearrangeTolerances& tol = {}, double exp_rate = 0);

}  // namespace biharm
