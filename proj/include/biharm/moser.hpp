#pragma once

#include <functional>
#include <string>
#include <vector>

#include "biharm/grid_ops.hpp"
#include "biharm/model.hpp"

namespace biharm {

struct MoserParams {
    double a_k = 0;  // plateau height
    double R_k = 0;  // plateau radius, or exp(-b_k^2/K) for the Moser family
    double b_k = 0;  // Moser height
    double S_k = 1;  // dilation
    double K = 1;    // energy budget parameter

    static MoserParams plateau(double a, double R, double S = 1.0);
    static MoserParams moser(double b, double K, double S = 1.0);
};

// Explicit piecewise radial profile with analytic derivatives on each branch.
// The evaluated function is u(r) = amplitude * base(r/S).
struct ProfilePiece {
    double r0 = 0, r1 = 0;
    bool log_graded = false;
    std::function<double(double)> u, du, d2u;
};

struct RadialProfile {
    int dimension = 4;
    double scale = 1;
    double amplitude = 1;
    std::vector<ProfilePiece> pieces;  // consecutive, zero beyond the last

    double value(double r) const;
    double derivative(double r) const;
    double second_derivative(double r) const;
    double laplacian(double r) const;
    double support() const { return pieces.empty() ? 0.0 : pieces.back().r1 * scale; }
    std::vector<double> branch_radii() const;
};

// quintic with value 0 and slope `slope` at r0, value 0 and slope 0 at r1,
// second derivative 0 at both ends
ProfilePiece quintic_cap(double r0, double r1, double slope);

RadialProfile plateau_profile(const MoserParams& p);
RadialProfile moser_profile(const MoserParams& p);
// same log concentration as moser_profile without the outer cap:
// c (log(1/r) + (r^2-1)/2) on [rho,1] with c = 4K/b, a quadratic core of height b,
// rho = exp(-b^2/(4K)); its energy is 32 pi^2 K up to O(rho^2)
RadialProfile moser_profile_sharp(double b, double K, double S = 1.0);
// classical 2D Moser function: b on [0,rho], (2K/b) log(1/r) on [rho,1], rho = exp(-b^2/(2K))
RadialProfile moser_profile_2d(double b, double K, double S = 1.0);

struct ProfilePoint {
    double r, u, du, lap;
};

// integral over R^n of integrand(point), by composite Gauss-Legendre per branch
double profile_integral(const RadialProfile& p, const std::function<double(const ProfilePoint&)>& integrand);

struct ProfileNorms {
    double l2_sq = 0;
    double lap_l2_sq = 0;   // n=4: int |Delta u|^2; n=2: int |grad u|^2
};
ProfileNorms profile_norms(const RadialProfile& p);

struct GeneratedField {
    RadialField field;
    double snap_offset = 0;  // snapped radius minus requested radius
    MoserParams params;
};

GeneratedField plateau_field(const MoserParams& params, GridPtr grid);
GeneratedField moser_field(const MoserParams& params, GridPtr grid);

RadialField sample_profile(const RadialProfile& p, GridPtr grid);

// u(r/S) by monotone cubic interpolation on the same grid
RadialField dilate(const RadialField& u, double S);

enum class WitnessMode { unbounded_origin, noncompact_origin, unbounded_infinity, noncompact_infinity };
std::string to_string(WitnessMode m);
WitnessMode witness_mode_from_string(const std::string& s);

struct WitnessRow {
    int k = 0;
    double a_k = 0, b_k = 0, R_k = 0, S_k = 1, c_k = 0;
    double l2_sq = 0, lap_l2_sq = 0, G = 0, ratio = 0;
};

struct WitnessReport {
    WitnessMode mode = WitnessMode::unbounded_origin;
    double K = 1;
    std::vector<WitnessRow> rows;
    std::vector<RadialField> fields;
    bool pattern_holds = false;
    std::string pattern;
};

// counterexample sequences for the necessity part of the growth conditions
WitnessReport necessity_witness(const ProblemConfig& config, WitnessMode mode, const std::function<double(double)>& g,
                                double K = 1.0);

}  // namespace biharm
