#pragma once

#include <optional>
#include <string>
#include <vector>

#include "biharm/functionals.hpp"
#include "biharm/grid_ops.hpp"
#include "biharm/model.hpp"

namespace biharm {

struct SolverOptions {
    int max_iters = 4000;
    double tol = 1e-7;              // weak residual (Nehari) or KKT residual (Pohozaev)
    int stall_window = 25;
    double stall_rel = 1e-10;       // objective plateau over the window
    double stall_residual = 2e-7;   // a plateau only ends the run below this residual
    bool rearrange = true;          // Pohozaev mode only
    int rearrange_interval = 10;
    double mass_target = 1.0;       // Pohozaev gauge ||u||_2^2; <= 0 keeps the mass of the projected init
    bool throw_on_failure = true;
    int trace_stride = 1;
};

struct TraceEntry {
    int iteration = 0;
    double objective = 0;
    double constraint_residual = 0;
    double residual = 0;
};

struct SolveReport {
    std::string mode;
    RadialField field;
    double objective = 0;
    double lagrange_theta = 0;      // Pohozaev mode
    double residual_weak = 0;       // of `field`
    double kkt_residual = 0;        // Pohozaev mode: constrained stationarity
    double gauge_multiplier = 0;    // Pohozaev mode: multiplier of the mass gauge
    double constraint_residual = 0;
    int iterations = 0;
    bool converged = false;
    std::string stop_reason;
    int rearrangements_accepted = 0;
    int rearrangements_rejected = 0;
    std::optional<RadialField> recovered;  // Pohozaev mode: rescaled PDE solution
    double recovered_residual_weak = 0;
    double recovered_energy = 0;
    std::vector<TraceEntry> trace;
};

struct GapReport {
    double m_V = 0;
    double m_infty = 0;
    double gap = 0;
    bool both_positive = false;
    double comparison_level = 0;  // I_V of the m_infty minimizer projected onto the N_V manifold
    double comparison_scale = 0;
    SolveReport solve_V;
    SolveReport solve_infty;
};

// scale s with G(s u) = 0, resp. t with N(t u) = 0
double project_pohozaev(const RadialField& u, const ProblemConfig& config);
double project_nehari(const RadialField& u, const ProblemConfig& config);

// number of sign changes of s -> N(s u) on `count` log-spaced points in [s_lo, s_hi]
struct SignScan {
    int sign_changes = 0;
    double bracket_lo = 0, bracket_hi = 0;
};
SignScan nehari_sign_scan(const RadialField& u, const ProblemConfig& config, double s_lo, double s_hi, int count);
SignScan pohozaev_sign_scan(const RadialField& u, const ProblemConfig& config, double s_lo, double s_hi, int count);

SolveReport minimize_pohozaev(const ProblemConfig& config, const RadialField& init, const SolverOptions& opts = {});
SolveReport minimize_nehari(const ProblemConfig& config, const RadialField& init, const SolverOptions& opts = {});

// same nodal values on the grid scaled by (1 - 2 theta)^{1/(2m)}
RadialField recover_solution(const RadialField& u, double theta, const ProblemConfig& config);

GapReport limiting_gap(const ProblemConfig& config_V, const RadialField& init, const SolverOptions& opts = {});

double residual_weak(const RadialField& u, const ProblemConfig& config);

RadialField default_init(GridPtr grid, double amplitude = 1.0, double width = 1.0);

}  // namespace biharm
