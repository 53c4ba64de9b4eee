#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "torus_field.h"

namespace conevortex {

// The gauge-fixing reduction: find f with  lap f + B exp(2f) = w  on the
// torus, B >= 0 not identically zero, integral of w positive.

struct KwProblem {
    RealField B;
    RealField w;

    KwProblem(RealField B_, RealField w_);

    const TorusGrid& grid() const { return B.grid; }
};

enum class KwInfeasibility { none, non_positive_mean_w, degenerate_b };

const char* kw_infeasibility_name(KwInfeasibility r);

struct KwFeasibility {
    bool feasible = false;
    KwInfeasibility reason = KwInfeasibility::none;
    double mean_w = 0.0;
    double max_b = 0.0;
};

// Feasible iff integral(w) > 0 and B is strictly positive on at least one
// cell (the grid surrogate for "positive outside a measure-zero set").
KwFeasibility kw_feasibility(const KwProblem& p);

struct InfeasibleProblem : std::runtime_error {
    KwInfeasibility reason;
    explicit InfeasibleProblem(const KwFeasibility& f);
};

struct MaxIterationsExceeded : std::runtime_error {
    double best_residual;
    int iterations;
    MaxIterationsExceeded(double best, int iters);
};

struct KwOptions {
    std::optional<double> tol;      // sup-norm residual; default 1e-10 spectral, 1e-8 stencil
    std::optional<int> max_iter;    // default 50 Newton sweeps, 20000 Picard sweeps
    Backend backend = Backend::spectral;
    std::optional<RealField> initial_guess;
    double picard_damping = 1.0;

    double effective_tol() const {
        return tol ? *tol : (backend == Backend::spectral ? 1e-10 : 1e-8);
    }
};

enum class KwMethod { newton, picard };

struct KwSolution {
    RealField f;
    double residual_sup = 0.0;          // on the solve backend
    double residual_sup_stencil = 0.0;  // independent stencil re-verification
    int iterations = 0;
    KwMethod method = KwMethod::newton;
    std::vector<double> energy_trace;   // energy at each accepted iterate
};

// Damped Newton on the convex energy
//   E(f) = integral( |grad f|^2/2 + B exp(2f)/2 - w f ),
// Newton systems solved by CG preconditioned with (lap + c)^{-1}.
KwSolution kw_solve(const KwProblem& p, const KwOptions& opts = {});

// Damped fixed-point sweep f += theta (lap + c)^{-1} (w - B exp(2f) - lap f)
// with c = 2 max(B exp(2f)); the independent oracle for uniqueness checks.
KwSolution kw_solve_picard(const KwProblem& p, const KwOptions& opts = {});

double kw_energy(const RealField& f, const KwProblem& p);

// Residual field lap f + B exp(2f) - w on the chosen backend.
RealField kw_residual(const RealField& f, const KwProblem& p, Backend backend = Backend::spectral);

}  // namespace conevortex
