#include "kazdan_warner.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace conevortex {

namespace {

RealField exp2f_times(const RealField& f, const RealField& B) {
    RealField out(f.grid);
    for (std::size_t i = 0; i < f.v.size(); ++i) out.v[i] = B.v[i] * std::exp(2.0 * f.v[i]);
    return out;
}

double dot(const RealField& a, const RealField& b) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < a.v.size(); ++i) s += static_cast<long double>(a.v[i]) * b.v[i];
    return static_cast<double>(s);
}

double l2(const RealField& a) { return std::sqrt(std::max(0.0, dot(a, a))); }

RealField default_guess(const KwProblem& p) {
    const double mb = mean_value(p.B);
    const double mw = mean_value(p.w);
    double c = 0.0;
    if (mb > 0.0 && mw > 0.0) c = 0.5 * std::log(mw / mb);
    return RealField(p.grid(), c);
}

// CG on (lap + diag(q)) x = b, preconditioned by (lap + mean(q))^{-1}.
RealField newton_step(const RealField& b, const RealField& q, Backend be) {
    const double c = std::max(mean_value(q), 1e-14);
    RealField x(b.grid, 0.0);
    RealField r = b;
    RealField z = helmholtz_inverse(r, c, be);
    RealField pdir = z;
    double rz = dot(r, z);
    const double bnorm = l2(b);
    if (bnorm == 0.0) return x;
    const int max_cg = 400;
    for (int it = 0; it < max_cg; ++it) {
        RealField hp = laplacian(pdir, be);
        for (std::size_t i = 0; i < hp.v.size(); ++i) hp.v[i] += q.v[i] * pdir.v[i];
        const double php = dot(pdir, hp);
        if (!(php > 0.0)) break;  // numerical loss of definiteness
        const double alpha = rz / php;
        for (std::size_t i = 0; i < x.v.size(); ++i) {
            x.v[i] += alpha * pdir.v[i];
            r.v[i] -= alpha * hp.v[i];
        }
        if (l2(r) <= 1e-13 * bnorm) break;
        z = helmholtz_inverse(r, c, be);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < pdir.v.size(); ++i) pdir.v[i] = z.v[i] + beta * pdir.v[i];
    }
    return x;
}

}  // namespace

KwProblem::KwProblem(RealField B_, RealField w_) : B(std::move(B_)), w(std::move(w_)) {
    if (B.grid != w.grid) throw std::invalid_argument("KwProblem: B and w must share a grid");
    const double mn = min_value(B);
    if (mn < -1e-12)
        throw std::invalid_argument("KwProblem: B has negative values (min " + std::to_string(mn) + ")");
    for (double& b : B.v) b = std::max(b, 0.0);
}

const char* kw_infeasibility_name(KwInfeasibility r) {
    switch (r) {
        case KwInfeasibility::non_positive_mean_w: return "NonPositiveMeanW";
        case KwInfeasibility::degenerate_b: return "DegenerateB";
        default: return "None";
    }
}

KwFeasibility kw_feasibility(const KwProblem& p) {
    KwFeasibility out;
    out.mean_w = mean_value(p.w);
    out.max_b = max_value(p.B);
    const double pos_tol = 1e-12 * std::max(1.0, sup_norm(p.w));
    if (!(integrate(p.w) > 0.0)) {
        out.reason = KwInfeasibility::non_positive_mean_w;
        return out;
    }
    if (!(out.max_b > pos_tol)) {
        out.reason = KwInfeasibility::degenerate_b;
        return out;
    }
    out.feasible = true;
    return out;
}

InfeasibleProblem::InfeasibleProblem(const KwFeasibility& f)
    : std::runtime_error(std::string("infeasible Kazdan-Warner problem: ") +
                         kw_infeasibility_name(f.reason)),
      reason(f.reason) {}

MaxIterationsExceeded::MaxIterationsExceeded(double best, int iters)
    : std::runtime_error("solver exceeded max iterations (best sup-residual " +
                         std::to_string(best) + " after " + std::to_string(iters) + ")"),
      best_residual(best),
      iterations(iters) {}

RealField kw_residual(const RealField& f, const KwProblem& p, Backend backend) {
    RealField r = laplacian(f, backend);
    for (std::size_t i = 0; i < r.v.size(); ++i)
        r.v[i] += p.B.v[i] * std::exp(2.0 * f.v[i]) - p.w.v[i];
    return r;
}

double kw_energy(const RealField& f, const KwProblem& p) {
    const RealField fx = deriv_x(f), fy = deriv_y(f);
    RealField density(f.grid);
    for (std::size_t i = 0; i < f.v.size(); ++i)
        density.v[i] = 0.5 * (fx.v[i] * fx.v[i] + fy.v[i] * fy.v[i]) +
                       0.5 * p.B.v[i] * std::exp(2.0 * f.v[i]) - p.w.v[i] * f.v[i];
    return integrate(density);
}

KwSolution kw_solve(const KwProblem& p, const KwOptions& opts) {
    const KwFeasibility feas = kw_feasibility(p);
    if (!feas.feasible) throw InfeasibleProblem(feas);

    const Backend be = opts.backend;
    const double tol = opts.effective_tol();
    const int max_iter = opts.max_iter.value_or(50);

    RealField f = opts.initial_guess ? *opts.initial_guess : default_guess(p);
    if (f.grid != p.grid()) throw std::invalid_argument("kw_solve: initial guess grid mismatch");

    KwSolution sol;
    sol.method = KwMethod::newton;
    double energy = kw_energy(f, p);
    sol.energy_trace.push_back(energy);
    double best = std::numeric_limits<double>::infinity();

    for (int it = 0; it <= max_iter; ++it) {
        RealField res = kw_residual(f, p, be);
        const double res_sup = sup_norm(res);
        best = std::min(best, res_sup);
        if (res_sup <= tol) {
            sol.f = f;
            sol.iterations = it;
            sol.residual_sup = res_sup;
            sol.residual_sup_stencil = sup_norm(kw_residual(f, p, Backend::stencil));
            return sol;
        }
        if (it == max_iter) break;

        RealField q = exp2f_times(f, p.B);
        for (double& qi : q.v) qi *= 2.0;
        RealField b = res;
        for (double& bi : b.v) bi = -bi;
        const RealField delta = newton_step(b, q, be);

        // Armijo backtracking on the convex energy; the directional derivative
        // is the L2 pairing integral(res * delta).
        const double slope = dot(res, delta) * p.grid().hx() * p.grid().hy();
        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            RealField trial = f;
            for (std::size_t i = 0; i < trial.v.size(); ++i) trial.v[i] += t * delta.v[i];
            const double e_trial = kw_energy(trial, p);
            if (e_trial <= energy + 1e-4 * t * slope) {
                f = std::move(trial);
                energy = e_trial;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;  // line search stagnated at roundoff level
        sol.energy_trace.push_back(energy);
    }
    throw MaxIterationsExceeded(best, max_iter);
}

KwSolution kw_solve_picard(const KwProblem& p, const KwOptions& opts) {
    const KwFeasibility feas = kw_feasibility(p);
    if (!feas.feasible) throw InfeasibleProblem(feas);

    const Backend be = opts.backend;
    const double tol = opts.effective_tol();
    const int max_iter = opts.max_iter.value_or(20000);
    const double theta = opts.picard_damping;

    RealField f = opts.initial_guess ? *opts.initial_guess : default_guess(p);
    if (f.grid != p.grid()) throw std::invalid_argument("kw_solve_picard: initial guess grid mismatch");

    KwSolution sol;
    sol.method = KwMethod::picard;
    sol.energy_trace.push_back(kw_energy(f, p));
    double best = std::numeric_limits<double>::infinity();

    for (int it = 0; it <= max_iter; ++it) {
        const RealField be2f = exp2f_times(f, p.B);
        RealField neg_res(f.grid);
        {
            const RealField lf = laplacian(f, be);
            for (std::size_t i = 0; i < f.v.size(); ++i)
                neg_res.v[i] = p.w.v[i] - be2f.v[i] - lf.v[i];
        }
        const double res_sup = sup_norm(neg_res);
        best = std::min(best, res_sup);
        if (res_sup <= tol) {
            sol.f = f;
            sol.iterations = it;
            sol.residual_sup = res_sup;
            sol.residual_sup_stencil = sup_norm(kw_residual(f, p, Backend::stencil));
            return sol;
        }
        if (it == max_iter) break;

        const double c = std::max(2.0 * max_value(be2f), 1e-12);
        const RealField delta = helmholtz_inverse(neg_res, c, be);
        for (std::size_t i = 0; i < f.v.size(); ++i) f.v[i] += theta * delta.v[i];
        sol.energy_trace.push_back(kw_energy(f, p));
    }
    throw MaxIterationsExceeded(best, max_iter);
}

}  // namespace conevortex
