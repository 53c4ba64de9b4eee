#include "vortex_pipeline.h"

#include <algorithm>
#include <cmath>
#include <random>

namespace conevortex {

BelowThreshold::BelowThreshold(double tau_, double threshold_)
    : std::runtime_error("tau = " + std::to_string(tau_) + " does not clear the threshold " +
                         std::to_string(threshold_)),
      tau(tau_),
      threshold(threshold_) {}

NotHolomorphic::NotHolomorphic(double r)
    : std::runtime_error("input section fails the holomorphy tolerance (residual " +
                         std::to_string(r) + ")"),
      residual(r) {}

Configuration::Configuration(std::vector<ComplexSection> u_, UnitaryConnection A_, double tau_)
    : u(std::move(u_)), A(std::move(A_)), tau(tau_) {
    if (u.empty()) throw std::invalid_argument("Configuration: n >= 1 sections required");
    for (const auto& s : u)
        if (!(s.bundle == A.bundle)) throw BundleMismatch();
    if (!std::isfinite(tau)) throw std::invalid_argument("Configuration: tau must be finite");
}

RealField mu_of(const std::vector<ComplexSection>& u) {
    return mu_of(u, WeightedCircleAction::reeb(static_cast<int>(u.size())));
}

RealField mu_of(const std::vector<ComplexSection>& u, const WeightedCircleAction& action) {
    if (u.empty()) throw std::invalid_argument("mu_of: n >= 1 sections required");
    if (!action.is_reeb() || action.dim() != static_cast<int>(u.size())) throw NonReebAction();
    RealField mu(u.front().bundle.grid, 0.0);
    for (const auto& s : u) {
        if (!(s.bundle == u.front().bundle)) throw BundleMismatch();
        const RealField nsq = s.pointwise_norm_sq();
        for (std::size_t i = 0; i < mu.v.size(); ++i) mu.v[i] += 0.5 * nsq.v[i];
    }
    return mu;
}

RealField curvature_scalar(const UnitaryConnection& A, Backend backend) {
    const double bg = kTwoPi * A.bundle.degree / A.bundle.grid.vol();
    RealField curl(A.bundle.grid);
    if (backend == Backend::spectral) {
        const RealField ax_y = deriv_y(A.a_x);
        const RealField ay_x = deriv_x(A.a_y);
        for (std::size_t i = 0; i < curl.v.size(); ++i) curl.v[i] = bg + ax_y.v[i] - ay_x.v[i];
        return curl;
    }
    const TorusGrid& g = A.bundle.grid;
    const double hx = g.hx(), hy = g.hy();
    for (int iy = 0; iy < g.ny; ++iy) {
        const int iyp = (iy + 1) % g.ny, iym = (iy + g.ny - 1) % g.ny;
        for (int ix = 0; ix < g.nx; ++ix) {
            const int ixp = (ix + 1) % g.nx, ixm = (ix + g.nx - 1) % g.nx;
            const double ax_y = (A.a_x.at(ix, iyp) - A.a_x.at(ix, iym)) / (2.0 * hy);
            const double ay_x = (A.a_y.at(ixp, iy) - A.a_y.at(ixm, iy)) / (2.0 * hx);
            curl.at(ix, iy) = bg + ax_y - ay_x;
        }
    }
    return curl;
}

SvResidual sv_residual(const Configuration& cfg, Backend backend) {
    SvResidual out;
    for (const auto& s : cfg.u) {
        Backend be = backend;
        if (be == Backend::spectral && !s.basis) be = Backend::stencil;
        out.dbar_sup = std::max(out.dbar_sup, metric_sup(dbar_section(s, cfg.A, be)));
    }
    const RealField curv = curvature_scalar(cfg.A, backend);
    const RealField mu = mu_of(cfg.u);
    double m = 0.0;
    for (std::size_t i = 0; i < mu.v.size(); ++i)
        m = std::max(m, std::abs(curv.v[i] - cfg.tau + mu.v[i]));
    out.moment_sup = m;
    out.f02_sup = 0.0;  // complex dimension one
    return out;
}

Configuration apply_complex_gauge(const RealField& f, const Configuration& cfg) {
    if (f.grid != cfg.A.bundle.grid)
        throw std::invalid_argument("apply_complex_gauge: gauge field grid mismatch");
    const RealField fx = deriv_x(f), fy = deriv_y(f);
    const RealField lf = laplacian(f, Backend::spectral);

    std::vector<ComplexSection> u_new;
    u_new.reserve(cfg.u.size());
    for (const auto& s : cfg.u) {
        if (s.basis) {
            SectionBasisData data = *s.basis;
            if (data.log_gauge) {
                for (std::size_t i = 0; i < f.v.size(); ++i) data.log_gauge->v[i] += f.v[i];
            } else {
                data.log_gauge = f;
            }
            u_new.push_back(ComplexSection::from_basis(s.bundle, std::move(data)));
        } else {
            ComplexSection t = s;
            for (int iy = 0; iy < f.grid.ny; ++iy)
                for (int ix = 0; ix < f.grid.nx; ++ix) t.at(ix, iy) *= std::exp(f.at(ix, iy));
            u_new.push_back(std::move(t));
        }
    }

    RealField ax = cfg.A.a_x, ay = cfg.A.a_y, curv = cfg.A.curvature;
    for (std::size_t i = 0; i < ax.v.size(); ++i) {
        ax.v[i] -= fy.v[i];
        ay.v[i] += fx.v[i];
        curv.v[i] += lf.v[i];
    }
    return Configuration(std::move(u_new), UnitaryConnection(cfg.A.bundle, std::move(ax),
                                                             std::move(ay), std::move(curv)),
                         cfg.tau);
}

GaugeFixResult hk_gauge_fix(const std::vector<ComplexSection>& u0, const UnitaryConnection& A0,
                            double tau, const HkOptions& opts) {
    if (u0.empty()) throw std::invalid_argument("hk_gauge_fix: n >= 1 sections required");
    for (const auto& s : u0)
        if (!(s.bundle == A0.bundle)) throw BundleMismatch();

    const int d = connection_degree(A0);
    const double vol = A0.bundle.grid.vol();
    const double threshold = kTwoPi * d / vol;
    const double margin = tau - threshold;
    if (margin < opts.threshold_margin_rel * std::max(1.0, std::abs(tau)))
        throw BelowThreshold(tau, threshold);

    const RealField mu0 = mu_of(u0);
    if (!(max_value(mu0) > 0.0)) throw Unstable();

    for (const auto& s : u0) {
        Backend be = opts.backend;
        if (be == Backend::spectral && !s.basis) be = Backend::stencil;
        const double r = metric_sup(dbar_section(s, A0, be));
        // relative to the section scale; the stencil residual is O(h^2) by
        // nature and cannot certify admissibility at this tolerance
        if (be == Backend::spectral && r > opts.holo_tol * std::max(1.0, metric_sup(s)))
            throw NotHolomorphic(r);
    }

    const RealField curv0 = curvature_scalar(A0, Backend::spectral);
    RealField w(curv0.grid);
    for (std::size_t i = 0; i < w.v.size(); ++i) w.v[i] = tau - curv0.v[i];

    KwOptions kw_opts = opts.kw;
    kw_opts.backend = opts.backend;
    // Certificate target is 1e-8; at fine resolutions the sup-residual floor
    // of the spectral evaluation sits near 1e-10, so the pipeline requests a
    // tolerance with headroom on both sides unless the caller pins one.
    if (!kw_opts.tol) kw_opts.tol = (opts.backend == Backend::spectral) ? 1e-9 : 1e-8;
    const KwSolution kw = kw_solve(KwProblem(mu0, w), kw_opts);

    GaugeFixResult out{apply_complex_gauge(kw.f, Configuration(u0, A0, tau)), kw.f, kw, {}, margin};
    out.residual = sv_residual(out.cfg, opts.backend);
    return out;
}

TauVortexResult tau_vortex_solve(const std::vector<std::complex<double>>& coeffs, int d,
                                 double tau, const TorusGrid& grid, const HkOptions& opts) {
    bool any = false;
    for (const auto& c : coeffs) any = any || (c != std::complex<double>(0.0, 0.0));
    if (!any) throw ZeroSection();
    ComplexSection phi0 = theta_combination(d, grid, coeffs);
    UnitaryConnection A0 = background_connection(d, grid);
    GaugeFixResult gf = hk_gauge_fix({phi0}, A0, tau, opts);
    return TauVortexResult{std::move(gf.cfg.u.front()), std::move(gf.cfg.A), std::move(gf.f),
                           std::move(gf.kw), gf.residual, gf.threshold_margin};
}

namespace {

// Full covariant derivative of phi in the holomorphic-frame trivialization:
// D phi = d phi + (del psi + i a) phi, evaluated componentwise.  The metric
// weight derivative is analytic: psi_y = -4 pi d y / L^2, psi_x = 0.
void covariant_derivative(const ComplexSection& phi, const UnitaryConnection& A,
                          ComplexField& dx_out, ComplexField& dy_out) {
    if (!phi.basis)
        throw std::invalid_argument("covariant_derivative: basis data required");
    const TorusGrid& g = phi.bundle.grid;
    const int d = phi.bundle.degree;
    const SectionBasisData& bd = *phi.basis;
    std::optional<RealField> fx, fy;
    if (bd.log_gauge) {
        fx = deriv_x(*bd.log_gauge);
        fy = deriv_y(*bd.log_gauge);
    }
    dx_out = ComplexField(g);
    dy_out = ComplexField(g);
    for (int iy = 0; iy < g.ny; ++iy) {
        const double y = iy * g.hy();
        const double psi_y = -2.0 * kTwoPi * d * y / (g.ly * g.ly);
        for (int ix = 0; ix < g.nx; ++ix) {
            const double x = ix * g.hx();
            std::complex<double> s0{0.0, 0.0}, s0x{0.0, 0.0}, s0y{0.0, 0.0};
            for (int j = 0; j < d; ++j) {
                const ThetaValue tv = theta_eval(d, j, x, y, g.lx);
                s0 += bd.coeffs[j] * tv.value;
                s0x += bd.coeffs[j] * tv.dx;
                s0y += bd.coeffs[j] * tv.dy;
            }
            std::complex<double> lg = bd.const_gauge;
            double gx = 0.0, gy = 0.0;
            if (bd.log_gauge) {
                lg += bd.log_gauge->at(ix, iy);
                gx = fx->at(ix, iy);
                gy = fy->at(ix, iy);
            }
            const std::complex<double> e = std::exp(lg);
            const std::complex<double> phix = e * (s0x + gx * s0);
            const std::complex<double> phiy = e * (s0y + gy * s0);
            const std::complex<double> val = e * s0;
            // del psi = (psi_x - i psi_y)/2 dz with psi_x = 0.
            const std::complex<double> theta_x(0.0, -0.5 * psi_y + A.a_x.at(ix, iy));
            const std::complex<double> theta_y(0.5 * psi_y, A.a_y.at(ix, iy));
            dx_out.at(ix, iy) = phix + theta_x * val;
            dy_out.at(ix, iy) = phiy + theta_y * val;
        }
    }
}

}  // namespace

CorrespondenceReport correspondence_check(const Configuration& cfg, const ComplexSection& phi,
                                          const UnitaryConnection& A_phi, double tau_phi,
                                          Backend backend) {
    if (!(cfg.A.bundle == A_phi.bundle) || cfg.tau != tau_phi) throw ConnectionMismatch();
    if (sup_distance(cfg.A.a_x, A_phi.a_x) > 1e-12 || sup_distance(cfg.A.a_y, A_phi.a_y) > 1e-12)
        throw ConnectionMismatch();

    CorrespondenceReport rep;
    const TorusGrid& g = cfg.A.bundle.grid;
    const RealField mu = mu_of(cfg.u);
    const RealField phi_nsq = phi.pointwise_norm_sq();
    for (std::size_t i = 0; i < mu.v.size(); ++i)
        rep.mu_gap_sup = std::max(rep.mu_gap_sup, std::abs(mu.v[i] - 0.5 * phi_nsq.v[i]));

    // d mu(u) against Re h(phi, D_A phi), both real 1-form components.
    const RealField mux = deriv_x(mu), muy = deriv_y(mu);
    ComplexField dphix, dphiy;
    covariant_derivative(phi, A_phi, dphix, dphiy);
    for (int iy = 0; iy < g.ny; ++iy) {
        const double ew = std::exp(phi.bundle.metric_weight(iy * g.hy()));
        for (int ix = 0; ix < g.nx; ++ix) {
            const std::complex<double> pv = std::conj(phi.at(ix, iy));
            const double rx = (ew * pv * dphix.at(ix, iy)).real();
            const double ry = (ew * pv * dphiy.at(ix, iy)).real();
            rep.dmu_identity_sup = std::max(rep.dmu_identity_sup, std::abs(mux.at(ix, iy) - rx));
            rep.dmu_identity_sup = std::max(rep.dmu_identity_sup, std::abs(muy.at(ix, iy) - ry));
        }
    }

    Backend be = backend;
    if (be == Backend::spectral && !phi.basis) be = Backend::stencil;
    const ComplexSection db = dbar_section(phi, A_phi, be);
    for (int iy = 0; iy < g.ny; ++iy) {
        const double ew = std::exp(phi.bundle.metric_weight(iy * g.hy()));
        for (int ix = 0; ix < g.nx; ++ix) {
            const double p = (ew * std::conj(phi.at(ix, iy)) * db.at(ix, iy)).real();
            rep.dbar_pairing_sup = std::max(rep.dbar_pairing_sup, std::abs(p));
        }
    }
    return rep;
}

PiMapResult pi_map(const Configuration& cfg, double zero_rel_tol, double cert_tol,
                   Backend backend) {
    const SvResidual res = sv_residual(cfg, backend);
    if (res.moment_sup > cert_tol)
        throw std::invalid_argument("pi_map: configuration is not a certified solution "
                                    "(moment residual " + std::to_string(res.moment_sup) + ")");

    PiMapResult out;
    const RealField mu = mu_of(cfg.u);
    out.modulus_sq = mu;
    for (double& x : out.modulus_sq.v) x *= 2.0;
    out.min_mu = min_value(mu);
    out.max_mu = max_value(mu);

    if (cfg.n() == 1) {
        out.divisor = divisor_extract_stable(cfg.u.front());
        return out;
    }

    // Zeros of mu are the common zeros of all components, so intersect the
    // component divisors.  Identically-zero components impose no condition.
    const TorusGrid& g = cfg.A.bundle.grid;
    double overall = 0.0;
    for (const auto& s : cfg.u) overall = std::max(overall, metric_sup(s));
    std::vector<Divisor> divisors;
    for (const auto& s : cfg.u)
        if (metric_sup(s) > zero_rel_tol * overall) divisors.push_back(divisor_extract_stable(s));

    const double match_radius = 3.0 * std::max(g.hx(), g.hy());
    auto torus_dist = [&](const std::array<double, 2>& a, const std::array<double, 2>& b) {
        double dx = std::abs(a[0] - b[0]), dy = std::abs(a[1] - b[1]);
        dx = std::min(dx, g.lx - dx);
        dy = std::min(dy, g.ly - dy);
        return std::hypot(dx, dy);
    };
    Divisor common;
    for (std::size_t i = 0; i < divisors.front().points.size(); ++i) {
        int mult = divisors.front().multiplicities[i];
        bool in_all = true;
        for (std::size_t k = 1; k < divisors.size() && in_all; ++k) {
            bool found = false;
            for (std::size_t j = 0; j < divisors[k].points.size(); ++j)
                if (torus_dist(divisors.front().points[i], divisors[k].points[j]) < match_radius) {
                    mult = std::min(mult, divisors[k].multiplicities[j]);
                    found = true;
                    break;
                }
            in_all = found;
        }
        if (in_all) {
            common.points.push_back(divisors.front().points[i]);
            common.multiplicities.push_back(mult);
        }
    }
    if (!common.points.empty()) out.divisor = std::move(common);
    return out;
}

std::vector<Configuration> fiber_sample(const ComplexSection& phi, const UnitaryConnection& A,
                                        double tau, int n, int count, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("fiber_sample: n >= 1 required");
    if (!phi.basis) throw std::invalid_argument("fiber_sample: basis data required");
    std::mt19937_64 rng(seed);
    auto normal = [&rng]() {
        // Box-Muller on the raw generator; fully pinned by the seed.
        const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
        const double u2 = static_cast<double>(rng() >> 11) * 0x1p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    };
    std::vector<Configuration> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int c = 0; c < count; ++c) {
        std::vector<std::complex<double>> a(static_cast<std::size_t>(n));
        double nrm = 0.0;
        while (nrm == 0.0) {
            for (auto& ak : a) ak = {normal(), normal()};
            for (const auto& ak : a) nrm += std::norm(ak);
            nrm = std::sqrt(nrm);
        }
        std::vector<ComplexSection> u;
        u.reserve(a.size());
        for (const auto& ak : a) u.push_back(phi.scaled(ak / nrm));
        out.emplace_back(std::move(u), A, tau);
    }
    return out;
}

bool gauge_equivalent_samples(const Configuration& a, const Configuration& b, double tol) {
    if (a.n() != b.n()) return false;
    const TorusGrid& g = a.A.bundle.grid;
    // Probe at the sample point where the first configuration is largest.
    int px = 0, py = 0;
    double best = -1.0;
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            double m = 0.0;
            for (const auto& s : a.u) m += std::norm(s.at(ix, iy));
            if (m > best) {
                best = m;
                px = ix;
                py = iy;
            }
        }
    std::optional<std::complex<double>> ratio;
    for (int k = 0; k < a.n(); ++k) {
        const std::complex<double> av = a.u[k].at(px, py), bv = b.u[k].at(px, py);
        if (std::abs(av) < 1e-12 * std::sqrt(best) && std::abs(bv) < 1e-12 * std::sqrt(best))
            continue;  // both components vanish here
        if (std::abs(bv) < 1e-300) return false;
        const std::complex<double> r = av / bv;
        if (std::abs(std::abs(r) - 1.0) > tol) return false;  // not unitary
        if (!ratio) {
            ratio = r;
        } else if (std::abs(r - *ratio) > tol) {
            return false;  // component ratios differ: not one global phase
        }
    }
    return true;
}

}  // namespace conevortex
