#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cone_target.h"
#include "kazdan_warner.h"
#include "theta_bundle.h"
#include "torus_field.h"

namespace conevortex {

struct BelowThreshold : std::runtime_error {
    double tau, threshold;
    BelowThreshold(double tau_, double threshold_);
};

struct Unstable : std::runtime_error {
    Unstable() : std::runtime_error("map into the cone is identically zero (semistability fails)") {}
};

struct NonReebAction : std::runtime_error {
    NonReebAction()
        : std::runtime_error("moment-map homogeneity holds only for weight-1 actions; "
                             "the gauge-fixing reduction is unavailable") {}
};

struct ZeroSection : std::runtime_error {
    ZeroSection() : std::runtime_error("all section coefficients vanish") {}
};

struct NotHolomorphic : std::runtime_error {
    double residual;
    explicit NotHolomorphic(double r);
};

struct ConnectionMismatch : std::runtime_error {
    ConnectionMismatch() : std::runtime_error("inputs do not share a connection") {}
};

// Pair (u, A) with the deformation parameter tau: n sections of one bundle
// plus a unitary connection on it.
struct Configuration {
    std::vector<ComplexSection> u;
    UnitaryConnection A;
    double tau = 0.0;

    Configuration(std::vector<ComplexSection> u_, UnitaryConnection A_, double tau_);
    int n() const { return static_cast<int>(u.size()); }
};

struct SvResidual {
    double dbar_sup = 0.0;    // max over components, fiber-metric norm
    double moment_sup = 0.0;  // sup |iLF(A) - tau + mu(u)|
    double f02_sup = 0.0;     // identically zero in complex dimension 1
};

// mu(u) = (1/2) sum_k |u_k|^2 exp(metric_weight): the moment map of the
// weight-1 cone target evaluated along u, a doubly periodic field.
RealField mu_of(const std::vector<ComplexSection>& u);
RealField mu_of(const std::vector<ComplexSection>& u, const WeightedCircleAction& action);

// Recomputes curvature iLF(A) from the stored 1-form deformation:
// 2 pi d / vol + (d a_x / dy - d a_y / dx) on the chosen backend.
RealField curvature_scalar(const UnitaryConnection& A, Backend backend = Backend::spectral);

SvResidual sv_residual(const Configuration& cfg, Backend backend = Backend::spectral);

// exp(f) . (u, A): sections scale by exp(f), (a_x, a_y) += (-f_y, +f_x),
// curvature += lap f.  Derivatives are spectral (f is periodic).
Configuration apply_complex_gauge(const RealField& f, const Configuration& cfg);

struct HkOptions {
    Backend backend = Backend::spectral;
    double holo_tol = 1e-8;             // admissibility of the holomorphic input
    double threshold_margin_rel = 1e-8; // tau must clear 2 pi d / vol by this
    KwOptions kw;
};

struct GaugeFixResult {
    Configuration cfg;
    RealField f;
    KwSolution kw;
    SvResidual residual;
    double threshold_margin = 0.0;
};

// The constructive correspondence: given holomorphic (u0, A0) with
// max mu(u0) > 0 and tau above threshold, one Kazdan-Warner solve produces
// the complex gauge exp(f) whose orbit point solves all three equations.
GaugeFixResult hk_gauge_fix(const std::vector<ComplexSection>& u0, const UnitaryConnection& A0,
                            double tau, const HkOptions& opts = {});

struct TauVortexResult {
    ComplexSection phi;
    UnitaryConnection A;
    RealField f;
    KwSolution kw;
    SvResidual residual;
    double threshold_margin = 0.0;
};

// Scalar vortex construction: phi0 from theta coefficients, background
// connection, then the n=1 gauge fix.  Exists iff tau clears the threshold.
TauVortexResult tau_vortex_solve(const std::vector<std::complex<double>>& coeffs, int d,
                                 double tau, const TorusGrid& grid, const HkOptions& opts = {});

struct CorrespondenceReport {
    double mu_gap_sup = 0.0;        // sup |mu(u) - |phi|^2 / 2|
    double dmu_identity_sup = 0.0;  // sup |d mu(u) - Re h(phi, D_A phi)|, both components
    double dbar_pairing_sup = 0.0;  // sup |Re h(phi, dbar_A phi)|
};

CorrespondenceReport correspondence_check(const Configuration& cfg, const ComplexSection& phi,
                                          const UnitaryConnection& A_phi, double tau_phi,
                                          Backend backend = Backend::spectral);

struct PiMapResult {
    RealField modulus_sq;            // 2 mu(u), the pointwise-forced |phi|^2
    std::optional<Divisor> divisor;  // absent = NoDivisor outcome
    double min_mu = 0.0;
    double max_mu = 0.0;
};

// Moduli map to effective divisors: zeros of mu(u).  For n = 1 the winding
// total equals the degree; for n >= 2 the zero set of mu is the
// intersection of the component divisors, and an empty intersection is the
// NoDivisor outcome (min mu reported as the diagnostic).  zero_rel_tol is
// the cutoff below which a component counts as identically zero.
PiMapResult pi_map(const Configuration& cfg, double zero_rel_tol = 1e-6,
                   double cert_tol = 1e-6, Backend backend = Backend::spectral);

// Samples of the fiber of the moduli map over a scalar vortex: u = a * phi
// with random unit a in C^n.  Each sample is itself a certified solution.
std::vector<Configuration> fiber_sample(const ComplexSection& phi, const UnitaryConnection& A,
                                        double tau, int n, int count, std::uint64_t seed);

// True iff two fiber samples differ only by a constant unitary gauge
// (component ratios agree up to one overall phase).
bool gauge_equivalent_samples(const Configuration& a, const Configuration& b, double tol = 1e-8);

}  // namespace conevortex
