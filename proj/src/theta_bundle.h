#pragma once

#include <array>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "torus_field.h"

namespace conevortex {

struct BundleMismatch : std::runtime_error {
    BundleMismatch() : std::runtime_error("section and connection live on different bundles") {}
};

struct NonIntegralDegree : std::runtime_error {
    double value;
    explicit NonIntegralDegree(double v);
};

// A zero of the section sits on (or too close to) a plaquette edge; the
// caller should retry on an offset grid.
struct EdgeZero : std::runtime_error {
    EdgeZero() : std::runtime_error("section vanishes on a plaquette edge") {}
};

// Degree-d holomorphic line bundle over the square torus (modular parameter
// i, so lx == ly is required).  The fixed trivialization is the holomorphic
// frame: section values are periodic in x and quasi-periodic in y with the
// theta factor of automorphy; the fiber metric is exp(metric_weight) with
// metric_weight = -2 pi d (y/ly)^2 on the fundamental domain.
struct LineBundle {
    int degree = 0;
    TorusGrid grid;

    LineBundle() = default;
    LineBundle(int degree_, const TorusGrid& grid_);

    double metric_weight(double y) const;
    RealField metric_weight_field() const;

    // Factor of automorphy: s(x, y + ly) = transition_y(x, y) * s(x, y).
    std::complex<double> transition_y(double x, double y) const;

    bool operator==(const LineBundle& o) const { return degree == o.degree && grid == o.grid; }
};

// Analytic description of a constructed section:
//   values = exp(log_gauge + const_gauge) * sum_j coeffs[j] * theta_j.
// Carried alongside the samples so covariant derivatives can be evaluated
// spectrally (the samples alone are quasi-periodic and cannot be FFT'd).
struct SectionBasisData {
    std::vector<std::complex<double>> coeffs;
    std::optional<RealField> log_gauge;          // periodic real field
    std::complex<double> const_gauge{0.0, 0.0};  // constant complex log-gauge
};

struct ComplexSection {
    LineBundle bundle;
    std::vector<std::complex<double>> v;  // ny*nx samples, row-major
    std::optional<SectionBasisData> basis;

    ComplexSection() = default;
    ComplexSection(const LineBundle& b, std::vector<std::complex<double>> values);

    static ComplexSection from_basis(const LineBundle& b, SectionBasisData data);

    std::complex<double>& at(int ix, int iy) { return v[static_cast<std::size_t>(iy) * bundle.grid.nx + ix]; }
    std::complex<double> at(int ix, int iy) const { return v[static_cast<std::size_t>(iy) * bundle.grid.nx + ix]; }

    // |values|^2 exp(metric_weight): a doubly periodic nonnegative field.
    RealField pointwise_norm_sq() const;

    // Section scaled by a constant (folded into the basis coefficients).
    ComplexSection scaled(std::complex<double> factor) const;
};

// Unitary connection, stored as the purely imaginary deformation
// i (a_x dx + a_y dy) from the Chern connection of the bundle metric.
// curvature holds the full scalar iLF(A) = 2 pi d / vol + curl deformation.
struct UnitaryConnection {
    LineBundle bundle;
    RealField a_x, a_y;
    RealField curvature;

    UnitaryConnection() = default;
    UnitaryConnection(const LineBundle& b, RealField ax, RealField ay, RealField curv);
};

struct Divisor {
    std::vector<std::array<double, 2>> points;
    std::vector<int> multiplicities;

    int degree() const;
};

// Theta function of the degree-d bundle, index j in [0, d), evaluated with
// its x and y derivatives.  Converges to machine precision within ~13 terms.
struct ThetaValue {
    std::complex<double> value, dx, dy;
};
ThetaValue theta_eval(int d, int j, double x, double y, double period);

// d linearly independent holomorphic sections (theta basis).
std::vector<ComplexSection> theta_basis(int d, const TorusGrid& grid);

// Section with the given coefficients in the theta basis.
ComplexSection theta_combination(int d, const TorusGrid& grid,
                                 const std::vector<std::complex<double>>& coeffs);

// Chern connection of the bundle metric: zero deformation, constant
// curvature scalar 2 pi d / vol.
UnitaryConnection background_connection(int d, const TorusGrid& grid);

// dz-bar component of the covariant derivative of s.  The spectral backend
// needs the analytic basis data (periodic log-gauge + theta derivatives);
// the stencil backend works on raw samples using transition-factor ghost
// rows at the y seam.
ComplexSection dbar_section(const ComplexSection& s, const UnitaryConnection& A,
                            Backend backend = Backend::spectral);

// sup of the fiber-metric norm |value| exp(metric_weight/2); the
// gauge-invariant size of a section-valued quantity.
double metric_sup(const ComplexSection& s);

// Rounds integral(curvature)/2pi; throws NonIntegralDegree beyond 1e-6.
int connection_degree(const UnitaryConnection& A);

// Winding-number divisor extraction: per-plaquette phase circulation of the
// samples, with sub-pixel Newton refinement of simple zeros.  Throws
// EdgeZero when a zero sits on the plaquette skeleton.
Divisor divisor_extract(const ComplexSection& s);

// Retries divisor_extract on slightly offset grids (requires basis data to
// re-evaluate the theta part; the real-exponential gauge factor never
// vanishes and is skipped).
Divisor divisor_extract_stable(const ComplexSection& s, int max_retries = 4);

// Quasi-periodicity defect of the stored samples against the basis data,
// relative sup over the y seam.  Requires basis data.
double seam_defect(const ComplexSection& s);

}  // namespace conevortex
