#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "conventions.h"

namespace conevortex {

enum class Backend { spectral, stencil };

const char* backend_name(Backend b);
Backend backend_from_name(const std::string& name);  // throws std::invalid_argument

// Flat square-ish torus R^2 / (lx Z x ly Z), sampled on a regular nx-by-ny
// grid.  Sample (ix, iy) sits at (ix*hx, iy*hy).
struct TorusGrid {
    int nx = 0;
    int ny = 0;
    double lx = 1.0;
    double ly = 1.0;

    TorusGrid() = default;
    TorusGrid(int nx_, int ny_, double lx_ = 1.0, double ly_ = 1.0);

    double hx() const { return lx / nx; }
    double hy() const { return ly / ny; }
    double vol() const { return lx * ly; }
    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }

    bool operator==(const TorusGrid& o) const = default;
};

// Doubly periodic grid-sampled scalar field.  Row-major: v[iy*nx + ix].
struct RealField {
    TorusGrid grid;
    std::vector<double> v;

    RealField() = default;
    explicit RealField(const TorusGrid& g, double fill = 0.0)
        : grid(g), v(g.size(), fill) {}

    double& at(int ix, int iy) { return v[static_cast<std::size_t>(iy) * grid.nx + ix]; }
    double at(int ix, int iy) const { return v[static_cast<std::size_t>(iy) * grid.nx + ix]; }

    static RealField sample(const TorusGrid& g, const std::function<double(double, double)>& f);
};

struct ComplexField {
    TorusGrid grid;
    std::vector<std::complex<double>> v;

    ComplexField() = default;
    explicit ComplexField(const TorusGrid& g, std::complex<double> fill = {})
        : grid(g), v(g.size(), fill) {}

    std::complex<double>& at(int ix, int iy) { return v[static_cast<std::size_t>(iy) * grid.nx + ix]; }
    std::complex<double> at(int ix, int iy) const { return v[static_cast<std::size_t>(iy) * grid.nx + ix]; }

    static ComplexField sample(const TorusGrid& g,
                               const std::function<std::complex<double>(double, double)>& f);
};

// Thrown by poisson_solve when the right-hand side has a non-negligible
// mean: on a closed surface lap g = rhs is solvable only for mean-zero rhs.
struct NonZeroMean : std::runtime_error {
    double mean;
    explicit NonZeroMean(double m);
};

// Rectangle-rule quadrature, hx*hy*sum(v).  Spectrally accurate for smooth
// periodic integrands.
double integrate(const RealField& f);
double mean_value(const RealField& f);
double sup_norm(const RealField& f);
double min_value(const RealField& f);
double max_value(const RealField& f);
double sup_norm(const ComplexField& f);

double sup_distance(const RealField& a, const RealField& b);

// Positive-definite Laplacian, lap = -(d^2/dx^2 + d^2/dy^2).  The spectral
// backend is exact on band-limited fields; the 5-point stencil backend is
// the independent O(h^2) discretization used for cross-checks.
RealField laplacian(const RealField& f, Backend backend = Backend::spectral);

// Unique zero-mean g with lap g = rhs (spectral symbol division).
RealField poisson_solve(const RealField& rhs, double feas_tol = 1e-10);

// dz-bar and dz components of df: dbar f = (f_x + i f_y)/2,
// pdel f = (f_x - i f_y)/2.  Spectral; first-derivative Nyquist modes are
// dropped to keep the operators conjugation-equivariant on even grids.
ComplexField dbar(const RealField& f);
ComplexField dbar(const ComplexField& f);
ComplexField pdel(const RealField& f);
ComplexField pdel(const ComplexField& f);

// Spectral partial derivatives of periodic real fields.
RealField deriv_x(const RealField& f);
RealField deriv_y(const RealField& f);

// Solves (lap + c) g = rhs, c > 0, by symbol division.  Both the spectral
// symbol and the 5-point stencil symbol diagonalize in the Fourier basis,
// so this inverts either discretization exactly.
RealField helmholtz_inverse(const RealField& rhs, double c, Backend backend = Backend::spectral);

// Low-mode trigonometric field with deterministic pseudo-random
// coefficients; kmax modes per direction, sup-amplitude roughly `amplitude`.
RealField random_bandlimited(const TorusGrid& g, int kmax, std::uint64_t seed,
                             double amplitude = 1.0);

}  // namespace conevortex
