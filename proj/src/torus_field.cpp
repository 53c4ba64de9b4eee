#include "torus_field.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>
#include <type_traits>

namespace conevortex {

namespace {

// The FFTW planner is not thread-safe; execution is.
std::mutex g_fftw_mutex;

class Fft2 {
public:
    Fft2(int nx, int ny) : nx_(nx), ny_(ny) {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        data_ = fftw_alloc_complex(static_cast<std::size_t>(nx) * ny);
        if (!data_) throw std::bad_alloc();
        fwd_ = fftw_plan_dft_2d(ny, nx, data_, data_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_2d(ny, nx, data_, data_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~Fft2() {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(data_);
    }
    Fft2(const Fft2&) = delete;
    Fft2& operator=(const Fft2&) = delete;

    std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(data_); }
    void forward() { fftw_execute(fwd_); }
    void backward() { fftw_execute(bwd_); }

    int nx() const { return nx_; }
    int ny() const { return ny_; }

private:
    int nx_, ny_;
    fftw_complex* data_;
    fftw_plan fwd_, bwd_;
};

inline int freq(int j, int n) { return j <= n / 2 ? j : j - n; }

// Applies a Fourier-space multiplier to a complex field in place.
// symbol(kappa_x, kappa_y, is_nyquist_x, is_nyquist_y) -> complex factor.
template <class SymbolFn>
void apply_symbol(ComplexField& f, SymbolFn symbol) {
    const int nx = f.grid.nx, ny = f.grid.ny;
    Fft2 fft(nx, ny);
    std::copy(f.v.begin(), f.v.end(), fft.data());
    fft.forward();
    std::complex<double>* a = fft.data();
    for (int iy = 0; iy < ny; ++iy) {
        const int ky = freq(iy, ny);
        const double kappa_y = kTwoPi * ky / f.grid.ly;
        const bool nyq_y = (2 * iy == ny);
        for (int ix = 0; ix < nx; ++ix) {
            const int kx = freq(ix, nx);
            const double kappa_x = kTwoPi * kx / f.grid.lx;
            const bool nyq_x = (2 * ix == nx);
            a[static_cast<std::size_t>(iy) * nx + ix] *= symbol(kappa_x, kappa_y, nyq_x, nyq_y);
        }
    }
    fft.backward();
    const double scale = 1.0 / (static_cast<double>(nx) * ny);
    for (std::size_t i = 0; i < f.v.size(); ++i) f.v[i] = a[i] * scale;
}

ComplexField to_complex(const RealField& f) {
    ComplexField c(f.grid);
    for (std::size_t i = 0; i < f.v.size(); ++i) c.v[i] = f.v[i];
    return c;
}

RealField real_part(const ComplexField& f) {
    RealField r(f.grid);
    for (std::size_t i = 0; i < f.v.size(); ++i) r.v[i] = f.v[i].real();
    return r;
}

template <class Field>
ComplexField dbar_impl(const Field& f, double sign_y) {
    // (f_x + sign_y * i f_y)/2; Nyquist first-derivative modes dropped.
    ComplexField fx = [&] {
        if constexpr (std::is_same_v<Field, RealField>) return to_complex(f);
        else return f;
    }();
    ComplexField fy = fx;
    apply_symbol(fx, [](double kx, double, bool nx_, bool) {
        return nx_ ? std::complex<double>(0.0) : std::complex<double>(0.0, kx);
    });
    apply_symbol(fy, [](double, double ky, bool, bool ny_) {
        return ny_ ? std::complex<double>(0.0) : std::complex<double>(0.0, ky);
    });
    ComplexField out(fx.grid);
    const std::complex<double> ihalf(0.0, 0.5 * sign_y);
    for (std::size_t i = 0; i < out.v.size(); ++i)
        out.v[i] = 0.5 * fx.v[i] + ihalf * fy.v[i];
    return out;
}

}  // namespace

const char* backend_name(Backend b) {
    return b == Backend::spectral ? "spectral" : "stencil";
}

Backend backend_from_name(const std::string& name) {
    if (name == "spectral") return Backend::spectral;
    if (name == "stencil") return Backend::stencil;
    throw std::invalid_argument("unknown backend '" + name + "' (expected spectral|stencil)");
}

TorusGrid::TorusGrid(int nx_, int ny_, double lx_, double ly_)
    : nx(nx_), ny(ny_), lx(lx_), ly(ly_) {
    if (nx < 8 || ny < 8 || nx % 2 != 0 || ny % 2 != 0)
        throw std::invalid_argument("TorusGrid: nx, ny must be even and >= 8");
    if (!(lx > 0.0) || !(ly > 0.0))
        throw std::invalid_argument("TorusGrid: periods must be positive");
}

RealField RealField::sample(const TorusGrid& g, const std::function<double(double, double)>& f) {
    RealField out(g);
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix)
            out.at(ix, iy) = f(ix * g.hx(), iy * g.hy());
    return out;
}

ComplexField ComplexField::sample(const TorusGrid& g,
                                  const std::function<std::complex<double>(double, double)>& f) {
    ComplexField out(g);
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix)
            out.at(ix, iy) = f(ix * g.hx(), iy * g.hy());
    return out;
}

NonZeroMean::NonZeroMean(double m)
    : std::runtime_error("poisson_solve: right-hand side has nonzero mean " + std::to_string(m)),
      mean(m) {}

double integrate(const RealField& f) {
    long double acc = 0.0L;
    for (double x : f.v) acc += x;
    return static_cast<double>(acc * f.grid.hx() * f.grid.hy());
}

double mean_value(const RealField& f) { return integrate(f) / f.grid.vol(); }

double sup_norm(const RealField& f) {
    double m = 0.0;
    for (double x : f.v) m = std::max(m, std::abs(x));
    return m;
}

double min_value(const RealField& f) {
    double m = f.v.empty() ? 0.0 : f.v[0];
    for (double x : f.v) m = std::min(m, x);
    return m;
}

double max_value(const RealField& f) {
    double m = f.v.empty() ? 0.0 : f.v[0];
    for (double x : f.v) m = std::max(m, x);
    return m;
}

double sup_norm(const ComplexField& f) {
    double m = 0.0;
    for (const auto& x : f.v) m = std::max(m, std::abs(x));
    return m;
}

double sup_distance(const RealField& a, const RealField& b) {
    if (a.grid != b.grid) throw std::invalid_argument("sup_distance: grid mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
    return m;
}

RealField laplacian(const RealField& f, Backend backend) {
    if (backend == Backend::spectral) {
        ComplexField c = to_complex(f);
        apply_symbol(c, [](double kx, double ky, bool, bool) {
            return std::complex<double>(kx * kx + ky * ky, 0.0);
        });
        return real_part(c);
    }
    const TorusGrid& g = f.grid;
    const double ihx2 = 1.0 / (g.hx() * g.hx());
    const double ihy2 = 1.0 / (g.hy() * g.hy());
    RealField out(g);
    for (int iy = 0; iy < g.ny; ++iy) {
        const int iyp = (iy + 1) % g.ny, iym = (iy + g.ny - 1) % g.ny;
        for (int ix = 0; ix < g.nx; ++ix) {
            const int ixp = (ix + 1) % g.nx, ixm = (ix + g.nx - 1) % g.nx;
            const double c = f.at(ix, iy);
            out.at(ix, iy) = -((f.at(ixp, iy) - 2.0 * c + f.at(ixm, iy)) * ihx2 +
                               (f.at(ix, iyp) - 2.0 * c + f.at(ix, iym)) * ihy2);
        }
    }
    return out;
}

RealField poisson_solve(const RealField& rhs, double feas_tol) {
    const double m = mean_value(rhs);
    if (std::abs(m) > feas_tol * std::max(1.0, sup_norm(rhs))) throw NonZeroMean(m);
    ComplexField c = to_complex(rhs);
    apply_symbol(c, [](double kx, double ky, bool, bool) {
        const double s = kx * kx + ky * ky;
        return s > 0.0 ? std::complex<double>(1.0 / s, 0.0) : std::complex<double>(0.0);
    });
    return real_part(c);
}

ComplexField dbar(const RealField& f) { return dbar_impl(f, +1.0); }
ComplexField dbar(const ComplexField& f) { return dbar_impl(f, +1.0); }
ComplexField pdel(const RealField& f) { return dbar_impl(f, -1.0); }
ComplexField pdel(const ComplexField& f) { return dbar_impl(f, -1.0); }

RealField deriv_x(const RealField& f) {
    ComplexField c = to_complex(f);
    apply_symbol(c, [](double kx, double, bool nx_, bool) {
        return nx_ ? std::complex<double>(0.0) : std::complex<double>(0.0, kx);
    });
    return real_part(c);
}

RealField deriv_y(const RealField& f) {
    ComplexField c = to_complex(f);
    apply_symbol(c, [](double, double ky, bool, bool ny_) {
        return ny_ ? std::complex<double>(0.0) : std::complex<double>(0.0, ky);
    });
    return real_part(c);
}

RealField helmholtz_inverse(const RealField& rhs, double c, Backend backend) {
    if (!(c > 0.0)) throw std::invalid_argument("helmholtz_inverse: c must be positive");
    ComplexField cf = to_complex(rhs);
    const double hx = rhs.grid.hx(), hy = rhs.grid.hy();
    if (backend == Backend::spectral) {
        apply_symbol(cf, [c](double kx, double ky, bool, bool) {
            return std::complex<double>(1.0 / (kx * kx + ky * ky + c), 0.0);
        });
    } else {
        apply_symbol(cf, [c, hx, hy](double kx, double ky, bool, bool) {
            const double sx = 2.0 * std::sin(0.5 * kx * hx) / hx;
            const double sy = 2.0 * std::sin(0.5 * ky * hy) / hy;
            return std::complex<double>(1.0 / (sx * sx + sy * sy + c), 0.0);
        });
    }
    return real_part(cf);
}

RealField random_bandlimited(const TorusGrid& g, int kmax, std::uint64_t seed, double amplitude) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    struct Mode {
        int k, m;
        double a, b;  // a*cos + b*sin
    };
    std::vector<Mode> modes;
    for (int k = 0; k <= kmax; ++k)
        for (int m = -kmax; m <= kmax; ++m) {
            if (k == 0 && m <= 0) continue;  // one representative per conjugate pair
            modes.push_back({k, m, unif(rng), unif(rng)});
        }
    RealField out(g);
    double peak = 0.0;
    for (const Mode& md : modes) peak += std::abs(md.a) + std::abs(md.b);
    const double scale = peak > 0.0 ? amplitude / peak : 0.0;
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            const double x = ix * g.hx(), y = iy * g.hy();
            double s = 0.0;
            for (const Mode& md : modes) {
                const double ph = kTwoPi * (md.k * x / g.lx + md.m * y / g.ly);
                s += md.a * std::cos(ph) + md.b * std::sin(ph);
            }
            out.at(ix, iy) = scale * s;
        }
    return out;
}

}  // namespace conevortex
