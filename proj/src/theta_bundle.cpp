#include "theta_bundle.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace conevortex {

NonIntegralDegree::NonIntegralDegree(double v)
    : std::runtime_error("connection curvature integrates to non-integral degree " +
                         std::to_string(v)),
      value(v) {}

LineBundle::LineBundle(int degree_, const TorusGrid& grid_) : degree(degree_), grid(grid_) {
    if (degree < 1) throw std::invalid_argument("LineBundle: degree >= 1 required");
    if (grid.lx != grid.ly)
        throw std::invalid_argument("LineBundle: modular parameter is fixed to i (lx == ly)");
}

double LineBundle::metric_weight(double y) const {
    const double t = y / grid.ly;
    return -kTwoPi * degree * t * t;
}

RealField LineBundle::metric_weight_field() const {
    RealField out(grid);
    for (int iy = 0; iy < grid.ny; ++iy) {
        const double w = metric_weight(iy * grid.hy());
        for (int ix = 0; ix < grid.nx; ++ix) out.at(ix, iy) = w;
    }
    return out;
}

std::complex<double> LineBundle::transition_y(double x, double y) const {
    const double L = grid.ly;
    const double mag = std::exp(kPi * degree + kTwoPi * degree * y / L);
    const double phase = -kTwoPi * degree * x / L;
    return std::polar(mag, phase);
}

ThetaValue theta_eval(int d, int j, double x, double y, double period) {
    const double L = period;
    const double u = x / L, v = y / L;
    // Gaussian tail: terms with pi*d*(a+v)^2 - pi*d*v^2 > ~46 are below 1e-20
    // of the peak.  v stays in [-0.5, 1.5] for all callers (grid + ghosts).
    const int reach = static_cast<int>(std::ceil(std::sqrt(46.0 / (kPi * d)))) + 1;
    ThetaValue out{{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
    for (int n = -reach - 3; n <= reach + 2; ++n) {
        const double a = n + static_cast<double>(j) / d;
        const double expo = -kPi * d * a * a - kTwoPi * d * a * v;
        const double phase = kTwoPi * d * a * u;
        const std::complex<double> term = std::exp(expo) *
            std::complex<double>(std::cos(phase), std::sin(phase));
        const double da = kTwoPi * d * a / L;
        out.value += term;
        out.dx += std::complex<double>(0.0, da) * term;
        out.dy += -da * term;
    }
    return out;
}

ComplexSection::ComplexSection(const LineBundle& b, std::vector<std::complex<double>> values)
    : bundle(b), v(std::move(values)) {
    if (v.size() != bundle.grid.size())
        throw std::invalid_argument("ComplexSection: value count does not match grid");
}

ComplexSection ComplexSection::from_basis(const LineBundle& b, SectionBasisData data) {
    if (static_cast<int>(data.coeffs.size()) != b.degree)
        throw std::invalid_argument("ComplexSection: need one coefficient per theta index");
    if (data.log_gauge && data.log_gauge->grid != b.grid)
        throw std::invalid_argument("ComplexSection: log_gauge grid mismatch");
    const TorusGrid& g = b.grid;
    std::vector<std::complex<double>> vals(g.size());
    for (int iy = 0; iy < g.ny; ++iy) {
        const double y = iy * g.hy();
        for (int ix = 0; ix < g.nx; ++ix) {
            const double x = ix * g.hx();
            std::complex<double> s0{0.0, 0.0};
            for (int j = 0; j < b.degree; ++j)
                s0 += data.coeffs[j] * theta_eval(b.degree, j, x, y, g.lx).value;
            std::complex<double> lg = data.const_gauge;
            if (data.log_gauge) lg += data.log_gauge->at(ix, iy);
            vals[static_cast<std::size_t>(iy) * g.nx + ix] = std::exp(lg) * s0;
        }
    }
    ComplexSection s(b, std::move(vals));
    s.basis = std::move(data);
    return s;
}

RealField ComplexSection::pointwise_norm_sq() const {
    const TorusGrid& g = bundle.grid;
    RealField out(g);
    for (int iy = 0; iy < g.ny; ++iy) {
        const double ew = std::exp(bundle.metric_weight(iy * g.hy()));
        for (int ix = 0; ix < g.nx; ++ix) out.at(ix, iy) = std::norm(at(ix, iy)) * ew;
    }
    return out;
}

ComplexSection ComplexSection::scaled(std::complex<double> factor) const {
    ComplexSection out = *this;
    for (auto& z : out.v) z *= factor;
    if (out.basis)
        for (auto& c : out.basis->coeffs) c *= factor;
    return out;
}

UnitaryConnection::UnitaryConnection(const LineBundle& b, RealField ax, RealField ay, RealField curv)
    : bundle(b), a_x(std::move(ax)), a_y(std::move(ay)), curvature(std::move(curv)) {
    if (a_x.grid != b.grid || a_y.grid != b.grid || curvature.grid != b.grid)
        throw std::invalid_argument("UnitaryConnection: component grid mismatch");
}

int Divisor::degree() const {
    return std::accumulate(multiplicities.begin(), multiplicities.end(), 0);
}

std::vector<ComplexSection> theta_basis(int d, const TorusGrid& grid) {
    LineBundle b(d, grid);
    std::vector<ComplexSection> out;
    out.reserve(d);
    for (int j = 0; j < d; ++j) {
        SectionBasisData data;
        data.coeffs.assign(d, {0.0, 0.0});
        data.coeffs[j] = 1.0;
        out.push_back(ComplexSection::from_basis(b, std::move(data)));
    }
    return out;
}

ComplexSection theta_combination(int d, const TorusGrid& grid,
                                 const std::vector<std::complex<double>>& coeffs) {
    LineBundle b(d, grid);
    SectionBasisData data;
    data.coeffs = coeffs;
    return ComplexSection::from_basis(b, std::move(data));
}

UnitaryConnection background_connection(int d, const TorusGrid& grid) {
    LineBundle b(d, grid);
    RealField zero(grid, 0.0);
    RealField curv(grid, kTwoPi * d / grid.vol());
    return UnitaryConnection(b, zero, RealField(grid, 0.0), std::move(curv));
}

ComplexSection dbar_section(const ComplexSection& s, const UnitaryConnection& A, Backend backend) {
    if (!(s.bundle == A.bundle)) throw BundleMismatch();
    const TorusGrid& g = s.bundle.grid;
    const int d = s.bundle.degree;
    std::vector<std::complex<double>> out(g.size());

    if (backend == Backend::spectral) {
        if (!s.basis)
            throw std::invalid_argument(
                "dbar_section: raw samples are quasi-periodic and cannot be differentiated "
                "spectrally; use the stencil backend or a section with basis data");
        const SectionBasisData& bd = *s.basis;
        std::optional<ComplexField> dbar_lg;
        if (bd.log_gauge) dbar_lg = dbar(*bd.log_gauge);
        for (int iy = 0; iy < g.ny; ++iy) {
            const double y = iy * g.hy();
            for (int ix = 0; ix < g.nx; ++ix) {
                const double x = ix * g.hx();
                std::complex<double> s0{0.0, 0.0}, s0x{0.0, 0.0}, s0y{0.0, 0.0};
                for (int j = 0; j < d; ++j) {
                    const ThetaValue tv = theta_eval(d, j, x, y, g.lx);
                    s0 += bd.coeffs[j] * tv.value;
                    s0x += bd.coeffs[j] * tv.dx;
                    s0y += bd.coeffs[j] * tv.dy;
                }
                std::complex<double> acc = 0.5 * (s0x + std::complex<double>(0.0, 1.0) * s0y);
                if (dbar_lg) acc += dbar_lg->at(ix, iy) * s0;
                acc += 0.5 * std::complex<double>(-A.a_y.at(ix, iy), A.a_x.at(ix, iy)) * s0;
                std::complex<double> lg = bd.const_gauge;
                if (bd.log_gauge) lg += bd.log_gauge->at(ix, iy);
                out[static_cast<std::size_t>(iy) * g.nx + ix] = std::exp(lg) * acc;
            }
        }
        return ComplexSection(s.bundle, std::move(out));
    }

    // Stencil: centered differences on the samples; the y seam uses the
    // factor of automorphy, which extends the section smoothly.
    const double hx = g.hx(), hy = g.hy();
    auto value_at = [&](int ix, int iy) -> std::complex<double> {
        const int jx = (ix % g.nx + g.nx) % g.nx;
        if (iy >= 0 && iy < g.ny) return s.at(jx, iy);
        const double x = jx * hx;
        if (iy == g.ny) return s.bundle.transition_y(x, 0.0) * s.at(jx, 0);
        if (iy == -1) return s.at(jx, g.ny - 1) / s.bundle.transition_y(x, -hy);
        throw std::logic_error("dbar_section: ghost row out of range");
    };
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            const std::complex<double> sx = (value_at(ix + 1, iy) - value_at(ix - 1, iy)) / (2.0 * hx);
            const std::complex<double> sy = (value_at(ix, iy + 1) - value_at(ix, iy - 1)) / (2.0 * hy);
            std::complex<double> acc = 0.5 * (sx + std::complex<double>(0.0, 1.0) * sy);
            acc += 0.5 * std::complex<double>(-A.a_y.at(ix, iy), A.a_x.at(ix, iy)) * s.at(ix, iy);
            out[static_cast<std::size_t>(iy) * g.nx + ix] = acc;
        }
    return ComplexSection(s.bundle, std::move(out));
}

double metric_sup(const ComplexSection& s) {
    const TorusGrid& g = s.bundle.grid;
    double m = 0.0;
    for (int iy = 0; iy < g.ny; ++iy) {
        const double half_w = std::exp(0.5 * s.bundle.metric_weight(iy * g.hy()));
        for (int ix = 0; ix < g.nx; ++ix) m = std::max(m, std::abs(s.at(ix, iy)) * half_w);
    }
    return m;
}

int connection_degree(const UnitaryConnection& A) {
    const double val = integrate(A.curvature) / kTwoPi;
    const double rounded = std::round(val);
    if (std::abs(val - rounded) > 1e-6) throw NonIntegralDegree(val);
    return static_cast<int>(rounded);
}

namespace {

// Node sample for winding extraction: value plus the derivative magnitudes
// along each axis (zero when only raw grid values are available).
struct NodeSample {
    std::complex<double> v;
    double dx_abs = 0.0;
    double dy_abs = 0.0;
};

// Evaluates the theta part of a section (the gauge factor drops out of all
// phase differences) at an arbitrary point.
NodeSample eval_theta_part(const LineBundle& b, const std::vector<std::complex<double>>& coeffs,
                           double x, double y) {
    std::complex<double> v{0.0, 0.0}, dx{0.0, 0.0}, dy{0.0, 0.0};
    for (int j = 0; j < b.degree; ++j) {
        const ThetaValue tv = theta_eval(b.degree, j, x, y, b.grid.lx);
        v += coeffs[j] * tv.value;
        dx += coeffs[j] * tv.dx;
        dy += coeffs[j] * tv.dy;
    }
    return {v, std::abs(dx), std::abs(dy)};
}

// Winding extraction over a node lattice covering rows 0..ny (the row at
// y = offset_y + ly included) and columns 0..nx-1 with x-periodic wrap.
class WindingExtractor {
public:
    WindingExtractor(const LineBundle& bundle, std::vector<NodeSample> nodes, double ox, double oy,
                     const std::vector<std::complex<double>>* coeffs)
        : b_(bundle), nodes_(std::move(nodes)), ox_(ox), oy_(oy), coeffs_(coeffs) {
        double max_abs = 0.0;
        for (int iy = 0; iy < b_.grid.ny; ++iy)
            for (int ix = 0; ix < b_.grid.nx; ++ix)
                max_abs = std::max(max_abs, std::abs(node(ix, iy).v));
        if (max_abs == 0.0) throw std::invalid_argument("divisor_extract: zero section");
        tol_ = 1e-13 * max_abs;
    }

    Divisor run() {
        const TorusGrid& g = b_.grid;
        const double hx = g.hx(), hy = g.hy();
        Divisor div;
        int total = 0;
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix) {
                const double circulation = step_x(ix, iy) + step_y(ix + 1, iy) -
                                           step_x(ix, iy + 1) - step_y(ix, iy);
                const long wind = std::lround(circulation / kTwoPi);
                if (wind == 0) continue;
                if (wind < 0)
                    throw std::runtime_error("divisor_extract: negative winding (input is not "
                                             "close to holomorphic)");
                double px = ox_ + (ix + 0.5) * hx;
                double py = oy_ + (iy + 0.5) * hy;
                if (wind == 1) refine_location(ix, iy, px, py);
                px -= g.lx * std::floor(px / g.lx);
                py -= g.ly * std::floor(py / g.ly);
                div.points.push_back({px, py});
                div.multiplicities.push_back(static_cast<int>(wind));
                total += static_cast<int>(wind);
            }
        // All interior edge steps cancel pairwise, so the winding total always
        // telescopes to the degree; a mismatch means a zero sat on the node
        // skeleton and the caller should retry on an offset grid.
        if (total != b_.degree) throw EdgeZero();
        return div;
    }

private:
    const NodeSample& node(int ix, int iy) const {
        const int jx = ix % b_.grid.nx;
        return nodes_[static_cast<std::size_t>(iy) * b_.grid.nx + jx];
    }

    // Principal-value step certified against phase wrapping: along the edge
    // |d arg| <= len * sup|s'| / inf|s|, with sup|s'| estimated from the
    // endpoint derivatives (factor-2 margin) and inf|s| from the endpoint
    // values.  Uncertifiable edges are bisected with fresh theta samples;
    // without analytic data a near-pi step forces an offset retry.
    double certified_step(const NodeSample& a, const NodeSample& b, double xa, double ya,
                          double len, bool horizontal, int depth) const {
        const double va = std::abs(a.v), vb = std::abs(b.v);
        if (va < tol_ || vb < tol_) throw EdgeZero();
        // arg(b conj(a)) = arg(b/a), and b conj(a) is bitwise invariant under
        // a common exact unitary factor of the samples
        const double step = std::arg(b.v * std::conj(a.v));
        if (coeffs_) {
            const double deriv = 2.0 * std::max(horizontal ? a.dx_abs : a.dy_abs,
                                                horizontal ? b.dx_abs : b.dy_abs);
            const double inf = std::min(va, vb) - 0.5 * len * deriv;
            if (inf > tol_ && len * deriv < 2.8 * inf && std::abs(step) < 0.9 * kPi) return step;
            if (depth > 48) throw EdgeZero();
            const double xm = horizontal ? xa + 0.5 * len : xa;
            const double ym = horizontal ? ya : ya + 0.5 * len;
            const NodeSample mid = eval_theta_part(b_, *coeffs_, xm, ym);
            return certified_step(a, mid, xa, ya, 0.5 * len, horizontal, depth + 1) +
                   certified_step(mid, b, xm, ym, 0.5 * len, horizontal, depth + 1);
        }
        if (std::abs(step) >= kPi - 1e-12) throw EdgeZero();
        return step;
    }

    double step_x(int ix, int iy) const {
        return certified_step(node(ix, iy), node(ix + 1, iy), ox_ + ix * b_.grid.hx(),
                              oy_ + iy * b_.grid.hy(), b_.grid.hx(), true, 0);
    }
    double step_y(int ix, int iy) const {
        return certified_step(node(ix, iy), node(ix, iy + 1), ox_ + (ix % b_.grid.nx) * b_.grid.hx(),
                              oy_ + iy * b_.grid.hy(), b_.grid.hy(), false, 0);
    }

    // One complex-Newton step on the bilinear corner model of a simple zero.
    void refine_location(int ix, int iy, double& px, double& py) const {
        const double hx = b_.grid.hx(), hy = b_.grid.hy();
        const std::complex<double> c00 = node(ix, iy).v, c10 = node(ix + 1, iy).v,
                                    c01 = node(ix, iy + 1).v, c11 = node(ix + 1, iy + 1).v;
        const std::complex<double> sc = 0.25 * (c00 + c10 + c01 + c11);
        const std::complex<double> sx = 0.5 * ((c10 - c00) + (c11 - c01)) / hx;
        const std::complex<double> sy = 0.5 * ((c01 - c00) + (c11 - c10)) / hy;
        const std::complex<double> sz = 0.5 * (sx - std::complex<double>(0.0, 1.0) * sy);
        const double nsz = std::norm(sz);
        if (nsz <= 0.0) return;
        const std::complex<double> delta = -sc * std::conj(sz) / nsz;
        if (std::abs(delta) <= std::max(hx, hy)) {
            px += delta.real();
            py += delta.imag();
        }
    }

    const LineBundle& b_;
    std::vector<NodeSample> nodes_;  // (ny + 1) rows
    double ox_, oy_;
    const std::vector<std::complex<double>>* coeffs_;  // non-null: analytic refinement on
    double tol_ = 0.0;
};

}  // namespace

Divisor divisor_extract(const ComplexSection& s) {
    const TorusGrid& g = s.bundle.grid;
    std::vector<NodeSample> nodes(static_cast<std::size_t>(g.ny + 1) * g.nx);
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix)
            nodes[static_cast<std::size_t>(iy) * g.nx + ix].v = s.at(ix, iy);
    for (int ix = 0; ix < g.nx; ++ix)
        nodes[static_cast<std::size_t>(g.ny) * g.nx + ix].v =
            s.bundle.transition_y(ix * g.hx(), 0.0) * s.at(ix, 0);
    return WindingExtractor(s.bundle, std::move(nodes), 0.0, 0.0, nullptr).run();
}

Divisor divisor_extract_stable(const ComplexSection& s, int max_retries) {
    if (!s.basis) return divisor_extract(s);  // raw samples: single pass only

    // The gauge factor exp(log_gauge + const_gauge) never vanishes and drops
    // out of all phase differences, so the extraction runs on the theta part,
    // where off-grid refinement and offset retries are available.
    const TorusGrid& g = s.bundle.grid;
    const auto& coeffs = s.basis->coeffs;
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        const double frac = static_cast<double>(attempt) / (max_retries + 1);
        const double ox = 0.71 * frac * g.hx(), oy = 0.53 * frac * g.hy();
        std::vector<NodeSample> nodes(static_cast<std::size_t>(g.ny + 1) * g.nx);
        for (int iy = 0; iy <= g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix)
                nodes[static_cast<std::size_t>(iy) * g.nx + ix] =
                    eval_theta_part(s.bundle, coeffs, ox + ix * g.hx(), oy + iy * g.hy());
        try {
            return WindingExtractor(s.bundle, std::move(nodes), ox, oy, &coeffs).run();
        } catch (const EdgeZero&) {
            if (attempt == max_retries) throw;
        }
    }
    throw EdgeZero();
}

double seam_defect(const ComplexSection& s) {
    if (!s.basis) throw std::invalid_argument("seam_defect: basis data required");
    const TorusGrid& g = s.bundle.grid;
    const int d = s.bundle.degree;
    double max_abs = 0.0;
    for (const auto& z : s.v) max_abs = std::max(max_abs, std::abs(z));
    double defect = 0.0;
    for (int ix = 0; ix < g.nx; ++ix) {
        const double x = ix * g.hx();
        std::complex<double> ghost{0.0, 0.0};
        for (int j = 0; j < d; ++j)
            ghost += s.basis->coeffs[j] * theta_eval(d, j, x, g.ly, g.lx).value;
        std::complex<double> lg = s.basis->const_gauge;
        if (s.basis->log_gauge) lg += s.basis->log_gauge->at(ix, 0);
        ghost *= std::exp(lg);
        const std::complex<double> mapped = s.bundle.transition_y(x, 0.0) * s.at(ix, 0);
        defect = std::max(defect, std::abs(ghost - mapped));
    }
    return max_abs > 0.0 ? defect / max_abs : 0.0;
}

}  // namespace conevortex
