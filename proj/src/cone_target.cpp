#include "cone_target.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace conevortex {

WeightedCircleAction::WeightedCircleAction(std::vector<int> w) : weights(std::move(w)) {
    if (weights.empty()) throw std::invalid_argument("WeightedCircleAction: n >= 1 required");
    for (int wk : weights)
        if (wk == 0) throw std::invalid_argument("WeightedCircleAction: weights must be nonzero");
}

WeightedCircleAction WeightedCircleAction::reeb(int n) {
    return WeightedCircleAction(std::vector<int>(static_cast<std::size_t>(n), 1));
}

bool WeightedCircleAction::is_reeb() const {
    return std::all_of(weights.begin(), weights.end(), [](int w) { return w == 1; });
}

ConePoint::ConePoint(Cn z_) : z(std::move(z_)) {
    if (z.empty()) throw std::invalid_argument("ConePoint: n >= 1 required");
    if (!(radius() > 0.0)) throw std::invalid_argument("ConePoint: the cone excludes the apex");
}

double ConePoint::radius() const {
    double s = 0.0;
    for (const auto& zk : z) s += std::norm(zk);
    return std::sqrt(s);
}

Cn ConePoint::sphere_point() const {
    const double r = radius();
    Cn s(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) s[k] = z[k] / r;
    return s;
}

Cn reeb_field(const ConePoint& p) {
    Cn s = p.sphere_point();
    for (auto& sk : s) sk *= std::complex<double>(0.0, -1.0);
    return s;
}

double sasakian_moment(const WeightedCircleAction& action, const ConePoint& p) {
    if (action.dim() != static_cast<int>(p.z.size()))
        throw std::invalid_argument("sasakian_moment: dimension mismatch");
    const Cn s = p.sphere_point();
    double g = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) g += action.weights[k] * std::norm(s[k]);
    return g;
}

double kahler_potential(const ConePoint& p) {
    const double r = p.radius();
    return 0.5 * r * r;
}

double cone_moment(const WeightedCircleAction& action, const ConePoint& p) {
    if (action.dim() != static_cast<int>(p.z.size()))
        throw std::invalid_argument("cone_moment: dimension mismatch");
    double m = 0.0;
    for (std::size_t k = 0; k < p.z.size(); ++k) m += action.weights[k] * std::norm(p.z[k]);
    return 0.5 * m;
}

ConePoint complex_gauge_flow(const WeightedCircleAction& action, double f, const ConePoint& p) {
    if (action.dim() != static_cast<int>(p.z.size()))
        throw std::invalid_argument("complex_gauge_flow: dimension mismatch");
    Cn out(p.z.size());
    for (std::size_t k = 0; k < p.z.size(); ++k)
        out[k] = std::exp(action.weights[k] * f) * p.z[k];
    return ConePoint(std::move(out));
}

HomogeneityReport homogeneity_check(const WeightedCircleAction& action,
                                    const std::vector<std::pair<double, ConePoint>>& samples,
                                    double tol) {
    HomogeneityReport rep;
    rep.n = action.dim();
    rep.weights = action.weights;
    for (const auto& [f, p] : samples) {
        const double expected = std::exp(2.0 * f) * cone_moment(action, p);
        const double actual = cone_moment(action, complex_gauge_flow(action, f, p));
        const double gap = std::abs(actual - expected) / std::max(1.0, std::abs(expected));
        rep.max_gap = std::max(rep.max_gap, gap);
    }
    rep.pass = rep.max_gap <= tol;
    return rep;
}

std::string HomogeneityReport::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"n\":" << n << ",\"weights\":[";
    for (std::size_t k = 0; k < weights.size(); ++k) os << (k ? "," : "") << weights[k];
    os << "],\"max_gap\":" << max_gap << ",\"verdict\":\"" << verdict() << "\"}";
    return os.str();
}

}  // namespace conevortex
