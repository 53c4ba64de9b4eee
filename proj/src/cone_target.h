#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace conevortex {

using Cn = std::vector<std::complex<double>>;

// Circle action z_k -> exp(i w_k t) z_k on C^n minus the origin, viewed as
// the cone over the unit sphere S^{2n-1}.
struct WeightedCircleAction {
    std::vector<int> weights;

    explicit WeightedCircleAction(std::vector<int> w);
    static WeightedCircleAction reeb(int n);  // all weights 1

    int dim() const { return static_cast<int>(weights.size()); }
    bool is_reeb() const;
};

// Point on the cone: z in C^n with |z| > 0 (apex excluded).
struct ConePoint {
    Cn z;

    explicit ConePoint(Cn z_);
    double radius() const;
    Cn sphere_point() const;  // z / |z|
};

// Reeb field of the round sphere at the sphere point of p: -i * (z/|z|).
Cn reeb_field(const ConePoint& p);

// Contact form paired with the fundamental field: sum_k w_k |s_k|^2 on the
// unit sphere.
double sasakian_moment(const WeightedCircleAction& action, const ConePoint& p);

// Canonical potential |z|^2 / 2.
double kahler_potential(const ConePoint& p);

// Cone moment map: potential times sphere moment = (1/2) sum w_k |z_k|^2.
double cone_moment(const WeightedCircleAction& action, const ConePoint& p);

// Time-f flow of the complexified action direction: z_k -> exp(w_k f) z_k.
ConePoint complex_gauge_flow(const WeightedCircleAction& action, double f, const ConePoint& p);

// Checks mu(exp(f).p) = exp(2f) mu(p) over the given samples.  Exact for
// weight-1 actions; fails for general weights, which is what the report is
// for.
struct HomogeneityReport {
    int n = 0;
    std::vector<int> weights;
    double max_gap = 0.0;
    bool pass = false;

    std::string verdict() const { return pass ? "PASS" : "FAIL"; }
    std::string to_json() const;
};

HomogeneityReport homogeneity_check(const WeightedCircleAction& action,
                                    const std::vector<std::pair<double, ConePoint>>& samples,
                                    double tol = 1e-12);

}  // namespace conevortex
