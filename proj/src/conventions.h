#pragma once

// Sign and normalization conventions used throughout this project.
// Every module follows these; do not introduce per-file variants.
//
//  * Laplacian is POSITIVE-definite:  lap f = -(f_xx + f_yy).
//    On the Fourier mode exp(2*pi*i*(k x/lx + m y/ly)) it acts as
//    multiplication by +4*pi^2*(k^2/lx^2 + m^2/ly^2).
//
//  * Complex coordinate z = x + i y.  The dz-bar component of the
//    differential of a scalar is  dbar f = (f_x + i f_y)/2,  the dz
//    component is  pdel f = (f_x - i f_y)/2.  Composition identity:
//    dbar(pdel f) = -(lap f)/4.
//
//  * A unitary connection is stored as the purely imaginary deformation
//    i*(a_x dx + a_y dy) away from the Chern connection of the bundle
//    metric.  Total curvature scalar:
//        iLF(A) = 2*pi*d/vol + (da_x/dy - da_y/dx).
//    The degree is (1/2pi) * integral of iLF(A).
//
//  * Complex gauge by exp(f), f real:  sections scale by exp(f),
//    (a_x, a_y) += (-f_y, +f_x), curvature scalar += lap f.
//
//  * Master sign of the moment equation:  iLF(A) = tau - mu(u), so the
//    gauge-fixing reduction reads  lap f + exp(2f) B = tau - iLF(A0).
//
//  * Flat Kaehler form on C^n is omega0 = sum dx_k ^ dy_k.  The cone
//    moment map mu = (1/2) sum w_k |z_k|^2 satisfies
//    d<mu,beta>(v) = omega0(v, K_beta), i.e. the contraction slot of the
//    fundamental field is the SECOND argument.
//
//  * Hermitian pairing on sections, holomorphic-frame trivialization:
//    h(a, b) = exp(psi) * conj(a) * b  with psi the bundle metric weight.
//    The real pairing <a,b>_R used in reports is Re h(a,b); with this
//    normalization  d(mu(u)) = Re h(phi, D_A phi)  for tau-vortices.

namespace conevortex {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

}  // namespace conevortex
