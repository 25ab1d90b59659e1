#pragma once

#include "ddoc/hankel.hpp"

namespace ddoc {

// Data-driven steady-state characterization: (u, y) is an equilibrium of the
// data-generating system iff S_u u + S_y y = 0, where
//   [S_u  S_y] = (H_{n+1} H_{n+1}^+ - I) * blockdiag(1_{n+1} (x) I_m, 1_{n+1} (x) I_p)
// with H_{n+1} the stacked input/output Hankel matrix of depth n+1.
struct SteadyMaps {
    Matrix s_u;         // (m+p)(n+1) x m
    Matrix s_y;         // (m+p)(n+1) x p
    Matrix s_u_pinv;    // m x (m+p)(n+1)
    Matrix p0;          // I_m - S_u^+ S_u, orthogonal projector
    Matrix su_pinv_sy;  // S_u^+ S_y, cached for the controller hot path
    int n_bar = 0;      // system-order upper bound used for the depth
};

// Requires the data input to be persistently exciting of order 2n+1.
SteadyMaps compute_steady_maps(const Trajectory& data, int n_bar, const RankTolerance& tol);

// ||S_u u + S_y y||; zero (up to tolerance) iff (u, y) is an equilibrium.
double equilibrium_residual(const SteadyMaps& maps, const Vector& u, const Vector& y);

// Direct check against the definition: residual of the constant
// length-(n+1) candidate sequence in the depth-(n+1) Hankel data.
double equilibrium_residual_by_definition(const HankelBlock& u_data, const HankelBlock& y_data,
                                          const Vector& u, const Vector& y);

// Solution of min ||u - v|| s.t. (u, y) is an equilibrium:
//   u = (I_m - S_u^+ S_u) v - S_u^+ S_y y.
// Requires y to be a steady-state output; throws InfeasibleOutputError
// (carrying the residual) otherwise.
Vector nearest_steady_input(const SteadyMaps& maps, const Vector& v, const Vector& y,
                            double feasibility_rel = 1e-6);

}  // namespace ddoc
