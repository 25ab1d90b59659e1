#pragma once

#include "ddoc/numerics.hpp"

namespace ddoc {

// Paired input/output sequences; columns index time. This is the only plant
// information the controller ever sees.
struct Trajectory {
    Matrix inputs;   // m x N
    Matrix outputs;  // p x N

    Trajectory() = default;
    Trajectory(Matrix u, Matrix y);

    int length() const { return static_cast<int>(inputs.cols()); }
    int input_dim() const { return static_cast<int>(inputs.rows()); }
    int output_dim() const { return static_cast<int>(outputs.rows()); }

    // Stacked vector [u_a; ...; u_b; y_a; ...; y_b] of a column range
    // (0-based, inclusive).
    Vector stacked(int first, int last) const;
    Trajectory segment(int first, int length) const;
};

// Block Hankel matrix of a vector signal: block-row i, column j holds
// signal element i+j-1 (1-based).
struct HankelBlock {
    int depth = 0;       // L
    int block_size = 0;  // signal dimension
    Matrix matrix;       // (L * block_size) x (N - L + 1)

    int cols() const { return static_cast<int>(matrix.cols()); }

    // Block rows a through b, 1-based inclusive.
    Matrix block_rows(int a, int b) const;
    Matrix block_row(int a) const { return block_rows(a, a); }
};

// signal: dim x N, columns index time. Requires N >= L >= 1.
HankelBlock build_hankel(const Matrix& signal, int depth);

// Definition: u is persistently exciting of order L iff rank(H_L(u)) = m*L.
bool is_persistently_exciting(const Matrix& u, int order, const RankTolerance& tol);

// Least-squares residual of [U; Y] alpha = [u; y] for a length-L candidate.
// Zero (up to tolerance) iff the candidate is a trajectory of the
// data-generating system, given sufficient excitation.
double trajectory_residual(const Trajectory& candidate, const HankelBlock& u_data,
                           const HankelBlock& y_data);

// The trajectory [U; Y] * alpha, reshaped to length L.
Trajectory expand(const Vector& alpha, const HankelBlock& u_data, const HankelBlock& y_data);

}  // namespace ddoc
