#pragma once

#include <string>
#include <vector>

#include "symdiff/perm.hpp"

namespace symdiff {

enum class ShuffleKind { RT, RI, RS };

std::string to_string(ShuffleKind kind);
ShuffleKind shuffle_kind_from_string(const std::string& name);

/// One forward diffusion run: states X_0..X_T and the moves sigma_1..sigma_T
/// with X_t = apply(sigma_t, X_{t-1}).
struct Trajectory {
    ShuffleKind kind;
    int T = 0;
    std::vector<ObjectList> states;
    std::vector<Permutation> moves;
};

/// One draw from q(sigma) for the given shuffle. RS uses the geometric
/// sampler.
Permutation sample_step(ShuffleKind kind, int n, Rng& rng);

/// Riffle shuffle via the geometric description: sort the fractional parts
/// of 2x for n uniform points x. Ties broken by original index.
Permutation sample_rs_geometric(int n, Rng& rng);

/// Riffle shuffle via the GSR mechanics: binomial cut, then interleave with
/// drop probability proportional to remaining pile sizes. Kept as an
/// independent cross-check of the geometric sampler.
Permutation sample_rs_gsr(int n, Rng& rng);

/// The permutation moving the last object right before 1-based position
/// `pos` (pos = n is the identity).
Permutation insertion_perm(int n, int pos);

/// Exact one-step probability q(sigma); zero outside the support.
double pmf_one_step(ShuffleKind kind, const Permutation& sigma);

/// Exact t-step riffle-shuffle probability q_RS^(t)(sigma); t = 0 is the
/// delta at the identity.
double pmf_rs_tstep(const Permutation& sigma, int t);

/// log q_RS^(t) for the class of permutations with r rising sequences;
/// -inf when the class has zero mass (2^t < r). Stable for any t*n since
/// log C(n+2^t-r, n) - t*n*log2 telescopes into sum_j log1p((j-r)/2^t).
double log_pmf_rs_tstep(int n, int r, int t);

Trajectory forward_trajectory(const ObjectList& x0, ShuffleKind kind, int T, Rng& rng);

/// Cumulative permutation F_t with X_t = apply(F_t, X_0); F_0 = Id.
Permutation cumulative_move(const Trajectory& traj, int t);

/// Merged forward permutation G with X_{t_hi} = apply(G, X_{t_lo}).
Permutation merged_move(const Trajectory& traj, int t_lo, int t_hi);

}  // namespace symdiff
