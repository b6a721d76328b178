#pragma once

#include <vector>

#include "symdiff/exact.hpp"
#include "symdiff/shuffles.hpp"

namespace symdiff {

constexpr int kEulerianExactCap = 64;

/// Row n of the Eulerian triangle: A_{n,r} counts permutations of [n] with
/// exactly r rising sequences. Exact counts are kept up to n = 64; natural
/// logs are available for any n.
class EulerianTable {
public:
    static EulerianTable build(int n);

    int n() const { return n_; }
    /// Exact count, r in [1, n]. Refused for n > 64.
    const BigInt& count(int r) const;
    double log_count(int r) const { return log_counts_[r - 1]; }
    bool has_exact() const { return !counts_.empty(); }

private:
    int n_ = 0;
    std::vector<BigInt> counts_;
    std::vector<double> log_counts_;
};

EulerianTable eulerian(int n);

/// D_TV(q_RS^(t), q_RS^(t')) via the Eulerian class decomposition. Terms are
/// assembled in log space so that scales like 2^(t n) far beyond double
/// range cancel instead of overflowing.
double tv_rs_between(int n, int t, int t_prime);

double tv_rs_to_uniform(int n, int t);

/// Exact-rational counterparts (n <= 64), used by the oracle suites.
BigRat tv_rs_between_exact(int n, int t, int t_prime);
BigRat tv_rs_to_uniform_exact(int n, int t);

/// Analytic cut-off time: (n/2) ln n for RT, n ln n for RI, (3/2) log2 n
/// for RS.
double cutoff_time(ShuffleKind kind, int n);

/// Strictly increasing timesteps t_0 < ... < t_k with t_0 = 0. The reverse
/// process learns one transition per interval.
struct DenoisingSchedule {
    std::vector<int> timesteps;

    explicit DenoisingSchedule(std::vector<int> ts);
    int T() const { return timesteps.back(); }
    int intervals() const { return static_cast<int>(timesteps.size()) - 1; }
};

struct SchedulePlan {
    int T;
    DenoisingSchedule schedule;
};

/// Pick T as the first t with D_TV(q^(t), u) <= eps_T, then walk backwards
/// from T greedily targeting consecutive TVs near `gap`. Candidate steps are
/// only accepted while their TV stays inside [gap/3, 5*gap/3]; once the
/// distributions change faster than that (below the cut-off), the remainder
/// is covered by a single final interval down to t = 0.
SchedulePlan plan_schedule(int n, double eps_T = 0.005, double gap = 0.3);

}  // namespace symdiff
