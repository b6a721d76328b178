#include <doctest.h>

#include <stdexcept>
#include <cmath>
#include <map>

#include "symdiff/exact.hpp"
#include "symdiff/oracles.hpp"
#include "symdiff/shuffles.hpp"

using namespace symdiff;

namespace {

// TV between empirical counts and an exact pmf over S_n.
double empirical_tv(const std::map<std::vector<int>, int>& counts, int draws, int n,
                    ShuffleKind kind) {
    double tv = 0.0;
    for (const Permutation& sigma : enumerate_sn(n)) {
        double freq = 0.0;
        if (auto it = counts.find(sigma.mapping()); it != counts.end())
            freq = it->second / static_cast<double>(draws);
        tv += std::abs(freq - pmf_one_step(kind, sigma));
    }
    return tv / 2.0;
}

}  // namespace

TEST_CASE("one-step pmf reference values") {
    CHECK(pmf_one_step(ShuffleKind::RS, Permutation::identity(3)) == doctest::Approx(0.5));
    CHECK(pmf_one_step(ShuffleKind::RS, Permutation({2, 1, 0})) == 0.0);
    CHECK(pmf_one_step(ShuffleKind::RT, Permutation({1, 0, 2})) == doctest::Approx(2.0 / 9.0));
    CHECK(pmf_one_step(ShuffleKind::RT, Permutation::identity(3)) == doctest::Approx(1.0 / 3.0));
    for (int pos = 1; pos <= 4; ++pos)
        CHECK(pmf_one_step(ShuffleKind::RI, insertion_perm(4, pos)) == doctest::Approx(0.25));
    CHECK(pmf_one_step(ShuffleKind::RI, Permutation({1, 0, 2, 3})) == 0.0);
}

TEST_CASE("insertion permutations") {
    CHECK(insertion_perm(4, 4).is_identity());
    // moving the last object before position 1 cycles everything right
    CHECK(insertion_perm(3, 1) == Permutation({2, 0, 1}));
}

TEST_CASE("one-step pmfs sum to one over S_n") {
    for (ShuffleKind kind : {ShuffleKind::RT, ShuffleKind::RI, ShuffleKind::RS}) {
        for (int n = 1; n <= 6; ++n) {
            double total = 0.0;
            for (const Permutation& sigma : enumerate_sn(n)) total += pmf_one_step(kind, sigma);
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("RS support is the r <= 2 set with size 2^n - n") {
    for (int n = 1; n <= 7; ++n) {
        int support = 0;
        for (const Permutation& sigma : enumerate_sn(n)) {
            const bool in_support = pmf_one_step(ShuffleKind::RS, sigma) > 0.0;
            CHECK(in_support == (rising_sequences(sigma) <= 2));
            support += in_support;
        }
        CHECK(support == (1 << n) - n);
    }
}

TEST_CASE("samplers match exact pmfs at modest draw counts") {
    const int draws = 200000;
    for (ShuffleKind kind : {ShuffleKind::RT, ShuffleKind::RI, ShuffleKind::RS}) {
        Rng rng(5);
        std::map<std::vector<int>, int> counts;
        for (int i = 0; i < draws; ++i) ++counts[sample_step(kind, 4, rng).mapping()];
        CHECK(empirical_tv(counts, draws, 4, kind) < 0.01);
    }
}

TEST_CASE("geometric and GSR riffle samplers agree") {
    Rng rng_one(1);
    CHECK(sample_rs_geometric(1, rng_one).is_identity());
    const int draws = 200000;
    Rng rng_a(11), rng_b(12);
    std::map<std::vector<int>, int> geo, gsr;
    for (int i = 0; i < draws; ++i) {
        ++geo[sample_rs_geometric(5, rng_a).mapping()];
        ++gsr[sample_rs_gsr(5, rng_b).mapping()];
    }
    CHECK(empirical_tv(geo, draws, 5, ShuffleKind::RS) < 0.01);
    CHECK(empirical_tv(gsr, draws, 5, ShuffleKind::RS) < 0.01);
}

TEST_CASE("t-step formula: reference values and t=1 reduction") {
    // C(6,3)/2^6
    CHECK(pmf_rs_tstep(Permutation::identity(3), 2) == doctest::Approx(20.0 / 64.0));
    for (const Permutation& sigma : enumerate_sn(4))
        CHECK(pmf_rs_tstep(sigma, 1) ==
              doctest::Approx(pmf_one_step(ShuffleKind::RS, sigma)).epsilon(1e-14));
    // t = 0 is the delta at the identity
    for (const Permutation& sigma : enumerate_sn(4))
        CHECK(pmf_rs_tstep(sigma, 0) == doctest::Approx(sigma.is_identity() ? 1.0 : 0.0));
}

TEST_CASE("t-step pmf sums to one over S_n for n <= 6, t <= 10") {
    for (int n = 1; n <= 6; ++n) {
        const auto sn = enumerate_sn(n);
        for (int t = 0; t <= 10; ++t) {
            double total = 0.0;
            for (const Permutation& sigma : sn) total += pmf_rs_tstep(sigma, t);
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("t-step formula matches the exact convolution for n <= 5") {
    for (int n = 1; n <= 5; ++n) {
        for (int t : {0, 1, 2, 3, 4}) {
            const auto brute = exact_tstep_distribution(ShuffleKind::RS, n, t);
            double total = 0.0;
            for (const Permutation& sigma : enumerate_sn(n)) {
                BigRat expected = 0;
                if (auto it = brute.find(sigma.mapping()); it != brute.end())
                    expected = it->second;
                const BigRat formula = pmf_rs_tstep_exact(n, rising_sequences(sigma), t);
                CHECK(formula == expected);
                const double p = pmf_rs_tstep(sigma, t);
                CHECK(std::abs(p - expected.convert_to<double>()) < 1e-12);
                total += p;
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("forward trajectories satisfy the delta constraint") {
    Rng rng(3);
    ObjectList x0(5, 1, {0.1, 0.2, 0.3, 0.4, 0.5});
    const Trajectory traj = forward_trajectory(x0, ShuffleKind::RS, 10, rng);
    CHECK(traj.states.size() == 11);
    CHECK(traj.moves.size() == 10);
    for (int t = 1; t <= traj.T; ++t)
        CHECK(traj.states[t] == apply(traj.moves[t - 1], traj.states[t - 1]));
    CHECK(cumulative_move(traj, traj.T).n() == 5);
    CHECK(apply(cumulative_move(traj, traj.T), x0) == traj.states[traj.T]);
    CHECK(apply(merged_move(traj, 4, 9), traj.states[4]) == traj.states[9]);

    const Trajectory empty = forward_trajectory(x0, ShuffleKind::RS, 0, rng);
    CHECK(empty.states.size() == 1);
    CHECK(empty.moves.empty());
}

TEST_CASE("shuffle mixing sanity: RS n=5 T=10 is near uniform") {
    Rng rng(17);
    const int runs = 100000;  // the TV noise floor at fewer runs exceeds the bound
    std::map<std::vector<int>, int> counts;
    ObjectList x0(5, 1, {1, 2, 3, 4, 5});
    for (int i = 0; i < runs; ++i) {
        const Trajectory traj = forward_trajectory(x0, ShuffleKind::RS, 10, rng);
        ++counts[cumulative_move(traj, 10).mapping()];
    }
    double tv = 0.0;
    for (const Permutation& sigma : enumerate_sn(5)) {
        double freq = 0.0;
        if (auto it = counts.find(sigma.mapping()); it != counts.end())
            freq = it->second / static_cast<double>(runs);
        tv += std::abs(freq - 1.0 / 120.0);
    }
    CHECK(tv / 2.0 < 0.02);
}
