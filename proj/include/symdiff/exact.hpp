#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include "symdiff/perm.hpp"
#include "symdiff/shuffles.hpp"

namespace symdiff {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

BigInt binomial_big(const BigInt& m, int k);

BigInt factorial_big(int n);

/// q_RS^(t) for the rising-sequence class r as an exact rational
/// C(n + 2^t - r, n) / 2^(t n).
BigRat pmf_rs_tstep_exact(int n, int r, int t);

BigRat pmf_one_step_exact(ShuffleKind kind, const Permutation& sigma);

}  // namespace symdiff
