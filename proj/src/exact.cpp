#include "symdiff/exact.hpp"

#include <stdexcept>

namespace symdiff {

BigInt binomial_big(const BigInt& m, int k) {
    if (k < 0 || m < 0) return 0;
    if (m < k) return 0;
    BigInt num = 1;
    for (int j = 1; j <= k; ++j) {
        num *= m - (k - j);
        num /= j;  // exact: product of j consecutive integers divides j!
    }
    return num;
}

BigInt factorial_big(int n) {
    BigInt f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

BigRat pmf_rs_tstep_exact(int n, int r, int t) {
    if (t < 0 || r < 1 || r > n) throw std::invalid_argument("pmf_rs_tstep_exact: bad args");
    const BigInt two_t = BigInt(1) << t;
    const BigInt num = binomial_big(BigInt(n) + two_t - r, n);
    return BigRat(num, BigInt(1) << (static_cast<unsigned>(t) * n));
}

BigRat pmf_one_step_exact(ShuffleKind kind, const Permutation& sigma) {
    const int n = sigma.n();
    switch (kind) {
        case ShuffleKind::RT: {
            if (sigma.is_identity()) return BigRat(1, n);
            const double p = pmf_one_step(ShuffleKind::RT, sigma);
            return p > 0 ? BigRat(2, BigInt(n) * n) : BigRat(0);
        }
        case ShuffleKind::RI: {
            const double p = pmf_one_step(ShuffleKind::RI, sigma);
            return p > 0 ? BigRat(1, n) : BigRat(0);
        }
        case ShuffleKind::RS:
            return pmf_rs_tstep_exact(n, rising_sequences(sigma), 1);
    }
    throw std::logic_error("unreachable");
}

}  // namespace symdiff
