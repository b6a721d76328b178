#pragma once

#include <map>
#include <string>
#include <vector>

#include "symdiff/exact.hpp"
#include "symdiff/perm.hpp"
#include "symdiff/shuffles.hpp"

namespace symdiff {

/// Exact t-step distribution of a shuffle over S_n, obtained by convolving
/// the one-step pmf t times in rational arithmetic. Brute force; n <= 6.
std::map<std::vector<int>, BigRat> exact_tstep_distribution(ShuffleKind kind, int n, int t);

struct OracleCheck {
    std::string name;
    bool passed;
    std::string detail;
};

/// Enumeration-backed checks of the pmfs, TV formulas, reverse families and
/// top-k machinery for every n <= n_max (capped at 6).
std::vector<OracleCheck> run_oracle_suite(int n_max);

}  // namespace symdiff
