#include "symdiff/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "symdiff/mixing.hpp"
#include "symdiff/reverse.hpp"

namespace symdiff {

std::map<std::vector<int>, BigRat> exact_tstep_distribution(ShuffleKind kind, int n, int t) {
    if (n > 6) throw std::invalid_argument("exact_tstep_distribution: n <= 6");
    const std::vector<Permutation> sn = enumerate_sn(n);
    std::vector<std::pair<Permutation, BigRat>> one_step;
    for (const Permutation& sigma : sn) {
        BigRat p = pmf_one_step_exact(kind, sigma);
        if (p != 0) one_step.emplace_back(sigma, std::move(p));
    }
    std::map<std::vector<int>, BigRat> dist;
    dist[Permutation::identity(n).mapping()] = 1;
    for (int step = 0; step < t; ++step) {
        std::map<std::vector<int>, BigRat> next;
        for (const auto& [mapping, mass] : dist) {
            const Permutation cum{mapping};
            for (const auto& [move, p] : one_step)
                next[compose(cum, move).mapping()] += mass * p;
        }
        dist = std::move(next);
    }
    return dist;
}

namespace {

struct Suite {
    std::vector<OracleCheck> checks;

    void add(const std::string& name, bool passed, const std::string& detail = "") {
        checks.push_back({name, passed, detail});
    }
};

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

void check_one_step_pmfs(Suite& suite, int n_max) {
    for (ShuffleKind kind : {ShuffleKind::RT, ShuffleKind::RI, ShuffleKind::RS}) {
        bool normalized = true, exact_match = true;
        for (int n = 1; n <= n_max; ++n) {
            BigRat total = 0;
            for (const Permutation& sigma : enumerate_sn(n)) {
                const BigRat p = pmf_one_step_exact(kind, sigma);
                total += p;
                const double pd = pmf_one_step(kind, sigma);
                if (std::abs(pd - p.convert_to<double>()) > 1e-15) exact_match = false;
            }
            if (total != 1) normalized = false;
        }
        suite.add("pmf-one-step-normalization-" + to_string(kind), normalized);
        suite.add("pmf-one-step-double-vs-exact-" + to_string(kind), exact_match);
    }
    bool support_ok = true;
    for (int n = 1; n <= n_max; ++n) {
        int support = 0;
        for (const Permutation& sigma : enumerate_sn(n))
            if (pmf_one_step(ShuffleKind::RS, sigma) > 0.0) ++support;
        if (support != (1 << n) - n) support_ok = false;
    }
    suite.add("rs-support-size-2^n-n", support_ok);
}

void check_tstep_formula(Suite& suite, int n_max, int t_max) {
    bool rational_equal = true, double_close = true;
    double worst = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        std::map<std::vector<int>, BigRat> dist;
        dist[Permutation::identity(n).mapping()] = 1;
        const auto sn = enumerate_sn(n);
        for (int t = 0; t <= t_max; ++t) {
            for (const Permutation& sigma : sn) {
                const BigRat formula = pmf_rs_tstep_exact(n, rising_sequences(sigma), t);
                BigRat brute = 0;
                if (auto it = dist.find(sigma.mapping()); it != dist.end()) brute = it->second;
                if (formula != brute) rational_equal = false;
                const double err =
                    std::abs(pmf_rs_tstep(sigma, t) - brute.convert_to<double>());
                worst = std::max(worst, err);
            }
            if (t < t_max) {
                // advance one convolution step
                std::map<std::vector<int>, BigRat> next;
                for (const auto& [mapping, mass] : dist) {
                    const Permutation cum{mapping};
                    for (const Permutation& move : sn) {
                        const BigRat p = pmf_one_step_exact(ShuffleKind::RS, move);
                        if (p != 0) next[compose(cum, move).mapping()] += mass * p;
                    }
                }
                dist = std::move(next);
            }
        }
    }
    double_close = worst < 1e-12;
    suite.add("rs-tstep-formula-vs-convolution-exact", rational_equal);
    suite.add("rs-tstep-formula-vs-convolution-double", double_close, "max abs err " + fmt(worst));
}

void check_tv_formulas(Suite& suite, int n_max, int t_max) {
    bool exact_ok = true;
    double worst = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        const auto sn = enumerate_sn(n);
        const BigRat u(BigInt(1), factorial_big(n));
        for (int t = 0; t <= t_max; ++t) {
            for (int t2 = t + 1; t2 <= t_max; ++t2) {
                BigRat brute = 0;
                for (const Permutation& sigma : sn) {
                    BigRat diff = pmf_rs_tstep_exact(n, rising_sequences(sigma), t) -
                                  pmf_rs_tstep_exact(n, rising_sequences(sigma), t2);
                    if (diff < 0) diff = -diff;
                    brute += diff;
                }
                brute /= 2;
                if (n <= kEulerianExactCap && tv_rs_between_exact(n, t, t2) != brute)
                    exact_ok = false;
                worst = std::max(worst,
                                 std::abs(tv_rs_between(n, t, t2) - brute.convert_to<double>()));
            }
            BigRat brute_u = 0;
            for (const Permutation& sigma : sn) {
                BigRat diff = pmf_rs_tstep_exact(n, rising_sequences(sigma), t) - u;
                if (diff < 0) diff = -diff;
                brute_u += diff;
            }
            brute_u /= 2;
            if (tv_rs_to_uniform_exact(n, t) != brute_u) exact_ok = false;
            worst = std::max(worst,
                             std::abs(tv_rs_to_uniform(n, t) - brute_u.convert_to<double>()));
        }
    }
    suite.add("tv-formula-vs-brute-force-exact", exact_ok);
    suite.add("tv-formula-vs-brute-force-double", worst < 1e-12, "max abs err " + fmt(worst));
}

void check_eulerian(Suite& suite, int n_max) {
    bool hist_ok = true, rowsum_ok = true;
    for (int n = 1; n <= n_max; ++n) {
        const EulerianTable table = eulerian(n);
        std::vector<BigInt> hist(n, 0);
        for (const Permutation& sigma : enumerate_sn(n)) ++hist[rising_sequences(sigma) - 1];
        BigInt total = 0;
        for (int r = 1; r <= n; ++r) {
            if (hist[r - 1] != table.count(r)) hist_ok = false;
            total += table.count(r);
        }
        if (total != factorial_big(n)) rowsum_ok = false;
    }
    suite.add("eulerian-vs-rising-sequence-histogram", hist_ok);
    suite.add("eulerian-row-sum-n-factorial", rowsum_ok);
}

ReverseParams random_params(ReverseKind kind, int n, Rng& rng) {
    auto draw = [&rng](int count) {
        std::vector<double> s(count);
        for (double& x : s) x = 2.0 * normal(rng);
        return s;
    };
    switch (kind) {
        case ReverseKind::IT: return ReverseParams::it(draw(n), normal(rng));
        case ReverseKind::II: return ReverseParams::ii(draw(n));
        case ReverseKind::IRS: return ReverseParams::irs(draw(n));
        case ReverseKind::PL: return ReverseParams::pl(draw(n));
        case ReverseKind::GPL: return ReverseParams::gpl(n, draw(n * n));
    }
    throw std::logic_error("unreachable");
}

double logsumexp_over_sn(const ReverseParams& params, int n) {
    double m = -std::numeric_limits<double>::infinity();
    std::vector<double> lps;
    for (const Permutation& sigma : enumerate_sn(n)) {
        const double lp = log_prob(params, sigma);
        lps.push_back(lp);
        m = std::max(m, lp);
    }
    double acc = 0.0;
    for (double lp : lps) acc += std::exp(lp - m);
    return m + std::log(acc);
}

void check_reverse_families(Suite& suite, int n_max) {
    Rng rng(20240911);
    const int n_cap = std::min(n_max, 5);
    bool norm_ok = true;
    double worst = 0.0;
    for (ReverseKind kind : {ReverseKind::IT, ReverseKind::II, ReverseKind::IRS, ReverseKind::PL,
                             ReverseKind::GPL}) {
        for (int n = 1; n <= n_cap; ++n) {
            for (int rep = 0; rep < 3; ++rep) {
                const ReverseParams params = random_params(kind, n, rng);
                const double z = logsumexp_over_sn(params, n);
                worst = std::max(worst, std::abs(z));
                if (std::abs(z) > 1e-10) norm_ok = false;
            }
        }
    }
    suite.add("reverse-family-normalization", norm_ok, "max |log Z| " + fmt(worst));

    // IRS identity mass must equal the sum over all 2^n pile assignments
    bool irs_ok = true;
    for (int n = 1; n <= n_cap; ++n) {
        const ReverseParams params = random_params(ReverseKind::IRS, n, rng);
        std::map<std::vector<int>, double> masses;
        for (int bits = 0; bits < (1 << n); ++bits) {
            double p = 1.0;
            std::vector<int> word;
            for (int i = 0; i < n; ++i) {
                const double phi = 1.0 / (1.0 + std::exp(-params.score(i)));
                if (bits >> i & 1) {
                    p *= phi;
                    word.push_back(i);
                }
            }
            for (int i = 0; i < n; ++i)
                if (!(bits >> i & 1)) {
                    const double phi = 1.0 / (1.0 + std::exp(-params.score(i)));
                    p *= 1.0 - phi;
                    word.push_back(i);
                }
            masses[word] += p;
        }
        for (const auto& [word, mass] : masses) {
            const double lp = log_prob(params, Permutation(word));
            if (std::abs(std::exp(lp) - mass) > 1e-12) irs_ok = false;
        }
    }
    suite.add("irs-preimage-sums", irs_ok);

    // exact top-k: beam covering n! candidates must equal full enumeration
    bool topk_ok = true;
    for (ReverseKind kind : {ReverseKind::PL, ReverseKind::GPL}) {
        for (int n = 2; n <= std::min(n_cap, 5); ++n) {
            const ReverseParams params = random_params(kind, n, rng);
            int nf = 1;
            for (int i = 2; i <= n; ++i) nf *= i;
            const auto ranked = top_k(params, std::min(5, nf), nf);
            std::vector<std::pair<Permutation, double>> brute;
            for (const Permutation& sigma : enumerate_sn(n))
                brute.emplace_back(sigma, log_prob(params, sigma));
            std::sort(brute.begin(), brute.end(), [](const auto& a, const auto& b) {
                if (a.second != b.second) return a.second > b.second;
                return a.first < b.first;
            });
            for (size_t i = 0; i < ranked.size(); ++i)
                if (!(ranked[i].first == brute[i].first) ||
                    std::abs(ranked[i].second - brute[i].second) > 1e-9)
                    topk_ok = false;
        }
    }
    suite.add("top-k-exact-vs-enumeration", topk_ok);

    bool delta_ok = true;
    for (int n = 2; n <= std::min(n_max, 6); ++n) {
        const Permutation sigma = random_uniform(n, rng);
        const double p = std::exp(log_prob(delta_gpl(sigma, 30.0), sigma));
        if (!(p > 1.0 - 1e-9)) delta_ok = false;
    }
    suite.add("delta-gpl-concentration", delta_ok);

    bool rising_ok = true;
    for (int n = 1; n <= n_cap; ++n)
        for (const Permutation& sigma : enumerate_sn(n)) {
            const int r = rising_sequences(sigma);
            if (r < 1 || r > n) rising_ok = false;
            if ((r == 1) != sigma.is_identity()) rising_ok = false;
        }
    suite.add("rising-sequences-identity-iff-one", rising_ok);
}

}  // namespace

std::vector<OracleCheck> run_oracle_suite(int n_max) {
    if (n_max < 1 || n_max > 6)
        throw std::invalid_argument("oracle suite: n_max must be in [1, 6]");
    Suite suite;
    check_one_step_pmfs(suite, n_max);
    check_tstep_formula(suite, n_max, 8);
    check_tv_formulas(suite, n_max, 8);
    check_eulerian(suite, n_max);
    check_reverse_families(suite, n_max);
    return suite.checks;
}

}  // namespace symdiff
