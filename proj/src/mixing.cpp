#include "symdiff/mixing.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace symdiff {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(1 - e^x) for x <= 0.
double log1mexp(double x) {
    if (x >= 0.0) return kNegInf;
    return x > -0.6931471805599453 ? std::log(-std::expm1(x)) : std::log1p(-std::exp(x));
}

double logaddexp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

// ln A_{n,r} |e^lp1 - e^lp2| without leaving log space until the final exp;
// each class term is a bounded probability mass, so the linear sum is safe.
double class_term(double log_count, double lp1, double lp2) {
    if (lp1 == kNegInf && lp2 == kNegInf) return 0.0;
    const double hi = std::max(lp1, lp2), lo = std::min(lp1, lp2);
    return std::exp(log_count + hi + log1mexp(lo - hi));
}

}  // namespace

EulerianTable EulerianTable::build(int n) {
    if (n < 1) throw std::invalid_argument("eulerian: n >= 1");
    EulerianTable table;
    table.n_ = n;
    if (n <= kEulerianExactCap) {
        std::vector<BigInt> row{1};
        for (int m = 2; m <= n; ++m) {
            std::vector<BigInt> next(m);
            for (int r = 1; r <= m; ++r) {
                BigInt acc = 0;
                if (r <= m - 1) acc += r * row[r - 1];
                if (r >= 2) acc += (m - r + 1) * row[r - 2];
                next[r - 1] = acc;
            }
            row = std::move(next);
        }
        table.counts_ = std::move(row);
        table.log_counts_.reserve(n);
        for (const BigInt& c : table.counts_)
            table.log_counts_.push_back(std::log(c.convert_to<double>()));
    } else {
        // log-space recursion: ln A_{n,r} = logaddexp(ln r + ., ln(n-r+1) + .)
        std::vector<double> row{0.0};
        for (int m = 2; m <= n; ++m) {
            std::vector<double> next(m, kNegInf);
            for (int r = 1; r <= m; ++r) {
                double acc = kNegInf;
                if (r <= m - 1) acc = std::log(static_cast<double>(r)) + row[r - 1];
                if (r >= 2) acc = logaddexp(acc, std::log(static_cast<double>(m - r + 1)) + row[r - 2]);
                next[r - 1] = acc;
            }
            row = std::move(next);
        }
        table.log_counts_ = std::move(row);
    }
    return table;
}

const BigInt& EulerianTable::count(int r) const {
    if (!has_exact())
        throw std::domain_error("EulerianTable: exact counts only kept up to n = 64");
    if (r < 1 || r > n_) throw std::out_of_range("EulerianTable: r in [1, n]");
    return counts_[r - 1];
}

EulerianTable eulerian(int n) { return EulerianTable::build(n); }

double tv_rs_between(int n, int t, int t_prime) {
    if (t < 0 || t_prime < 0) throw std::invalid_argument("tv_rs_between: t, t' >= 0");
    if (t == t_prime) return 0.0;
    const EulerianTable table = eulerian(n);
    double sum = 0.0;
    for (int r = 1; r <= n; ++r)
        sum += class_term(table.log_count(r), log_pmf_rs_tstep(n, r, t),
                          log_pmf_rs_tstep(n, r, t_prime));
    return 0.5 * sum;
}

double tv_rs_to_uniform(int n, int t) {
    if (t < 0) throw std::invalid_argument("tv_rs_to_uniform: t >= 0");
    const EulerianTable table = eulerian(n);
    const double log_u = -std::lgamma(n + 1.0);
    double sum = 0.0;
    for (int r = 1; r <= n; ++r)
        sum += class_term(table.log_count(r), log_pmf_rs_tstep(n, r, t), log_u);
    return 0.5 * sum;
}

BigRat tv_rs_between_exact(int n, int t, int t_prime) {
    const EulerianTable table = eulerian(n);
    BigRat sum = 0;
    for (int r = 1; r <= n; ++r) {
        BigRat diff = pmf_rs_tstep_exact(n, r, t) - pmf_rs_tstep_exact(n, r, t_prime);
        if (diff < 0) diff = -diff;
        sum += BigRat(table.count(r)) * diff;
    }
    return sum / 2;
}

BigRat tv_rs_to_uniform_exact(int n, int t) {
    const EulerianTable table = eulerian(n);
    const BigRat u(BigInt(1), factorial_big(n));
    BigRat sum = 0;
    for (int r = 1; r <= n; ++r) {
        BigRat diff = pmf_rs_tstep_exact(n, r, t) - u;
        if (diff < 0) diff = -diff;
        sum += BigRat(table.count(r)) * diff;
    }
    return sum / 2;
}

double cutoff_time(ShuffleKind kind, int n) {
    if (n < 2) throw std::invalid_argument("cutoff_time: n >= 2");
    switch (kind) {
        case ShuffleKind::RT: return 0.5 * n * std::log(static_cast<double>(n));
        case ShuffleKind::RI: return n * std::log(static_cast<double>(n));
        case ShuffleKind::RS: return 1.5 * std::log2(static_cast<double>(n));
    }
    throw std::logic_error("unreachable");
}

DenoisingSchedule::DenoisingSchedule(std::vector<int> ts) : timesteps(std::move(ts)) {
    if (timesteps.empty() || timesteps.front() != 0)
        throw std::invalid_argument("schedule must start at t = 0");
    for (size_t i = 1; i < timesteps.size(); ++i)
        if (timesteps[i] <= timesteps[i - 1])
            throw std::invalid_argument("schedule timesteps must be strictly increasing");
}

SchedulePlan plan_schedule(int n, double eps_T, double gap) {
    if (n < 2) throw std::invalid_argument("plan_schedule: n >= 2");
    if (eps_T <= 0.0 || eps_T >= 1.0 || gap <= 0.0 || gap >= 1.0)
        throw std::invalid_argument("plan_schedule: eps_T and gap in (0, 1)");

    int T = 0;
    while (tv_rs_to_uniform(n, T) > eps_T) ++T;

    const double band_lo = gap / 3.0, band_hi = gap * 5.0 / 3.0;
    std::vector<int> sched{T};
    int cur = T;
    while (cur > 0) {
        int best = -1;
        double best_dist = std::numeric_limits<double>::infinity();
        for (int t = cur - 1; t >= 1; --t) {
            const double tv = tv_rs_between(n, t, cur);
            if (tv < band_lo || tv > band_hi) continue;
            const double dist = std::abs(tv - gap);
            if (dist < best_dist) {
                best_dist = dist;
                best = t;
            }
        }
        if (best < 0) {
            sched.push_back(0);
            break;
        }
        sched.push_back(best);
        cur = best;
    }
    if (sched.back() != 0) sched.push_back(0);
    std::reverse(sched.begin(), sched.end());
    return SchedulePlan{T, DenoisingSchedule(std::move(sched))};
}

}  // namespace symdiff
