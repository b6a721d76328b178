#include "symdiff/reverse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace symdiff {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double softplus(double x) { return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0); }
double log_sigmoid(double x) { return -softplus(-x); }       // log phi(x)
double log_one_minus_sigmoid(double x) { return -softplus(x); }

double logaddexp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

double logsumexp(const std::vector<double>& v) {
    double m = kNegInf;
    for (double x : v) m = std::max(m, x);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

// LSE of s over indices where keep[i] is true.
double logsumexp_subset(const std::vector<double>& s, const std::vector<bool>& keep) {
    double m = kNegInf;
    for (size_t i = 0; i < s.size(); ++i)
        if (keep[i]) m = std::max(m, s[i]);
    if (m == kNegInf) return kNegInf;
    double acc = 0.0;
    for (size_t i = 0; i < s.size(); ++i)
        if (keep[i]) acc += std::exp(s[i] - m);
    return m + std::log(acc);
}

// Categorical draw proportional to exp(s[i]) over indices with keep[i].
int categorical_subset(const std::vector<double>& s, const std::vector<bool>& keep, Rng& rng) {
    double m = kNegInf;
    for (size_t i = 0; i < s.size(); ++i)
        if (keep[i]) m = std::max(m, s[i]);
    double total = 0.0;
    for (size_t i = 0; i < s.size(); ++i)
        if (keep[i]) total += std::exp(s[i] - m);
    const double u = uniform_real(rng) * total;
    double acc = 0.0;
    int last = -1;
    for (size_t i = 0; i < s.size(); ++i) {
        if (!keep[i]) continue;
        acc += std::exp(s[i] - m);
        last = static_cast<int>(i);
        if (u < acc) return last;
    }
    return last;  // u == total edge from rounding
}

std::vector<double> clamp_scores(std::vector<double> s) {
    for (double& x : s) x = std::max(x, kScoreFloor);
    return s;
}

Permutation transposition(int n, int i, int j) {
    std::vector<int> m(n);
    for (int k = 0; k < n; ++k) m[k] = k;
    std::swap(m[i], m[j]);
    return Permutation(std::move(m));
}

// Moves the 0-based i-th component to the end; the inverse of an insertion.
Permutation inverse_insertion_perm(int n, int i) {
    std::vector<int> m(n);
    for (int j = 0; j < i; ++j) m[j] = j;
    for (int j = i; j + 1 < n; ++j) m[j] = j + 1;
    m[n - 1] = i;
    return Permutation(std::move(m));
}

// Word (left-pile indices ascending, right-pile indices ascending) from a
// left/right bit per object.
Permutation assignment_to_perm(const std::vector<bool>& left) {
    const int n = static_cast<int>(left.size());
    std::vector<int> m;
    m.reserve(n);
    for (int i = 0; i < n; ++i)
        if (left[i]) m.push_back(i);
    for (int i = 0; i < n; ++i)
        if (!left[i]) m.push_back(i);
    return Permutation(std::move(m));
}

bool assignment_is_monotone(const std::vector<bool>& left) {
    // L^a R^b patterns are exactly the preimages of the identity
    for (size_t i = 1; i < left.size(); ++i)
        if (left[i] && !left[i - 1]) return false;
    return true;
}

}  // namespace

std::string to_string(ReverseKind kind) {
    switch (kind) {
        case ReverseKind::IT: return "IT";
        case ReverseKind::II: return "II";
        case ReverseKind::IRS: return "IRS";
        case ReverseKind::PL: return "PL";
        case ReverseKind::GPL: return "GPL";
    }
    throw std::logic_error("unreachable");
}

ReverseKind reverse_kind_from_string(const std::string& name) {
    if (name == "IT") return ReverseKind::IT;
    if (name == "II") return ReverseKind::II;
    if (name == "IRS") return ReverseKind::IRS;
    if (name == "PL") return ReverseKind::PL;
    if (name == "GPL") return ReverseKind::GPL;
    throw std::invalid_argument("unknown reverse kind: " + name);
}

ReverseParams::ReverseParams(ReverseKind kind, int n, std::vector<double> scores, double tau)
    : kind_(kind), n_(n), scores_(clamp_scores(std::move(scores))), tau_(tau) {
    if (n < 1) throw std::invalid_argument("ReverseParams: n >= 1");
    const size_t want = kind == ReverseKind::GPL ? static_cast<size_t>(n) * n : static_cast<size_t>(n);
    if (scores_.size() != want) throw std::invalid_argument("ReverseParams: score shape mismatch");
    for (double x : scores_)
        if (!std::isfinite(x)) throw std::invalid_argument("ReverseParams: scores must be finite");
    if (!std::isfinite(tau_)) throw std::invalid_argument("ReverseParams: tau must be finite");
}

ReverseParams ReverseParams::it(std::vector<double> s, double tau) {
    const int n = static_cast<int>(s.size());
    return ReverseParams(ReverseKind::IT, n, std::move(s), tau);
}
ReverseParams ReverseParams::ii(std::vector<double> s) {
    const int n = static_cast<int>(s.size());
    return ReverseParams(ReverseKind::II, n, std::move(s), 0.0);
}
ReverseParams ReverseParams::irs(std::vector<double> s) {
    const int n = static_cast<int>(s.size());
    return ReverseParams(ReverseKind::IRS, n, std::move(s), 0.0);
}
ReverseParams ReverseParams::pl(std::vector<double> s) {
    const int n = static_cast<int>(s.size());
    return ReverseParams(ReverseKind::PL, n, std::move(s), 0.0);
}
ReverseParams ReverseParams::gpl(int n, std::vector<double> row_major) {
    return ReverseParams(ReverseKind::GPL, n, std::move(row_major), 0.0);
}

namespace {

double log_prob_it(const ReverseParams& p, const Permutation& sigma) {
    const int n = p.n();
    if (n == 1) return sigma.is_identity() ? 0.0 : kNegInf;
    if (sigma.is_identity()) return log_one_minus_sigmoid(p.tau());
    int i = -1, j = -1, moved = 0;
    for (int k = 0; k < n; ++k) {
        if (sigma(k) != k) {
            if (moved == 0) i = k;
            else if (moved == 1) j = k;
            if (++moved > 2) return kNegInf;
        }
    }
    if (moved != 2 || sigma(i) != j || sigma(j) != i) return kNegInf;

    const std::vector<double>& s = p.scores();
    std::vector<bool> keep(n, true);
    const double lse_all = logsumexp_subset(s, keep);
    keep[i] = false;
    const double lse_no_i = logsumexp_subset(s, keep);
    keep[i] = true;
    keep[j] = false;
    const double lse_no_j = logsumexp_subset(s, keep);
    // pick i then j, or j then i
    return log_sigmoid(p.tau()) + s[i] + s[j] - lse_all + logaddexp(-lse_no_i, -lse_no_j);
}

double log_prob_ii(const ReverseParams& p, const Permutation& sigma) {
    const int n = p.n();
    const int i = sigma(n - 1);
    for (int k = 0; k < i; ++k)
        if (sigma(k) != k) return kNegInf;
    for (int k = i; k + 1 < n; ++k)
        if (sigma(k) != k + 1) return kNegInf;
    return p.score(i) - logsumexp(p.scores());
}

double log_prob_irs(const ReverseParams& p, const Permutation& sigma) {
    const int n = p.n();
    const std::vector<double>& s = p.scores();
    if (sigma.is_identity()) {
        // n+1 monotone assignments L^a R^(n-a) all map to the identity
        std::vector<double> terms(n + 1);
        double prefix = 0.0;
        std::vector<double> suffix(n + 1, 0.0);
        for (int i = n - 1; i >= 0; --i) suffix[i] = suffix[i + 1] + log_one_minus_sigmoid(s[i]);
        for (int a = 0; a <= n; ++a) {
            terms[a] = prefix + suffix[a];
            if (a < n) prefix += log_sigmoid(s[a]);
        }
        return logsumexp(terms);
    }
    int descent = -1;
    for (int k = 0; k + 1 < n; ++k) {
        if (sigma(k) > sigma(k + 1)) {
            if (descent >= 0) return kNegInf;
            descent = k;
        }
    }
    // exactly one descent: unique assignment puts the word prefix on the left
    double lp = 0.0;
    for (int k = 0; k < n; ++k)
        lp += k <= descent ? log_sigmoid(s[sigma(k)]) : log_one_minus_sigmoid(s[sigma(k)]);
    return lp;
}

double log_prob_pl(const ReverseParams& p, const Permutation& sigma) {
    const int n = p.n();
    std::vector<double> picked(n);
    for (int i = 0; i < n; ++i) picked[i] = p.score(sigma(i));
    double lp = 0.0, lse = kNegInf;
    for (int i = n - 1; i >= 0; --i) {
        lse = logaddexp(lse, picked[i]);
        lp += picked[i] - lse;
    }
    return lp;
}

double log_prob_gpl(const ReverseParams& p, const Permutation& sigma) {
    const int n = p.n();
    double lp = 0.0;
    for (int i = 0; i < n; ++i) {
        std::vector<double> rest;
        rest.reserve(n - i);
        for (int j = i; j < n; ++j) rest.push_back(p.score(i, sigma(j)));
        lp += p.score(i, sigma(i)) - logsumexp(rest);
    }
    return lp;
}

}  // namespace

double log_prob(const ReverseParams& params, const Permutation& sigma) {
    if (sigma.n() != params.n()) throw std::invalid_argument("log_prob: size mismatch");
    switch (params.kind()) {
        case ReverseKind::IT: return log_prob_it(params, sigma);
        case ReverseKind::II: return log_prob_ii(params, sigma);
        case ReverseKind::IRS: return log_prob_irs(params, sigma);
        case ReverseKind::PL: return log_prob_pl(params, sigma);
        case ReverseKind::GPL: return log_prob_gpl(params, sigma);
    }
    throw std::logic_error("unreachable");
}

Permutation sample(const ReverseParams& params, Rng& rng) {
    const int n = params.n();
    switch (params.kind()) {
        case ReverseKind::IT: {
            if (n == 1) return Permutation::identity(1);
            if (!bernoulli(rng, 1.0 / (1.0 + std::exp(-params.tau()))))
                return Permutation::identity(n);
            std::vector<bool> keep(n, true);
            const int i = categorical_subset(params.scores(), keep, rng);
            keep[i] = false;
            const int j = categorical_subset(params.scores(), keep, rng);
            return transposition(n, i, j);
        }
        case ReverseKind::II: {
            std::vector<bool> keep(n, true);
            return inverse_insertion_perm(n, categorical_subset(params.scores(), keep, rng));
        }
        case ReverseKind::IRS: {
            std::vector<bool> left(n);
            for (int i = 0; i < n; ++i)
                left[i] = bernoulli(rng, 1.0 / (1.0 + std::exp(-params.score(i))));
            return assignment_to_perm(left);
        }
        case ReverseKind::PL:
        case ReverseKind::GPL: {
            std::vector<bool> avail(n, true);
            std::vector<int> word(n);
            std::vector<double> row(n);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j)
                    row[j] = params.kind() == ReverseKind::GPL ? params.score(i, j) : params.score(j);
                const int pick = categorical_subset(row, avail, rng);
                word[i] = pick;
                avail[pick] = false;
            }
            return Permutation(std::move(word));
        }
    }
    throw std::logic_error("unreachable");
}

namespace {

using Ranked = std::vector<std::pair<Permutation, double>>;

void sort_and_truncate(Ranked& items, int k) {
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (static_cast<int>(items.size()) > k) items.erase(items.begin() + k, items.end());
}

Ranked top_k_enumerated_support(const ReverseParams& p, int k) {
    const int n = p.n();
    Ranked items;
    items.emplace_back(Permutation::identity(n), log_prob(p, Permutation::identity(n)));
    if (p.kind() == ReverseKind::IT) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                Permutation t = transposition(n, i, j);
                const double lp = log_prob(p, t);
                items.emplace_back(std::move(t), lp);
            }
    } else {  // II; the identity is inverse_insert_n, already included
        for (int i = 0; i + 1 < n; ++i) {
            Permutation t = inverse_insertion_perm(n, i);
            const double lp = log_prob(p, t);
            items.emplace_back(std::move(t), lp);
        }
    }
    sort_and_truncate(items, k);
    return items;
}

// Lazy best-first enumeration of independent-bit assignments in decreasing
// probability. Positions are sorted by flip penalty; a state is the set of
// flipped positions, expanded Lawler-style through its largest index.
Ranked top_k_irs(const ReverseParams& p, int k) {
    const int n = p.n();
    std::vector<double> lp_best(n), penalty(n);
    std::vector<bool> best_bit(n);
    double best_total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double lL = log_sigmoid(p.score(i)), lR = log_one_minus_sigmoid(p.score(i));
        best_bit[i] = lL >= lR;
        lp_best[i] = std::max(lL, lR);
        penalty[i] = std::abs(lL - lR);
        best_total += lp_best[i];
    }
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return penalty[a] < penalty[b]; });

    struct State {
        double lp;
        std::vector<int> flipped;  // indices into `order`, increasing
    };
    auto cmp = [](const State& a, const State& b) { return a.lp < b.lp; };
    std::priority_queue<State, std::vector<State>, decltype(cmp)> heap(cmp);
    heap.push({best_total, {}});

    const double identity_lp = log_prob(p, Permutation::identity(n));
    bool identity_pending = true;
    Ranked items;
    while (!heap.empty() && static_cast<int>(items.size()) < k + 2) {
        State st = heap.top();
        heap.pop();
        if (identity_pending && identity_lp >= st.lp) {
            items.emplace_back(Permutation::identity(n), identity_lp);
            identity_pending = false;
        }
        std::vector<bool> bits = best_bit;
        for (int f : st.flipped) bits[order[f]] = !bits[order[f]];
        if (!assignment_is_monotone(bits)) {
            Permutation perm = assignment_to_perm(bits);
            const double lp = log_prob(p, perm);
            items.emplace_back(std::move(perm), lp);
        }
        // each flip set is generated exactly once: {} -> {0}; otherwise
        // extend past the last flip or shift the last flip up by one
        if (st.flipped.empty()) {
            if (n > 0) heap.push({st.lp - penalty[order[0]], {0}});
        } else {
            const int last = st.flipped.back();
            if (last + 1 < n) {
                State extend{st.lp - penalty[order[last + 1]], st.flipped};
                extend.flipped.push_back(last + 1);
                heap.push(std::move(extend));
                State shift{st.lp - penalty[order[last + 1]] + penalty[order[last]], st.flipped};
                shift.flipped.back() += 1;
                heap.push(std::move(shift));
            }
        }
    }
    if (identity_pending && static_cast<int>(items.size()) < k)
        items.emplace_back(Permutation::identity(n), identity_lp);
    sort_and_truncate(items, k);
    return items;
}

Ranked top_k_beam(const ReverseParams& p, int k, int beam_width) {
    const int n = p.n();
    struct Cand {
        std::vector<int> word;
        std::vector<bool> used;
        double lp;
    };
    std::vector<Cand> beam{{{}, std::vector<bool>(n, false), 0.0}};
    std::vector<double> row(n);
    for (int i = 0; i < n; ++i) {
        std::vector<Cand> next;
        next.reserve(beam.size() * (n - i));
        for (const Cand& c : beam) {
            for (int j = 0; j < n; ++j)
                row[j] = p.kind() == ReverseKind::GPL ? p.score(i, j) : p.score(j);
            std::vector<bool> avail(n);
            for (int j = 0; j < n; ++j) avail[j] = !c.used[j];
            const double lse = logsumexp_subset(row, avail);
            for (int j = 0; j < n; ++j) {
                if (c.used[j]) continue;
                Cand child = c;
                child.word.push_back(j);
                child.used[j] = true;
                child.lp += row[j] - lse;
                next.push_back(std::move(child));
            }
        }
        std::sort(next.begin(), next.end(), [](const Cand& a, const Cand& b) {
            if (a.lp != b.lp) return a.lp > b.lp;
            return a.word < b.word;
        });
        if (static_cast<int>(next.size()) > beam_width) next.resize(beam_width);
        beam = std::move(next);
    }
    Ranked items;
    items.reserve(beam.size());
    for (Cand& c : beam) {
        Permutation perm(std::move(c.word));
        const double lp = log_prob(p, perm);  // recomputed so floats match enumeration
        items.emplace_back(std::move(perm), lp);
    }
    sort_and_truncate(items, k);
    return items;
}

}  // namespace

std::vector<std::pair<Permutation, double>> top_k(const ReverseParams& params, int k,
                                                  int inner_beam) {
    if (k < 1) throw std::invalid_argument("top_k: k >= 1");
    if (inner_beam < k) throw std::invalid_argument("top_k: inner_beam >= k");
    switch (params.kind()) {
        case ReverseKind::IT:
        case ReverseKind::II: return top_k_enumerated_support(params, k);
        case ReverseKind::IRS: return top_k_irs(params, k);
        case ReverseKind::PL:
        case ReverseKind::GPL: return top_k_beam(params, k, inner_beam);
    }
    throw std::logic_error("unreachable");
}

ReverseParams delta_gpl(const Permutation& sigma, double M) {
    if (M < 0.0) throw std::invalid_argument("delta_gpl: M >= 0");  // M = 0 is uniform
    const int n = sigma.n();
    std::vector<double> s(static_cast<size_t>(n) * n, -M);
    for (int i = 0; i < n; ++i) s[static_cast<size_t>(i) * n + sigma(i)] = 0.0;
    return ReverseParams::gpl(n, std::move(s));
}

}  // namespace symdiff
