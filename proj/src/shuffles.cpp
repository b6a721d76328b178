#include "symdiff/shuffles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace symdiff {

std::string to_string(ShuffleKind kind) {
    switch (kind) {
        case ShuffleKind::RT: return "RT";
        case ShuffleKind::RI: return "RI";
        case ShuffleKind::RS: return "RS";
    }
    throw std::logic_error("unreachable");
}

ShuffleKind shuffle_kind_from_string(const std::string& name) {
    if (name == "RT") return ShuffleKind::RT;
    if (name == "RI") return ShuffleKind::RI;
    if (name == "RS") return ShuffleKind::RS;
    throw std::invalid_argument("unknown shuffle kind: " + name);
}

Permutation insertion_perm(int n, int pos) {
    if (pos < 1 || pos > n) throw std::invalid_argument("insertion_perm: pos in [1, n]");
    std::vector<int> m(n);
    const int p = pos - 1;
    for (int j = 0; j < p; ++j) m[j] = j;
    m[p] = n - 1;
    for (int j = p + 1; j < n; ++j) m[j] = j - 1;
    return Permutation(std::move(m));
}

static Permutation sample_rt(int n, Rng& rng) {
    const int i = static_cast<int>(uniform_index(rng, n));
    const int j = static_cast<int>(uniform_index(rng, n));
    std::vector<int> m(n);
    std::iota(m.begin(), m.end(), 0);
    std::swap(m[i], m[j]);
    return Permutation(std::move(m));
}

Permutation sample_rs_geometric(int n, Rng& rng) {
    std::vector<double> u(n);
    for (double& v : u) v = uniform_real(rng);
    std::sort(u.begin(), u.end());
    std::vector<std::pair<double, int>> keyed(n);
    for (int i = 0; i < n; ++i) {
        const double y = 2.0 * u[i];
        keyed[i] = {y - std::floor(y), i};
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<int> m(n);
    for (int j = 0; j < n; ++j) m[j] = keyed[j].second;
    return Permutation(std::move(m));
}

Permutation sample_rs_gsr(int n, Rng& rng) {
    int cut = 0;
    for (int i = 0; i < n; ++i) cut += rng() & 1u;
    std::vector<int> m(n);
    int left = 0;          // next card of the top pile [0, cut)
    int right = cut;       // next card of the bottom pile [cut, n)
    for (int j = 0; j < n; ++j) {
        const int a = cut - left, b = n - right;
        if (a > 0 && (b == 0 || uniform_index(rng, static_cast<std::uint64_t>(a) + b) <
                                    static_cast<std::uint64_t>(a))) {
            m[j] = left++;
        } else {
            m[j] = right++;
        }
    }
    return Permutation(std::move(m));
}

Permutation sample_step(ShuffleKind kind, int n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("sample_step: n >= 1");
    switch (kind) {
        case ShuffleKind::RT: return sample_rt(n, rng);
        case ShuffleKind::RI:
            return insertion_perm(n, static_cast<int>(uniform_index(rng, n)) + 1);
        case ShuffleKind::RS: return sample_rs_geometric(n, rng);
    }
    throw std::logic_error("unreachable");
}

static bool is_transposition(const Permutation& sigma) {
    int moved = 0, i = -1, j = -1;
    for (int k = 0; k < sigma.n(); ++k) {
        if (sigma(k) != k) {
            if (moved == 0) i = k;
            else if (moved == 1) j = k;
            ++moved;
            if (moved > 2) return false;
        }
    }
    return moved == 2 && sigma(i) == j && sigma(j) == i;
}

// -1 when sigma is not an insertion; otherwise the 1-based insert position.
static int insertion_pos(const Permutation& sigma) {
    const int n = sigma.n();
    int p = -1;
    for (int k = 0; k < n; ++k)
        if (sigma(k) == n - 1) p = k;
    for (int k = 0; k < p; ++k)
        if (sigma(k) != k) return -1;
    for (int k = p + 1; k < n; ++k)
        if (sigma(k) != k - 1) return -1;
    return p + 1;
}

double pmf_one_step(ShuffleKind kind, const Permutation& sigma) {
    const int n = sigma.n();
    switch (kind) {
        case ShuffleKind::RT:
            if (sigma.is_identity()) return 1.0 / n;
            if (is_transposition(sigma)) return 2.0 / (static_cast<double>(n) * n);
            return 0.0;
        case ShuffleKind::RI:
            return insertion_pos(sigma) >= 1 ? 1.0 / n : 0.0;
        case ShuffleKind::RS: {
            const int r = rising_sequences(sigma);
            if (r > 2) return 0.0;
            return std::ldexp(r == 1 ? n + 1.0 : 1.0, -n);
        }
    }
    throw std::logic_error("unreachable");
}

double log_pmf_rs_tstep(int n, int r, int t) {
    if (t < 0) throw std::invalid_argument("log_pmf_rs_tstep: t >= 0");
    if (r < 1 || r > n) throw std::invalid_argument("log_pmf_rs_tstep: r in [1, n]");
    if (t < 63 && (std::uint64_t{1} << t) < static_cast<std::uint64_t>(r))
        return -std::numeric_limits<double>::infinity();
    const double inv2t = std::ldexp(1.0, -t);
    double acc = -std::lgamma(n + 1.0);
    for (int j = 1; j <= n; ++j) acc += std::log1p((j - r) * inv2t);
    return acc;
}

double pmf_rs_tstep(const Permutation& sigma, int t) {
    return std::exp(log_pmf_rs_tstep(sigma.n(), rising_sequences(sigma), t));
}

Trajectory forward_trajectory(const ObjectList& x0, ShuffleKind kind, int T, Rng& rng) {
    if (T < 0) throw std::invalid_argument("forward_trajectory: T >= 0");
    Trajectory traj;
    traj.kind = kind;
    traj.T = T;
    traj.states.reserve(T + 1);
    traj.moves.reserve(T);
    traj.states.push_back(x0);
    for (int t = 1; t <= T; ++t) {
        traj.moves.push_back(sample_step(kind, x0.n(), rng));
        traj.states.push_back(apply(traj.moves.back(), traj.states.back()));
    }
    return traj;
}

Permutation cumulative_move(const Trajectory& traj, int t) {
    if (t < 0 || t > traj.T) throw std::invalid_argument("cumulative_move: t in [0, T]");
    Permutation f = Permutation::identity(traj.states[0].n());
    for (int s = 0; s < t; ++s) f = compose(f, traj.moves[s]);
    return f;
}

Permutation merged_move(const Trajectory& traj, int t_lo, int t_hi) {
    if (t_lo > t_hi || t_lo < 0 || t_hi > traj.T)
        throw std::invalid_argument("merged_move: need 0 <= t_lo <= t_hi <= T");
    Permutation g = Permutation::identity(traj.states[0].n());
    for (int s = t_lo; s < t_hi; ++s) g = compose(g, traj.moves[s]);
    return g;
}

}  // namespace symdiff
