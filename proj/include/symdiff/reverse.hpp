#pragma once

#include <string>
#include <utility>
#include <vector>

#include "symdiff/perm.hpp"

namespace symdiff {

enum class ReverseKind { IT, II, IRS, PL, GPL };

std::string to_string(ReverseKind kind);
ReverseKind reverse_kind_from_string(const std::string& name);

/// Scores are clamped to >= -1e4; that floor is the working stand-in for
/// -inf everywhere in this module.
constexpr double kScoreFloor = -1e4;

/// Parameters of one reverse-transition family over S_n:
///   IT  - n logits plus the identity/transposition gate tau
///   II  - n logits over which component moves to the end
///   IRS - n per-object left-pile logits
///   PL  - n preference scores
///   GPL - n x n scores, row i scoring the i-th output position
class ReverseParams {
public:
    static ReverseParams it(std::vector<double> s, double tau);
    static ReverseParams ii(std::vector<double> s);
    static ReverseParams irs(std::vector<double> s);
    static ReverseParams pl(std::vector<double> s);
    static ReverseParams gpl(int n, std::vector<double> row_major);

    ReverseKind kind() const { return kind_; }
    int n() const { return n_; }
    double tau() const { return tau_; }
    const std::vector<double>& scores() const { return scores_; }
    double score(int i) const { return scores_[i]; }
    double score(int i, int j) const { return scores_[static_cast<size_t>(i) * n_ + j]; }

private:
    ReverseParams(ReverseKind kind, int n, std::vector<double> scores, double tau);

    ReverseKind kind_;
    int n_;
    std::vector<double> scores_;
    double tau_ = 0.0;
};

/// Exact log pmf at sigma; -inf outside the family support. For IRS the
/// identity sums over its n+1 monotone pile assignments.
double log_prob(const ReverseParams& params, const Permutation& sigma);

Permutation sample(const ReverseParams& params, Rng& rng);

/// Top-k most probable permutations, descending log-probability, ties broken
/// by lexicographic one-line order. IT/II enumerate their support, IRS runs
/// a lazy best-first walk over pile assignments, PL/GPL run a beam of width
/// `inner_beam` over score rows (exact once inner_beam covers every prefix).
std::vector<std::pair<Permutation, double>> top_k(const ReverseParams& params, int k,
                                                  int inner_beam);

/// GPL scores concentrating on sigma: 0 on (i, sigma(i)), -M elsewhere;
/// p(sigma) >= (1 - (n-1) e^-M)^n. M = 0 degenerates to the uniform.
ReverseParams delta_gpl(const Permutation& sigma, double M);

}  // namespace symdiff
