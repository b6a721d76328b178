#pragma once

#include <map>
#include <string>
#include <vector>

#include "symdiff/perm.hpp"
#include "symdiff/reverse.hpp"
#include "symdiff/tensor.hpp"

namespace symdiff {

/// Additive attention-mask value standing in for -inf; exp(-1e9) underflows
/// to exactly zero under softmax.
constexpr double kMaskBlocked = -1e9;

struct ScoreNetConfig {
    ReverseKind head = ReverseKind::GPL;
    int input_dim = 1;
    int d_model = 32;
    int n_layers = 2;
    int n_heads = 2;
    int d_ff = 64;
    int enc_hidden = 32;
    int head_hidden = 32;
    int max_n = 16;  // capacity of the learned dummy-position table (GPL)

    bool operator==(const ScoreNetConfig&) const = default;
};

/// Transformer encoder producing reverse-transition scores from (X_t, t).
/// Input tokens are the rows of X_t (no positional encoding, so scores are
/// equivariant to input order); GPL appends learned dummy-position tokens
/// behind the block-causal mask, IT appends one dummy token for tau.
struct ScoreNet {
    ScoreNetConfig config;
    std::map<std::string, ad::Value> params;  // name -> leaf tensor, ordered

    static ScoreNet init(const ScoreNetConfig& config, std::uint64_t seed);

    std::vector<std::pair<std::string, ad::Value>> param_list() const;
    size_t param_count() const;
};

/// Sinusoidal embedding of timestep t; d_model must be even.
std::vector<double> time_embed(int t, int d_model);

/// The 2n x 2n GPL attention mask: input tokens see only input tokens,
/// dummy token j sees input tokens and dummy tokens < j.
std::vector<double> gpl_attention_mask(int n);

/// Builds the score graph for one (X_t, t). Output shape: (n+1) x 1 for IT,
/// n x 1 for II/IRS/PL, n x n for GPL.
ad::Value forward_scores_graph(const ScoreNet& net, const ObjectList& x, int t);

/// Same forward pass, detached into plain sampling/decoding parameters.
ReverseParams forward_scores(const ScoreNet& net, const ObjectList& x, int t);

}  // namespace symdiff
