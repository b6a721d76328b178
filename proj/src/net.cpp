#include "symdiff/net.hpp"

#include <cmath>
#include <stdexcept>

namespace symdiff {

using ad::Value;

std::vector<double> time_embed(int t, int d_model) {
    if (d_model % 2 != 0) throw std::invalid_argument("time_embed: d_model must be even");
    std::vector<double> e(d_model);
    for (int i = 0; i < d_model / 2; ++i) {
        const double freq = std::pow(10000.0, -2.0 * i / d_model);
        e[2 * i] = std::sin(t * freq);
        e[2 * i + 1] = std::cos(t * freq);
    }
    return e;
}

std::vector<double> gpl_attention_mask(int n) {
    std::vector<double> m(static_cast<size_t>(2 * n) * (2 * n), 0.0);
    auto at = [&](int r, int c) -> double& { return m[static_cast<size_t>(r) * 2 * n + c]; };
    for (int r = 0; r < n; ++r)
        for (int c = n; c < 2 * n; ++c) at(r, c) = kMaskBlocked;  // inputs never see dummies
    for (int r = n; r < 2 * n; ++r)
        for (int c = n; c < 2 * n; ++c)
            if (c - n >= r - n) at(r, c) = kMaskBlocked;  // dummy j sees dummies < j only
    return m;
}

namespace {

Value make_weight(int rows, int cols, Rng& rng, double std_dev) {
    std::vector<double> w(static_cast<size_t>(rows) * cols);
    for (double& x : w) x = std_dev * normal(rng);
    return ad::param(rows, cols, std::move(w));
}

Value make_zeros(int rows, int cols) {
    return ad::param(rows, cols, std::vector<double>(static_cast<size_t>(rows) * cols, 0.0));
}

}  // namespace

ScoreNet ScoreNet::init(const ScoreNetConfig& config, std::uint64_t seed) {
    if (config.d_model % config.n_heads != 0)
        throw std::invalid_argument("ScoreNet: d_model must be divisible by n_heads");
    Rng rng(seed);
    ScoreNet net;
    net.config = config;
    const int dm = config.d_model, dh = config.d_model / config.n_heads;
    const double w_std = 0.05;

    auto& p = net.params;
    p["enc.w1"] = make_weight(config.input_dim, config.enc_hidden, rng, w_std);
    p["enc.b1"] = make_zeros(1, config.enc_hidden);
    p["enc.w2"] = make_weight(config.enc_hidden, dm, rng, w_std);
    p["enc.b2"] = make_zeros(1, dm);
    for (int l = 0; l < config.n_layers; ++l) {
        const std::string lp = "layer" + std::to_string(l) + ".";
        for (int h = 0; h < config.n_heads; ++h) {
            const std::string hp = lp + "head" + std::to_string(h) + ".";
            p[hp + "wq"] = make_weight(dm, dh, rng, w_std);
            p[hp + "wk"] = make_weight(dm, dh, rng, w_std);
            p[hp + "wv"] = make_weight(dm, dh, rng, w_std);
            p[hp + "wo"] = make_weight(dh, dm, rng, w_std);
        }
        p[lp + "ffn.w1"] = make_weight(dm, config.d_ff, rng, w_std);
        p[lp + "ffn.b1"] = make_zeros(1, config.d_ff);
        p[lp + "ffn.w2"] = make_weight(config.d_ff, dm, rng, w_std);
        p[lp + "ffn.b2"] = make_zeros(1, dm);
    }
    if (config.head == ReverseKind::GPL) {
        p["dummy.table"] = make_weight(config.max_n, dm, rng, w_std);
    } else {
        p["head.w1"] = make_weight(dm, config.head_hidden, rng, w_std);
        p["head.b1"] = make_zeros(1, config.head_hidden);
        p["head.w2"] = make_weight(config.head_hidden, 1, rng, w_std);
        p["head.b2"] = make_zeros(1, 1);
    }
    return net;
}

std::vector<std::pair<std::string, ad::Value>> ScoreNet::param_list() const {
    return {params.begin(), params.end()};
}

size_t ScoreNet::param_count() const {
    size_t count = 0;
    for (const auto& [name, value] : params) count += value->size();
    return count;
}

namespace {

Value linear(const Value& x, const Value& w, const Value& b) {
    return ad::add(ad::matmul(x, w), b);
}

Value encoder_block(const ScoreNet& net, const ObjectList& x, int t) {
    const auto& p = net.params;
    std::vector<double> raw(x.values());
    Value input = ad::constant(x.n(), x.dim(), std::move(raw));
    Value hidden = ad::relu(linear(input, p.at("enc.w1"), p.at("enc.b1")));
    Value enc = linear(hidden, p.at("enc.w2"), p.at("enc.b2"));
    Value te = ad::constant(1, net.config.d_model, time_embed(t, net.config.d_model));
    return ad::add(enc, te);
}

Value transformer(const ScoreNet& net, Value tokens, const Value& mask) {
    const auto& p = net.params;
    const int dh = net.config.d_model / net.config.n_heads;
    const double att_scale = 1.0 / std::sqrt(static_cast<double>(dh));
    for (int l = 0; l < net.config.n_layers; ++l) {
        const std::string lp = "layer" + std::to_string(l) + ".";
        Value mixed;
        for (int h = 0; h < net.config.n_heads; ++h) {
            const std::string hp = lp + "head" + std::to_string(h) + ".";
            Value q = ad::matmul(tokens, p.at(hp + "wq"));
            Value k = ad::matmul(tokens, p.at(hp + "wk"));
            Value v = ad::matmul(tokens, p.at(hp + "wv"));
            Value att = ad::masked_attention(q, k, v, mask, att_scale);
            Value proj = ad::matmul(att, p.at(hp + "wo"));
            mixed = h == 0 ? proj : ad::add(mixed, proj);
        }
        tokens = ad::add(tokens, mixed);
        Value ff = linear(ad::relu(linear(tokens, p.at(lp + "ffn.w1"), p.at(lp + "ffn.b1"))),
                          p.at(lp + "ffn.w2"), p.at(lp + "ffn.b2"));
        tokens = ad::add(tokens, ff);
    }
    return tokens;
}

Value head_mlp(const ScoreNet& net, const Value& tokens) {
    const auto& p = net.params;
    return linear(ad::relu(linear(tokens, p.at("head.w1"), p.at("head.b1"))), p.at("head.w2"),
                  p.at("head.b2"));
}

}  // namespace

ad::Value forward_scores_graph(const ScoreNet& net, const ObjectList& x, int t) {
    if (x.dim() != net.config.input_dim)
        throw std::invalid_argument("forward_scores: input dimension mismatch");
    const int n = x.n();
    Value y = encoder_block(net, x, t);

    switch (net.config.head) {
        case ReverseKind::GPL: {
            if (n > net.config.max_n)
                throw std::invalid_argument("forward_scores: n exceeds dummy table capacity");
            std::vector<int> idx(n);
            for (int i = 0; i < n; ++i) idx[i] = i;
            Value dummies = ad::gather_rows(net.params.at("dummy.table"), idx);
            Value tokens = ad::concat_rows(y, dummies);
            Value mask = ad::constant(2 * n, 2 * n, gpl_attention_mask(n));
            Value z = transformer(net, tokens, mask);
            Value z_in = ad::slice_rows(z, 0, n);
            Value z_dummy = ad::slice_rows(z, n, 2 * n);
            // S[i][j] = <dummy i, input j>: row i scores output position i
            return ad::matmul_nt(z_dummy, z_in);
        }
        case ReverseKind::IT: {
            // one zero dummy token whose output row becomes tau
            Value zero_token = ad::constant(1, net.config.d_model,
                                            std::vector<double>(net.config.d_model, 0.0));
            Value tokens = ad::concat_rows(y, zero_token);
            Value mask = ad::constant(n + 1, n + 1,
                                      std::vector<double>(static_cast<size_t>(n + 1) * (n + 1), 0.0));
            return head_mlp(net, transformer(net, tokens, mask));
        }
        default: {
            Value mask =
                ad::constant(n, n, std::vector<double>(static_cast<size_t>(n) * n, 0.0));
            return head_mlp(net, transformer(net, y, mask));
        }
    }
}

ReverseParams forward_scores(const ScoreNet& net, const ObjectList& x, int t) {
    Value out = forward_scores_graph(net, x, t);
    const int n = x.n();
    switch (net.config.head) {
        case ReverseKind::GPL: return ReverseParams::gpl(n, out->v);
        case ReverseKind::IT: {
            std::vector<double> s(out->v.begin(), out->v.begin() + n);
            return ReverseParams::it(std::move(s), out->v[n]);
        }
        case ReverseKind::II: return ReverseParams::ii(out->v);
        case ReverseKind::IRS: return ReverseParams::irs(out->v);
        case ReverseKind::PL: return ReverseParams::pl(out->v);
    }
    throw std::logic_error("unreachable");
}

}  // namespace symdiff
