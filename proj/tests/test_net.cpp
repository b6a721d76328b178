#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "symdiff/net.hpp"

using namespace symdiff;

namespace {

ScoreNetConfig tiny_config(ReverseKind head, int max_n = 8) {
    ScoreNetConfig cfg;
    cfg.head = head;
    cfg.d_model = 16;
    cfg.n_layers = 2;
    cfg.n_heads = 2;
    cfg.d_ff = 24;
    cfg.enc_hidden = 8;
    cfg.head_hidden = 8;
    cfg.max_n = max_n;
    return cfg;
}

ObjectList random_list(int n, Rng& rng) {
    ObjectList x(n, 1);
    for (int i = 0; i < n; ++i) x.at(i, 0) = uniform_real(rng);
    return x;
}

}  // namespace

TEST_CASE("time embedding basics") {
    const auto e0 = time_embed(0, 12);
    CHECK(e0.size() == 12);
    for (size_t i = 0; i < e0.size(); i += 2) CHECK(e0[i] == 0.0);
    for (size_t i = 1; i < e0.size(); i += 2) CHECK(e0[i] == 1.0);
    for (int t = 0; t < 32; ++t)
        for (int t2 = t + 1; t2 <= 32; ++t2) CHECK(time_embed(t, 16) != time_embed(t2, 16));
    CHECK_THROWS_AS(time_embed(1, 7), std::invalid_argument);
}

TEST_CASE("gpl attention mask block structure") {
    const int n = 4;
    const auto m = gpl_attention_mask(n);
    auto at = [&](int r, int c) { return m[static_cast<size_t>(r) * 2 * n + c]; };
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) CHECK(at(r, c) == 0.0);  // inputs see inputs
    for (int r = 0; r < n; ++r)
        for (int c = n; c < 2 * n; ++c) CHECK(at(r, c) == kMaskBlocked);
    for (int r = n; r < 2 * n; ++r) {
        for (int c = 0; c < n; ++c) CHECK(at(r, c) == 0.0);  // dummies see inputs
        for (int c = n; c < 2 * n; ++c)
            CHECK(at(r, c) == ((c - n < r - n) ? 0.0 : kMaskBlocked));
    }
}

TEST_CASE("forward_scores output shapes per head") {
    Rng rng(5);
    const ObjectList x = random_list(5, rng);
    for (ReverseKind head : {ReverseKind::IT, ReverseKind::II, ReverseKind::IRS, ReverseKind::PL,
                             ReverseKind::GPL}) {
        ScoreNet net = ScoreNet::init(tiny_config(head), 3);
        const ReverseParams params = forward_scores(net, x, 1);
        CHECK(params.kind() == head);
        CHECK(params.n() == 5);
        if (head == ReverseKind::GPL) CHECK(params.scores().size() == 25);
    }
}

TEST_CASE("PL scores are equivariant to input order") {
    Rng rng(11);
    ScoreNet net = ScoreNet::init(tiny_config(ReverseKind::PL), 4);
    const int n = 6;
    const ObjectList x = random_list(n, rng);
    const ReverseParams base = forward_scores(net, x, 3);
    for (int rep = 0; rep < 4; ++rep) {
        const Permutation pi = random_uniform(n, rng);
        const ReverseParams permuted = forward_scores(net, apply(pi, x), 3);
        // row i of apply(pi, x) is row pi(i) of x, so scores follow pi
        for (int i = 0; i < n; ++i)
            CHECK(permuted.score(i) == doctest::Approx(base.score(pi(i))).epsilon(1e-12));
    }
}

TEST_CASE("GPL causal mask: dummy j cannot influence rows before j") {
    Rng rng(13);
    const int n = 5;
    ScoreNet net = ScoreNet::init(tiny_config(ReverseKind::GPL, n), 7);
    const ObjectList x = random_list(n, rng);
    const ReverseParams base = forward_scores(net, x, 2);
    for (int j = 1; j < n; ++j) {
        // zero dummy j's learned embedding
        auto& table = net.params.at("dummy.table");
        std::vector<double> keep(table->v);
        for (int c = 0; c < table->cols; ++c) table->at(j, c) = 0.0;
        const ReverseParams probed = forward_scores(net, x, 2);
        for (int i = 0; i < j; ++i)
            for (int c = 0; c < n; ++c)
                CHECK(probed.score(i, c) == doctest::Approx(base.score(i, c)).epsilon(1e-12));
        table->v = keep;
    }
}

TEST_CASE("net rejects bad shapes") {
    ScoreNet net = ScoreNet::init(tiny_config(ReverseKind::GPL, 4), 1);
    Rng rng(2);
    CHECK_THROWS_AS(forward_scores(net, random_list(6, rng), 1), std::invalid_argument);
    ObjectList wide(3, 2, {1, 2, 3, 4, 5, 6});
    CHECK_THROWS_AS(forward_scores(net, wide, 1), std::invalid_argument);
    ScoreNetConfig bad = tiny_config(ReverseKind::PL);
    bad.n_heads = 3;  // does not divide d_model = 16
    CHECK_THROWS_AS(ScoreNet::init(bad, 1), std::invalid_argument);
}

TEST_CASE("init is deterministic in the seed") {
    ScoreNet a = ScoreNet::init(tiny_config(ReverseKind::GPL), 42);
    ScoreNet b = ScoreNet::init(tiny_config(ReverseKind::GPL), 42);
    ScoreNet c = ScoreNet::init(tiny_config(ReverseKind::GPL), 43);
    bool all_equal = true, any_diff = false;
    for (const auto& [name, tensor] : a.params) {
        all_equal &= tensor->v == b.params.at(name)->v;
        any_diff |= tensor->v != c.params.at(name)->v;
    }
    CHECK(all_equal);
    CHECK(any_diff);
    CHECK(a.param_count() > 0);
}
