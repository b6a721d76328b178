#pragma once

#include <functional>
#include <string>
#include <vector>

#include "symdiff/mixing.hpp"
#include "symdiff/train.hpp"

namespace symdiff {

struct Metrics {
    double kendall_tau = 0.0;
    double accuracy = 0.0;
    double correctness = 0.0;
};

/// Kendall tau-a, exact-match accuracy and per-position correctness of a
/// predicted permutation against the ground truth.
Metrics evaluate(const Permutation& predicted, const Permutation& truth);

/// n uniform(0,1) scalars sorted ascending, then optionally corrupted with
/// Gaussian feature noise. Row order is the ground-truth ranking.
ObjectList sample_sorted_scalars(int n, double noise_std, Rng& rng);

/// Anything that maps a state and timestep to reverse-transition parameters;
/// lets tests drive the reverse process with oracle scores instead of a net.
using Scorer = std::function<ReverseParams(const ObjectList&, int)>;

Scorer net_scorer(const ScoreNet& net);
/// Concentrates on the permutation sorting the current state ascending.
Scorer delta_sorting_scorer(double M);

/// Runs the learned reverse chain from an already-noised state x_T.
ObjectList reverse_sample(const Scorer& scorer, const ObjectList& x_T,
                          const DenoisingSchedule& schedule, Rng& rng);

/// Draws X_T by uniformly permuting the object list, then runs the chain.
ObjectList reverse_sample_from_set(const Scorer& scorer, const ObjectList& objects,
                                   const DenoisingSchedule& schedule, Rng& rng);

struct DecodeResult {
    Permutation perm;  // X_hat_0 = apply(perm, x_T)
    double log_prob;
};

DecodeResult decode_greedy(const Scorer& scorer, const ObjectList& x_T,
                           const DenoisingSchedule& schedule, int inner_beam);

/// Outer beam over schedule steps with per-step top-k expansion; candidates
/// reaching the same state are merged keeping the best accumulated
/// log-probability, and the greedy path is never worse than the result.
DecodeResult decode_beam(const Scorer& scorer, const ObjectList& x_T,
                         const DenoisingSchedule& schedule, int outer_beam, int inner_beam);

struct TrainResult {
    ScoreNet net;
    DenoisingSchedule schedule;
    std::vector<double> loss_history;       // theta-part, per batch, nats per trajectory
    std::vector<double> constants_history;  // reported theta-independent terms
    AdamWState opt;
    Rng rng;
};

/// Trains the reverse model on the scalar-sorting task described by the
/// config. Rejects schedule/head combinations whose reverse support cannot
/// cover the forward transitions.
TrainResult train(ScoreNet net, const TrainConfig& config, Rng& rng);

DenoisingSchedule resolve_schedule(const TrainConfig& config);

struct EvalConfig {
    int samples = 200;
    int restarts = 1;
    std::string mode = "beam";  // "greedy" | "beam" | "sample"
    int outer_beam = 20;
    int inner_beam = 50;
    std::uint64_t seed = 123;
    int threads = 1;
};

struct SampleEval {
    int index;
    Metrics metrics;
    double log_prob;
};

struct EvalResult {
    Metrics mean;
    std::vector<SampleEval> per_sample;
};

/// Held-out evaluation on freshly drawn sorting instances; per-sample RNG
/// substreams make the result independent of the thread count.
EvalResult evaluate_model(const ScoreNet& net, const DenoisingSchedule& schedule, int n,
                          double noise_std, const EvalConfig& config);

}  // namespace symdiff
