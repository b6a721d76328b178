#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "symdiff/mixing.hpp"
#include "symdiff/net.hpp"
#include "symdiff/shuffles.hpp"

namespace symdiff {

struct TrainConfig {
    int n = 8;
    ShuffleKind forward_kind = ShuffleKind::RS;
    std::vector<int> schedule;  // empty: planned from the mixing analytics
    int batch_size = 64;
    int epochs = 30;
    int samples_per_epoch = 1024;
    int trajectories_per_sample = 3;
    double lr = 3e-3;
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::string loss_mode = "full-trajectory";  // or "random-timestep"
    double noise_std = 0.0;
    std::uint64_t seed = 1;
    ScoreNetConfig net;
};

/// Scalar loss graph plus the theta-independent part of the bound (log n!
/// and the forward log q terms), which is reported but never differentiated.
struct StepLoss {
    ad::Value loss;
    double constants = 0.0;
    int steps = 0;
};

/// -log p_theta(target | x, t) built from an existing scores node.
ad::Value nll_from_scores(ReverseKind head, const ad::Value& scores, const Permutation& target);

ad::Value nll_graph(const ScoreNet& net, const ObjectList& x, int t, const Permutation& target);

/// Mean over trajectories of sum_i -log p_theta(X_{t_{i-1}} | X_{t_i}).
StepLoss loss_full_trajectory(const ScoreNet& net, const std::vector<Trajectory>& trajectories,
                              const DenoisingSchedule& schedule);

/// Single-interval estimator: one uniformly drawn schedule interval per
/// sample, scaled by the interval count so the expectation matches the
/// full-trajectory sum.
StepLoss loss_random_timestep(const ScoreNet& net, const std::vector<ObjectList>& data,
                              const DenoisingSchedule& schedule, ShuffleKind kind, Rng& rng);

struct AdamWConfig {
    double lr = 1e-3;
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamWState {
    std::int64_t step = 0;
    std::map<std::string, std::vector<double>> m;
    std::map<std::string, std::vector<double>> v;
};

/// Decoupled-weight-decay Adam update with bias correction, applied to every
/// parameter using the gradients left by the last backward().
void adamw_step(ScoreNet& net, AdamWState& state, const AdamWConfig& config);

/// End-to-end finite-difference check of d(nll)/d(theta) on a small net.
/// Returns the max relative error over every parameter component.
double gradcheck_max_rel_error(ReverseKind head, int n, std::uint64_t seed);

constexpr int kCheckpointFormatVersion = 1;

void save_checkpoint(const std::string& path, const ScoreNet& net, const AdamWState& opt,
                     const TrainConfig& config, const Rng& rng);

struct LoadedCheckpoint {
    ScoreNet net;
    AdamWState opt;
    TrainConfig config;
    Rng rng;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace symdiff
