#include "symdiff/diffusion.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

namespace symdiff {

Metrics evaluate(const Permutation& predicted, const Permutation& truth) {
    if (predicted.n() != truth.n()) throw std::invalid_argument("evaluate: size mismatch");
    const int n = predicted.n();
    Metrics m;
    if (n > 1) {
        long long concordant = 0, discordant = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const int a = predicted(i) - predicted(j);
                const int b = truth(i) - truth(j);
                (a > 0) == (b > 0) ? ++concordant : ++discordant;
            }
        m.kendall_tau = static_cast<double>(concordant - discordant) /
                        (0.5 * n * (n - 1));
    } else {
        m.kendall_tau = 1.0;
    }
    int correct = 0;
    for (int i = 0; i < n; ++i) correct += predicted(i) == truth(i);
    m.correctness = static_cast<double>(correct) / n;
    m.accuracy = correct == n ? 1.0 : 0.0;
    return m;
}

ObjectList sample_sorted_scalars(int n, double noise_std, Rng& rng) {
    std::vector<double> xs(n);
    for (double& x : xs) x = uniform_real(rng);
    std::sort(xs.begin(), xs.end());
    ObjectList out(n, 1);
    for (int i = 0; i < n; ++i)
        out.at(i, 0) = xs[i] + (noise_std > 0.0 ? noise_std * normal(rng) : 0.0);
    return out;
}

Scorer net_scorer(const ScoreNet& net) {
    return [&net](const ObjectList& x, int t) { return forward_scores(net, x, t); };
}

Scorer delta_sorting_scorer(double M) {
    return [M](const ObjectList& x, int /*t*/) {
        std::vector<int> order(x.n());
        for (int i = 0; i < x.n(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&x](int a, int b) { return x.at(a, 0) < x.at(b, 0); });
        return delta_gpl(Permutation(std::move(order)), M);
    };
}

ObjectList reverse_sample(const Scorer& scorer, const ObjectList& x_T,
                          const DenoisingSchedule& schedule, Rng& rng) {
    ObjectList x = x_T;
    for (int i = schedule.intervals(); i >= 1; --i) {
        const ReverseParams params = scorer(x, schedule.timesteps[i]);
        x = apply(sample(params, rng), x);
    }
    return x;
}

ObjectList reverse_sample_from_set(const Scorer& scorer, const ObjectList& objects,
                                   const DenoisingSchedule& schedule, Rng& rng) {
    const ObjectList x_T = apply(random_uniform(objects.n(), rng), objects);
    return reverse_sample(scorer, x_T, schedule, rng);
}

DecodeResult decode_greedy(const Scorer& scorer, const ObjectList& x_T,
                           const DenoisingSchedule& schedule, int inner_beam) {
    ObjectList x = x_T;
    Permutation cum = Permutation::identity(x_T.n());
    double lp = 0.0;
    for (int i = schedule.intervals(); i >= 1; --i) {
        const ReverseParams params = scorer(x, schedule.timesteps[i]);
        auto best = top_k(params, 1, inner_beam);
        cum = compose(cum, best[0].first);
        lp += best[0].second;
        x = apply(best[0].first, x);
    }
    return DecodeResult{std::move(cum), lp};
}

DecodeResult decode_beam(const Scorer& scorer, const ObjectList& x_T,
                         const DenoisingSchedule& schedule, int outer_beam, int inner_beam) {
    if (outer_beam < 1 || inner_beam < outer_beam)
        throw std::invalid_argument("decode_beam: need inner_beam >= outer_beam >= 1");
    struct Cand {
        Permutation perm;
        double lp;
    };
    std::vector<Cand> beam{{Permutation::identity(x_T.n()), 0.0}};
    for (int i = schedule.intervals(); i >= 1; --i) {
        // merge duplicates by state, keeping the best accumulated score
        std::map<std::vector<int>, double> merged;
        for (const Cand& cand : beam) {
            const ObjectList x = apply(cand.perm, x_T);
            const ReverseParams params = scorer(x, schedule.timesteps[i]);
            for (const auto& [move, lp] : top_k(params, outer_beam, inner_beam)) {
                const Permutation next = compose(cand.perm, move);
                const double total = cand.lp + lp;
                auto [it, inserted] = merged.try_emplace(next.mapping(), total);
                if (!inserted && total > it->second) it->second = total;
            }
        }
        std::vector<Cand> next;
        next.reserve(merged.size());
        for (auto& [mapping, lp] : merged) next.push_back({Permutation(mapping), lp});
        std::sort(next.begin(), next.end(), [](const Cand& a, const Cand& b) {
            if (a.lp != b.lp) return a.lp > b.lp;
            return a.perm < b.perm;
        });
        if (static_cast<int>(next.size()) > outer_beam)
            next.erase(next.begin() + outer_beam, next.end());
        beam = std::move(next);
    }
    // the greedy path can be pruned mid-way; never return anything worse
    DecodeResult best = decode_greedy(scorer, x_T, schedule, inner_beam);
    for (const Cand& cand : beam) {
        if (cand.lp > best.log_prob ||
            (cand.lp == best.log_prob && cand.perm < best.perm)) {
            best = DecodeResult{cand.perm, cand.lp};
        }
    }
    return best;
}

DenoisingSchedule resolve_schedule(const TrainConfig& config) {
    if (!config.schedule.empty()) return DenoisingSchedule(config.schedule);
    return plan_schedule(config.n).schedule;
}

static void validate_train_config(const TrainConfig& config, const DenoisingSchedule& schedule) {
    const ReverseKind head = config.net.head;
    const bool inverse_family =
        head == ReverseKind::IT || head == ReverseKind::II || head == ReverseKind::IRS;
    if (inverse_family) {
        for (int i = 1; i <= schedule.intervals(); ++i)
            if (schedule.timesteps[i] - schedule.timesteps[i - 1] != 1)
                throw std::invalid_argument(
                    "merged schedule intervals need a PL or GPL head; inverse-shuffle "
                    "supports cannot cover multi-step transitions");
        const bool matched = (head == ReverseKind::IT && config.forward_kind == ShuffleKind::RT) ||
                             (head == ReverseKind::II && config.forward_kind == ShuffleKind::RI) ||
                             (head == ReverseKind::IRS && config.forward_kind == ShuffleKind::RS);
        if (!matched)
            throw std::invalid_argument("inverse-shuffle head does not match the forward kind");
    }
    if (config.batch_size < 1 || config.epochs < 1 || config.samples_per_epoch < 1 ||
        config.trajectories_per_sample < 1 || config.lr <= 0.0)
        throw std::invalid_argument("train config: sizes and learning rate must be positive");
    if (config.loss_mode != "full-trajectory" && config.loss_mode != "random-timestep")
        throw std::invalid_argument("train config: unknown loss mode " + config.loss_mode);
    if (config.n > config.net.max_n && config.net.head == ReverseKind::GPL)
        throw std::invalid_argument("train config: n exceeds net.max_n");
}

TrainResult train(ScoreNet net, const TrainConfig& config, Rng& rng) {
    DenoisingSchedule schedule = resolve_schedule(config);
    validate_train_config(config, schedule);
    const int T = schedule.T();
    const int batches = std::max(1, config.samples_per_epoch / config.batch_size);

    AdamWConfig opt_cfg{config.lr, config.weight_decay, config.beta1, config.beta2,
                        config.adam_eps};
    AdamWState opt;
    std::vector<double> history, constants;
    history.reserve(static_cast<size_t>(config.epochs) * batches);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (int b = 0; b < batches; ++b) {
            StepLoss loss;
            if (config.loss_mode == "full-trajectory") {
                std::vector<Trajectory> batch;
                batch.reserve(static_cast<size_t>(config.batch_size) *
                              config.trajectories_per_sample);
                for (int s = 0; s < config.batch_size; ++s) {
                    const ObjectList x0 = sample_sorted_scalars(config.n, config.noise_std, rng);
                    for (int r = 0; r < config.trajectories_per_sample; ++r)
                        batch.push_back(forward_trajectory(x0, config.forward_kind, T, rng));
                }
                loss = loss_full_trajectory(net, batch, schedule);
            } else {
                std::vector<ObjectList> batch;
                batch.reserve(config.batch_size);
                for (int s = 0; s < config.batch_size; ++s)
                    batch.push_back(sample_sorted_scalars(config.n, config.noise_std, rng));
                loss = loss_random_timestep(net, batch, schedule, config.forward_kind, rng);
            }
            ad::backward(loss.loss);
            adamw_step(net, opt, opt_cfg);
            history.push_back(loss.loss->v[0]);
            constants.push_back(loss.constants);
        }
    }
    return TrainResult{std::move(net), std::move(schedule), std::move(history),
                       std::move(constants), std::move(opt), rng};
}

static SampleEval eval_one(const Scorer& scorer, const DenoisingSchedule& schedule, int n,
                           double noise_std, const EvalConfig& config, int index) {
    Rng rng = substream(config.seed, static_cast<std::uint64_t>(index));
    const ObjectList x0 = sample_sorted_scalars(n, noise_std, rng);
    DecodeResult best{Permutation::identity(n), -std::numeric_limits<double>::infinity()};
    Permutation best_truth = Permutation::identity(n);
    for (int r = 0; r < config.restarts; ++r) {
        const Permutation pi_T = random_uniform(n, rng);
        const ObjectList x_T = apply(pi_T, x0);
        DecodeResult result = [&]() {
            if (config.mode == "greedy")
                return decode_greedy(scorer, x_T, schedule, config.inner_beam);
            if (config.mode == "beam")
                return decode_beam(scorer, x_T, schedule, config.outer_beam, config.inner_beam);
            if (config.mode == "sample") {
                ObjectList x = reverse_sample(scorer, x_T, schedule, rng);
                // recover the implied permutation by matching rows
                std::vector<int> perm(n);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        if (x.at(i, 0) == x_T.at(j, 0)) {
                            perm[i] = j;
                            break;
                        }
                return DecodeResult{Permutation(std::move(perm)), 0.0};
            }
            throw std::invalid_argument("eval: unknown decode mode " + config.mode);
        }();
        if (r == 0 || result.log_prob > best.log_prob) {
            best = std::move(result);
            best_truth = inverse(pi_T);
        }
    }
    return SampleEval{index, evaluate(best.perm, best_truth), best.log_prob};
}

EvalResult evaluate_model(const ScoreNet& net, const DenoisingSchedule& schedule, int n,
                          double noise_std, const EvalConfig& config) {
    const Scorer scorer = net_scorer(net);
    std::vector<SampleEval> rows(config.samples);
    const int workers = std::max(1, config.threads);
    if (workers == 1) {
        for (int i = 0; i < config.samples; ++i)
            rows[i] = eval_one(scorer, schedule, n, noise_std, config, i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> cursor{0};
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&]() {
                for (int i = cursor.fetch_add(1); i < config.samples; i = cursor.fetch_add(1))
                    rows[i] = eval_one(scorer, schedule, n, noise_std, config, i);
            });
        for (auto& th : pool) th.join();
    }
    Metrics mean;
    for (const SampleEval& row : rows) {
        mean.kendall_tau += row.metrics.kendall_tau;
        mean.accuracy += row.metrics.accuracy;
        mean.correctness += row.metrics.correctness;
    }
    const double inv = config.samples > 0 ? 1.0 / config.samples : 0.0;
    mean.kendall_tau *= inv;
    mean.accuracy *= inv;
    mean.correctness *= inv;
    return EvalResult{mean, std::move(rows)};
}

}  // namespace symdiff
