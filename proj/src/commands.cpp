#include "symdiff/commands.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "symdiff/diffusion.hpp"
#include "symdiff/io.hpp"
#include "symdiff/oracles.hpp"

namespace symdiff::cmd {

namespace {

int log_level() {
    const char* env = std::getenv("SYMDIFF_LOG");
    if (!env) return 1;
    const std::string v(env);
    if (v == "quiet" || v == "0") return 0;
    if (v == "debug" || v == "2") return 2;
    return 1;
}

void info(const std::string& msg) {
    if (log_level() >= 1) std::fprintf(stderr, "[symdiff] %s\n", msg.c_str());
}

std::string out_path(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / name).string();
}

void reject_unknown_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw std::invalid_argument("unknown key \"" + key + "\" in " + where);
    }
}

}  // namespace

int analyze_mixing(const MixingArgs& args) {
    if (args.n < 2) throw std::invalid_argument("analyze-mixing: --n must be >= 2");
    const nlohmann::json config{{"command", "analyze-mixing"},
                                {"n", args.n},
                                {"eps_t", args.eps_t},
                                {"gap", args.gap},
                                {"t_max", args.t_max}};
    const std::string hash = config_hash(config);

    const SchedulePlan plan = plan_schedule(args.n, args.eps_t, args.gap);
    const int t_max = args.t_max > 0 ? args.t_max : plan.T;

    std::ostringstream curve;
    curve << "# config_hash=" << hash << "\n";
    curve << "n,t,tv_to_uniform\n";
    for (int t = 1; t <= t_max; ++t)
        curve << args.n << "," << t << "," << format_double(tv_rs_to_uniform(args.n, t)) << "\n";
    atomic_write_file(out_path(args.out_dir, "tv_to_uniform.csv"), curve.str());

    std::ostringstream pairwise;
    pairwise << "# config_hash=" << hash << "\n";
    pairwise << "t,t_prime,tv\n";
    for (int t = 1; t <= t_max; ++t)
        for (int t2 = t + 1; t2 <= t_max; ++t2)
            pairwise << t << "," << t2 << "," << format_double(tv_rs_between(args.n, t, t2))
                     << "\n";
    atomic_write_file(out_path(args.out_dir, "tv_pairwise.csv"), pairwise.str());

    nlohmann::json doc;
    doc["config_hash"] = hash;
    doc["n"] = args.n;
    doc["T"] = plan.T;
    doc["schedule"] = plan.schedule.timesteps;
    nlohmann::json tvs = nlohmann::json::array();
    for (int i = 1; i <= plan.schedule.intervals(); ++i)
        tvs.push_back(tv_rs_between(args.n, plan.schedule.timesteps[i - 1],
                                    plan.schedule.timesteps[i]));
    doc["consecutive_tv"] = std::move(tvs);
    atomic_write_file(out_path(args.out_dir, "schedule.json"), doc.dump(2) + "\n");
    info("analyze-mixing: T=" + std::to_string(plan.T) + ", wrote " + args.out_dir);
    return kExitOk;
}

int sample_shuffle(const SampleShuffleArgs& args) {
    if (args.n < 1) throw std::invalid_argument("sample-shuffle: --n must be >= 1");
    if (args.count < 1) throw std::invalid_argument("sample-shuffle: --count must be >= 1");
    const ShuffleKind kind = shuffle_kind_from_string(args.kind);
    const int T = args.T >= 0
                      ? args.T
                      : static_cast<int>(std::ceil(cutoff_time(kind, std::max(args.n, 2))));
    const nlohmann::json config{{"command", "sample-shuffle"}, {"kind", args.kind},
                                {"n", args.n},                {"T", T},
                                {"count", args.count},        {"states", args.states},
                                {"seed", args.seed}};

    nlohmann::json trajs = nlohmann::json::array();
    for (int i = 0; i < args.count; ++i) {
        Rng rng = substream(args.seed, static_cast<std::uint64_t>(i));
        ObjectList x0(args.n, 1);
        for (int r = 0; r < args.n; ++r) x0.at(r, 0) = static_cast<double>(r + 1);
        trajs.push_back(to_json(forward_trajectory(x0, kind, T, rng), args.states));
    }
    nlohmann::json doc{{"config_hash", config_hash(config)},
                       {"kind", args.kind},
                       {"n", args.n},
                       {"T", T},
                       {"count", args.count},
                       {"trajectories", std::move(trajs)}};
    atomic_write_file(out_path(args.out_dir, "trajectories.json"), doc.dump(2) + "\n");
    info("sample-shuffle: wrote " + std::to_string(args.count) + " trajectories");
    return kExitOk;
}

namespace {

TrainConfig parse_train_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    reject_unknown_keys(j, {"n", "forward_kind", "schedule", "batch_size", "epochs",
                            "samples_per_epoch", "trajectories_per_sample", "lr", "weight_decay",
                            "beta1", "beta2", "adam_eps", "loss_mode", "noise_std", "seed", "net"},
                        "train config");
    if (j.contains("net"))
        reject_unknown_keys(j.at("net"),
                            {"head", "input_dim", "d_model", "n_layers", "n_heads", "d_ff",
                             "enc_hidden", "head_hidden", "max_n"},
                            "train config net");
    // fill defaults, then overlay the file on top
    nlohmann::json full = to_json(TrainConfig{});
    for (auto& [key, value] : j.items()) {
        if (key == "net") {
            for (auto& [nkey, nvalue] : value.items()) full["net"][nkey] = nvalue;
        } else {
            full[key] = value;
        }
    }
    return train_config_from_json(full);
}

}  // namespace

int train(const TrainArgs& args) {
    TrainConfig config = parse_train_config(args.config_path);
    if (args.seed_override) config.seed = *args.seed_override;
    if (args.loss_override) config.loss_mode = *args.loss_override;
    const std::string hash = config_hash(to_json(config));

    ScoreNet net = ScoreNet::init(config.net, config.seed);
    info("train: " + std::to_string(net.param_count()) + " parameters, loss mode " +
         config.loss_mode);
    Rng rng(config.seed);
    TrainResult result = symdiff::train(std::move(net), config, rng);

    std::ostringstream csv;
    csv << "# config_hash=" << hash << "\n";
    csv << "batch,loss,constants\n";
    for (size_t i = 0; i < result.loss_history.size(); ++i)
        csv << i << "," << format_double(result.loss_history[i]) << ","
            << format_double(result.constants_history[i]) << "\n";
    atomic_write_file(out_path(args.out_dir, "loss_history.csv"), csv.str());

    save_checkpoint(out_path(args.out_dir, "checkpoint.json"), result.net, result.opt, config,
                    result.rng);

    nlohmann::json summary{{"config_hash", hash},
                           {"schedule", result.schedule.timesteps},
                           {"batches", result.loss_history.size()},
                           {"final_loss", result.loss_history.back()},
                           {"checkpoint", "checkpoint.json"}};
    atomic_write_file(out_path(args.out_dir, "train_summary.json"), summary.dump(2) + "\n");
    info("train: final batch loss " + format_double(result.loss_history.back()));
    return kExitOk;
}

int eval(const EvalArgs& args) {
    LoadedCheckpoint loaded = load_checkpoint(args.checkpoint);
    const DenoisingSchedule schedule = resolve_schedule(loaded.config);
    EvalConfig eval_cfg;
    eval_cfg.samples = args.samples;
    eval_cfg.restarts = args.restarts;
    eval_cfg.mode = args.mode;
    eval_cfg.outer_beam = args.outer_beam;
    eval_cfg.inner_beam = args.inner_beam;
    eval_cfg.seed = args.seed;
    eval_cfg.threads = args.threads;
    if (args.samples < 1) throw std::invalid_argument("eval: --samples must be >= 1");

    const nlohmann::json config{{"command", "eval"},       {"checkpoint", args.checkpoint},
                                {"samples", args.samples}, {"restarts", args.restarts},
                                {"mode", args.mode},       {"outer_beam", args.outer_beam},
                                {"inner_beam", args.inner_beam}, {"seed", args.seed}};
    const std::string hash = config_hash(config);

    const EvalResult result = evaluate_model(loaded.net, schedule, loaded.config.n,
                                             loaded.config.noise_std, eval_cfg);

    std::ostringstream csv;
    csv << "# config_hash=" << hash << "\n";
    csv << "index,kendall_tau,accuracy,correctness,log_prob\n";
    for (const SampleEval& row : result.per_sample)
        csv << row.index << "," << format_double(row.metrics.kendall_tau) << ","
            << format_double(row.metrics.accuracy) << ","
            << format_double(row.metrics.correctness) << "," << format_double(row.log_prob)
            << "\n";
    atomic_write_file(out_path(args.out_dir, "eval_per_sample.csv"), csv.str());

    nlohmann::json doc{
        {"config_hash", hash},
        {"n", loaded.config.n},
        {"model_checkpoint", args.checkpoint},
        {"schedule", schedule.timesteps},
        {"decode",
         {{"mode", args.mode}, {"outer_beam", args.outer_beam}, {"inner_beam", args.inner_beam}}},
        {"metrics",
         {{"kendall_tau", result.mean.kendall_tau},
          {"accuracy", result.mean.accuracy},
          {"correctness", result.mean.correctness}}},
        {"per_sample_csv", "eval_per_sample.csv"}};
    atomic_write_file(out_path(args.out_dir, "eval_report.json"), doc.dump(2) + "\n");
    info("eval: kendall_tau=" + format_double(result.mean.kendall_tau) +
         " accuracy=" + format_double(result.mean.accuracy));
    return kExitOk;
}

int decode(const DecodeArgs& args) {
    LoadedCheckpoint loaded = load_checkpoint(args.checkpoint);
    const DenoisingSchedule schedule = resolve_schedule(loaded.config);
    const int n = loaded.config.n;
    Rng rng(args.seed);

    ObjectList x_T(n, 1);
    nlohmann::json input_json;
    if (!args.input_path.empty()) {
        nlohmann::json j = nlohmann::json::parse(read_file(args.input_path));
        const std::vector<double> values = j.get<std::vector<double>>();
        if (static_cast<int>(values.size()) != n)
            throw std::invalid_argument("decode: input length does not match model n");
        for (int i = 0; i < n; ++i) x_T.at(i, 0) = values[i];
        input_json = j;
    } else {
        const ObjectList x0 = sample_sorted_scalars(n, loaded.config.noise_std, rng);
        x_T = apply(random_uniform(n, rng), x0);
        std::vector<double> values(n);
        for (int i = 0; i < n; ++i) values[i] = x_T.at(i, 0);
        input_json = values;
    }

    const nlohmann::json config{{"command", "decode"},   {"checkpoint", args.checkpoint},
                                {"mode", args.mode},     {"outer_beam", args.outer_beam},
                                {"inner_beam", args.inner_beam}, {"seed", args.seed},
                                {"input", input_json}};
    const Scorer scorer = net_scorer(loaded.net);
    const DecodeResult result =
        args.mode == "greedy"
            ? decode_greedy(scorer, x_T, schedule, args.inner_beam)
            : decode_beam(scorer, x_T, schedule, args.outer_beam, args.inner_beam);

    nlohmann::json doc{{"config_hash", config_hash(config)},
                       {"input", input_json},
                       {"permutation", to_json(result.perm)},
                       {"log_prob", result.log_prob}};
    std::vector<double> decoded(n);
    const ObjectList x0_hat = apply(result.perm, x_T);
    for (int i = 0; i < n; ++i) decoded[i] = x0_hat.at(i, 0);
    doc["decoded"] = decoded;
    atomic_write_file(out_path(args.out_dir, "decode.json"), doc.dump(2) + "\n");
    info("decode: " + result.perm.to_string() + " log_prob " + format_double(result.log_prob));
    return kExitOk;
}

int gradcheck(const GradcheckArgs& args) {
    std::vector<ReverseKind> heads;
    if (args.head == "all") {
        heads = {ReverseKind::IT, ReverseKind::II, ReverseKind::IRS, ReverseKind::PL,
                 ReverseKind::GPL};
    } else {
        std::string upper = args.head;
        for (char& c : upper) c = static_cast<char>(std::toupper(c));
        heads = {reverse_kind_from_string(upper)};
    }
    if (args.n < 2 || args.n > 6) throw std::invalid_argument("gradcheck: --n in [2, 6]");

    const nlohmann::json config{
        {"command", "gradcheck"}, {"head", args.head}, {"n", args.n}, {"seed", args.seed}};
    constexpr double kTol = 1e-4;
    bool all_ok = true;
    nlohmann::json rows = nlohmann::json::array();
    for (ReverseKind head : heads) {
        const double err = gradcheck_max_rel_error(head, args.n, args.seed);
        const bool ok = err < kTol;
        all_ok &= ok;
        std::printf("%s head %-3s n=%d max rel error %.3e\n", ok ? "PASS" : "FAIL",
                    to_string(head).c_str(), args.n, err);
        rows.push_back({{"head", to_string(head)}, {"max_rel_error", err}, {"pass", ok}});
    }
    nlohmann::json doc{{"config_hash", config_hash(config)},
                       {"tolerance", kTol},
                       {"checks", std::move(rows)},
                       {"pass", all_ok}};
    atomic_write_file(out_path(args.out_dir, "gradcheck.json"), doc.dump(2) + "\n");
    return all_ok ? kExitOk : kExitCheckFailed;
}

int oracle(const OracleArgs& args) {
    if (args.n_max > 6 || args.n_max < 1)
        throw std::invalid_argument("oracle: --n-max must be in [1, 6]");
    const nlohmann::json config{{"command", "oracle"}, {"n_max", args.n_max}};
    const std::vector<OracleCheck> checks = run_oracle_suite(args.n_max);
    bool all_ok = true;
    nlohmann::json rows = nlohmann::json::array();
    for (const OracleCheck& check : checks) {
        all_ok &= check.passed;
        std::printf("%s %s%s%s\n", check.passed ? "PASS" : "FAIL", check.name.c_str(),
                    check.detail.empty() ? "" : " - ", check.detail.c_str());
        rows.push_back({{"name", check.name}, {"pass", check.passed}, {"detail", check.detail}});
    }
    nlohmann::json doc{{"config_hash", config_hash(config)},
                       {"n_max", args.n_max},
                       {"checks", std::move(rows)},
                       {"pass", all_ok}};
    atomic_write_file(out_path(args.out_dir, "oracle_report.json"), doc.dump(2) + "\n");
    return all_ok ? kExitOk : kExitCheckFailed;
}

}  // namespace symdiff::cmd
