#include <cstdio>
#include <exception>
#include <functional>

#include <CLI11.hpp>

#include "symdiff/commands.hpp"

using namespace symdiff;

namespace {

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return cmd::kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return cmd::kExitRuntime;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"discrete diffusion over finite symmetric groups"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 1;
    std::string config_path;
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", seed, "RNG seed")->each([&](const std::string&) { seed_given = true; });
    app.add_option("--threads", threads, "worker cap for parallel sections")
        ->check(CLI::PositiveNumber);
    app.add_option("--config", config_path, "JSON run config (used by train)");

    cmd::MixingArgs mixing;
    auto* c_mix = app.add_subcommand("analyze-mixing", "riffle-shuffle TV curves and schedule");
    c_mix->add_option("--n", mixing.n, "deck size")->required();
    c_mix->add_option("--eps-t", mixing.eps_t, "TV-to-uniform threshold for T");
    c_mix->add_option("--gap", mixing.gap, "target consecutive TV");
    c_mix->add_option("--t-max", mixing.t_max, "last timestep in the CSV output");

    cmd::SampleShuffleArgs shuffle;
    auto* c_shuf = app.add_subcommand("sample-shuffle", "draw forward trajectories");
    c_shuf->add_option("--kind", shuffle.kind, "RT | RI | RS")->capture_default_str();
    c_shuf->add_option("--n", shuffle.n, "deck size")->required();
    c_shuf->add_option("--T", shuffle.T, "steps (default: ceil of the cut-off time)");
    c_shuf->add_option("--count", shuffle.count, "number of trajectories")->capture_default_str();
    c_shuf->add_flag("--states", shuffle.states, "inline the states into the JSON");

    cmd::TrainArgs train_args;
    std::string loss_override;
    auto* c_train = app.add_subcommand("train", "train a reverse model from a JSON config");
    c_train->add_option("--loss", loss_override,
                        "override loss mode: full-trajectory | random-timestep");

    cmd::EvalArgs eval_args;
    auto* c_eval = app.add_subcommand("eval", "held-out metrics for a checkpoint");
    c_eval->add_option("--checkpoint", eval_args.checkpoint, "checkpoint path")->required();
    c_eval->add_option("--samples", eval_args.samples, "held-out sample count")
        ->capture_default_str();
    c_eval->add_option("--restarts", eval_args.restarts, "X_T restarts per sample")
        ->capture_default_str();
    c_eval->add_option("--mode", eval_args.mode, "greedy | beam | sample")->capture_default_str();
    c_eval->add_option("--outer-beam", eval_args.outer_beam, "outer beam width")
        ->capture_default_str();
    c_eval->add_option("--inner-beam", eval_args.inner_beam, "inner beam width")
        ->capture_default_str();

    cmd::DecodeArgs decode_args;
    auto* c_dec = app.add_subcommand("decode", "decode one instance with a checkpoint");
    c_dec->add_option("--checkpoint", decode_args.checkpoint, "checkpoint path")->required();
    c_dec->add_option("--input", decode_args.input_path, "JSON array of scalars (optional)");
    c_dec->add_option("--mode", decode_args.mode, "greedy | beam")->capture_default_str();
    c_dec->add_option("--outer-beam", decode_args.outer_beam, "outer beam width")
        ->capture_default_str();
    c_dec->add_option("--inner-beam", decode_args.inner_beam, "inner beam width")
        ->capture_default_str();

    cmd::GradcheckArgs grad_args;
    auto* c_grad = app.add_subcommand("gradcheck", "finite-difference gradient checks");
    c_grad->add_option("--head", grad_args.head, "it | ii | irs | pl | gpl | all")
        ->capture_default_str();
    c_grad->add_option("--n", grad_args.n, "instance size")->capture_default_str();

    cmd::OracleArgs oracle_args;
    auto* c_oracle = app.add_subcommand("oracle", "brute-force enumeration suites");
    c_oracle->add_option("--n-max", oracle_args.n_max, "largest n to enumerate (<= 6)")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cmd::kExitUsage;
    }

    if (c_mix->parsed()) {
        mixing.out_dir = out_dir;
        return run_guarded([&] { return cmd::analyze_mixing(mixing); });
    }
    if (c_shuf->parsed()) {
        shuffle.out_dir = out_dir;
        shuffle.seed = seed;
        return run_guarded([&] { return cmd::sample_shuffle(shuffle); });
    }
    if (c_train->parsed()) {
        if (config_path.empty()) {
            std::fprintf(stderr, "error: train requires --config\n");
            return cmd::kExitUsage;
        }
        train_args.config_path = config_path;
        train_args.out_dir = out_dir;
        if (seed_given) train_args.seed_override = seed;
        if (!loss_override.empty()) train_args.loss_override = loss_override;
        return run_guarded([&] { return cmd::train(train_args); });
    }
    if (c_eval->parsed()) {
        eval_args.out_dir = out_dir;
        if (seed_given) eval_args.seed = seed;
        eval_args.threads = threads;
        return run_guarded([&] { return cmd::eval(eval_args); });
    }
    if (c_dec->parsed()) {
        decode_args.out_dir = out_dir;
        decode_args.seed = seed;
        return run_guarded([&] { return cmd::decode(decode_args); });
    }
    if (c_grad->parsed()) {
        grad_args.out_dir = out_dir;
        if (seed_given) grad_args.seed = seed;
        return run_guarded([&] { return cmd::gradcheck(grad_args); });
    }
    if (c_oracle->parsed()) {
        oracle_args.out_dir = out_dir;
        return run_guarded([&] { return cmd::oracle(oracle_args); });
    }
    return cmd::kExitUsage;
}
