#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace symdiff::cmd {

// Exit codes shared by every subcommand.
constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCheckFailed = 3;

struct MixingArgs {
    int n = 0;
    double eps_t = 0.005;
    double gap = 0.3;
    int t_max = 0;  // 0: up to the planned T
    std::string out_dir = ".";
};

struct SampleShuffleArgs {
    std::string kind = "RS";
    int n = 0;
    int T = -1;  // -1: ceil(cutoff time)
    int count = 1;
    bool states = false;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
};

struct TrainArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> loss_override;
};

struct EvalArgs {
    std::string checkpoint;
    int samples = 200;
    int restarts = 1;
    std::string mode = "beam";
    int outer_beam = 20;
    int inner_beam = 50;
    std::uint64_t seed = 123;
    int threads = 1;
    std::string out_dir = ".";
};

struct DecodeArgs {
    std::string checkpoint;
    std::string input_path;  // JSON array of scalars; empty: fresh sample
    std::string mode = "beam";
    int outer_beam = 20;
    int inner_beam = 50;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
};

struct GradcheckArgs {
    std::string head = "all";
    int n = 4;
    std::uint64_t seed = 7;
    std::string out_dir = ".";
};

struct OracleArgs {
    int n_max = 5;
    std::string out_dir = ".";
};

int analyze_mixing(const MixingArgs& args);
int sample_shuffle(const SampleShuffleArgs& args);
int train(const TrainArgs& args);
int eval(const EvalArgs& args);
int decode(const DecodeArgs& args);
int gradcheck(const GradcheckArgs& args);
int oracle(const OracleArgs& args);

}  // namespace symdiff::cmd
