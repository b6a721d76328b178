#include "symdiff/io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "symdiff/train.hpp"

namespace symdiff {

void atomic_write_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string config_hash(const nlohmann::json& config) {
    const std::string dump = config.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

std::string format_double(double x) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

nlohmann::json to_json(const Permutation& p) {
    std::vector<int> one_based(p.n());
    for (int i = 0; i < p.n(); ++i) one_based[i] = p(i) + 1;
    return nlohmann::json(one_based);
}

Permutation permutation_from_json(const nlohmann::json& j) {
    std::vector<int> m = j.get<std::vector<int>>();
    for (int& v : m) v -= 1;
    return Permutation(std::move(m));
}

nlohmann::json to_json(const Trajectory& traj, bool include_states) {
    nlohmann::json doc;
    doc["kind"] = to_string(traj.kind);
    doc["T"] = traj.T;
    nlohmann::json moves = nlohmann::json::array();
    for (const Permutation& m : traj.moves) moves.push_back(to_json(m));
    doc["moves"] = std::move(moves);
    if (include_states) {
        nlohmann::json states = nlohmann::json::array();
        for (const ObjectList& x : traj.states) {
            nlohmann::json rows = nlohmann::json::array();
            for (int r = 0; r < x.n(); ++r) {
                nlohmann::json row = nlohmann::json::array();
                for (int c = 0; c < x.dim(); ++c) row.push_back(x.at(r, c));
                rows.push_back(std::move(row));
            }
            states.push_back(std::move(rows));
        }
        doc["states"] = std::move(states);
    }
    return doc;
}

Trajectory trajectory_from_json(const nlohmann::json& j) {
    Trajectory traj;
    traj.kind = shuffle_kind_from_string(j.at("kind").get<std::string>());
    traj.T = j.at("T").get<int>();
    for (const auto& mj : j.at("moves")) traj.moves.push_back(permutation_from_json(mj));
    if (static_cast<int>(traj.moves.size()) != traj.T)
        throw std::runtime_error("trajectory: move count does not match T");
    if (j.contains("states")) {
        for (const auto& sj : j.at("states")) {
            const int n = static_cast<int>(sj.size());
            const int dim = static_cast<int>(sj.at(0).size());
            ObjectList x(n, dim);
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < dim; ++c) x.at(r, c) = sj.at(r).at(c).get<double>();
            traj.states.push_back(std::move(x));
        }
    }
    return traj;
}

nlohmann::json to_json(const ReverseParams& params) {
    nlohmann::json doc;
    doc["kind"] = to_string(params.kind());
    doc["n"] = params.n();
    if (params.kind() == ReverseKind::GPL) {
        nlohmann::json rows = nlohmann::json::array();
        for (int i = 0; i < params.n(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (int j = 0; j < params.n(); ++j) row.push_back(params.score(i, j));
            rows.push_back(std::move(row));
        }
        doc["S"] = std::move(rows);
    } else {
        doc["s"] = params.scores();
        if (params.kind() == ReverseKind::IT) doc["tau"] = params.tau();
    }
    return doc;
}

ReverseParams reverse_params_from_json(const nlohmann::json& j) {
    const ReverseKind kind = reverse_kind_from_string(j.at("kind").get<std::string>());
    if (kind == ReverseKind::GPL) {
        const auto& rows = j.at("S");
        const int n = static_cast<int>(rows.size());
        std::vector<double> s;
        s.reserve(static_cast<size_t>(n) * n);
        for (const auto& row : rows)
            for (const auto& x : row) s.push_back(x.get<double>());
        return ReverseParams::gpl(n, std::move(s));
    }
    std::vector<double> s = j.at("s").get<std::vector<double>>();
    switch (kind) {
        case ReverseKind::IT: return ReverseParams::it(std::move(s), j.at("tau").get<double>());
        case ReverseKind::II: return ReverseParams::ii(std::move(s));
        case ReverseKind::IRS: return ReverseParams::irs(std::move(s));
        case ReverseKind::PL: return ReverseParams::pl(std::move(s));
        default: throw std::logic_error("unreachable");
    }
}

nlohmann::json to_json(const ScoreNetConfig& c) {
    return nlohmann::json{{"head", to_string(c.head)},       {"input_dim", c.input_dim},
                          {"d_model", c.d_model},            {"n_layers", c.n_layers},
                          {"n_heads", c.n_heads},            {"d_ff", c.d_ff},
                          {"enc_hidden", c.enc_hidden},      {"head_hidden", c.head_hidden},
                          {"max_n", c.max_n}};
}

static ScoreNetConfig score_net_config_from_json(const nlohmann::json& j) {
    ScoreNetConfig c;
    c.head = reverse_kind_from_string(j.at("head").get<std::string>());
    c.input_dim = j.at("input_dim").get<int>();
    c.d_model = j.at("d_model").get<int>();
    c.n_layers = j.at("n_layers").get<int>();
    c.n_heads = j.at("n_heads").get<int>();
    c.d_ff = j.at("d_ff").get<int>();
    c.enc_hidden = j.at("enc_hidden").get<int>();
    c.head_hidden = j.at("head_hidden").get<int>();
    c.max_n = j.at("max_n").get<int>();
    return c;
}

nlohmann::json to_json(const TrainConfig& c) {
    return nlohmann::json{{"n", c.n},
                          {"forward_kind", to_string(c.forward_kind)},
                          {"schedule", c.schedule},
                          {"batch_size", c.batch_size},
                          {"epochs", c.epochs},
                          {"samples_per_epoch", c.samples_per_epoch},
                          {"trajectories_per_sample", c.trajectories_per_sample},
                          {"lr", c.lr},
                          {"weight_decay", c.weight_decay},
                          {"beta1", c.beta1},
                          {"beta2", c.beta2},
                          {"adam_eps", c.adam_eps},
                          {"loss_mode", c.loss_mode},
                          {"noise_std", c.noise_std},
                          {"seed", c.seed},
                          {"net", to_json(c.net)}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.n = j.at("n").get<int>();
    c.forward_kind = shuffle_kind_from_string(j.at("forward_kind").get<std::string>());
    c.schedule = j.at("schedule").get<std::vector<int>>();
    c.batch_size = j.at("batch_size").get<int>();
    c.epochs = j.at("epochs").get<int>();
    c.samples_per_epoch = j.at("samples_per_epoch").get<int>();
    c.trajectories_per_sample = j.at("trajectories_per_sample").get<int>();
    c.lr = j.at("lr").get<double>();
    c.weight_decay = j.at("weight_decay").get<double>();
    c.beta1 = j.at("beta1").get<double>();
    c.beta2 = j.at("beta2").get<double>();
    c.adam_eps = j.at("adam_eps").get<double>();
    c.loss_mode = j.at("loss_mode").get<std::string>();
    c.noise_std = j.at("noise_std").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.net = score_net_config_from_json(j.at("net"));
    return c;
}

}  // namespace symdiff
