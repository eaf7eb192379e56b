#include "gasrl/agents/config.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "gasrl/errors.hpp"

namespace gasrl::agents {

const char* to_string(AgentKind kind) {
    switch (kind) {
        case AgentKind::kDqn: return "dqn";
        case AgentKind::kPrioritizedDqn: return "prioritized_dqn";
        case AgentKind::kDuelingDqn: return "dueling_dqn";
        case AgentKind::kPrioritizedDuelingDqn: return "prioritized_dueling_dqn";
        case AgentKind::kC51: return "c51";
        case AgentKind::kQrDqn: return "qr_dqn";
        case AgentKind::kIqn: return "iqn";
        case AgentKind::kExtraTrees: return "extra_trees";
    }
    return "?";
}

AgentKind agent_kind_from_string(const std::string& s) {
    for (const AgentKind k :
         {AgentKind::kDqn, AgentKind::kPrioritizedDqn, AgentKind::kDuelingDqn,
          AgentKind::kPrioritizedDuelingDqn, AgentKind::kC51, AgentKind::kQrDqn,
          AgentKind::kIqn, AgentKind::kExtraTrees})
        if (s == to_string(k)) return k;
    throw ConfigError("unknown agent kind '" + s + "'");
}

const char* to_string(PresetScale scale) {
    return scale == PresetScale::kPaper ? "paper" : "desk";
}

PresetScale preset_from_string(const std::string& s) {
    if (s == "paper") return PresetScale::kPaper;
    if (s == "desk") return PresetScale::kDesk;
    throw ConfigError("unknown preset '" + s + "' (expected paper or desk)");
}

namespace {

std::size_t scaled(std::size_t units, PresetScale scale) {
    if (scale == PresetScale::kPaper) return units;
    return std::max<std::size_t>(1, units / 4);
}

std::vector<std::size_t> scaled(std::vector<std::size_t> units, PresetScale scale) {
    for (auto& u : units) u = scaled(u, scale);
    return units;
}

}  // namespace

AgentConfig AgentConfig::preset_for(AgentKind kind, double alpha,
                                    PresetScale scale) {
    AgentConfig c;
    c.kind = kind;
    c.alpha = alpha;
    c.preset = scale;
    const bool risk = alpha < 1.0;
    switch (kind) {
        case AgentKind::kDqn:
            c.recurrent_units = scaled({128}, scale);
            c.dense_units = scaled({64, 32}, scale);
            c.learning_rate = 1e-4;
            c.batch_size = 32;
            break;
        case AgentKind::kPrioritizedDqn:
            c.recurrent_units = scaled({128}, scale);
            c.dense_units = scaled({32, 16}, scale);
            c.learning_rate = 5e-5;
            c.batch_size = 128;
            break;
        case AgentKind::kDuelingDqn:
        case AgentKind::kPrioritizedDuelingDqn:
            c.recurrent_units = scaled({128, 64}, scale);
            c.dense_units = scaled({64}, scale);
            c.head_units = scaled({64}, scale);
            c.learning_rate = 5e-5;
            c.batch_size = kind == AgentKind::kDuelingDqn ? 64 : 16;
            break;
        case AgentKind::kC51:
            if (risk) {
                c.recurrent_units = scaled({128, 128}, scale);
                c.dense_units = scaled({128, 64}, scale);
                c.learning_rate = 1e-4;
                c.batch_size = 8;
            } else {
                c.recurrent_units = scaled({128}, scale);
                c.dense_units = scaled({64, 64}, scale);
                c.learning_rate = 5e-5;
                c.batch_size = 32;
            }
            break;
        case AgentKind::kQrDqn:
            if (risk) {
                c.recurrent_units = scaled({128, 128}, scale);
                c.dense_units = scaled({64, 32}, scale);
                c.learning_rate = 1e-4;
                c.batch_size = 64;
            } else {
                c.recurrent_units = scaled({128, 128}, scale);
                c.dense_units = scaled({64, 64}, scale);
                c.learning_rate = 1e-4;
                c.batch_size = 16;
            }
            break;
        case AgentKind::kIqn:
            c.recurrent_units = scaled({128, 64}, scale);
            c.dense_units = {};
            c.psi_out = scaled(32, scale);
            c.embedding_dim = scaled(32, scale);
            c.f_hidden = scaled(32, scale);
            c.learning_rate = 1e-4;
            c.batch_size = risk ? 32 : 16;
            break;
        case AgentKind::kExtraTrees:
            break;
    }
    return c;
}

void AgentConfig::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw ConfigError("agent config: alpha must lie in (0,1]");
    if (!(kappa > 0.0)) throw ConfigError("agent config: kappa must be > 0");
    if (batch_size < 1) throw ConfigError("agent config: batch_size must be >= 1");
    if (!(tau >= 0.0 && tau <= 1.0))
        throw ConfigError("agent config: tau must lie in [0,1]");
    if (!(v_min < v_max)) throw ConfigError("agent config: v_min must be < v_max");
    if (n_atoms < 2) throw ConfigError("agent config: n_atoms must be >= 2");
    if (n_quantiles < 1) throw ConfigError("agent config: n_quantiles must be >= 1");
    if (iqn_n < 1 || iqn_n_prime < 1 || iqn_k < 1)
        throw ConfigError("agent config: IQN sample counts must be >= 1");
    if (replay_capacity < batch_size)
        throw ConfigError("agent config: replay capacity below batch size");
    if (min_fill < batch_size)
        throw ConfigError("agent config: min_fill below batch size");
    if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0) ||
        !(epsilon_end >= 0.0 && epsilon_end <= 1.0))
        throw ConfigError("agent config: epsilon bounds must lie in [0,1]");
    if (!(epsilon_fraction > 0.0 && epsilon_fraction <= 1.0))
        throw ConfigError("agent config: epsilon_fraction must lie in (0,1]");
    const bool distributional = kind == AgentKind::kC51 ||
                                kind == AgentKind::kQrDqn || kind == AgentKind::kIqn;
    if (alpha < 1.0 && !distributional)
        throw ConfigError(
            "agent config: alpha < 1 requires a distributional kind "
            "(c51, qr_dqn, iqn)");
    if (kind == AgentKind::kQrDqn && alpha * n_quantiles < 1.0)
        throw ConfigError("agent config: alpha * L must be >= 1 for qr_dqn");
    if (kind == AgentKind::kIqn &&
        (psi_out == 0 || embedding_dim == 0 || f_hidden == 0))
        throw ConfigError("agent config: IQN tower widths must be >= 1");
    if (kind == AgentKind::kExtraTrees) {
        if (n_trees < 1) throw ConfigError("agent config: n_trees must be >= 1");
        if (min_samples_split < 2)
            throw ConfigError("agent config: min_samples_split must be >= 2");
    } else if (recurrent_units.empty() && dense_units.empty() &&
               kind != AgentKind::kIqn) {
        throw ConfigError("agent config: no network layers configured");
    }
}

namespace {

std::string join(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(v[i]);
    }
    return out;
}

std::vector<std::size_t> split_sizes(const std::string& s) {
    std::vector<std::size_t> out;
    std::istringstream is(s);
    std::size_t v;
    while (is >> v) out.push_back(v);
    return out;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string AgentConfig::echo() const {
    std::ostringstream os;
    os << "agent = " << to_string(kind) << "\n";
    os << "alpha = " << fmt(alpha) << "\n";
    os << "preset = " << to_string(preset) << "\n";
    os << "recurrent_units = " << join(recurrent_units) << "\n";
    os << "dense_units = " << join(dense_units) << "\n";
    os << "head_units = " << join(head_units) << "\n";
    os << "psi_out = " << psi_out << "\n";
    os << "embedding_dim = " << embedding_dim << "\n";
    os << "f_hidden = " << f_hidden << "\n";
    os << "learning_rate = " << fmt(learning_rate) << "\n";
    os << "batch_size = " << batch_size << "\n";
    os << "tau = " << fmt(tau) << "\n";
    os << "dropout = " << fmt(dropout) << "\n";
    os << "layer_norm = " << (layer_norm ? 1 : 0) << "\n";
    os << "n_atoms = " << n_atoms << "\n";
    os << "v_min = " << fmt(v_min) << "\n";
    os << "v_max = " << fmt(v_max) << "\n";
    os << "n_quantiles = " << n_quantiles << "\n";
    os << "iqn_n = " << iqn_n << "\n";
    os << "iqn_n_prime = " << iqn_n_prime << "\n";
    os << "iqn_k = " << iqn_k << "\n";
    os << "kappa = " << fmt(kappa) << "\n";
    os << "epsilon_start = " << fmt(epsilon_start) << "\n";
    os << "epsilon_end = " << fmt(epsilon_end) << "\n";
    os << "epsilon_fraction = " << fmt(epsilon_fraction) << "\n";
    os << "replay_capacity = " << replay_capacity << "\n";
    os << "min_fill = " << min_fill << "\n";
    os << "train_steps = " << train_steps << "\n";
    os << "risk_adjusted_target_action = " << (risk_adjusted_target_action ? 1 : 0)
       << "\n";
    os << "n_trees = " << n_trees << "\n";
    os << "min_samples_split = " << min_samples_split << "\n";
    os << "symmetric_tree_actions = " << (symmetric_tree_actions ? 1 : 0) << "\n";
    return os.str();
}

AgentConfig AgentConfig::parse_echo(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw DataError("agent config echo: bad line '" + line + "'");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    auto need = [&](const char* key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end())
            throw DataError(std::string("agent config echo: missing key ") + key);
        return it->second;
    };

    AgentConfig c;
    c.kind = agent_kind_from_string(need("agent"));
    c.alpha = std::stod(need("alpha"));
    c.preset = preset_from_string(need("preset"));
    c.recurrent_units = split_sizes(need("recurrent_units"));
    c.dense_units = split_sizes(need("dense_units"));
    c.head_units = split_sizes(need("head_units"));
    c.psi_out = std::stoul(need("psi_out"));
    c.embedding_dim = std::stoul(need("embedding_dim"));
    c.f_hidden = std::stoul(need("f_hidden"));
    c.learning_rate = std::stod(need("learning_rate"));
    c.batch_size = std::stoul(need("batch_size"));
    c.tau = std::stod(need("tau"));
    c.dropout = std::stod(need("dropout"));
    c.layer_norm = need("layer_norm") == "1";
    c.n_atoms = std::stoi(need("n_atoms"));
    c.v_min = std::stod(need("v_min"));
    c.v_max = std::stod(need("v_max"));
    c.n_quantiles = std::stoi(need("n_quantiles"));
    c.iqn_n = std::stoi(need("iqn_n"));
    c.iqn_n_prime = std::stoi(need("iqn_n_prime"));
    c.iqn_k = std::stoi(need("iqn_k"));
    c.kappa = std::stod(need("kappa"));
    c.epsilon_start = std::stod(need("epsilon_start"));
    c.epsilon_end = std::stod(need("epsilon_end"));
    c.epsilon_fraction = std::stod(need("epsilon_fraction"));
    c.replay_capacity = std::stoul(need("replay_capacity"));
    c.min_fill = std::stoul(need("min_fill"));
    c.train_steps = std::stoul(need("train_steps"));
    c.risk_adjusted_target_action = need("risk_adjusted_target_action") == "1";
    c.n_trees = std::stoi(need("n_trees"));
    c.min_samples_split = std::stoi(need("min_samples_split"));
    c.symmetric_tree_actions = need("symmetric_tree_actions") == "1";
    return c;
}

}  // namespace gasrl::agents
