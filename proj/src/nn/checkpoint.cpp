#include "gasrl/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "gasrl/errors.hpp"

namespace gasrl::nn {

namespace {

constexpr char kMagic[8] = {'G', 'A', 'S', 'R', 'L', 'N', 'E', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& is, const std::string& path) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw DataError("checkpoint " + path + ": truncated file");
    return v;
}

}  // namespace

void save_network(const Network& net, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("checkpoint: cannot open " + path + " for writing");
    os.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(os, kVersion);
    const NetworkSpec& s = net.spec();
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.input_dim));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.recurrent_layers.size()));
    for (const auto u : s.recurrent_layers) put<std::uint32_t>(os, static_cast<std::uint32_t>(u));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.dense_layers.size()));
    for (const auto u : s.dense_layers) put<std::uint32_t>(os, static_cast<std::uint32_t>(u));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.output_dim));
    put<std::uint8_t>(os, static_cast<std::uint8_t>(s.activation));
    put<double>(os, s.dropout_rate);
    put<std::uint8_t>(os, static_cast<std::uint8_t>(s.final_activation));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.group_size));
    put<std::uint8_t>(os, s.layer_norm ? 1 : 0);
    put<std::uint64_t>(os, net.params().size());
    os.write(reinterpret_cast<const char*>(net.params().data()),
             static_cast<std::streamsize>(net.params().size() * sizeof(double)));
    if (!os) throw DataError("checkpoint: write failed for " + path);
}

Network load_network(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("checkpoint: cannot open " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw DataError("checkpoint " + path + ": bad magic bytes");
    const auto version = get<std::uint32_t>(is, path);
    if (version != kVersion)
        throw DataError("checkpoint " + path + ": unsupported version " +
                        std::to_string(version));

    NetworkSpec s;
    s.input_dim = get<std::uint32_t>(is, path);
    const auto n_rec = get<std::uint32_t>(is, path);
    for (std::uint32_t i = 0; i < n_rec; ++i)
        s.recurrent_layers.push_back(get<std::uint32_t>(is, path));
    const auto n_dense = get<std::uint32_t>(is, path);
    for (std::uint32_t i = 0; i < n_dense; ++i)
        s.dense_layers.push_back(get<std::uint32_t>(is, path));
    s.output_dim = get<std::uint32_t>(is, path);
    s.activation = static_cast<Activation>(get<std::uint8_t>(is, path));
    s.dropout_rate = get<double>(is, path);
    s.final_activation = static_cast<FinalActivation>(get<std::uint8_t>(is, path));
    s.group_size = get<std::uint32_t>(is, path);
    s.layer_norm = get<std::uint8_t>(is, path) != 0;
    const auto count = get<std::uint64_t>(is, path);

    Network net(s, 0);
    if (net.params().size() != count)
        throw DataError("checkpoint " + path + ": parameter count " +
                        std::to_string(count) + " does not match spec (" +
                        std::to_string(net.params().size()) + ")");
    is.read(reinterpret_cast<char*>(net.params().data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!is) throw DataError("checkpoint " + path + ": truncated parameter array");
    return net;
}

}  // namespace gasrl::nn
