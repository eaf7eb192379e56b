#pragma once

#include <cstdint>
#include <vector>

#include "gasrl/nn/tensor.hpp"
#include "gasrl/rng.hpp"

namespace gasrl::nn {

enum class Activation : std::uint8_t { kRelu = 0 };

enum class FinalActivation : std::uint8_t {
    kNone = 0,
    kSoftmaxPerGroup = 1,
    // Plain ReLU on the output layer. Used for sub-networks that feed other
    // networks (quantile-embedding towers); never produced by agent presets
    // that expose raw scores.
    kRelu = 2,
};

enum class Mode : std::uint8_t { kTrain = 0, kEval = 1 };

// Architecture description. Parameter count and layout are a pure function
// of this struct, which is what the checkpoint format echoes.
struct NetworkSpec {
    std::size_t input_dim = 0;                  // per-step input width
    std::vector<std::size_t> recurrent_layers;  // LSTM units, consumed in order
    std::vector<std::size_t> dense_layers;      // hidden dense units (activation + dropout)
    std::size_t output_dim = 0;                 // width of the final linear layer
    Activation activation = Activation::kRelu;
    double dropout_rate = 0.0;                  // after each dense hidden layer, train mode only
    FinalActivation final_activation = FinalActivation::kNone;
    std::size_t group_size = 0;                 // softmax group width, 0 otherwise
    bool layer_norm = false;                    // normalize the vector entering the dense stack

    void validate() const;  // throws ConfigError on any violation
    std::size_t param_count() const;
    bool operator==(const NetworkSpec&) const = default;
};

// Cached activations from one forward call; required by backward.
// A Tape may be reused across calls, buffers keep their capacity.
struct Tape {
    struct LstmTape {
        SeqBatch input;      // [b, T, I]
        SeqBatch gates;      // [b, T, 4H] post-activation, order i,f,g,o
        SeqBatch cell;       // [b, T, H]
        SeqBatch cell_tanh;  // [b, T, H]
        SeqBatch hidden;     // [b, T, H]
    };
    struct DenseTape {
        Matrix input;         // [b, I]
        Matrix activated;     // [b, U] post-activation, pre-dropout
        Matrix dropout_mask;  // [b, U] inverted-dropout scale factors (train mode)
        Matrix post;          // [b, U] what the next layer actually saw
    };

    std::vector<LstmTape> lstm;
    Matrix entry;       // vector entering the dense stack (post layer-norm)
    Matrix entry_raw;   // same, pre layer-norm (only filled when layer_norm on)
    std::vector<double> entry_inv_sd;  // per-row 1/sqrt(var+eps) for layer-norm
    std::vector<DenseTape> dense;
    Matrix out_input;   // input to the final linear layer
    Matrix out_post;    // post-final-activation outputs
    std::size_t batch = 0, steps = 0;
    bool from_sequence = false;
    bool train_mode = false;
    bool valid = false;
};

// A function approximator built from stacked LSTM layers, a dense stack and
// a final linear layer. Owns a flat parameter vector; layer weights are
// views into it, so optimizers, soft updates and checkpoints all operate on
// one contiguous array.
class Network {
public:
    Network() = default;
    // Parameters are initialized uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)]
    // per layer (fan_in = input+hidden width for LSTM layers), drawn from a
    // stream derived from `seed`. Identical (spec, seed) gives bitwise
    // identical parameters.
    Network(NetworkSpec spec, std::uint64_t seed);

    const NetworkSpec& spec() const { return spec_; }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    Mode mode() const { return mode_; }
    void set_mode(Mode m) { mode_ = m; }

    // Sequence forward: recurrent layers consume each sequence left to right,
    // the final hidden state feeds the dense stack. With no recurrent layers
    // the last step's input vector enters the dense stack directly.
    Matrix forward(const SeqBatch& batch, Tape* tape = nullptr);

    // Vector forward for networks without recurrent layers.
    Matrix forward_vec(const Matrix& inputs, Tape* tape = nullptr);

    // Accumulate d(sum(adjoint . output))/d(params) into grad_acc
    // (size param_count, zero it yourself for a fresh gradient) and
    // optionally the adjoint with respect to the input sequence / vectors.
    void backward(const Tape& tape, const Matrix& adjoint,
                  std::vector<double>& grad_acc,
                  SeqBatch* input_adjoint = nullptr) const;
    void backward_vec(const Tape& tape, const Matrix& adjoint,
                      std::vector<double>& grad_acc,
                      Matrix* input_adjoint = nullptr) const;

    // Fresh forward + backward in one call.
    std::vector<double> gradients(const SeqBatch& batch, const Matrix& adjoint);

private:
    struct LstmView {
        std::size_t in = 0, units = 0;
        std::size_t wx = 0, wh = 0, b = 0;  // offsets into the flat vector
    };
    struct DenseView {
        std::size_t in = 0, units = 0;
        std::size_t w = 0, b = 0;
    };

    void build_views();
    void init_params(std::uint64_t seed);
    void forward_tail(Tape& tape, Matrix& out);  // dense stack + output layer
    void backward_tail(const Tape& tape, const Matrix& adjoint,
                       std::vector<double>& grad_acc, Matrix& entry_adjoint) const;

    NetworkSpec spec_;
    std::vector<double> params_;
    std::vector<LstmView> lstm_views_;
    std::vector<DenseView> dense_views_;
    DenseView out_view_;
    Mode mode_ = Mode::kTrain;
    Rng dropout_rng_{0};
    Tape fwd_scratch_;  // used when forward() is called without a tape
};

// target <- tau * target + (1 - tau) * online, elementwise. Specs must match.
void soft_update(Network& target, const Network& online, double tau);

}  // namespace gasrl::nn
