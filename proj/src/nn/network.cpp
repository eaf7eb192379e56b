#include "gasrl/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "gasrl/errors.hpp"

namespace gasrl::nn {

namespace {

constexpr double kLayerNormEps = 1e-5;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void softmax_group(const double* z, std::size_t n, double* out) {
    double mx = z[0];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, z[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::exp(z[i] - mx);
        sum += out[i];
    }
    for (std::size_t i = 0; i < n; ++i) out[i] /= sum;
}

}  // namespace

void NetworkSpec::validate() const {
    if (input_dim == 0) throw ConfigError("network spec: input_dim must be >= 1");
    if (output_dim == 0) throw ConfigError("network spec: output_dim must be >= 1");
    for (const std::size_t u : recurrent_layers)
        if (u == 0) throw ConfigError("network spec: recurrent layer with 0 units");
    for (const std::size_t u : dense_layers)
        if (u == 0) throw ConfigError("network spec: dense layer with 0 units");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
        throw ConfigError("network spec: dropout_rate must lie in [0,1)");
    if (final_activation == FinalActivation::kSoftmaxPerGroup) {
        if (group_size == 0 || output_dim % group_size != 0)
            throw ConfigError("network spec: group_size must divide output_dim");
    }
}

std::size_t NetworkSpec::param_count() const {
    std::size_t n = 0;
    std::size_t in = input_dim;
    for (const std::size_t h : recurrent_layers) {
        n += 4 * h * (in + h + 1);
        in = h;
    }
    for (const std::size_t u : dense_layers) {
        n += u * (in + 1);
        in = u;
    }
    n += output_dim * (in + 1);
    return n;
}

Network::Network(NetworkSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), dropout_rng_(seed, "dropout") {
    spec_.validate();
    build_views();
    init_params(seed);
}

void Network::build_views() {
    std::size_t off = 0;
    std::size_t in = spec_.input_dim;
    lstm_views_.clear();
    for (const std::size_t h : spec_.recurrent_layers) {
        LstmView v;
        v.in = in;
        v.units = h;
        v.wx = off;
        off += 4 * h * in;
        v.wh = off;
        off += 4 * h * h;
        v.b = off;
        off += 4 * h;
        lstm_views_.push_back(v);
        in = h;
    }
    dense_views_.clear();
    for (const std::size_t u : spec_.dense_layers) {
        DenseView v;
        v.in = in;
        v.units = u;
        v.w = off;
        off += u * in;
        v.b = off;
        off += u;
        dense_views_.push_back(v);
        in = u;
    }
    out_view_.in = in;
    out_view_.units = spec_.output_dim;
    out_view_.w = off;
    off += spec_.output_dim * in;
    out_view_.b = off;
    off += spec_.output_dim;
    params_.assign(off, 0.0);
}

void Network::init_params(std::uint64_t seed) {
    Rng rng(seed, "init");
    for (const auto& v : lstm_views_) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(v.in + v.units));
        for (std::size_t i = v.wx; i < v.wx + 4 * v.units * v.in; ++i)
            params_[i] = rng.uniform(-bound, bound);
        for (std::size_t i = v.wh; i < v.wh + 4 * v.units * v.units; ++i)
            params_[i] = rng.uniform(-bound, bound);
        for (std::size_t i = v.b; i < v.b + 4 * v.units; ++i)
            params_[i] = rng.uniform(-bound, bound);
    }
    auto init_dense = [&](const DenseView& v) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(v.in));
        for (std::size_t i = v.w; i < v.w + v.units * v.in; ++i)
            params_[i] = rng.uniform(-bound, bound);
        for (std::size_t i = v.b; i < v.b + v.units; ++i)
            params_[i] = rng.uniform(-bound, bound);
    };
    for (const auto& v : dense_views_) init_dense(v);
    init_dense(out_view_);
}

Matrix Network::forward(const SeqBatch& batch, Tape* tape) {
    if (batch.dim != spec_.input_dim)
        throw ConfigError("forward: sequence dim " + std::to_string(batch.dim) +
                          " does not match input_dim " + std::to_string(spec_.input_dim));
    if (batch.steps == 0 || batch.batch == 0)
        throw ConfigError("forward: empty batch");

    Tape& tp = tape ? *tape : fwd_scratch_;
    tp.batch = batch.batch;
    tp.steps = batch.steps;
    tp.from_sequence = true;
    tp.train_mode = (mode_ == Mode::kTrain);
    tp.lstm.resize(lstm_views_.size());

    const std::size_t B = batch.batch, T = batch.steps;
    const SeqBatch* cur = &batch;
    for (std::size_t l = 0; l < lstm_views_.size(); ++l) {
        const LstmView& v = lstm_views_[l];
        const std::size_t H = v.units, I = v.in;
        Tape::LstmTape& lt = tp.lstm[l];
        lt.input = *cur;
        lt.gates.resize(B, T, 4 * H);
        lt.cell.resize(B, T, H);
        lt.cell_tanh.resize(B, T, H);
        lt.hidden.resize(B, T, H);

        const double* wx = params_.data() + v.wx;
        const double* wh = params_.data() + v.wh;
        const double* b = params_.data() + v.b;
        for (std::size_t bi = 0; bi < B; ++bi) {
            for (std::size_t t = 0; t < T; ++t) {
                double* g = lt.gates.at(bi, t);
                std::memcpy(g, b, 4 * H * sizeof(double));
                matvec_acc(wx, 4 * H, I, lt.input.at(bi, t), g);
                if (t > 0) matvec_acc(wh, 4 * H, H, lt.hidden.at(bi, t - 1), g);
                double* c = lt.cell.at(bi, t);
                double* ct = lt.cell_tanh.at(bi, t);
                double* h = lt.hidden.at(bi, t);
                const double* cprev = t > 0 ? lt.cell.at(bi, t - 1) : nullptr;
                for (std::size_t k = 0; k < H; ++k) {
                    const double ig = sigmoid(g[k]);
                    const double fg = sigmoid(g[H + k]);
                    const double gg = std::tanh(g[2 * H + k]);
                    const double og = sigmoid(g[3 * H + k]);
                    g[k] = ig;
                    g[H + k] = fg;
                    g[2 * H + k] = gg;
                    g[3 * H + k] = og;
                    c[k] = ig * gg + (t > 0 ? fg * cprev[k] : 0.0);
                    ct[k] = std::tanh(c[k]);
                    h[k] = og * ct[k];
                }
            }
        }
        cur = &lt.hidden;
    }

    // Final hidden state (or last input step when no recurrent layers) enters
    // the dense stack.
    const std::size_t E = lstm_views_.empty() ? spec_.input_dim
                                              : lstm_views_.back().units;
    tp.entry.resize(B, E);
    for (std::size_t bi = 0; bi < B; ++bi)
        std::memcpy(tp.entry.row(bi), cur->at(bi, T - 1), E * sizeof(double));

    Matrix out;
    forward_tail(tp, out);
    return out;
}

Matrix Network::forward_vec(const Matrix& inputs, Tape* tape) {
    if (!lstm_views_.empty())
        throw ConfigError("forward_vec: network has recurrent layers, use forward()");
    if (inputs.cols != spec_.input_dim)
        throw ConfigError("forward_vec: input dim mismatch");
    if (inputs.rows == 0) throw ConfigError("forward_vec: empty batch");

    Tape& tp = tape ? *tape : fwd_scratch_;
    tp.batch = inputs.rows;
    tp.steps = 1;
    tp.from_sequence = false;
    tp.train_mode = (mode_ == Mode::kTrain);
    tp.lstm.clear();
    tp.entry = inputs;

    Matrix out;
    forward_tail(tp, out);
    return out;
}

void Network::forward_tail(Tape& tp, Matrix& out) {
    const std::size_t B = tp.batch;

    if (spec_.layer_norm) {
        tp.entry_raw = tp.entry;
        tp.entry_inv_sd.assign(B, 0.0);
        const std::size_t E = tp.entry.cols;
        for (std::size_t bi = 0; bi < B; ++bi) {
            double* row = tp.entry.row(bi);
            double mean = 0.0;
            for (std::size_t j = 0; j < E; ++j) mean += row[j];
            mean /= static_cast<double>(E);
            double var = 0.0;
            for (std::size_t j = 0; j < E; ++j) {
                const double d = row[j] - mean;
                var += d * d;
            }
            var /= static_cast<double>(E);
            const double inv_sd = 1.0 / std::sqrt(var + kLayerNormEps);
            tp.entry_inv_sd[bi] = inv_sd;
            for (std::size_t j = 0; j < E; ++j) row[j] = (row[j] - mean) * inv_sd;
        }
    }

    const bool use_dropout = tp.train_mode && spec_.dropout_rate > 0.0;
    tp.dense.resize(dense_views_.size());
    const Matrix* cur = &tp.entry;
    for (std::size_t l = 0; l < dense_views_.size(); ++l) {
        const DenseView& v = dense_views_[l];
        Tape::DenseTape& dt = tp.dense[l];
        dt.input = *cur;
        dt.activated.resize(B, v.units);
        const double* w = params_.data() + v.w;
        const double* b = params_.data() + v.b;
        for (std::size_t bi = 0; bi < B; ++bi) {
            double* y = dt.activated.row(bi);
            std::memcpy(y, b, v.units * sizeof(double));
            matvec_acc(w, v.units, v.in, dt.input.row(bi), y);
            for (std::size_t k = 0; k < v.units; ++k) y[k] = std::max(0.0, y[k]);
        }
        if (use_dropout) {
            dt.dropout_mask.resize(B, v.units);
            const double keep = 1.0 - spec_.dropout_rate;
            for (std::size_t i = 0; i < dt.dropout_mask.a.size(); ++i)
                dt.dropout_mask.a[i] =
                    dropout_rng_.uniform() < spec_.dropout_rate ? 0.0 : 1.0 / keep;
            dt.post = dt.activated;
            for (std::size_t i = 0; i < dt.post.a.size(); ++i)
                dt.post.a[i] *= dt.dropout_mask.a[i];
        } else {
            dt.dropout_mask.resize(0, 0);
            dt.post = dt.activated;
        }
        cur = &dt.post;
    }

    tp.out_input = *cur;
    const DenseView& ov = out_view_;
    out.resize(B, ov.units);
    const double* w = params_.data() + ov.w;
    const double* b = params_.data() + ov.b;
    for (std::size_t bi = 0; bi < B; ++bi) {
        double* y = out.row(bi);
        std::memcpy(y, b, ov.units * sizeof(double));
        matvec_acc(w, ov.units, ov.in, tp.out_input.row(bi), y);
    }
    switch (spec_.final_activation) {
        case FinalActivation::kNone:
            break;
        case FinalActivation::kRelu:
            for (auto& v : out.a) v = std::max(0.0, v);
            break;
        case FinalActivation::kSoftmaxPerGroup: {
            const std::size_t g = spec_.group_size;
            std::vector<double> tmp(g);
            for (std::size_t bi = 0; bi < B; ++bi) {
                double* y = out.row(bi);
                for (std::size_t s = 0; s < ov.units; s += g) {
                    softmax_group(y + s, g, tmp.data());
                    std::memcpy(y + s, tmp.data(), g * sizeof(double));
                }
            }
            break;
        }
    }
    tp.out_post = out;
    tp.valid = true;
}

void Network::backward_tail(const Tape& tp, const Matrix& adjoint,
                            std::vector<double>& grad_acc,
                            Matrix& entry_adjoint) const {
    const std::size_t B = tp.batch;

    // Through the final activation.
    Matrix dz = adjoint;
    switch (spec_.final_activation) {
        case FinalActivation::kNone:
            break;
        case FinalActivation::kRelu:
            for (std::size_t i = 0; i < dz.a.size(); ++i)
                if (tp.out_post.a[i] <= 0.0) dz.a[i] = 0.0;
            break;
        case FinalActivation::kSoftmaxPerGroup: {
            const std::size_t g = spec_.group_size;
            for (std::size_t bi = 0; bi < B; ++bi) {
                const double* p = tp.out_post.row(bi);
                double* d = dz.row(bi);
                for (std::size_t s = 0; s < spec_.output_dim; s += g) {
                    double dot = 0.0;
                    for (std::size_t k = 0; k < g; ++k) dot += p[s + k] * d[s + k];
                    for (std::size_t k = 0; k < g; ++k)
                        d[s + k] = p[s + k] * (d[s + k] - dot);
                }
            }
            break;
        }
    }

    // Output linear layer.
    const DenseView& ov = out_view_;
    Matrix dcur(B, ov.in);
    {
        const double* w = params_.data() + ov.w;
        double* dw = grad_acc.data() + ov.w;
        double* db = grad_acc.data() + ov.b;
        for (std::size_t bi = 0; bi < B; ++bi) {
            const double* d = dz.row(bi);
            outer_acc(d, ov.units, tp.out_input.row(bi), ov.in, dw);
            for (std::size_t k = 0; k < ov.units; ++k) db[k] += d[k];
            matvec_t_acc(w, ov.units, ov.in, d, dcur.row(bi));
        }
    }

    // Dense stack, reversed.
    for (std::size_t li = dense_views_.size(); li-- > 0;) {
        const DenseView& v = dense_views_[li];
        const Tape::DenseTape& dt = tp.dense[li];
        const bool has_mask = dt.dropout_mask.rows == B;
        Matrix dnext(B, v.in);
        const double* w = params_.data() + v.w;
        double* dw = grad_acc.data() + v.w;
        double* db = grad_acc.data() + v.b;
        for (std::size_t bi = 0; bi < B; ++bi) {
            double* d = dcur.row(bi);
            const double* act = dt.activated.row(bi);
            if (has_mask) {
                const double* m = dt.dropout_mask.row(bi);
                for (std::size_t k = 0; k < v.units; ++k) d[k] *= m[k];
            }
            for (std::size_t k = 0; k < v.units; ++k)
                if (act[k] <= 0.0) d[k] = 0.0;
            outer_acc(d, v.units, dt.input.row(bi), v.in, dw);
            for (std::size_t k = 0; k < v.units; ++k) db[k] += d[k];
            matvec_t_acc(w, v.units, v.in, d, dnext.row(bi));
        }
        dcur = std::move(dnext);
    }

    // Layer norm (parameter free).
    if (spec_.layer_norm) {
        const std::size_t E = tp.entry.cols;
        entry_adjoint.resize(B, E);
        for (std::size_t bi = 0; bi < B; ++bi) {
            const double* y = tp.entry.row(bi);
            const double* dy = dcur.row(bi);
            const double inv_sd = tp.entry_inv_sd[bi];
            double mean_dy = 0.0, mean_dyy = 0.0;
            for (std::size_t j = 0; j < E; ++j) {
                mean_dy += dy[j];
                mean_dyy += dy[j] * y[j];
            }
            mean_dy /= static_cast<double>(E);
            mean_dyy /= static_cast<double>(E);
            double* dx = entry_adjoint.row(bi);
            for (std::size_t j = 0; j < E; ++j)
                dx[j] = inv_sd * (dy[j] - mean_dy - y[j] * mean_dyy);
        }
    } else {
        entry_adjoint = std::move(dcur);
    }
}

void Network::backward(const Tape& tp, const Matrix& adjoint,
                       std::vector<double>& grad_acc,
                       SeqBatch* input_adjoint) const {
    if (!tp.valid || !tp.from_sequence)
        throw ConfigError("backward: tape does not hold a sequence forward pass");
    if (adjoint.rows != tp.batch || adjoint.cols != spec_.output_dim)
        throw ConfigError("backward: adjoint shape mismatch");
    if (spec_.dropout_rate > 0.0 && !tp.train_mode)
        throw ConfigError("backward: eval-mode tape has no dropout masks");
    if (grad_acc.size() != params_.size())
        throw ConfigError("backward: gradient buffer size mismatch");

    const std::size_t B = tp.batch, T = tp.steps;
    Matrix entry_adj;
    backward_tail(tp, adjoint, grad_acc, entry_adj);

    if (lstm_views_.empty()) {
        if (input_adjoint) {
            input_adjoint->resize(B, T, spec_.input_dim);
            for (std::size_t bi = 0; bi < B; ++bi)
                std::memcpy(input_adjoint->at(bi, T - 1), entry_adj.row(bi),
                            spec_.input_dim * sizeof(double));
        }
        return;
    }

    // Adjoint with respect to the current layer's hidden sequence. For the
    // topmost layer only the last step receives a signal.
    SeqBatch d_seq(B, T, lstm_views_.back().units);
    for (std::size_t bi = 0; bi < B; ++bi)
        std::memcpy(d_seq.at(bi, T - 1), entry_adj.row(bi),
                    lstm_views_.back().units * sizeof(double));

    std::vector<double> da, dh, dc, dct;
    for (std::size_t li = lstm_views_.size(); li-- > 0;) {
        const LstmView& v = lstm_views_[li];
        const Tape::LstmTape& lt = tp.lstm[li];
        const std::size_t H = v.units, I = v.in;
        const bool need_input_adj = li > 0 || input_adjoint != nullptr;
        SeqBatch d_in;
        if (need_input_adj) d_in.resize(B, T, I);

        const double* wx = params_.data() + v.wx;
        const double* wh = params_.data() + v.wh;
        double* dwx = grad_acc.data() + v.wx;
        double* dwh = grad_acc.data() + v.wh;
        double* db = grad_acc.data() + v.b;
        da.assign(4 * H, 0.0);
        dh.assign(H, 0.0);
        dc.assign(H, 0.0);
        dct.assign(H, 0.0);

        for (std::size_t bi = 0; bi < B; ++bi) {
            std::fill(dh.begin(), dh.end(), 0.0);
            std::fill(dc.begin(), dc.end(), 0.0);
            for (std::size_t t = T; t-- > 0;) {
                const double* up = d_seq.at(bi, t);
                for (std::size_t k = 0; k < H; ++k) dh[k] += up[k];

                const double* g = lt.gates.at(bi, t);
                const double* ct = lt.cell_tanh.at(bi, t);
                const double* cprev = t > 0 ? lt.cell.at(bi, t - 1) : nullptr;
                for (std::size_t k = 0; k < H; ++k) {
                    const double ig = g[k], fg = g[H + k], gg = g[2 * H + k],
                                 og = g[3 * H + k];
                    const double d_cell = dh[k] * og * (1.0 - ct[k] * ct[k]) + dc[k];
                    dct[k] = d_cell;
                    da[k] = d_cell * gg * ig * (1.0 - ig);
                    da[H + k] = t > 0 ? d_cell * cprev[k] * fg * (1.0 - fg) : 0.0;
                    da[2 * H + k] = d_cell * ig * (1.0 - gg * gg);
                    da[3 * H + k] = dh[k] * ct[k] * og * (1.0 - og);
                    dc[k] = d_cell * fg;
                }
                outer_acc(da.data(), 4 * H, lt.input.at(bi, t), I, dwx);
                if (t > 0)
                    outer_acc(da.data(), 4 * H, lt.hidden.at(bi, t - 1), H, dwh);
                for (std::size_t k = 0; k < 4 * H; ++k) db[k] += da[k];
                if (need_input_adj)
                    matvec_t_acc(wx, 4 * H, I, da.data(), d_in.at(bi, t));
                std::fill(dh.begin(), dh.end(), 0.0);
                if (t > 0) matvec_t_acc(wh, 4 * H, H, da.data(), dh.data());
            }
        }
        if (li > 0) {
            d_seq = std::move(d_in);
        } else if (input_adjoint) {
            *input_adjoint = std::move(d_in);
        }
    }
}

void Network::backward_vec(const Tape& tp, const Matrix& adjoint,
                           std::vector<double>& grad_acc,
                           Matrix* input_adjoint) const {
    if (!tp.valid || tp.from_sequence)
        throw ConfigError("backward_vec: tape does not hold a vector forward pass");
    if (adjoint.rows != tp.batch || adjoint.cols != spec_.output_dim)
        throw ConfigError("backward_vec: adjoint shape mismatch");
    if (spec_.dropout_rate > 0.0 && !tp.train_mode)
        throw ConfigError("backward_vec: eval-mode tape has no dropout masks");
    if (grad_acc.size() != params_.size())
        throw ConfigError("backward_vec: gradient buffer size mismatch");

    Matrix entry_adj;
    backward_tail(tp, adjoint, grad_acc, entry_adj);
    if (input_adjoint) *input_adjoint = std::move(entry_adj);
}

std::vector<double> Network::gradients(const SeqBatch& batch, const Matrix& adjoint) {
    Tape tape;
    forward(batch, &tape);
    std::vector<double> grads(params_.size(), 0.0);
    backward(tape, adjoint, grads);
    return grads;
}

void soft_update(Network& target, const Network& online, double tau) {
    if (target.spec() != online.spec())
        throw ConfigError("soft_update: network specs differ");
    if (!(tau >= 0.0 && tau <= 1.0))
        throw ConfigError("soft_update: tau must lie in [0,1]");
    auto& t = target.params();
    const auto& o = online.params();
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = tau * t[i] + (1.0 - tau) * o[i];
}

}  // namespace gasrl::nn
