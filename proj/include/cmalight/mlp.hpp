#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cmalight/errors.hpp"

namespace cml {

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// Fully connected network with sigmoid hidden layers and a linear output
/// layer, labeled [L x N]: L hidden layers of width N.
struct MlpArchitecture {
    int input_dim = 1;
    int hidden_layers = 1;
    int hidden_width = 1;
    int output_dim = 1;

    void validate() const {
        if (input_dim <= 0 || hidden_layers <= 0 || hidden_width <= 0 || output_dim <= 0)
            throw ContractError("MlpArchitecture: all dimensions must be positive");
    }

    /// Hidden layers plus the output layer.
    int layer_count() const noexcept { return hidden_layers + 1; }

    int layer_in(int l) const noexcept { return l == 0 ? input_dim : hidden_width; }

    int layer_out(int l) const noexcept { return l == hidden_layers ? output_dim : hidden_width; }

    /// Offset of layer l's weight block in the flat parameter vector.
    /// Layout per layer: row-major weight matrix (out x in), then bias (out).
    int layer_offset(int l) const noexcept {
        int off = 0;
        for (int q = 0; q < l; ++q) off += layer_out(q) * (layer_in(q) + 1);
        return off;
    }

    int parameter_count() const noexcept { return layer_offset(layer_count()); }

    std::string label() const {
        return "[" + std::to_string(hidden_layers) + "x" + std::to_string(hidden_width) + "]";
    }
};

struct MlpLayerWeights {
    std::vector<std::vector<double>> weight; // [out][in]
    std::vector<double> bias;                // [out]
};

/// Flat parameter vector with shaped views onto per-layer weights/biases.
class MlpParams {
public:
    MlpParams(MlpArchitecture arch, std::vector<double> flat)
        : arch_(arch), flat_(std::move(flat)) {
        arch_.validate();
        if (flat_.size() != static_cast<std::size_t>(arch_.parameter_count()))
            throw ContractError("MlpParams: flat vector has length " +
                                std::to_string(flat_.size()) + ", architecture needs " +
                                std::to_string(arch_.parameter_count()));
    }

    static MlpParams zeros(const MlpArchitecture& arch) {
        arch.validate();
        return MlpParams(arch, std::vector<double>(arch.parameter_count(), 0.0));
    }

    /// Weights uniform in [-a, a] with a = 1/sqrt(fan_in); biases zero.
    static MlpParams random_init(const MlpArchitecture& arch, std::uint64_t seed) {
        arch.validate();
        std::vector<double> flat(static_cast<std::size_t>(arch.parameter_count()), 0.0);
        std::mt19937_64 rng(seed);
        for (int l = 0; l < arch.layer_count(); ++l) {
            const double a = 1.0 / std::sqrt(static_cast<double>(arch.layer_in(l)));
            std::uniform_real_distribution<double> u(-a, a);
            double* block = flat.data() + arch.layer_offset(l);
            const int n_weights = arch.layer_out(l) * arch.layer_in(l);
            for (int q = 0; q < n_weights; ++q) block[q] = u(rng);
        }
        return MlpParams(arch, std::move(flat));
    }

    const MlpArchitecture& arch() const noexcept { return arch_; }
    std::span<const double> flat() const noexcept { return flat_; }
    std::span<double> flat() noexcept { return flat_; }

    std::span<double> weight(int l) {
        return {flat_.data() + arch_.layer_offset(l),
                static_cast<std::size_t>(arch_.layer_out(l) * arch_.layer_in(l))};
    }
    std::span<double> bias(int l) {
        return {flat_.data() + arch_.layer_offset(l) + arch_.layer_out(l) * arch_.layer_in(l),
                static_cast<std::size_t>(arch_.layer_out(l))};
    }
    std::span<const double> weight(int l) const {
        return {flat_.data() + arch_.layer_offset(l),
                static_cast<std::size_t>(arch_.layer_out(l) * arch_.layer_in(l))};
    }
    std::span<const double> bias(int l) const {
        return {flat_.data() + arch_.layer_offset(l) + arch_.layer_out(l) * arch_.layer_in(l),
                static_cast<std::size_t>(arch_.layer_out(l))};
    }

    std::vector<MlpLayerWeights> unflatten() const {
        std::vector<MlpLayerWeights> layers(arch_.layer_count());
        for (int l = 0; l < arch_.layer_count(); ++l) {
            const auto w = weight(l);
            layers[l].weight.assign(arch_.layer_out(l),
                                    std::vector<double>(arch_.layer_in(l)));
            for (int r = 0; r < arch_.layer_out(l); ++r)
                for (int c = 0; c < arch_.layer_in(l); ++c)
                    layers[l].weight[r][c] = w[static_cast<std::size_t>(r) * arch_.layer_in(l) + c];
            const auto b = bias(l);
            layers[l].bias.assign(b.begin(), b.end());
        }
        return layers;
    }

    static MlpParams flatten(const MlpArchitecture& arch,
                             const std::vector<MlpLayerWeights>& layers) {
        arch.validate();
        if (layers.size() != static_cast<std::size_t>(arch.layer_count()))
            throw ContractError("MlpParams::flatten: wrong layer count");
        MlpParams p = zeros(arch);
        for (int l = 0; l < arch.layer_count(); ++l) {
            auto w = p.weight(l);
            for (int r = 0; r < arch.layer_out(l); ++r)
                for (int c = 0; c < arch.layer_in(l); ++c)
                    w[static_cast<std::size_t>(r) * arch.layer_in(l) + c] = layers[l].weight[r][c];
            auto b = p.bias(l);
            for (int r = 0; r < arch.layer_out(l); ++r) b[r] = layers[l].bias[r];
        }
        return p;
    }

private:
    MlpArchitecture arch_;
    std::vector<double> flat_;
};

/// Reusable activation/delta buffers for one thread of execution.
struct MlpWorkspace {
    std::vector<std::vector<double>> act; // hidden activations, act[l] has width N
    std::vector<double> delta_cur;
    std::vector<double> delta_next;

    void resize(const MlpArchitecture& arch) {
        act.resize(arch.hidden_layers);
        for (auto& a : act) a.resize(arch.hidden_width);
        delta_cur.resize(arch.hidden_width);
        delta_next.resize(arch.hidden_width);
    }
};

namespace detail {

// Forward pass through the hidden stack, storing activations in ws.
// Returns the linear output (output_dim is required to be 1).
inline double mlp_forward_ws(const MlpArchitecture& arch, std::span<const double> params,
                             std::span<const double> x, MlpWorkspace& ws) {
    if (arch.output_dim != 1)
        throw ContractError("forward: only scalar outputs are supported");
    if (x.size() != static_cast<std::size_t>(arch.input_dim))
        throw ContractError("forward: input has length " + std::to_string(x.size()) +
                            ", expected " + std::to_string(arch.input_dim));
    if (params.size() != static_cast<std::size_t>(arch.parameter_count()))
        throw ContractError("forward: parameter vector has wrong length");
    ws.resize(arch);

    std::span<const double> in = x;
    for (int l = 0; l < arch.hidden_layers; ++l) {
        const double* w = params.data() + arch.layer_offset(l);
        const int n_in = arch.layer_in(l);
        const double* b = w + arch.hidden_width * n_in;
        for (int j = 0; j < arch.hidden_width; ++j) {
            double z = b[j];
            const double* row = w + static_cast<std::size_t>(j) * n_in;
            for (int k = 0; k < n_in; ++k) z += row[k] * in[k];
            ws.act[l][j] = sigmoid(z);
        }
        in = ws.act[l];
    }
    const int lo = arch.hidden_layers;
    const double* w = params.data() + arch.layer_offset(lo);
    const double* b = w + arch.hidden_width;
    double y = b[0];
    for (int k = 0; k < arch.hidden_width; ++k) y += w[k] * in[k];
    if (!std::isfinite(y))
        throw NumericError("forward: non-finite network output");
    return y;
}

// Gradient of (seed * output) with respect to all parameters, written into
// grad (not accumulated). Requires ws to hold the forward activations.
inline void mlp_backprop_ws(const MlpArchitecture& arch, std::span<const double> params,
                            std::span<const double> x, double seed, MlpWorkspace& ws,
                            std::span<double> grad) {
    if (grad.size() != params.size())
        throw ContractError("backprop: gradient buffer has wrong length");

    const int lo = arch.hidden_layers;
    const std::vector<double>& last = ws.act[lo - 1];
    {
        double* gw = grad.data() + arch.layer_offset(lo);
        for (int k = 0; k < arch.hidden_width; ++k) gw[k] = seed * last[k];
        gw[arch.hidden_width] = seed; // output bias
    }
    const double* wo = params.data() + arch.layer_offset(lo);
    for (int j = 0; j < arch.hidden_width; ++j) {
        const double a = last[j];
        ws.delta_cur[j] = seed * wo[j] * a * (1.0 - a);
    }

    for (int l = lo - 1; l >= 0; --l) {
        const int n_in = arch.layer_in(l);
        std::span<const double> in = (l == 0) ? x : std::span<const double>(ws.act[l - 1]);
        double* gw = grad.data() + arch.layer_offset(l);
        double* gb = gw + arch.hidden_width * n_in;
        for (int j = 0; j < arch.hidden_width; ++j) {
            const double dj = ws.delta_cur[j];
            double* row = gw + static_cast<std::size_t>(j) * n_in;
            for (int k = 0; k < n_in; ++k) row[k] = dj * in[k];
            gb[j] = dj;
        }
        if (l > 0) {
            const double* w = params.data() + arch.layer_offset(l);
            const std::vector<double>& prev = ws.act[l - 1];
            for (int k = 0; k < n_in; ++k) {
                double s = 0.0;
                for (int j = 0; j < arch.hidden_width; ++j)
                    s += ws.delta_cur[j] * w[static_cast<std::size_t>(j) * n_in + k];
                const double a = prev[k];
                ws.delta_next[k] = s * a * (1.0 - a);
            }
            std::swap(ws.delta_cur, ws.delta_next);
        }
    }
}

} // namespace detail

/// Network prediction for one input. Deterministic for fixed inputs.
inline double forward(const MlpArchitecture& arch, const MlpParams& params,
                      std::span<const double> x) {
    MlpWorkspace ws;
    return detail::mlp_forward_ws(arch, params.flat(), x, ws);
}

} // namespace cml
