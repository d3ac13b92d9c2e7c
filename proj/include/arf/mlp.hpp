#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "arf/errors.hpp"
#include "arf/matrix.hpp"
#include "arf/rng.hpp"

namespace arf {

template <typename T>
struct DenseLayer {
    Matrix<T> weights;    // out_features x in_features
    std::vector<T> bias;  // out_features
};

template <typename T>
struct MlpGradients {
    std::vector<Matrix<T>> d_weights;
    std::vector<std::vector<T>> d_bias;

    void zero() {
        for (auto& w : d_weights) w.set_zero();
        for (auto& b : d_bias) std::fill(b.begin(), b.end(), T(0));
    }
};

// Activations held for the backward pass. inputs[i] is the input to layer i
// (inputs[0] is the network input, later entries are post-relu activations).
template <typename T>
struct MlpCache {
    std::vector<Matrix<T>> inputs;
};

// Fully connected network, relu on hidden layers, linear output.
template <typename T>
struct Mlp {
    std::vector<DenseLayer<T>> layers;

    int input_width() const { return int(layers.front().weights.cols()); }
    int output_width() const { return int(layers.back().weights.rows()); }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.weights.size() + l.bias.size();
        return n;
    }

    // He-style uniform init, limit sqrt(6 / fan_in), biases zero. Weights are
    // drawn in storage order so a seed pins the full parameter vector.
    static Mlp create(int input, const std::vector<int>& hidden, int output, Rng& rng) {
        if (input <= 0 || output <= 0) throw ConfigError("mlp: widths must be positive");
        for (int h : hidden)
            if (h <= 0) throw ConfigError("mlp: hidden widths must be positive");
        Mlp net;
        int in = input;
        std::vector<int> outs(hidden);
        outs.push_back(output);
        for (int out : outs) {
            DenseLayer<T> layer;
            layer.weights = Matrix<T>(std::size_t(out), std::size_t(in));
            layer.bias.assign(std::size_t(out), T(0));
            const double limit = std::sqrt(6.0 / double(in));
            T* w = layer.weights.data();
            for (std::size_t i = 0; i < layer.weights.size(); ++i)
                w[i] = T(rng.uniform(-limit, limit));
            net.layers.push_back(std::move(layer));
            in = out;
        }
        return net;
    }

    MlpGradients<T> make_gradients() const {
        MlpGradients<T> g;
        for (const auto& l : layers) {
            g.d_weights.emplace_back(l.weights.rows(), l.weights.cols());
            g.d_bias.emplace_back(l.bias.size(), T(0));
        }
        return g;
    }

    Matrix<T> forward(const Matrix<T>& x, MlpCache<T>* cache = nullptr) const {
        if (x.cols() != std::size_t(input_width()))
            throw UsageError("mlp forward: input width mismatch");
        if (cache) {
            cache->inputs.clear();
            cache->inputs.reserve(layers.size());
        }
        Matrix<T> cur = x;
        for (std::size_t i = 0; i < layers.size(); ++i) {
            Matrix<T> next(cur.rows(), layers[i].weights.rows());
            affine_forward(next, cur, layers[i].weights, layers[i].bias);
            if (i + 1 < layers.size()) {
                T* v = next.data();
                for (std::size_t k = 0; k < next.size(); ++k)
                    if (!(v[k] > T(0))) v[k] = T(0);
            }
            if (cache) cache->inputs.push_back(std::move(cur));
            cur = std::move(next);
        }
        return cur;
    }

    // d_out is the gradient at the linear output. Accumulates into grads; the
    // caller zeroes them between steps. d_input, when given, receives the
    // gradient at the network input.
    void backward(const Matrix<T>& d_out, const MlpCache<T>& cache, MlpGradients<T>& grads,
                  Matrix<T>* d_input = nullptr) const {
        if (cache.inputs.size() != layers.size())
            throw UsageError("mlp backward: cache does not match network");
        Matrix<T> dy = d_out;
        for (std::size_t ii = layers.size(); ii-- > 0;) {
            const Matrix<T>& in = cache.inputs[ii];
            affine_backward_params(grads.d_weights[ii], grads.d_bias[ii], dy, in);
            const bool need_dx = ii > 0 || d_input != nullptr;
            if (!need_dx) break;
            Matrix<T> dx(in.rows(), in.cols());
            affine_backward_input(dx, dy, layers[ii].weights);
            if (ii > 0) {
                // relu was applied to this layer's input when it was produced
                const T* a = in.data();
                T* dv = dx.data();
                for (std::size_t k = 0; k < dx.size(); ++k)
                    if (!(a[k] > T(0))) dv[k] = T(0);
            }
            dy = std::move(dx);
        }
        if (d_input) *d_input = std::move(dy);
    }
};

}  // namespace arf
