#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "arf/encoding.hpp"
#include "arf/errors.hpp"
#include "arf/matrix.hpp"
#include "arf/mlp.hpp"
#include "arf/rng.hpp"
#include "arf/sh_basis.hpp"
#include "arf/vec.hpp"

namespace arf {

template <typename T>
T softplus(T x) {
    return x > T(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

template <typename T>
T sigmoid(T x) {
    if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
    const T e = std::exp(x);
    return e / (T(1) + e);
}

// View-dependent density/latent head. The geometry network maps an encoded
// position to one coefficient block per output channel: `density_coeffs`
// scalars for density and `latent_dim` rows of `latent_coeffs` scalars for the
// latent vector. Each channel is contracted against the directional basis; the
// degree-0 term is the view-independent part and the l >= 1 tail is the
// anisotropic part that the training penalty sees.
struct FieldConfig {
    int degree_sigma = 3;
    int degree_e = 3;
    int latent_dim = 15;
    PositionalEncodingConfig pos_enc{10, true};
    PositionalEncodingConfig dir_enc{4, true};
    std::vector<int> geometry_hidden{128, 128, 128, 128};
    std::vector<int> color_hidden{64, 64};
    // When set, the density penalty is softplus(raw) - softplus(iso_raw)
    // instead of the raw l >= 1 contraction.
    bool aniso_post_activation = false;
    // Factor applied at creation to the geometry output rows feeding l >= 1
    // basis terms. A fresh field then starts close to isotropic and has to
    // earn its anisotropy from data instead of unlearning init noise.
    double aniso_init_scale = 0.1;

    int basis_degree() const { return std::max(degree_sigma, degree_e); }
    int basis_width() const { return num_sh_coeffs(basis_degree()); }
    int density_coeffs() const { return num_sh_coeffs(degree_sigma); }
    int latent_coeffs() const { return num_sh_coeffs(degree_e); }
    int geometry_output_width() const { return density_coeffs() + latent_dim * latent_coeffs(); }
    int color_input_width() const { return dir_enc.width() + latent_dim; }

    void validate() const {
        if (degree_sigma < 0 || degree_sigma > kMaxShDegree || degree_e < 0 ||
            degree_e > kMaxShDegree)
            throw ConfigError("field: degree out of range");
        if (latent_dim < 1) throw ConfigError("field: latent_dim must be at least 1");
        if (pos_enc.num_frequencies < 0 || dir_enc.num_frequencies < 0)
            throw ConfigError("field: frequency count must be non-negative");
        if (pos_enc.width() <= 0) throw ConfigError("field: position encoding is empty");
        if (!(aniso_init_scale >= 0.0) || !std::isfinite(aniso_init_scale))
            throw ConfigError("field: aniso_init_scale must be finite and non-negative");
        for (int h : geometry_hidden)
            if (h <= 0) throw ConfigError("field: hidden widths must be positive");
        for (int h : color_hidden)
            if (h <= 0) throw ConfigError("field: hidden widths must be positive");
    }
};

// Density contraction for one sample. The isotropic part is k[0]*basis[0];
// the anisotropic part accumulates indices 1..B-1 in ascending order;
// raw = iso + aniso, so the decomposition is exact by construction.
template <typename T>
struct DensityParts {
    T sigma;
    T sigma_raw;
    T sigma_iso_raw;
    T sigma_aniso_raw;
};

template <typename T>
DensityParts<T> compose_density(std::span<const T> coeffs, std::span<const T> basis) {
    if (coeffs.empty() || coeffs.size() > basis.size())
        throw UsageError("compose_density: coefficient/basis size mismatch");
    DensityParts<T> out;
    out.sigma_iso_raw = coeffs[0] * basis[0];
    T aniso = T(0);
    for (std::size_t j = 1; j < coeffs.size(); ++j) aniso += coeffs[j] * basis[j];
    out.sigma_aniso_raw = aniso;
    out.sigma_raw = out.sigma_iso_raw + aniso;
    out.sigma = softplus(out.sigma_raw);
    return out;
}

// Latent contraction for one sample. `coeffs` holds latent_dim consecutive
// rows of `width` scalars; e[n] = iso + aniso with the same ordering as the
// density contraction.
template <typename T>
void compose_latent(std::span<const T> coeffs, std::span<const T> basis, int latent_dim,
                    int width, T* e, T* e_aniso) {
    if (coeffs.size() != std::size_t(latent_dim) * std::size_t(width) ||
        basis.size() < std::size_t(width))
        throw UsageError("compose_latent: coefficient/basis size mismatch");
    for (int n = 0; n < latent_dim; ++n) {
        const T* row = coeffs.data() + std::size_t(n) * std::size_t(width);
        T aniso = T(0);
        for (int j = 1; j < width; ++j) aniso += row[j] * basis[j];
        e_aniso[n] = aniso;
        e[n] = row[0] * basis[0] + aniso;
    }
}

// Everything the backward pass needs, plus the outputs themselves.
template <typename T>
struct FieldForward {
    std::size_t count = 0;

    Matrix<T> x_enc, d_enc;
    MlpCache<T> geo_cache, color_cache;
    Matrix<T> raw;         // count x geometry_output_width
    std::vector<T> basis;  // count * basis_width, row per sample

    std::vector<T> sigma, sigma_raw, sigma_iso_raw, sigma_aniso_raw;
    std::vector<T> sigma_aniso;  // the value the training penalty sees
    Matrix<T> e, e_aniso;        // count x latent_dim
    Matrix<T> color_in;          // count x (dir width + latent_dim)
    Matrix<T> rgb_raw, rgb;      // count x 3
};

// Gradients flowing into a forward batch. Empty members are treated as zero.
template <typename T>
struct FieldUpstream {
    std::vector<T> d_sigma;        // wrt post-softplus density
    Matrix<T> d_rgb;               // count x 3
    std::vector<T> d_sigma_aniso;  // wrt sigma_aniso (penalty-facing value)
    Matrix<T> d_e_aniso;           // count x latent_dim
};

template <typename T>
struct FieldGradients {
    MlpGradients<T> geometry;
    MlpGradients<T> color;

    void zero() {
        geometry.zero();
        color.zero();
    }
};

template <typename T>
struct ParamBlock {
    std::string name;
    T* values = nullptr;
    T* grads = nullptr;
    std::size_t size = 0;
};

template <typename T>
struct PointSample {
    double sigma = 0.0;
    double sigma_raw = 0.0;
    double sigma_aniso_raw = 0.0;
    double sigma_aniso = 0.0;
    Vec3 rgb;
    std::vector<T> e, e_aniso;
};

template <typename T>
class Field {
  public:
    Field() = default;

    static Field create(const FieldConfig& cfg, std::uint64_t seed) {
        cfg.validate();
        Field f;
        f.cfg_ = cfg;
        Rng rng(seed);
        f.geometry_ = Mlp<T>::create(cfg.pos_enc.width(), cfg.geometry_hidden,
                                     cfg.geometry_output_width(), rng);
        f.color_ =
            Mlp<T>::create(cfg.color_input_width(), cfg.color_hidden, 3, rng);
        if (cfg.aniso_init_scale != 1.0) f.scale_anisotropic_init();
        return f;
    }

    const FieldConfig& config() const { return cfg_; }
    Mlp<T>& geometry() { return geometry_; }
    Mlp<T>& color() { return color_; }
    const Mlp<T>& geometry() const { return geometry_; }
    const Mlp<T>& color() const { return color_; }

    std::size_t parameter_count() const {
        return geometry_.parameter_count() + color_.parameter_count();
    }

    FieldGradients<T> make_gradients() const {
        FieldGradients<T> g;
        g.geometry = geometry_.make_gradients();
        g.color = color_.make_gradients();
        return g;
    }

    // Parameter blocks in a fixed order (geometry layers then color layers),
    // paired with the matching gradient storage.
    std::vector<ParamBlock<T>> param_blocks(FieldGradients<T>& grads) {
        std::vector<ParamBlock<T>> blocks;
        auto add = [&blocks](const std::string& prefix, Mlp<T>& net, MlpGradients<T>& g) {
            for (std::size_t i = 0; i < net.layers.size(); ++i) {
                const std::string tag = std::to_string(i);
                blocks.push_back({prefix + ".w" + tag, net.layers[i].weights.data(),
                                  g.d_weights[i].data(), net.layers[i].weights.size()});
                blocks.push_back({prefix + ".b" + tag, net.layers[i].bias.data(),
                                  g.d_bias[i].data(), net.layers[i].bias.size()});
            }
        };
        add("geometry", geometry_, grads.geometry);
        add("color", color_, grads.color);
        return blocks;
    }

    // positions and dirs are per sample; dirs need not be unit length but must
    // be nonzero.
    void forward_batch(const std::vector<Vec3>& positions, const std::vector<Vec3>& dirs,
                       FieldForward<T>& fw) const {
        if (positions.size() != dirs.size())
            throw UsageError("field forward: positions/dirs size mismatch");
        const std::size_t s_count = positions.size();
        const int b_width = cfg_.basis_width();
        const int b_sigma = cfg_.density_coeffs();
        const int b_e = cfg_.latent_coeffs();
        const int k_dim = cfg_.latent_dim;
        const int d_width = cfg_.dir_enc.width();

        fw.count = s_count;
        fw.x_enc = encode_batch<T>(positions, cfg_.pos_enc);
        fw.raw = geometry_.forward(fw.x_enc, &fw.geo_cache);

        fw.basis.assign(s_count * std::size_t(b_width), T(0));
        std::vector<double> basis_d(static_cast<std::size_t>(b_width));
        for (std::size_t s = 0; s < s_count; ++s) {
            eval_sh_basis_into(Direction(dirs[s]), cfg_.basis_degree(), basis_d.data());
            T* row = fw.basis.data() + s * std::size_t(b_width);
            for (int j = 0; j < b_width; ++j) row[j] = T(basis_d[std::size_t(j)]);
        }

        fw.sigma.resize(s_count);
        fw.sigma_raw.resize(s_count);
        fw.sigma_iso_raw.resize(s_count);
        fw.sigma_aniso_raw.resize(s_count);
        fw.sigma_aniso.resize(s_count);
        fw.e.resize(s_count, std::size_t(k_dim));
        fw.e_aniso.resize(s_count, std::size_t(k_dim));

        std::vector<T> raw_row(std::size_t(cfg_.geometry_output_width()));
        std::vector<T> e_row(static_cast<std::size_t>(k_dim)), ea_row(static_cast<std::size_t>(k_dim));
        for (std::size_t s = 0; s < s_count; ++s) {
            for (std::size_t j = 0; j < raw_row.size(); ++j) raw_row[j] = fw.raw(s, j);
            const T* brow = fw.basis.data() + s * std::size_t(b_width);
            const auto dens = compose_density<T>({raw_row.data(), std::size_t(b_sigma)},
                                                 {brow, std::size_t(b_width)});
            fw.sigma[s] = dens.sigma;
            fw.sigma_raw[s] = dens.sigma_raw;
            fw.sigma_iso_raw[s] = dens.sigma_iso_raw;
            fw.sigma_aniso_raw[s] = dens.sigma_aniso_raw;
            fw.sigma_aniso[s] = cfg_.aniso_post_activation
                                    ? dens.sigma - softplus(dens.sigma_iso_raw)
                                    : dens.sigma_aniso_raw;
            compose_latent<T>(
                {raw_row.data() + b_sigma, std::size_t(k_dim) * std::size_t(b_e)},
                {brow, std::size_t(b_width)}, k_dim, b_e, e_row.data(), ea_row.data());
            for (int n = 0; n < k_dim; ++n) {
                fw.e(s, std::size_t(n)) = e_row[std::size_t(n)];
                fw.e_aniso(s, std::size_t(n)) = ea_row[std::size_t(n)];
            }
        }

        fw.d_enc = encode_batch<T>(dirs, cfg_.dir_enc);
        fw.color_in.resize(s_count, std::size_t(d_width + k_dim));
        for (int c = 0; c < d_width; ++c) {
            const T* src = fw.d_enc.col(std::size_t(c));
            T* dst = fw.color_in.col(std::size_t(c));
            std::copy(src, src + s_count, dst);
        }
        for (int n = 0; n < k_dim; ++n) {
            const T* src = fw.e.col(std::size_t(n));
            T* dst = fw.color_in.col(std::size_t(d_width + n));
            std::copy(src, src + s_count, dst);
        }
        fw.rgb_raw = color_.forward(fw.color_in, &fw.color_cache);
        fw.rgb.resize(s_count, 3);
        for (std::size_t i = 0; i < fw.rgb.size(); ++i)
            fw.rgb.data()[i] = sigmoid(fw.rgb_raw.data()[i]);
    }

    void backward_batch(const FieldForward<T>& fw, const FieldUpstream<T>& up,
                        FieldGradients<T>& grads) const {
        const std::size_t s_count = fw.count;
        const int b_width = cfg_.basis_width();
        const int b_sigma = cfg_.density_coeffs();
        const int b_e = cfg_.latent_coeffs();
        const int k_dim = cfg_.latent_dim;
        const int d_width = cfg_.dir_enc.width();

        if (!up.d_sigma.empty() && up.d_sigma.size() != s_count)
            throw UsageError("field backward: d_sigma size mismatch");
        if (!up.d_rgb.empty() && (up.d_rgb.rows() != s_count || up.d_rgb.cols() != 3))
            throw UsageError("field backward: d_rgb shape mismatch");
        if (!up.d_sigma_aniso.empty() && up.d_sigma_aniso.size() != s_count)
            throw UsageError("field backward: d_sigma_aniso size mismatch");
        if (!up.d_e_aniso.empty() &&
            (up.d_e_aniso.rows() != s_count || up.d_e_aniso.cols() != std::size_t(k_dim)))
            throw UsageError("field backward: d_e_aniso shape mismatch");

        Matrix<T> d_e(s_count, std::size_t(k_dim));
        if (!up.d_rgb.empty()) {
            Matrix<T> d_rgb_raw(s_count, 3);
            for (std::size_t i = 0; i < d_rgb_raw.size(); ++i) {
                const T r = fw.rgb.data()[i];
                d_rgb_raw.data()[i] = up.d_rgb.data()[i] * r * (T(1) - r);
            }
            Matrix<T> d_color_in;
            color_.backward(d_rgb_raw, fw.color_cache, grads.color, &d_color_in);
            for (int n = 0; n < k_dim; ++n) {
                const T* src = d_color_in.col(std::size_t(d_width + n));
                std::copy(src, src + s_count, d_e.col(std::size_t(n)));
            }
        }

        Matrix<T> d_raw(s_count, std::size_t(cfg_.geometry_output_width()));
        for (std::size_t s = 0; s < s_count; ++s) {
            const T* brow = fw.basis.data() + s * std::size_t(b_width);
            const T g_sigma =
                up.d_sigma.empty() ? T(0) : up.d_sigma[s] * sigmoid(fw.sigma_raw[s]);
            T g_full = g_sigma;  // applies to every density coefficient
            T g_tail = T(0);     // applies to l >= 1 only
            T g_iso = T(0);      // applies to the degree-0 coefficient only
            if (!up.d_sigma_aniso.empty()) {
                const T ga = up.d_sigma_aniso[s];
                if (cfg_.aniso_post_activation) {
                    g_full += ga * sigmoid(fw.sigma_raw[s]);
                    g_iso = -ga * sigmoid(fw.sigma_iso_raw[s]);
                } else {
                    g_tail = ga;
                }
            }
            d_raw(s, 0) = (g_full + g_iso) * brow[0];
            for (int j = 1; j < b_sigma; ++j)
                d_raw(s, std::size_t(j)) = (g_full + g_tail) * brow[j];
            for (int n = 0; n < k_dim; ++n) {
                const std::size_t off = std::size_t(b_sigma) + std::size_t(n) * std::size_t(b_e);
                const T ge = d_e(s, std::size_t(n));
                const T gea = up.d_e_aniso.empty() ? T(0) : up.d_e_aniso(s, std::size_t(n));
                d_raw(s, off) = ge * brow[0];
                for (int j = 1; j < b_e; ++j)
                    d_raw(s, off + std::size_t(j)) = (ge + gea) * brow[j];
            }
        }
        geometry_.backward(d_raw, fw.geo_cache, grads.geometry, nullptr);
    }

    PointSample<T> query(const Vec3& position, const Vec3& direction) const {
        FieldForward<T> fw;
        forward_batch({position}, {direction}, fw);
        PointSample<T> out;
        out.sigma = double(fw.sigma[0]);
        out.sigma_raw = double(fw.sigma_raw[0]);
        out.sigma_aniso_raw = double(fw.sigma_aniso_raw[0]);
        out.sigma_aniso = double(fw.sigma_aniso[0]);
        out.rgb = Vec3(double(fw.rgb(0, 0)), double(fw.rgb(0, 1)), double(fw.rgb(0, 2)));
        out.e.resize(std::size_t(cfg_.latent_dim));
        out.e_aniso.resize(std::size_t(cfg_.latent_dim));
        for (int n = 0; n < cfg_.latent_dim; ++n) {
            out.e[std::size_t(n)] = fw.e(0, std::size_t(n));
            out.e_aniso[std::size_t(n)] = fw.e_aniso(0, std::size_t(n));
        }
        return out;
    }

  private:
    // Runs once after init. Weights are drawn in the usual order first, so a
    // seed pins the same raw stream regardless of the scale.
    void scale_anisotropic_init() {
        const T s = T(cfg_.aniso_init_scale);
        auto& out = geometry_.layers.back();
        auto scale_row = [&](std::size_t r) {
            for (std::size_t c = 0; c < out.weights.cols(); ++c) out.weights(r, c) *= s;
            out.bias[r] *= s;
        };
        const int b_sigma = cfg_.density_coeffs();
        const int b_e = cfg_.latent_coeffs();
        for (int j = 1; j < b_sigma; ++j) scale_row(std::size_t(j));
        for (int n = 0; n < cfg_.latent_dim; ++n)
            for (int j = 1; j < b_e; ++j)
                scale_row(std::size_t(b_sigma) + std::size_t(n) * std::size_t(b_e) +
                          std::size_t(j));
    }

    FieldConfig cfg_;
    Mlp<T> geometry_;
    Mlp<T> color_;
};

}  // namespace arf
