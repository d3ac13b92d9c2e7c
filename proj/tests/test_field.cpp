#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "arf/checkpoint.hpp"
#include "arf/field.hpp"
#include "arf/gradcheck.hpp"
#include "arf/mlp.hpp"

using namespace arf;

namespace {

FieldConfig small_config() {
    FieldConfig cfg;
    cfg.degree_sigma = 3;
    cfg.degree_e = 3;
    cfg.latent_dim = 5;
    cfg.pos_enc = {4, true};
    cfg.dir_enc = {2, true};
    cfg.geometry_hidden = {24, 24};
    cfg.color_hidden = {16};
    return cfg;
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("activation helpers match frozen values") {
    CHECK(softplus(0.0) == doctest::Approx(0.6931471805599453).epsilon(1e-15));
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(softplus(100.0) == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(softplus(-100.0) > 0.0);
    CHECK(sigmoid(30.0) < 1.0);
}

TEST_CASE("mlp construction, init bounds, determinism") {
    Rng rng(7);
    const auto net = Mlp<float>::create(10, {32, 16}, 4, rng);
    REQUIRE(net.layers.size() == 3);
    CHECK(net.input_width() == 10);
    CHECK(net.output_width() == 4);
    CHECK(net.parameter_count() == (10 * 32 + 32) + (32 * 16 + 16) + (16 * 4 + 4));
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        const auto& l = net.layers[li];
        const double limit = std::sqrt(6.0 / double(l.weights.cols()));
        for (std::size_t i = 0; i < l.weights.size(); ++i) {
            CHECK(std::abs(double(l.weights.data()[i])) <= limit);
        }
        for (float b : l.bias) CHECK(b == 0.0f);
    }
    Rng rng2(7);
    const auto net2 = Mlp<float>::create(10, {32, 16}, 4, rng2);
    for (std::size_t li = 0; li < net.layers.size(); ++li)
        for (std::size_t i = 0; i < net.layers[li].weights.size(); ++i)
            CHECK(net.layers[li].weights.data()[i] == net2.layers[li].weights.data()[i]);

    CHECK_THROWS_AS(Mlp<float>::create(0, {4}, 2, rng), ConfigError);
    CHECK_THROWS_AS(Mlp<float>::create(3, {-1}, 2, rng), ConfigError);
}

TEST_CASE("mlp forward applies relu on hidden layers only") {
    Mlp<double> net;
    DenseLayer<double> l0;
    l0.weights = Matrix<double>(2, 1);
    l0.weights(0, 0) = 1.0;
    l0.weights(1, 0) = -1.0;
    l0.bias = {0.0, 0.0};
    DenseLayer<double> l1;
    l1.weights = Matrix<double>(1, 2);
    l1.weights(0, 0) = 1.0;
    l1.weights(0, 1) = 1.0;
    l1.bias = {-5.0};
    net.layers = {l0, l1};

    Matrix<double> x(1, 1);
    x(0, 0) = 3.0;
    const auto y = net.forward(x);
    // hidden: relu(3), relu(-3) = 3, 0; output: 3 - 5 = -2 stays negative
    CHECK(y(0, 0) == -2.0);
}

TEST_CASE("mlp gradients agree with finite differences") {
    Rng rng(8);
    Mlp<double> net = Mlp<double>::create(3, {8, 8}, 2, rng);
    Matrix<double> x(4, 3);
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);

    auto loss = [&]() {
        const Matrix<double> y = net.forward(x);
        double acc = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) acc += y.data()[i] * y.data()[i];
        return acc;
    };

    MlpCache<double> cache;
    const Matrix<double> y = net.forward(x, &cache);
    Matrix<double> d_out(y.rows(), y.cols());
    for (std::size_t i = 0; i < y.size(); ++i) d_out.data()[i] = 2.0 * y.data()[i];
    MlpGradients<double> grads = net.make_gradients();
    Matrix<double> d_input;
    net.backward(d_out, cache, grads, &d_input);

    const double h = 1e-6;
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        auto& w = net.layers[li].weights;
        for (std::size_t i = 0; i < w.size(); i += 7) {
            const double p0 = w.data()[i];
            w.data()[i] = p0 + h;
            const double lp = loss();
            w.data()[i] = p0 - h;
            const double lm = loss();
            w.data()[i] = p0;
            CHECK(grads.d_weights[li].data()[i] ==
                  doctest::Approx((lp - lm) / (2 * h)).epsilon(1e-5).scale(1.0));
        }
        auto& b = net.layers[li].bias;
        for (std::size_t i = 0; i < b.size(); i += 3) {
            const double p0 = b[i];
            b[i] = p0 + h;
            const double lp = loss();
            b[i] = p0 - h;
            const double lm = loss();
            b[i] = p0;
            CHECK(grads.d_bias[li][i] ==
                  doctest::Approx((lp - lm) / (2 * h)).epsilon(1e-5).scale(1.0));
        }
    }
    // input gradient too
    for (std::size_t i = 0; i < x.size(); i += 2) {
        const double p0 = x.data()[i];
        x.data()[i] = p0 + h;
        const double lp = loss();
        x.data()[i] = p0 - h;
        const double lm = loss();
        x.data()[i] = p0;
        CHECK(d_input.data()[i] == doctest::Approx((lp - lm) / (2 * h)).epsilon(1e-5).scale(1.0));
    }
}

TEST_CASE("density contraction splits exactly into isotropic and anisotropic parts") {
    Rng rng(9);
    const auto basis_vals = eval_sh_basis(Direction(0.2, -0.7, 0.684), 3);
    std::vector<double> basis(basis_vals.values.begin(), basis_vals.values.end());
    std::vector<double> k(16);
    for (auto& v : k) v = rng.uniform(-2.0, 2.0);

    const auto parts = compose_density<double>(k, basis);
    CHECK(parts.sigma_raw == parts.sigma_iso_raw + parts.sigma_aniso_raw);
    CHECK(parts.sigma == softplus(parts.sigma_raw));
    double plain = 0.0;
    for (int j = 0; j < 16; ++j) plain += k[std::size_t(j)] * basis[std::size_t(j)];
    CHECK(parts.sigma_raw == doctest::Approx(plain).epsilon(1e-13));

    // degree 0: no anisotropic part at all
    const auto iso_parts = compose_density<double>(std::span<const double>(k.data(), 1), basis);
    CHECK(iso_parts.sigma_aniso_raw == 0.0);
    CHECK(iso_parts.sigma_raw == k[0] * basis[0]);
}

TEST_CASE("field config widths scale with the squared degree") {
    FieldConfig cfg = small_config();
    cfg.degree_sigma = 3;
    cfg.degree_e = 3;
    cfg.latent_dim = 15;
    CHECK(cfg.density_coeffs() == 16);
    CHECK(cfg.geometry_output_width() == 16 + 15 * 16);
    cfg.degree_sigma = 0;
    cfg.degree_e = 0;
    CHECK(cfg.geometry_output_width() == 1 + 15 * 1);
    cfg.degree_sigma = 9;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.degree_sigma = 2;
    cfg.latent_dim = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("init scale damps exactly the anisotropic geometry rows") {
    FieldConfig a = small_config();
    a.aniso_init_scale = 1.0;
    FieldConfig b = a;
    b.aniso_init_scale = 0.25;
    const auto fa = Field<double>::create(a, 77);
    const auto fb = Field<double>::create(b, 77);

    const auto& wa = fa.geometry().layers.back().weights;
    const auto& wb = fb.geometry().layers.back().weights;
    const int b_sigma = a.density_coeffs();
    const int b_e = a.latent_coeffs();
    auto is_iso_row = [&](std::size_t r) {
        if (r < std::size_t(b_sigma)) return r == 0;
        return (r - std::size_t(b_sigma)) % std::size_t(b_e) == 0;
    };
    for (std::size_t r = 0; r < wa.rows(); ++r)
        for (std::size_t c = 0; c < wa.cols(); ++c) {
            if (is_iso_row(r))
                CHECK(wb(r, c) == wa(r, c));
            else
                CHECK(wb(r, c) == wa(r, c) * 0.25);
        }
    // earlier layers and the color net keep the same draw
    CHECK(fa.geometry().layers[0].weights(3, 5) == fb.geometry().layers[0].weights(3, 5));
    CHECK(fa.color().layers[0].weights(2, 1) == fb.color().layers[0].weights(2, 1));

    // degree 0 has no anisotropic rows, so the scale is inert
    FieldConfig iso = small_config();
    iso.degree_sigma = 0;
    iso.degree_e = 0;
    FieldConfig iso_scaled = iso;
    iso_scaled.aniso_init_scale = 0.0;
    const auto fi = Field<double>::create(iso, 78);
    const auto fs = Field<double>::create(iso_scaled, 78);
    const auto& wi = fi.geometry().layers.back().weights;
    const auto& ws = fs.geometry().layers.back().weights;
    for (std::size_t i = 0; i < wi.size(); ++i) CHECK(wi.data()[i] == ws.data()[i]);

    FieldConfig bad = small_config();
    bad.aniso_init_scale = -0.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("degree-0 field outputs ignore the view direction bit for bit") {
    FieldConfig cfg = small_config();
    cfg.degree_sigma = 0;
    cfg.degree_e = 0;
    const auto field = Field<double>::create(cfg, 31);
    const Vec3 x(0.21, -0.4, 0.33);
    Rng rng(32);
    const PointSample<double> ref = field.query(x, rng.unit_vector());
    for (int i = 0; i < 100; ++i) {
        const PointSample<double> s = field.query(x, rng.unit_vector());
        CHECK(s.sigma == ref.sigma);
        CHECK(s.sigma_aniso == 0.0);
        for (std::size_t n = 0; n < s.e.size(); ++n) {
            CHECK(s.e[n] == ref.e[n]);
            CHECK(s.e_aniso[n] == 0.0);
        }
    }
}

TEST_CASE("anisotropic decomposition holds inside the batched forward") {
    FieldConfig cfg = small_config();
    const auto field = Field<float>::create(cfg, 33);
    Rng rng(34);
    std::vector<Vec3> pos, dir;
    for (int i = 0; i < 17; ++i) {
        pos.push_back(Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)));
        dir.push_back(rng.unit_vector());
    }
    FieldForward<float> fw;
    field.forward_batch(pos, dir, fw);
    const int b_sigma = cfg.density_coeffs();
    const int b_e = cfg.latent_coeffs();
    for (std::size_t s = 0; s < fw.count; ++s) {
        CHECK(fw.sigma_raw[s] == fw.sigma_iso_raw[s] + fw.sigma_aniso_raw[s]);
        CHECK(fw.sigma[s] == softplus(fw.sigma_raw[s]));
        const float b0 = fw.basis[s * std::size_t(cfg.basis_width())];
        for (int n = 0; n < cfg.latent_dim; ++n) {
            const float iso =
                fw.raw(s, std::size_t(b_sigma + n * b_e)) * b0;
            CHECK(fw.e(s, std::size_t(n)) == iso + fw.e_aniso(s, std::size_t(n)));
        }
        for (int c = 0; c < 3; ++c) {
            CHECK(fw.rgb(s, std::size_t(c)) > 0.0f);
            CHECK(fw.rgb(s, std::size_t(c)) < 1.0f);
        }
    }
}

TEST_CASE("full-pipeline gradients match finite differences") {
    PipelineGradCheckConfig cfg;
    cfg.probes = 40;
    const GradCheckReport rep = pipeline_gradient_check(cfg);
    CHECK(rep.checked == 40);
    CHECK(rep.max_rel_error < 1e-4);
}

TEST_CASE("post-activation anisotropy variant backpropagates correctly") {
    FieldConfig cfg = small_config();
    cfg.aniso_post_activation = true;
    Field<double> field = Field<double>::create(cfg, 35);
    Rng rng(36);
    std::vector<Vec3> pos, dir;
    for (int i = 0; i < 6; ++i) {
        pos.push_back(Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)));
        dir.push_back(rng.unit_vector());
    }
    FieldForward<double> fw;

    auto loss = [&]() {
        field.forward_batch(pos, dir, fw);
        double acc = 0.0;
        for (std::size_t s = 0; s < fw.count; ++s)
            acc += fw.sigma_aniso[s] * fw.sigma_aniso[s];
        return acc / double(fw.count);
    };
    const double base = loss();
    CHECK(base > 0.0);
    // the penalty-facing value is softplus(raw) - softplus(iso_raw) here
    for (std::size_t s = 0; s < fw.count; ++s)
        CHECK(fw.sigma_aniso[s] ==
              doctest::Approx(softplus(fw.sigma_raw[s]) - softplus(fw.sigma_iso_raw[s]))
                  .epsilon(1e-14));

    FieldGradients<double> grads = field.make_gradients();
    const auto blocks = field.param_blocks(grads);
    FieldUpstream<double> up;
    up.d_sigma_aniso.resize(fw.count);
    for (std::size_t s = 0; s < fw.count; ++s)
        up.d_sigma_aniso[s] = 2.0 * fw.sigma_aniso[s] / double(fw.count);
    grads.zero();
    field.backward_batch(fw, up, grads);
    const GradCheckReport rep = gradient_check(blocks, loss, 30, 37);
    CHECK(rep.max_rel_error < 1e-4);
}

TEST_CASE("checkpoint round trip preserves parameters exactly") {
    const FieldConfig cfg = small_config();
    const auto field = Field<float>::create(cfg, 41);
    const std::string path = temp_path("arf_test_ckpt.json");
    save_checkpoint(path, field);
    const auto loaded = load_checkpoint<float>(path);

    CHECK(loaded.config().degree_sigma == cfg.degree_sigma);
    CHECK(loaded.config().latent_dim == cfg.latent_dim);
    REQUIRE(loaded.geometry().layers.size() == field.geometry().layers.size());
    for (std::size_t li = 0; li < field.geometry().layers.size(); ++li) {
        const auto& a = field.geometry().layers[li];
        const auto& b = loaded.geometry().layers[li];
        REQUIRE(a.weights.size() == b.weights.size());
        for (std::size_t i = 0; i < a.weights.size(); ++i)
            CHECK(a.weights.data()[i] == b.weights.data()[i]);
        for (std::size_t i = 0; i < a.bias.size(); ++i) CHECK(a.bias[i] == b.bias[i]);
    }
    std::filesystem::remove(path);
}

TEST_CASE("checkpoint loading rejects malformed files") {
    const FieldConfig cfg = small_config();
    const auto field = Field<float>::create(cfg, 42);
    nlohmann::json j = checkpoint_to_json(field);

    nlohmann::json bad_version = j;
    bad_version["format_version"] = 999;
    CHECK_THROWS_AS(checkpoint_from_json<float>(bad_version), ParseError);

    nlohmann::json missing = j;
    missing["parameters"].erase("geometry.w0");
    CHECK_THROWS_AS(checkpoint_from_json<float>(missing), ParseError);

    nlohmann::json short_block = j;
    short_block["parameters"]["color.b0"] = {1.0};
    CHECK_THROWS_AS(checkpoint_from_json<float>(short_block), ParseError);
}
