#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "arf/errors.hpp"
#include "arf/field.hpp"

namespace arf {

inline nlohmann::json field_config_to_json(const FieldConfig& cfg) {
    return {{"degree_sigma", cfg.degree_sigma},
            {"degree_e", cfg.degree_e},
            {"latent_dim", cfg.latent_dim},
            {"pos_frequencies", cfg.pos_enc.num_frequencies},
            {"pos_include_input", cfg.pos_enc.include_input},
            {"dir_frequencies", cfg.dir_enc.num_frequencies},
            {"dir_include_input", cfg.dir_enc.include_input},
            {"geometry_hidden", cfg.geometry_hidden},
            {"color_hidden", cfg.color_hidden},
            {"aniso_post_activation", cfg.aniso_post_activation},
            {"aniso_init_scale", cfg.aniso_init_scale}};
}

inline FieldConfig field_config_from_json(const nlohmann::json& j) {
    FieldConfig cfg;
    try {
        cfg.degree_sigma = j.value("degree_sigma", cfg.degree_sigma);
        cfg.degree_e = j.value("degree_e", cfg.degree_e);
        cfg.latent_dim = j.value("latent_dim", cfg.latent_dim);
        cfg.pos_enc.num_frequencies = j.value("pos_frequencies", cfg.pos_enc.num_frequencies);
        cfg.pos_enc.include_input = j.value("pos_include_input", cfg.pos_enc.include_input);
        cfg.dir_enc.num_frequencies = j.value("dir_frequencies", cfg.dir_enc.num_frequencies);
        cfg.dir_enc.include_input = j.value("dir_include_input", cfg.dir_enc.include_input);
        cfg.geometry_hidden = j.value("geometry_hidden", cfg.geometry_hidden);
        cfg.color_hidden = j.value("color_hidden", cfg.color_hidden);
        cfg.aniso_post_activation = j.value("aniso_post_activation", cfg.aniso_post_activation);
        cfg.aniso_init_scale = j.value("aniso_init_scale", cfg.aniso_init_scale);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("field config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

namespace detail {

// (name, values, size) triples in the declared layer order; values flatten in
// storage order (column-major weights, then bias).
template <typename T, typename Fn>
void for_each_param_array(const Field<T>& field, Fn&& fn) {
    auto visit = [&fn](const std::string& prefix, const Mlp<T>& net) {
        for (std::size_t i = 0; i < net.layers.size(); ++i) {
            const std::string tag = std::to_string(i);
            fn(prefix + ".w" + tag, net.layers[i].weights.data(), net.layers[i].weights.size());
            fn(prefix + ".b" + tag, net.layers[i].bias.data(), net.layers[i].bias.size());
        }
    };
    visit("geometry", field.geometry());
    visit("color", field.color());
}

template <typename T, typename Fn>
void for_each_param_array(Field<T>& field, Fn&& fn) {
    auto visit = [&fn](const std::string& prefix, Mlp<T>& net) {
        for (std::size_t i = 0; i < net.layers.size(); ++i) {
            const std::string tag = std::to_string(i);
            fn(prefix + ".w" + tag, net.layers[i].weights.data(), net.layers[i].weights.size());
            fn(prefix + ".b" + tag, net.layers[i].bias.data(), net.layers[i].bias.size());
        }
    };
    visit("geometry", field.geometry());
    visit("color", field.color());
}

}  // namespace detail

inline constexpr int kCheckpointFormatVersion = 1;

template <typename T>
nlohmann::json checkpoint_to_json(const Field<T>& field) {
    nlohmann::json j;
    j["format_version"] = kCheckpointFormatVersion;
    j["precision"] = sizeof(T) == 4 ? "float32" : "float64";
    j["field"] = field_config_to_json(field.config());
    nlohmann::json params = nlohmann::json::object();
    detail::for_each_param_array(field, [&params](const std::string& name, const T* values,
                                                  std::size_t n) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = double(values[i]);
        params[name] = std::move(v);
    });
    j["parameters"] = std::move(params);
    return j;
}

template <typename T>
void save_checkpoint(const std::string& path, const Field<T>& field) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out << checkpoint_to_json(field).dump() << "\n";
    if (!out) throw IoError("checkpoint write failed: " + path);
}

template <typename T>
Field<T> checkpoint_from_json(const nlohmann::json& j) {
    if (!j.contains("format_version") || !j["format_version"].is_number_integer() ||
        j["format_version"].get<int>() != kCheckpointFormatVersion)
        throw ParseError("checkpoint: unsupported format_version");
    if (!j.contains("field") || !j.contains("parameters"))
        throw ParseError("checkpoint: missing field or parameters");
    const FieldConfig cfg = field_config_from_json(j["field"]);
    Field<T> field = Field<T>::create(cfg, 0);
    const nlohmann::json& params = j["parameters"];
    detail::for_each_param_array(field, [&params](const std::string& name, T* values,
                                                  std::size_t n) {
        if (!params.contains(name))
            throw ParseError("checkpoint: missing parameter block " + name);
        const auto& arr = params[name];
        if (!arr.is_array() || arr.size() != n)
            throw ParseError("checkpoint: bad size for parameter block " + name);
        for (std::size_t i = 0; i < n; ++i) values[i] = T(arr[i].get<double>());
    });
    return field;
}

template <typename T>
Field<T> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read checkpoint: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("checkpoint parse: ") + e.what());
    }
    return checkpoint_from_json<T>(j);
}

}  // namespace arf
