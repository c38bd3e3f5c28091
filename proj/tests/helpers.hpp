#pragma once

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "lfs/common.hpp"
#include "lfs/sae.hpp"
#include "lfs/store.hpp"

// random sae with unit decoder columns; enough to exercise the math without training
inline lfs::sae_params random_sae(int d, int F, int k, uint64_t seed) {
    lfs::rng r(seed);
    lfs::sae_params p;
    p.d_model = d, p.F = F, p.k = k;
    p.w_enc.resize(size_t(F) * d);
    p.w_dec.resize(size_t(F) * d);
    p.b_pre.resize(d);
    for (auto& x : p.w_enc) x = r.normal() / std::sqrt(double(d));
    for (int i = 0; i < F; ++i) {
        double s = 0;
        for (int j = 0; j < d; ++j) s += std::pow(p.w_dec[size_t(i) * d + j] = r.normal(), 2);
        for (int j = 0; j < d; ++j) p.w_dec[size_t(i) * d + j] /= std::sqrt(s);
    }
    for (auto& x : p.b_pre) x = 0.1 * r.normal();
    return p;
}

inline std::vector<double> random_vec(lfs::rng& r, int n, double scale = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = scale * r.normal();
    return v;
}

inline std::vector<lfs::activation_record> random_records(int n, int d, uint64_t seed) {
    lfs::rng r(seed);
    std::vector<lfs::activation_record> out(n);
    for (auto& rec : out) {
        rec.prompt_id = r.eng();
        rec.layer_index = uint16_t(r.below(65536));
        rec.token_position = uint32_t(r.eng());
        rec.vec.resize(d);
        for (auto& x : rec.vec) x = float(r.normal());
    }
    return out;
}

struct temp_dir {
    std::filesystem::path path;
    explicit temp_dir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("lfs-test-" + tag + "-" + std::to_string(lfs::fnv1a(tag + std::to_string(::getpid()))));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~temp_dir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};
