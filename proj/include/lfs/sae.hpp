#pragma once

#include <span>
#include <string>
#include <vector>

#include "lfs/common.hpp"

namespace lfs {

struct sae_params {
    int d_model = 0, F = 0, k = 0;
    std::vector<double> w_enc;  // F x d, row-major
    std::vector<double> w_dec;  // d x F, kept column-contiguous: column i at [i*d, i*d+d)
    std::vector<double> b_pre;  // d

    const double* enc_row(int i) const { return w_enc.data() + size_t(i) * d_model; }
    const double* dec_col(int i) const { return w_dec.data() + size_t(i) * d_model; }
    void check() const;
};

struct sae_grads {
    std::vector<double> w_enc, w_dec, b_pre;
    void resize_like(const sae_params& p);
    void zero();
};

// v on its k largest entries (raw signed values), 0 elsewhere; ties to the lower index
std::vector<double> topk(std::span<const double> v, int k);
// indices of the k largest entries, ordered by value desc then index asc
void topk_indices(const double* v, int n, int k, int* out);

std::vector<double> encode(const sae_params& p, std::span<const double> h);
std::vector<double> encode(const sae_params& p, std::span<const float> h);
std::vector<double> decode(const sae_params& p, std::span<const double> z);

// mean over the batch of ||h - decode(encode(h))||^2; batch is n rows of d_model
double recon_loss(const sae_params& p, const std::vector<double>& batch, int n);
double recon_loss_grad(const sae_params& p, const std::vector<double>& batch, int n, sae_grads& g);

struct train_config {
    int steps = 5000;
    double learning_rate = 4e-3;
    int batch_size = 64;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    uint64_t seed = 7;
    int dead_feature_window = 1000;
    double decay_frac = 0.3;  // linear lr decay to 0 over this tail fraction of steps
    int warmup_samples = 2000;
    bool deterministic = true;
    int log_every = 100;
};

struct train_report {
    std::vector<double> loss_curve;  // mean batch loss per log_every steps
    double initial_loss = 0, final_loss = 0;
    double final_nmse = 0;
    int dead_features = 0;
    int steps_run = 0;
    bool diverged = false;
    std::string message;
};

struct train_result {
    sae_params params;
    train_report report;
};

sae_params init_params(int d_model, int F, int k, const std::vector<double>& data, int n,
                       int warmup_samples, uint64_t seed);
train_result train(sae_params init, const std::vector<double>& data, int n, const train_config& cfg);

// loss / mean ||h - mean(h)||^2
double normalized_mse(const sae_params& p, const std::vector<double>& data, int n);

void save_checkpoint(const sae_params& p, const std::string& path);
sae_params load_checkpoint(const std::string& path);
std::string encode_checkpoint(const sae_params& p);
sae_params decode_checkpoint(std::string_view bytes);

// the checkpoint stores f32; rounding in memory keeps in-process and on-disk runs identical
void round_to_f32(sae_params& p);

}  // namespace lfs
