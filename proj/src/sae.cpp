#include "lfs/sae.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "lfs/kernels.hpp"
#include "lfs/store.hpp"

namespace lfs {

void sae_params::check() const {
    if (d_model <= 0 || F <= 0) throw error("sae: bad geometry");
    if (k <= 0) throw error("sae: k must be positive");
    if (k > F) throw error("k exceeds F");
    if (w_enc.size() != size_t(F) * d_model || w_dec.size() != size_t(F) * d_model ||
        b_pre.size() != size_t(d_model))
        throw error("sae: tensor sizes do not match geometry");
}

void sae_grads::resize_like(const sae_params& p) {
    w_enc.resize(p.w_enc.size());
    w_dec.resize(p.w_dec.size());
    b_pre.resize(p.b_pre.size());
}

void sae_grads::zero() {
    std::fill(w_enc.begin(), w_enc.end(), 0.0);
    std::fill(w_dec.begin(), w_dec.end(), 0.0);
    std::fill(b_pre.begin(), b_pre.end(), 0.0);
}

void topk_indices(const double* v, int n, int k, int* out) {
    thread_local std::vector<int> order;
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [v](int a, int b) { return v[a] > v[b] || (v[a] == v[b] && a < b); });
    std::copy(order.begin(), order.begin() + k, out);
}

std::vector<double> topk(std::span<const double> v, int k) {
    if (k < 0 || size_t(k) > v.size()) throw error("topk: k exceeds vector length");
    std::vector<double> out(v.size(), 0.0);
    std::vector<int> idx(k);
    topk_indices(v.data(), v.size(), k, idx.data());
    for (int i : idx) out[i] = v[i];
    return out;
}

std::vector<double> encode(const sae_params& p, std::span<const double> h) {
    if (h.size() != size_t(p.d_model)) throw error("encode: dimension mismatch");
    if (!all_finite(h.data(), h.size())) throw error("encode: non-finite input");
    std::vector<int> idx(p.k);
    std::vector<double> val(p.k), z(p.F, 0.0);
    kern::ref::encode_batch(p, h.data(), 1, idx.data(), val.data());
    for (int j = 0; j < p.k; ++j) z[idx[j]] = val[j];
    return z;
}

std::vector<double> encode(const sae_params& p, std::span<const float> h) {
    std::vector<double> hd(h.begin(), h.end());
    return encode(p, std::span<const double>(hd));
}

std::vector<double> decode(const sae_params& p, std::span<const double> z) {
    if (z.size() != size_t(p.F)) throw error("decode: dimension mismatch");
    std::vector<double> h(p.b_pre);
    for (int i = 0; i < p.F; ++i) {
        if (z[i] == 0) continue;
        const double* c = p.dec_col(i);
        for (int j = 0; j < p.d_model; ++j) h[j] += z[i] * c[j];
    }
    return h;
}

double recon_loss(const sae_params& p, const std::vector<double>& batch, int n) {
    sae_grads g;
    return recon_loss_grad(p, batch, n, g);
}

double recon_loss_grad(const sae_params& p, const std::vector<double>& batch, int n, sae_grads& g) {
    if (n <= 0) throw error("recon_loss: empty batch");
    if (batch.size() != size_t(n) * p.d_model) throw error("recon_loss: dimension mismatch");
    std::vector<int> idx(size_t(n) * p.k);
    std::vector<double> val(size_t(n) * p.k);
    kern::par::encode_batch(p, batch.data(), n, idx.data(), val.data());
    return kern::par::recon_grad(p, batch.data(), n, idx.data(), val.data(), g, true);
}

double normalized_mse(const sae_params& p, const std::vector<double>& data, int n) {
    const int d = p.d_model;
    std::vector<double> mu(d, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) mu[j] += data[size_t(i) * d + j];
    for (auto& m : mu) m /= n;
    double var = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) {
            double e = data[size_t(i) * d + j] - mu[j];
            var += e * e;
        }
    var /= n;
    return recon_loss(p, data, n) / var;
}

static void normalize_columns(sae_params& p) {
    const int d = p.d_model;
    for (int i = 0; i < p.F; ++i) {
        double* c = p.w_dec.data() + size_t(i) * d;
        double s = 0;
        for (int j = 0; j < d; ++j) s += c[j] * c[j];
        // already-unit columns are left bit-identical
        if (std::fabs(s - 1.0) <= 1e-12 || s == 0) continue;
        s = std::sqrt(s);
        for (int j = 0; j < d; ++j) c[j] /= s;
    }
}

sae_params init_params(int d_model, int F, int k, const std::vector<double>& data, int n,
                       int warmup_samples, uint64_t seed) {
    if (k > F) throw error("k exceeds F");
    if (n <= 0) throw error("init: no warm-up data");
    if (data.size() != size_t(n) * d_model) throw error("init: dimension mismatch");
    sae_params p;
    p.d_model = d_model;
    p.F = F;
    p.k = k;
    rng r(derive_seed(seed, "sae-init"));
    p.w_dec.resize(size_t(F) * d_model);
    for (auto& x : p.w_dec) x = r.normal();
    for (int i = 0; i < F; ++i) {
        double* c = p.w_dec.data() + size_t(i) * d_model;
        double s = 0;
        for (int j = 0; j < d_model; ++j) s += c[j] * c[j];
        s = std::sqrt(s);
        for (int j = 0; j < d_model; ++j) c[j] /= s;
    }
    p.w_enc = p.w_dec;  // row i of w_enc is column i of w_dec
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    auto warm = r.sample(all, std::min(n, std::max(1, warmup_samples)));
    p.b_pre.assign(d_model, 0.0);
    for (int i : warm)
        for (int j = 0; j < d_model; ++j) p.b_pre[j] += data[size_t(i) * d_model + j];
    for (auto& b : p.b_pre) b /= warm.size();
    p.check();
    return p;
}

train_result train(sae_params p, const std::vector<double>& data, int n, const train_config& cfg) {
    p.check();
    const int d = p.d_model, F = p.F, k = p.k, B = cfg.batch_size;
    if (cfg.steps <= 0) throw error("train: steps must be positive");
    if (B <= 0) throw error("train: batch_size must be positive");
    if (cfg.learning_rate < 0) throw error("train: negative learning rate");
    if (n <= 0) throw error("train: no data");
    if (data.size() != size_t(n) * d) throw error("train: data dimension does not match d_model");

    train_result res;
    auto& rep = res.report;
    const int n_eval = std::min(n, 4096);
    std::vector<double> eval_set(data.begin(), data.begin() + size_t(n_eval) * d);
    rep.initial_loss = recon_loss(p, eval_set, n_eval);

    rng r(derive_seed(cfg.seed, "sae-batches"));
    std::vector<int> perm = r.permutation(n);
    size_t pos = 0;

    sae_grads g, m, v;
    g.resize_like(p);
    m.resize_like(p);
    v.resize_like(p);
    m.zero();
    v.zero();
    std::vector<double> xb(size_t(B) * d), val(size_t(B) * k);
    std::vector<int> idx(size_t(B) * k);
    std::vector<int> last_fired(F, -1);
    double acc = 0;
    int acc_n = 0;

    auto adam = [&](std::vector<double>& w, const std::vector<double>& gr, std::vector<double>& mm,
                    std::vector<double>& vv, double lr, double bc1, double bc2) {
        const long sz = w.size();
#pragma omp parallel for schedule(static)
        for (long i = 0; i < sz; ++i) {
            mm[i] = cfg.beta1 * mm[i] + (1 - cfg.beta1) * gr[i];
            vv[i] = cfg.beta2 * vv[i] + (1 - cfg.beta2) * gr[i] * gr[i];
            w[i] -= lr * (mm[i] / bc1) / (std::sqrt(vv[i] / bc2) + cfg.eps);
        }
    };

    int step = 0;
    for (; step < cfg.steps; ++step) {
        for (int b = 0; b < B; ++b) {
            if (pos == perm.size()) {
                perm = r.permutation(n);
                pos = 0;
            }
            std::memcpy(&xb[size_t(b) * d], &data[size_t(perm[pos++]) * d], sizeof(double) * d);
        }
        kern::par::encode_batch(p, xb.data(), B, idx.data(), val.data());
        double loss = kern::par::recon_grad(p, xb.data(), B, idx.data(), val.data(), g, cfg.deterministic);
        if (!std::isfinite(loss)) {
            rep.diverged = true;
            rep.message = "loss became non-finite at step " + std::to_string(step);
            break;
        }
        for (int i : idx) last_fired[i] = step;
        acc += loss;
        if (++acc_n == cfg.log_every) {
            rep.loss_curve.push_back(acc / acc_n);
            acc = 0;
            acc_n = 0;
        }

        double lr = cfg.learning_rate;
        if (cfg.decay_frac > 0) lr *= std::min(1.0, (1.0 - double(step) / cfg.steps) / cfg.decay_frac);
        double bc1 = 1 - std::pow(cfg.beta1, step + 1), bc2 = 1 - std::pow(cfg.beta2, step + 1);
        adam(p.w_enc, g.w_enc, m.w_enc, v.w_enc, lr, bc1, bc2);
        adam(p.w_dec, g.w_dec, m.w_dec, v.w_dec, lr, bc1, bc2);
        adam(p.b_pre, g.b_pre, m.b_pre, v.b_pre, lr, bc1, bc2);
        normalize_columns(p);
        if (!all_finite(p.w_enc.data(), p.w_enc.size()) || !all_finite(p.w_dec.data(), p.w_dec.size()) ||
            !all_finite(p.b_pre.data(), p.b_pre.size())) {
            rep.diverged = true;
            rep.message = "parameters became non-finite at step " + std::to_string(step);
            ++step;
            break;
        }
    }
    if (acc_n > 0) rep.loss_curve.push_back(acc / acc_n);
    rep.steps_run = step;

    if (!rep.diverged) {
        rep.final_loss = recon_loss(p, eval_set, n_eval);
        rep.final_nmse = normalized_mse(p, eval_set, n_eval);
        if (!std::isfinite(rep.final_loss)) {
            rep.diverged = true;
            rep.message = "final loss is non-finite";
        }
    }
    int window_start = rep.steps_run - cfg.dead_feature_window;
    for (int i = 0; i < F; ++i)
        if (last_fired[i] < std::max(0, window_start)) ++rep.dead_features;
    res.params = std::move(p);
    return res;
}

namespace {

const char ckpt_magic[4] = {'S', 'A', 'E', 'P'};

void put_u32(std::string& s, uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(char((v >> (8 * i)) & 0xff));
}
uint32_t get_u32(const unsigned char* p) {
    return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}
void put_f32(std::string& s, double x) {
    float f = float(x);
    uint32_t u;
    std::memcpy(&u, &f, 4);
    put_u32(s, u);
}
double get_f32(const unsigned char* p) {
    uint32_t u = get_u32(p);
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

}  // namespace

std::string encode_checkpoint(const sae_params& p) {
    p.check();
    std::string s(ckpt_magic, 4);
    put_u32(s, 1);
    put_u32(s, p.d_model);
    put_u32(s, p.F);
    put_u32(s, p.k);
    for (double x : p.w_enc) put_f32(s, x);
    // w_dec written row-major as d x F
    for (int r = 0; r < p.d_model; ++r)
        for (int c = 0; c < p.F; ++c) put_f32(s, p.dec_col(c)[r]);
    for (double x : p.b_pre) put_f32(s, x);
    return s;
}

sae_params decode_checkpoint(std::string_view bytes) {
    auto q = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < 4 || std::memcmp(q, ckpt_magic, 4) != 0) throw error("bad magic");
    if (bytes.size() < 20) throw error("truncated checkpoint header");
    if (get_u32(q + 4) != 1) throw error("unsupported checkpoint version");
    sae_params p;
    p.d_model = get_u32(q + 8);
    p.F = get_u32(q + 12);
    p.k = get_u32(q + 16);
    size_t d = p.d_model, F = p.F;
    size_t want = 20 + 4 * (2 * F * d + d);
    if (bytes.size() < want) throw error("truncated checkpoint");
    if (bytes.size() > want) throw error("trailing bytes in checkpoint");
    const unsigned char* c = q + 20;
    p.w_enc.resize(F * d);
    p.w_dec.resize(F * d);
    p.b_pre.resize(d);
    for (auto& x : p.w_enc) x = get_f32(c), c += 4;
    for (size_t r = 0; r < d; ++r)
        for (size_t col = 0; col < F; ++col) p.w_dec[col * d + r] = get_f32(c), c += 4;
    for (auto& x : p.b_pre) x = get_f32(c), c += 4;
    if (!all_finite(p.w_enc.data(), p.w_enc.size()) || !all_finite(p.w_dec.data(), p.w_dec.size()) ||
        !all_finite(p.b_pre.data(), p.b_pre.size()))
        throw error("checkpoint holds non-finite parameters");
    p.check();
    return p;
}

void save_checkpoint(const sae_params& p, const std::string& path) {
    write_file_atomic(path, encode_checkpoint(p));
}

sae_params load_checkpoint(const std::string& path) { return decode_checkpoint(read_file(path)); }

void round_to_f32(sae_params& p) {
    for (auto* v : {&p.w_enc, &p.w_dec, &p.b_pre})
        for (auto& x : *v) x = double(float(x));
}

}  // namespace lfs
