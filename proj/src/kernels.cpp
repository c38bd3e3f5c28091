#include "lfs/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lfs::kern {

namespace {

void encode_one(const sae_params& p, const double* x, double* pre, double* xc, int* idx, double* val) {
    const int d = p.d_model, F = p.F;
    for (int j = 0; j < d; ++j) xc[j] = x[j] - p.b_pre[j];
    for (int i = 0; i < F; ++i) {
        const double* w = p.enc_row(i);
        double s = 0;
        for (int j = 0; j < d; ++j) s += w[j] * xc[j];
        pre[i] = s;
    }
    topk_indices(pre, F, p.k, idx);
    for (int j = 0; j < p.k; ++j) val[j] = pre[idx[j]];
}

// adds one sample's contribution to g, returns its squared error
double grad_one(const sae_params& p, const double* x, const int* idx, const double* val, double scale,
                double* r, double* xc, sae_grads& g) {
    const int d = p.d_model, k = p.k;
    for (int j = 0; j < d; ++j) {
        r[j] = p.b_pre[j] - x[j];
        xc[j] = x[j] - p.b_pre[j];
    }
    for (int a = 0; a < k; ++a) {
        const double* c = p.dec_col(idx[a]);
        for (int j = 0; j < d; ++j) r[j] += val[a] * c[j];
    }
    double loss = 0;
    for (int j = 0; j < d; ++j) {
        loss += r[j] * r[j];
        r[j] *= scale;  // now dL/dhhat
        g.b_pre[j] += r[j];
    }
    for (int a = 0; a < k; ++a) {
        int i = idx[a];
        const double* c = p.dec_col(i);
        const double* w = p.enc_row(i);
        double* gd = g.w_dec.data() + size_t(i) * d;
        double* ge = g.w_enc.data() + size_t(i) * d;
        double dz = 0;
        for (int j = 0; j < d; ++j) {
            gd[j] += val[a] * r[j];
            dz += c[j] * r[j];
        }
        for (int j = 0; j < d; ++j) {
            ge[j] += dz * xc[j];
            g.b_pre[j] -= dz * w[j];
        }
    }
    return loss;
}

void add_into(std::vector<double>& dst, const std::vector<double>& src) {
    for (size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

namespace ref {

void encode_batch(const sae_params& p, const double* x, int B, int* idx, double* val) {
    std::vector<double> pre(p.F), xc(p.d_model);
    for (int b = 0; b < B; ++b)
        encode_one(p, x + size_t(b) * p.d_model, pre.data(), xc.data(), idx + size_t(b) * p.k,
                   val + size_t(b) * p.k);
}

double recon_grad(const sae_params& p, const double* x, int B, const int* idx, const double* val,
                  sae_grads& g) {
    g.resize_like(p);
    g.zero();
    std::vector<double> r(p.d_model), xc(p.d_model);
    double loss = 0;
    for (int b = 0; b < B; ++b)
        loss += grad_one(p, x + size_t(b) * p.d_model, idx + size_t(b) * p.k, val + size_t(b) * p.k,
                         2.0 / B, r.data(), xc.data(), g);
    return loss / B;
}

void feature_diff(const double* zu, const double* zv, int n, int F, bool signed_mode, double* g) {
    for (int i = 0; i < F; ++i) g[i] = 0;
    for (int q = 0; q < n; ++q) {
        const double* a = zu + size_t(q) * F;
        const double* b = zv + size_t(q) * F;
        for (int i = 0; i < F; ++i) g[i] += signed_mode ? a[i] - b[i] : std::fabs(a[i] - b[i]);
    }
    for (int i = 0; i < F; ++i) g[i] /= n;
}

}  // namespace ref

namespace par {

void encode_batch(const sae_params& p, const double* x, int B, int* idx, double* val) {
#pragma omp parallel
    {
        std::vector<double> pre(p.F), xc(p.d_model);
#pragma omp for schedule(static)
        for (int b = 0; b < B; ++b)
            encode_one(p, x + size_t(b) * p.d_model, pre.data(), xc.data(), idx + size_t(b) * p.k,
                       val + size_t(b) * p.k);
    }
}

double recon_grad(const sae_params& p, const double* x, int B, const int* idx, const double* val,
                  sae_grads& g, bool deterministic) {
    g.resize_like(p);
    g.zero();
    const int d = p.d_model;
    double loss = 0;

    if (deterministic) {
        const int nchunk = std::min(B, 8);
        thread_local std::vector<sae_grads> part;
        thread_local std::vector<double> part_loss;
        part.resize(nchunk);
        part_loss.assign(nchunk, 0.0);
#pragma omp parallel
        {
            std::vector<double> r(d), xc(d);
#pragma omp for schedule(static)
            for (int c = 0; c < nchunk; ++c) {
                auto& pg = part[c];
                pg.resize_like(p);
                pg.zero();
                int lo = int(int64_t(B) * c / nchunk), hi = int(int64_t(B) * (c + 1) / nchunk);
                double l = 0;
                for (int b = lo; b < hi; ++b)
                    l += grad_one(p, x + size_t(b) * d, idx + size_t(b) * p.k, val + size_t(b) * p.k,
                                  2.0 / B, r.data(), xc.data(), pg);
                part_loss[c] = l;
            }
        }
        // reduce each entry over chunks in chunk order
        auto reduce = [&](std::vector<double> sae_grads::*field) {
            auto& dst = g.*field;
            const long n = dst.size();
#pragma omp parallel for schedule(static)
            for (long i = 0; i < n; ++i) {
                double s = 0;
                for (int c = 0; c < nchunk; ++c) s += (part[c].*field)[i];
                dst[i] = s;
            }
        };
        reduce(&sae_grads::w_enc);
        reduce(&sae_grads::w_dec);
        reduce(&sae_grads::b_pre);
        for (int c = 0; c < nchunk; ++c) loss += part_loss[c];
        return loss / B;
    }

#pragma omp parallel reduction(+ : loss)
    {
        sae_grads local;
        local.resize_like(p);
        local.zero();
        std::vector<double> r(d), xc(d);
#pragma omp for schedule(dynamic, 4)
        for (int b = 0; b < B; ++b)
            loss += grad_one(p, x + size_t(b) * d, idx + size_t(b) * p.k, val + size_t(b) * p.k, 2.0 / B,
                             r.data(), xc.data(), local);
        // merge order depends on thread timing
#pragma omp critical
        {
            add_into(g.w_enc, local.w_enc);
            add_into(g.w_dec, local.w_dec);
            add_into(g.b_pre, local.b_pre);
        }
    }
    return loss / B;
}

void feature_diff(const double* zu, const double* zv, int n, int F, bool signed_mode, double* g) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < F; ++i) {
        double s = 0;
        for (int q = 0; q < n; ++q) {
            double a = zu[size_t(q) * F + i], b = zv[size_t(q) * F + i];
            s += signed_mode ? a - b : std::fabs(a - b);
        }
        g[i] = s / n;
    }
}

}  // namespace par

}  // namespace lfs::kern
