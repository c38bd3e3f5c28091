#include <benchmark/benchmark.h>

#include <cmath>

#include "lfs/kernels.hpp"

using namespace lfs;

namespace {

sae_params bench_sae(int d, int F, int k) {
    rng r(1);
    sae_params p;
    p.d_model = d, p.F = F, p.k = k;
    p.w_enc.resize(size_t(F) * d);
    p.w_dec.resize(size_t(F) * d);
    p.b_pre.assign(d, 0.0);
    for (auto& x : p.w_enc) x = r.normal() / std::sqrt(double(d));
    for (auto& x : p.w_dec) x = r.normal() / std::sqrt(double(d));
    return p;
}

std::vector<double> batch(int B, int d) {
    rng r(2);
    std::vector<double> x(size_t(B) * d);
    for (auto& v : x) v = r.normal();
    return x;
}

template <bool Par>
void bm_encode(benchmark::State& st) {
    const int B = int(st.range(0)), d = 64, F = 256, k = 8;
    auto p = bench_sae(d, F, k);
    auto x = batch(B, d);
    std::vector<int> idx(size_t(B) * k);
    std::vector<double> val(size_t(B) * k);
    for (auto _ : st) {
        if constexpr (Par)
            kern::par::encode_batch(p, x.data(), B, idx.data(), val.data());
        else
            kern::ref::encode_batch(p, x.data(), B, idx.data(), val.data());
        benchmark::DoNotOptimize(val.data());
    }
    st.SetItemsProcessed(st.iterations() * B);
}

template <bool Par, bool Det>
void bm_grad(benchmark::State& st) {
    const int B = int(st.range(0)), d = 64, F = 256, k = 8;
    auto p = bench_sae(d, F, k);
    auto x = batch(B, d);
    std::vector<int> idx(size_t(B) * k);
    std::vector<double> val(size_t(B) * k);
    kern::ref::encode_batch(p, x.data(), B, idx.data(), val.data());
    sae_grads g;
    for (auto _ : st) {
        double l;
        if constexpr (Par)
            l = kern::par::recon_grad(p, x.data(), B, idx.data(), val.data(), g, Det);
        else
            l = kern::ref::recon_grad(p, x.data(), B, idx.data(), val.data(), g);
        benchmark::DoNotOptimize(l);
    }
    st.SetItemsProcessed(st.iterations() * B);
}

template <bool Par>
void bm_diff(benchmark::State& st) {
    const int n = int(st.range(0)), F = 256;
    auto zu = batch(n, F), zv = batch(n, F);
    std::vector<double> g(F);
    for (auto _ : st) {
        if constexpr (Par)
            kern::par::feature_diff(zu.data(), zv.data(), n, F, false, g.data());
        else
            kern::ref::feature_diff(zu.data(), zv.data(), n, F, false, g.data());
        benchmark::DoNotOptimize(g.data());
    }
}

}  // namespace

BENCHMARK(bm_encode<false>)->Arg(64)->Arg(4096);
BENCHMARK(bm_encode<true>)->Arg(64)->Arg(4096);
BENCHMARK(bm_grad<false, true>)->Arg(64)->Arg(4096);
BENCHMARK(bm_grad<true, true>)->Arg(64)->Arg(4096);
BENCHMARK(bm_grad<true, false>)->Arg(64)->Arg(4096);
BENCHMARK(bm_diff<false>)->Arg(500);
BENCHMARK(bm_diff<true>)->Arg(500);

BENCHMARK_MAIN();
