#include "lfs/probe.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

namespace lfs {

std::vector<double> build_pair_features(const shard_set& shards, const layer_loc_pair& pair, int layer) {
    auto* a = shards.last_token(pair.m, layer);
    auto* b = shards.last_token(pair.n, layer);
    if (!a || !b)
        throw error("missing record: prompt " + std::to_string(a ? pair.n : pair.m) + " at layer " +
                    std::to_string(layer));
    std::vector<double> f(a->vec.begin(), a->vec.end());
    f.insert(f.end(), b->vec.begin(), b->vec.end());
    return f;
}

namespace {

double sigmoid(double x) { return x >= 0 ? 1 / (1 + std::exp(-x)) : std::exp(x) / (1 + std::exp(x)); }

}  // namespace

probe_result train_probe(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                         const probe_config& cfg, uint64_t seed) {
    if (x.size() != y.size()) throw error("probe: features and labels differ in count");
    if (x.size() < 10) throw error("probe: need at least 10 pairs");
    const size_t D = x[0].size();
    for (auto& r : x)
        if (r.size() != D) throw error("probe: ragged feature rows");
    auto [tr, te] = split_indices(x.size(), cfg.train_part, cfg.test_part, seed);
    int pos = 0;
    for (auto i : tr) pos += y[i] == 1;
    if (pos == 0 || pos == int(tr.size())) throw error("probe: single-class training data");

    probe_result res;
    res.mean.assign(D, 0.0);
    for (auto i : tr)
        for (size_t j = 0; j < D; ++j) res.mean[j] += x[i][j];
    for (auto& m : res.mean) m /= tr.size();
    double var = 0;
    for (auto i : tr)
        for (size_t j = 0; j < D; ++j) var += (x[i][j] - res.mean[j]) * (x[i][j] - res.mean[j]);
    res.scale = std::sqrt(var / (tr.size() * D)) + 1e-12;

    auto standardize = [&](const std::vector<size_t>& idx) {
        std::vector<std::vector<double>> z(idx.size(), std::vector<double>(D));
        for (size_t a = 0; a < idx.size(); ++a)
            for (size_t j = 0; j < D; ++j) z[a][j] = (x[idx[a]][j] - res.mean[j]) / res.scale;
        return z;
    };
    auto ztr = standardize(tr), zte = standardize(te);

    std::vector<double> w(D, 0.0), grad(D);
    double b = 0;
    const double n = tr.size();
    std::vector<double> hist;
    int it = 0;
    for (; it < cfg.max_iters; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double gb = 0, loss = 0;
        for (size_t a = 0; a < ztr.size(); ++a) {
            double s = b;
            for (size_t j = 0; j < D; ++j) s += w[j] * ztr[a][j];
            double p = sigmoid(s);
            int t = y[tr[a]];
            // log-loss in a form that stays finite for large |s|
            loss += std::max(s, 0.0) - s * t + std::log1p(std::exp(-std::fabs(s)));
            double e = p - t;
            gb += e;
            for (size_t j = 0; j < D; ++j) grad[j] += e * ztr[a][j];
        }
        double reg = 0;
        for (size_t j = 0; j < D; ++j) reg += w[j] * w[j];
        hist.push_back(loss / n + 0.5 * cfg.l2 * reg);
        if (int(hist.size()) > cfg.patience && hist[hist.size() - 1 - cfg.patience] - hist.back() < cfg.tol)
            break;
        for (size_t j = 0; j < D; ++j) w[j] -= cfg.learning_rate * (grad[j] / n + cfg.l2 * w[j]);
        b -= cfg.learning_rate * gb / n;
    }
    res.iterations = it;

    auto accuracy = [&](const std::vector<std::vector<double>>& z, const std::vector<size_t>& idx) {
        if (idx.empty()) return 0.0;
        int ok = 0;
        for (size_t a = 0; a < z.size(); ++a) {
            double s = b;
            for (size_t j = 0; j < D; ++j) s += w[j] * z[a][j];
            ok += int(s > 0) == y[idx[a]];
        }
        return double(ok) / idx.size();
    };
    res.train_accuracy = accuracy(ztr, tr);
    res.test_accuracy = accuracy(zte, te);
    res.weights = std::move(w);
    res.bias = b;
    return res;
}

std::vector<probe_result> rank_layers(const shard_set& shards, const std::vector<layer_loc_pair>& pairs,
                                      const std::vector<int>& layers, const probe_config& cfg,
                                      uint64_t seed) {
    if (pairs.empty()) throw error("rank_layers: empty pair set");
    if (layers.size() < 2) throw error("rank_layers: need at least 2 layers");
    auto present = shards.layers();
    for (int l : layers)
        if (!present.count(l)) throw error("layer missing: " + std::to_string(l));

    std::vector<std::vector<std::vector<double>>> feats(layers.size());
    std::vector<int> y;
    for (auto& p : pairs) y.push_back(p.label);
    for (size_t a = 0; a < layers.size(); ++a)
        for (auto& p : pairs) feats[a].push_back(build_pair_features(shards, p, layers[a]));

    std::vector<probe_result> out(layers.size());
    std::vector<std::exception_ptr> errs(layers.size());
    // probes are independent; results land by index so the order is fixed
#pragma omp parallel for schedule(dynamic)
    for (int a = 0; a < int(layers.size()); ++a) {
        try {
            out[a] = train_probe(feats[a], y, cfg, seed);
            out[a].layer_index = layers[a];
        } catch (...) {
            errs[a] = std::current_exception();
        }
    }
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    std::stable_sort(out.begin(), out.end(), [](const probe_result& a, const probe_result& b) {
        if (a.test_accuracy != b.test_accuracy) return a.test_accuracy > b.test_accuracy;
        return a.layer_index < b.layer_index;
    });
    return out;
}

}  // namespace lfs
