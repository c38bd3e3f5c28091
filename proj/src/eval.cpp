#include "lfs/eval.hpp"

#include <cmath>

#include "lfs/common.hpp"

namespace lfs {

slot_accuracy accuracy_and_std(const eval_set& s) {
    if (s.groups.empty()) throw error("accuracy_and_std: empty evalset");
    const size_t V = s.groups[0].predictions.size();
    if (V < 2) throw error("accuracy_and_std: groups need at least 2 variants");
    slot_accuracy r;
    r.slots.assign(V, 0.0);
    for (auto& g : s.groups) {
        if (g.predictions.size() != V) throw error("accuracy_and_std: ragged variant slots");
        for (size_t v = 0; v < V; ++v) r.slots[v] += g.predictions[v] == g.gold;
    }
    for (auto& a : r.slots) a /= s.groups.size();
    for (double a : r.slots) r.mean += a;
    r.mean /= V;
    double var = 0;
    for (double a : r.slots) var += (a - r.mean) * (a - r.mean);
    r.std = std::sqrt(var / V);
    return r;
}

double mean_pairwise_cosine(const eval_set& s) {
    if (s.groups.empty()) throw error("mean_pairwise_cosine: empty evalset");
    double total = 0;
    for (auto& g : s.groups) {
        const auto& e = g.embeddings;
        if (e.size() < 2) throw error("mean_pairwise_cosine: group " + std::to_string(g.group_id) +
                                      " has fewer than 2 embeddings");
        std::vector<double> norm(e.size());
        for (size_t a = 0; a < e.size(); ++a) {
            if (e[a].size() != e[0].size()) throw error("mean_pairwise_cosine: embedding size mismatch");
            double n2 = 0;
            for (double x : e[a]) n2 += x * x;
            if (n2 == 0) throw error("mean_pairwise_cosine: zero-norm embedding in group " +
                                     std::to_string(g.group_id));
            norm[a] = std::sqrt(n2);
        }
        double sum = 0;
        int pairs = 0;
        for (size_t a = 0; a < e.size(); ++a)
            for (size_t b = a + 1; b < e.size(); ++b) {
                double dot = 0;
                for (size_t j = 0; j < e[a].size(); ++j) dot += e[a][j] * e[b][j];
                sum += dot / (norm[a] * norm[b]);
                ++pairs;
            }
        total += sum / pairs;
    }
    return total / s.groups.size();
}

locality_report locality_delta(const metric& before, const metric& after, double tolerance) {
    if (before.kind != after.kind)
        throw error("locality_delta: metric kind mismatch (" + before.kind + " vs " + after.kind + ")");
    locality_report r;
    r.dataset = before.dataset;
    r.kind = before.kind;
    r.before = before.value;
    r.after = after.value;
    r.delta = after.value - before.value;
    r.flagged = r.delta < -tolerance;
    return r;
}

std::vector<sweep_row> sweep(const std::vector<double>& values, const std::function<sweep_point(double)>& fn) {
    if (values.size() < 2) throw error("sweep: need at least 2 values");
    std::vector<sweep_row> rows;
    for (double v : values) {
        sweep_row r;
        r.value = v;
        try {
            r.point = fn(v);
            r.ok = true;
        } catch (const std::exception& e) {
            r.error = e.what();
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace lfs
