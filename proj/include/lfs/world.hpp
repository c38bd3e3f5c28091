#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "lfs/common.hpp"
#include "lfs/store.hpp"

namespace lfs {

using range = std::array<double, 2>;

struct world_config {
    int d_model = 64;
    int f_true = 256;
    int k_true = 8;
    int n_layers = 6;
    int signal_layer = 3;
    double noise_sigma = 0.01;
    uint64_t seed = 7;

    // planted roles, counted per label side
    int n_consistency = 2;
    int n_evidence = 2;
    double evidence_weight = 1.2;  // head response to surface evidence (consistency features get 1)
    double domain_weight = 0.1;    // head response to the task-domain feature
    double role_max_cos = 0.15;    // planted role features are pairwise less coherent than this

    double scale = 0.6;  // multiplies every planted coefficient
    double p_stable = 0.3;
    range stable_coef{1.2, 1.6};
    range distractor_coef{0.8, 1.2};
    range domain_coef{0.3, 1.0};
    int n_nuisance = 2;
    range nuisance_coef{0.2, 0.4};
    double nuisance_jitter = 0.2;
    // consistency-feature strength per paraphrase slot; slot 0 is the original phrasing
    std::vector<range> slot_strength{{1.8, 2.2}, {1.6, 1.9}, {0.7, 0.9}, {0.6, 0.8}, {0.5, 0.7}};

    int open_min_features = 1, open_max_features = 2;
    range open_coef{0.8, 1.2};
};

struct planted_world {
    world_config cfg;
    std::vector<double> dict;  // column j at [j*d, j*d+d), unit norm
    std::vector<int> consistency_pos, consistency_neg;
    std::vector<int> evidence_pos, evidence_neg;
    int domain_feature = -1;
    std::vector<int> nuisance;
    std::vector<double> head;
    double threshold = 0;

    const double* column(int j) const { return dict.data() + size_t(j) * cfg.d_model; }
    std::vector<int> consistency_features() const;
};

using sparse_coeffs = std::vector<std::pair<int, double>>;

struct paraphrase_group {
    uint64_t group_id = 0;
    int gold_label = 0;
    bool stable = false;  // no consistency feature involved; surface evidence already agrees with gold
    sparse_coeffs base_task_features;
    std::vector<sparse_coeffs> variants;  // full signal-layer coefficients per slot
};

planted_world generate_world(const world_config& cfg);

// deterministic in (world seed, group_id)
paraphrase_group make_group(const planted_world& w, uint64_t group_id, int gold);

// dict * coeffs + noise
std::vector<double> render(const planted_world& w, std::span<const double> dense_coeffs, double sigma,
                           rng& r);
std::vector<double> render(const planted_world& w, const sparse_coeffs& c, double sigma, rng& r);

inline uint64_t prompt_id_of(uint64_t group_id, int slot) { return (group_id << 8) | uint64_t(slot); }
inline uint64_t group_of(uint64_t prompt_id) { return prompt_id >> 8; }
inline int slot_of(uint64_t prompt_id) { return int(prompt_id & 0xff); }

// one single-token record per (variant, layer). noise and non-signal content are
// drawn from a stream keyed by group_id
std::vector<activation_record> emit_activations(const planted_world& w, const paraphrase_group& g);

int head_predict(const planted_world& w, std::span<const double> h);
int head_predict(const planted_world& w, std::span<const float> h);
double head_score(const planted_world& w, std::span<const double> h);

// generic activations: a few random dictionary features
std::vector<double> open_sample(const planted_world& w, rng& r);

// an out-of-domain item: one surface-evidence feature decides the label; an unrelated domain
// feature and nuisance fill the rest
struct ood_item {
    std::vector<double> h;
    int gold = 0;
};
ood_item make_ood_item(const planted_world& w, const std::vector<int>& evidence_pool, int domain,
                       const std::vector<int>& nuisance_pool, rng& r);

}  // namespace lfs
