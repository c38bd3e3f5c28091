#include "lfs/world.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace lfs {

std::vector<int> planted_world::consistency_features() const {
    std::vector<int> c = consistency_pos;
    c.insert(c.end(), consistency_neg.begin(), consistency_neg.end());
    return c;
}

planted_world generate_world(const world_config& cfg) {
    if (cfg.f_true <= cfg.d_model)
        throw error("f_true must exceed d_model: with F_true <= d_model there is no superposition");
    if (cfg.d_model <= 0) throw error("d_model must be positive");
    if (cfg.n_layers < 2) throw error("need at least 2 layers");
    if (cfg.signal_layer < 0 || cfg.signal_layer >= cfg.n_layers) throw error("signal_layer out of range");
    if (cfg.noise_sigma < 0) throw error("noise_sigma must be nonnegative");
    if (cfg.n_consistency < 1) throw error("need at least one consistency feature per side");
    if (cfg.slot_strength.size() < 2) throw error("need at least 2 paraphrase slots");
    int n_roles = 2 * cfg.n_consistency + 2 * cfg.n_evidence + 1;
    if (n_roles + cfg.n_nuisance + 3 > cfg.f_true) throw error("too few features for the planted roles");
    if (n_roles > cfg.d_model) throw error("planted roles exceed d_model; head cannot be solved");
    if (1 + cfg.n_nuisance + 2 > cfg.k_true) throw error("group coefficients exceed k_true");

    planted_world w;
    w.cfg = cfg;
    const int d = cfg.d_model, F = cfg.f_true;
    rng r(derive_seed(cfg.seed, "world"));
    w.dict.resize(size_t(F) * d);
    for (int j = 0; j < F; ++j) {
        double* c = w.dict.data() + size_t(j) * d;
        double s = 0;
        for (int i = 0; i < d; ++i) {
            c[i] = r.normal();
            s += c[i] * c[i];
        }
        s = std::sqrt(s);
        for (int i = 0; i < d; ++i) c[i] /= s;
    }

    // roles are taken greedily in permutation order, skipping features too coherent with a role
    // already taken; everything else is nuisance
    auto perm = r.permutation(F);
    std::vector<int> taken;
    std::vector<char> is_role(F, 0);
    size_t at = 0;
    auto take = [&](int n) {
        std::vector<int> v;
        for (; int(v.size()) < n && at < perm.size(); ++at) {
            int j = perm[at];
            bool ok = true;
            for (int q : taken) {
                double dot = 0;
                for (int i = 0; i < d; ++i) dot += w.column(j)[i] * w.column(q)[i];
                if (std::abs(dot) >= cfg.role_max_cos) ok = false;
            }
            if (!ok) continue;
            v.push_back(j);
            taken.push_back(j);
            is_role[j] = 1;
        }
        if (int(v.size()) < n) throw error("could not place planted roles under role_max_cos");
        return v;
    };
    w.consistency_pos = take(cfg.n_consistency);
    w.consistency_neg = take(cfg.n_consistency);
    w.evidence_pos = take(cfg.n_evidence);
    w.evidence_neg = take(cfg.n_evidence);
    w.domain_feature = take(1)[0];
    for (int j : perm)
        if (!is_role[j]) w.nuisance.push_back(j);

    // minimum-norm head with exact prescribed responses on the role features
    std::vector<int> roles;
    std::vector<double> target;
    for (int j : w.consistency_pos) roles.push_back(j), target.push_back(1.0);
    for (int j : w.consistency_neg) roles.push_back(j), target.push_back(-1.0);
    for (int j : w.evidence_pos) roles.push_back(j), target.push_back(cfg.evidence_weight);
    for (int j : w.evidence_neg) roles.push_back(j), target.push_back(-cfg.evidence_weight);
    roles.push_back(w.domain_feature), target.push_back(cfg.domain_weight);
    const int m = roles.size();
    Eigen::MatrixXd R(d, m);
    for (int a = 0; a < m; ++a)
        for (int i = 0; i < d; ++i) R(i, a) = w.column(roles[a])[i];
    Eigen::VectorXd s = Eigen::Map<Eigen::VectorXd>(target.data(), m);
    Eigen::VectorXd head = R * (R.transpose() * R).ldlt().solve(s);
    w.head.assign(head.data(), head.data() + d);
    return w;
}

paraphrase_group make_group(const planted_world& w, uint64_t group_id, int gold) {
    const auto& c = w.cfg;
    rng r(derive_seed(c.seed, "group", group_id));
    paraphrase_group g;
    g.group_id = group_id;
    g.gold_label = gold;
    g.stable = r.uniform() < c.p_stable;

    // stable groups: evidence agrees with gold. fragile groups: evidence points the other
    // way and only a strong enough consistency feature pulls the head back
    int x;
    double xc;
    if (g.stable) {
        x = r.pick(gold ? w.evidence_pos : w.evidence_neg);
        xc = r.uniform(c.stable_coef[0], c.stable_coef[1]);
    } else {
        x = r.pick(gold ? w.evidence_neg : w.evidence_pos);
        xc = r.uniform(c.distractor_coef[0], c.distractor_coef[1]);
    }
    int cf = r.pick(gold ? w.consistency_pos : w.consistency_neg);
    auto nn = r.sample(w.nuisance, c.n_nuisance);
    std::vector<double> nc(c.n_nuisance);
    for (auto& v : nc) v = r.uniform(c.nuisance_coef[0], c.nuisance_coef[1]);

    g.base_task_features.push_back({x, c.scale * xc});
    for (size_t s = 0; s < c.slot_strength.size(); ++s) {
        sparse_coeffs v;
        v.push_back({x, c.scale * xc});
        v.push_back({w.domain_feature, c.scale * r.uniform(c.domain_coef[0], c.domain_coef[1])});
        if (!g.stable) {
            auto [lo, hi] = c.slot_strength[s];
            v.push_back({cf, c.scale * r.uniform(lo, hi)});
        }
        for (int a = 0; a < c.n_nuisance; ++a)
            v.push_back({nn[a], c.scale * nc[a] * r.uniform(1 - c.nuisance_jitter, 1 + c.nuisance_jitter)});
        g.variants.push_back(std::move(v));
    }
    return g;
}

std::vector<double> render(const planted_world& w, std::span<const double> dense, double sigma, rng& r) {
    const int d = w.cfg.d_model;
    if (dense.size() != size_t(w.cfg.f_true)) throw error("coefficient length mismatch");
    std::vector<double> h(d, 0.0);
    for (int j = 0; j < w.cfg.f_true; ++j) {
        if (dense[j] == 0) continue;
        const double* col = w.column(j);
        for (int i = 0; i < d; ++i) h[i] += dense[j] * col[i];
    }
    if (sigma > 0)
        for (auto& x : h) x += sigma * r.normal();
    return h;
}

std::vector<double> render(const planted_world& w, const sparse_coeffs& c, double sigma, rng& r) {
    const int d = w.cfg.d_model;
    std::vector<double> h(d, 0.0);
    for (auto [j, a] : c) {
        if (j < 0 || j >= w.cfg.f_true) throw error("coefficient index out of range");
        const double* col = w.column(j);
        for (int i = 0; i < d; ++i) h[i] += a * col[i];
    }
    if (sigma > 0)
        for (auto& x : h) x += sigma * r.normal();
    return h;
}

std::vector<activation_record> emit_activations(const planted_world& w, const paraphrase_group& g) {
    const auto& c = w.cfg;
    rng r(derive_seed(c.seed, "emit", g.group_id));
    std::vector<activation_record> out;
    for (size_t s = 0; s < g.variants.size(); ++s) {
        if (int(g.variants[s].size()) > c.k_true) throw error("variant has more than k_true nonzeros");
        for (int layer = 0; layer < c.n_layers; ++layer) {
            std::vector<double> h;
            if (layer == c.signal_layer) {
                h = render(w, g.variants[s], c.noise_sigma, r);
            } else {
                // task-domain feature plus fresh nuisance; nothing that depends on consistency
                sparse_coeffs v{{w.domain_feature, c.scale * r.uniform(c.domain_coef[0], c.domain_coef[1])}};
                for (int j : r.sample(w.nuisance, c.n_nuisance))
                    v.push_back({j, c.scale * r.uniform(c.nuisance_coef[0], c.nuisance_coef[1])});
                h = render(w, v, c.noise_sigma, r);
            }
            activation_record rec;
            rec.prompt_id = prompt_id_of(g.group_id, s);
            rec.layer_index = layer;
            rec.token_position = 0;
            rec.vec.assign(h.begin(), h.end());
            out.push_back(std::move(rec));
        }
    }
    return out;
}

double head_score(const planted_world& w, std::span<const double> h) {
    if (h.size() != w.head.size()) throw error("head: dimension mismatch");
    double s = 0;
    for (size_t i = 0; i < h.size(); ++i) s += w.head[i] * h[i];
    return s;
}

int head_predict(const planted_world& w, std::span<const double> h) {
    return head_score(w, h) > w.threshold ? 1 : 0;
}

int head_predict(const planted_world& w, std::span<const float> h) {
    std::vector<double> hd(h.begin(), h.end());
    return head_predict(w, std::span<const double>(hd));
}

std::vector<double> open_sample(const planted_world& w, rng& r) {
    const auto& c = w.cfg;
    int m = c.open_min_features + int(r.below(c.open_max_features - c.open_min_features + 1));
    std::vector<int> all(c.f_true);
    for (int j = 0; j < c.f_true; ++j) all[j] = j;
    sparse_coeffs v;
    for (int j : r.sample(all, m)) v.push_back({j, c.scale * r.uniform(c.open_coef[0], c.open_coef[1])});
    return render(w, v, c.noise_sigma, r);
}

ood_item make_ood_item(const planted_world& w, const std::vector<int>& evidence_pool, int domain,
                       const std::vector<int>& nuisance_pool, rng& r) {
    const auto& c = w.cfg;
    if (evidence_pool.empty()) throw error("ood: empty evidence pool");
    if (int(nuisance_pool.size()) < c.n_nuisance) throw error("ood: nuisance pool too small");
    // same shape as a stable in-domain item: evidence, a domain feature, shared-style nuisance
    int x = r.pick(evidence_pool);
    ood_item it;
    it.gold = std::find(w.evidence_pos.begin(), w.evidence_pos.end(), x) != w.evidence_pos.end() ? 1 : 0;
    sparse_coeffs v{{x, c.scale * r.uniform(c.distractor_coef[0], c.distractor_coef[1])},
                    {domain, c.scale * r.uniform(c.domain_coef[0], c.domain_coef[1])}};
    for (int j : r.sample(nuisance_pool, c.n_nuisance))
        v.push_back({j, c.scale * r.uniform(c.nuisance_coef[0], c.nuisance_coef[1])});
    it.h = render(w, v, c.noise_sigma, r);
    return it;
}

}  // namespace lfs
