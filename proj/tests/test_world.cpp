#include <cmath>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "lfs/pipeline.hpp"
#include "lfs/world.hpp"

using namespace lfs;

TEST_CASE("default world: 256 unit columns, deterministic") {
    world_config c;
    c.seed = 7;
    auto w = generate_world(c);
    REQUIRE(w.dict.size() == 256u * 64);
    for (int j = 0; j < 256; ++j) {
        double s = 0;
        for (int i = 0; i < 64; ++i) s += w.column(j)[i] * w.column(j)[i];
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
    auto w2 = generate_world(c);
    CHECK(w2.dict == w.dict);
    CHECK(w2.head == w.head);
    c.seed = 8;
    CHECK(generate_world(c).dict != w.dict);
}

TEST_CASE("no superposition is rejected") {
    world_config c;
    c.f_true = 32;
    CHECK_THROWS_WITH(generate_world(c), doctest::Contains("superposition"));
    c.f_true = 64;
    CHECK_THROWS(generate_world(c));
}

TEST_CASE("roles are disjoint, low-coherence, and the head answers them exactly") {
    world_config c;
    auto w = generate_world(c);
    std::vector<int> roles = w.consistency_features();
    roles.insert(roles.end(), w.evidence_pos.begin(), w.evidence_pos.end());
    roles.insert(roles.end(), w.evidence_neg.begin(), w.evidence_neg.end());
    roles.push_back(w.domain_feature);
    std::set<int> uniq(roles.begin(), roles.end());
    CHECK(uniq.size() == roles.size());
    CHECK(w.nuisance.size() + roles.size() == 256);
    for (int a : roles)
        for (int b : roles)
            if (a != b) {
                double dot = 0;
                for (int i = 0; i < 64; ++i) dot += w.column(a)[i] * w.column(b)[i];
                CHECK(std::fabs(dot) < c.role_max_cos);
            }
    auto resp = [&](int j) {
        std::vector<double> h(w.column(j), w.column(j) + 64);
        return head_score(w, h);
    };
    for (int j : w.consistency_pos) CHECK(resp(j) == doctest::Approx(1.0));
    for (int j : w.consistency_neg) CHECK(resp(j) == doctest::Approx(-1.0));
    for (int j : w.evidence_pos) CHECK(resp(j) == doctest::Approx(c.evidence_weight));
    for (int j : w.evidence_neg) CHECK(resp(j) == doctest::Approx(-c.evidence_weight));
    CHECK(resp(w.domain_feature) == doctest::Approx(c.domain_weight));
}

TEST_CASE("render: single feature, zero, and length mismatch") {
    world_config c;
    auto w = generate_world(c);
    rng r(1);
    std::vector<double> e(256, 0.0);
    e[17] = 1.0;
    auto h = render(w, e, 0.0, r);
    for (int i = 0; i < 64; ++i) CHECK(h[i] == w.column(17)[i]);
    auto z = render(w, std::vector<double>(256, 0.0), 0.0, r);
    for (double x : z) CHECK(x == 0.0);
    CHECK_THROWS_WITH(render(w, std::vector<double>(255, 0.0), 0.0, r), doctest::Contains("length mismatch"));
}

TEST_CASE("noiseless emission is dict times coeffs at the signal layer") {
    world_config c;
    c.noise_sigma = 0;
    auto w = generate_world(c);
    auto g = make_group(w, 42, 1);
    auto recs = emit_activations(w, g);
    REQUIRE(recs.size() == g.variants.size() * size_t(c.n_layers));
    for (size_t s = 0; s < g.variants.size(); ++s) {
        std::vector<double> dense(256, 0.0);
        for (auto [j, a] : g.variants[s]) dense[j] += a;
        std::vector<double> want(64, 0.0);
        for (int j = 0; j < 256; ++j)
            for (int i = 0; i < 64; ++i) want[i] += dense[j] * w.column(j)[i];
        auto& rec = recs[s * c.n_layers + c.signal_layer];
        CHECK(rec.prompt_id == prompt_id_of(42, int(s)));
        CHECK(rec.layer_index == c.signal_layer);
        for (int i = 0; i < 64; ++i) CHECK(rec.vec[i] == doctest::Approx(want[i]).epsilon(1e-6));
    }
}

TEST_CASE("emission rejects coefficient vectors beyond k_true") {
    world_config c;
    auto w = generate_world(c);
    auto g = make_group(w, 1, 0);
    for (int j = 0; j < 9; ++j) g.variants[0].push_back({w.nuisance[j], 0.1});
    CHECK_THROWS(emit_activations(w, g));
}

TEST_CASE("groups: shared task coefficients and deterministic per id") {
    world_config c;
    auto w = generate_world(c);
    for (uint64_t id = 0; id < 50; ++id) {
        auto g = make_group(w, id, int(id % 2));
        auto [x, a] = g.base_task_features[0];
        for (auto& v : g.variants) {
            bool found = false;
            for (auto [j, b] : v)
                if (j == x) found = (b == a);
            CHECK(found);
            CHECK(int(v.size()) <= c.k_true);
        }
        auto again = make_group(w, id, int(id % 2));
        CHECK(again.variants == g.variants);
    }
}

TEST_CASE("a fragile group has at least one variant flipping the label") {
    world_config c;
    c.noise_sigma = 0;
    auto w = generate_world(c);
    int fragile = 0;
    for (uint64_t id = 0; id < 40; ++id) {
        auto g = make_group(w, id, int(id % 2));
        if (g.stable) continue;
        ++fragile;
        rng r(0);
        std::set<int> labels;
        for (auto& v : g.variants) labels.insert(head_predict(w, render(w, v, 0.0, r)));
        CHECK(labels.size() == 2);
    }
    CHECK(fragile > 10);
}

TEST_CASE("head_predict examples") {
    planted_world w;
    w.cfg.d_model = 4;
    w.head = {1, 0, 0, 0};
    w.threshold = 0;
    CHECK(head_predict(w, std::vector<double>{2, 0, 0, 0}) == 1);
    CHECK(head_predict(w, std::vector<double>{-1, 0, 0, 0}) == 0);
    CHECK_THROWS_WITH(head_predict(w, std::vector<double>{1, 0}), doctest::Contains("dimension mismatch"));
}

TEST_CASE("probes on non-signal layers sit at chance; the signal layer is decodable") {
    auto c = default_config(7);
    c.data.n_layer_pairs = 1000;
    c.data.n_open = 1;
    c.data.n_contrastive = 1;
    c.data.n_eval_groups = 1;
    auto ds = generate_dataset(c);
    auto ranking = rank_layers(ds.dev, ds.dl, all_layers(c), c.probe, 3);
    REQUIRE(ranking.size() == 6);
    CHECK(ranking.front().layer_index == c.world.signal_layer);
    for (auto& r : ranking) {
        if (r.layer_index == c.world.signal_layer) {
            CHECK(r.test_accuracy > 0.8);
        } else {
            // 200 held-out pairs
            CHECK(std::fabs(r.test_accuracy - 0.5) <= 0.07);
        }
    }
}

TEST_CASE("dataset pools are disjoint and balanced") {
    auto c = default_config(3);
    c.data.n_open = 10;
    c.data.n_layer_pairs = 40;
    c.data.n_contrastive = 30;
    c.data.n_eval_groups = 12;
    auto ds = generate_dataset(c);
    CHECK(ds.dl.size() == 40);
    CHECK(ds.df.size() == 30);
    CHECK(ds.bench_groups.size() == 12);
    CHECK(ds.open.size() == 60);
    int cell[2][2] = {};
    for (auto& p : ds.dl) {
        CHECK(slot_of(p.m) == 0);
        CHECK(group_of(p.m) == group_of(p.n));
        CHECK((group_of(p.m) >> 32) == pool_layerloc);
        cell[group_of(p.m) % 2][p.label]++;
    }
    for (auto& row : cell)
        for (int n : row) CHECK(n == 10);
    for (auto& p : ds.df) {
        CHECK((group_of(p.u) >> 32) == pool_contrastive);
        CHECK(p.u != p.v);
        // u answered right, v wrong
        auto* u = ds.dev.last_token(p.u, uint16_t(c.world.signal_layer));
        auto* v = ds.dev.last_token(p.v, uint16_t(c.world.signal_layer));
        REQUIRE(u);
        REQUIRE(v);
        int gold = int(group_of(p.u) & 0xffffffff) % 2;
        CHECK(head_predict(ds.world, std::span<const float>(u->vec)) == gold);
        CHECK(head_predict(ds.world, std::span<const float>(v->vec)) != gold);
    }
    auto again = generate_dataset(c);
    CHECK(again.dev.records == ds.dev.records);
    CHECK(again.open == ds.open);
}

TEST_CASE("ood items are labelled by their evidence feature") {
    world_config c;
    auto w = generate_world(c);
    rng r(5);
    std::vector<int> ev = w.evidence_pos;
    ev.insert(ev.end(), w.evidence_neg.begin(), w.evidence_neg.end());
    std::vector<int> nu(w.nuisance.begin() + 1, w.nuisance.end());
    int right = 0;
    for (int i = 0; i < 200; ++i) {
        auto it = make_ood_item(w, ev, w.nuisance[0], nu, r);
        right += head_predict(w, it.h) == it.gold;
    }
    CHECK(right >= 190);
    CHECK_THROWS(make_ood_item(w, {}, w.nuisance[0], nu, r));
}
