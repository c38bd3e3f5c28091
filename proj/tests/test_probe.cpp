#include <algorithm>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "lfs/probe.hpp"

using namespace lfs;

namespace {

// every prompt id gets one record per listed layer, with the same vector on each layer
shard_set flat_shards(const std::vector<std::vector<float>>& vecs, const std::vector<int>& layers) {
    shard_set s;
    for (size_t i = 0; i < vecs.size(); ++i)
        for (int l : layers) s.add({uint64_t(i), uint16_t(l), 0, vecs[i]});
    return s;
}

}  // namespace

TEST_CASE("pair features concatenate last-token states") {
    shard_set s;
    s.add({1, 2, 0, {9.f, 9.f}});
    s.add({1, 2, 1, {1.f, 2.f}});
    s.add({2, 2, 0, {3.f, 4.f}});
    CHECK(build_pair_features(s, {1, 2, 1}, 2) == std::vector<double>{1, 2, 3, 4});
    CHECK_THROWS_WITH(build_pair_features(s, {5, 2, 1}, 2), doctest::Contains("missing record"));
    CHECK_THROWS_WITH(build_pair_features(s, {1, 2, 1}, 3), doctest::Contains("missing record"));
}

TEST_CASE("pair features always have 2 d entries") {
    rng r(1);
    std::vector<std::vector<float>> v(20, std::vector<float>(7));
    for (auto& x : v)
        for (auto& y : x) y = float(r.normal());
    auto s = flat_shards(v, {0});
    for (int t = 0; t < 30; ++t) {
        layer_loc_pair p{r.below(20), r.below(20), 0};
        CHECK(build_pair_features(s, p, 0).size() == 14);
    }
}

TEST_CASE("separable toy set reaches test accuracy 1") {
    rng r(2);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 200; ++i) {
        auto v = random_vec(r, 6);
        v[0] += v[0] < 0 ? -0.5 : 0.5;  // margin
        x.push_back(v);
        y.push_back(v[0] > 0);
    }
    auto res = train_probe(x, y, probe_config{}, 3);
    CHECK(res.test_accuracy == 1.0);
    CHECK(res.train_accuracy == 1.0);
}

TEST_CASE("shuffled labels stay near chance") {
    rng r(4);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 200; ++i) {
        x.push_back(random_vec(r, 8));
        y.push_back(i % 2);
    }
    auto perm = r.permutation(200);
    std::vector<int> shuffled(200);
    for (int i = 0; i < 200; ++i) shuffled[i] = y[perm[i]];
    auto res = train_probe(x, shuffled, probe_config{}, 5);
    CHECK(std::fabs(res.test_accuracy - 0.5) <= 0.12);
}

TEST_CASE("probe preconditions") {
    std::vector<std::vector<double>> x(9, std::vector<double>{1.0});
    std::vector<int> y{0, 1, 0, 1, 0, 1, 0, 1, 0};
    CHECK_THROWS_WITH(train_probe(x, y, probe_config{}, 1), doctest::Contains("at least 10"));
    x.resize(20, std::vector<double>{1.0});
    CHECK_THROWS_WITH(train_probe(x, std::vector<int>(20, 1), probe_config{}, 1),
                      doctest::Contains("single-class"));
}

TEST_CASE("probe is deterministic per seed") {
    rng r(6);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 100; ++i) {
        x.push_back(random_vec(r, 4));
        y.push_back(x.back()[1] + 0.5 * r.normal() > 0);
    }
    auto a = train_probe(x, y, probe_config{}, 9), b = train_probe(x, y, probe_config{}, 9);
    CHECK(a.weights == b.weights);
    CHECK(a.test_accuracy == b.test_accuracy);
}

TEST_CASE("rank_layers: ties go to the lower layer, output is a permutation") {
    rng r(7);
    std::vector<std::vector<float>> v(60, std::vector<float>(3));
    for (auto& x : v)
        for (auto& y : x) y = float(r.normal());
    auto s = flat_shards(v, {4, 1, 3});
    std::vector<layer_loc_pair> pairs;
    for (int i = 0; i < 30; ++i) pairs.push_back({uint64_t(2 * i), uint64_t(2 * i + 1), i % 2});
    auto ranking = rank_layers(s, pairs, {4, 1, 3}, probe_config{}, 1);
    std::vector<int> order;
    for (auto& p : ranking) order.push_back(p.layer_index);
    CHECK(order == std::vector<int>{1, 3, 4});
    auto again = rank_layers(s, pairs, {4, 1, 3}, probe_config{}, 1);
    CHECK(again.front().layer_index == ranking.front().layer_index);
}

TEST_CASE("rank_layers errors") {
    std::vector<std::vector<float>> v(30, std::vector<float>{1.f, 2.f});
    auto s = flat_shards(v, {0, 1});
    std::vector<layer_loc_pair> pairs;
    for (int i = 0; i < 15; ++i) pairs.push_back({uint64_t(2 * i), uint64_t(2 * i + 1), i % 2});
    CHECK_THROWS_WITH(rank_layers(s, pairs, {0, 1, 2}, probe_config{}, 1), doctest::Contains("layer missing"));
    CHECK_THROWS_WITH(rank_layers(s, {}, {0, 1}, probe_config{}, 1), doctest::Contains("empty pair set"));
}
