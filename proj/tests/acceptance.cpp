// acceptance run: one PASS/FAIL line per primary criterion.
// usage: acceptance <path to lfsteer>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>

#include "helpers.hpp"
#include "lfs/pipeline.hpp"
#include "oracles.hpp"

using namespace lfs;
namespace fs = std::filesystem;

namespace {

using clk = std::chrono::steady_clock;
double since(clk::time_point t0) { return std::chrono::duration<double>(clk::now() - t0).count(); }

int failures = 0;

void verdict(int n, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s [%d] %s: %s\n", pass ? "PASS" : "FAIL", n, name.c_str(), detail.c_str());
    std::fflush(stdout);
    failures += !pass;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string fmt(const char* f, auto... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

template <class F>
void guarded(int n, const std::string& name, F&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        verdict(n, name, false, std::string("threw: ") + e.what());
    }
}

// ---- oracles ----

void oracle_equivalence() {
    auto t0 = clk::now();
    std::vector<std::string> bad;
    rng r(1);

    int topk_mismatch = 0;
    for (int t = 0; t < 1000; ++t) {
        int n = 1 + int(r.below(300));
        int k = int(r.below(n + 1));
        std::vector<double> v(n);
        for (auto& x : v) x = r.uniform() < 0.3 ? double(int(r.below(5))) : r.normal();
        topk_mismatch += topk(v, k) != oracle::topk(v, k);
    }
    if (topk_mismatch) bad.push_back(fmt("topk %d/1000", topk_mismatch));

    // encode/decode: same support, values within 1e-6 relative
    auto p = random_sae(64, 256, 8, 2);
    double worst_enc = 0, worst_dec = 0;
    int support_mismatch = 0;
    for (int t = 0; t < 500; ++t) {
        auto h = random_vec(r, 64);
        auto z = encode(p, h), zo = oracle::encode(p, h);
        for (int i = 0; i < 256; ++i) {
            if ((z[i] != 0) != (zo[i] != 0)) ++support_mismatch;
            if (zo[i] != 0) worst_enc = std::max(worst_enc, std::fabs(z[i] - zo[i]) / std::fabs(zo[i]));
        }
        auto hh = decode(p, z), ho = oracle::decode(p, zo);
        for (int j = 0; j < 64; ++j)
            worst_dec = std::max(worst_dec, std::fabs(hh[j] - ho[j]) / std::max(std::fabs(ho[j]), 1e-12));
    }
    if (support_mismatch || worst_enc > 1e-6 || worst_dec > 1e-6)
        bad.push_back(fmt("encode/decode support %d rel %.2g/%.2g", support_mismatch, worst_enc, worst_dec));

    // avg_feature_diff: loop over pairs, exact
    {
        shard_set s;
        std::vector<contrastive_pair> pairs;
        for (int i = 0; i < 200; ++i) {
            for (int q = 0; q < 2; ++q) {
                auto v = random_vec(r, 64);
                s.add({uint64_t(2 * i + q), 3, 0, std::vector<float>(v.begin(), v.end())});
            }
            pairs.push_back({uint64_t(2 * i), uint64_t(2 * i + 1)});
        }
        for (auto mode : {diff_mode::absolute, diff_mode::signed_diff}) {
            auto g = avg_feature_diff(p, s, pairs, 3, mode);
            std::vector<double> want(256, 0.0);
            for (auto& q : pairs) {
                auto zu = oracle::encode(p, std::vector<double>(s.last_token(q.u, 3)->vec.begin(),
                                                                 s.last_token(q.u, 3)->vec.end()));
                auto zv = oracle::encode(p, std::vector<double>(s.last_token(q.v, 3)->vec.begin(),
                                                                 s.last_token(q.v, 3)->vec.end()));
                for (int i = 0; i < 256; ++i)
                    want[i] += mode == diff_mode::absolute ? std::fabs(zu[i] - zv[i]) : zu[i] - zv[i];
            }
            for (auto& x : want) x /= double(pairs.size());
            if (g != want) {
                double m = 0;
                for (int i = 0; i < 256; ++i) m = std::max(m, std::fabs(g[i] - want[i]));
                bad.push_back(fmt("avg_feature_diff max diff %.3g", m));
            }
        }
    }

    // steer_features: exact
    int steer_mismatch = 0;
    for (int t = 0; t < 1000; ++t) {
        auto z = encode(p, random_vec(r, 64));
        steering_spec sp;
        sp.bias = random_vec(r, 256);
        for (int i = 0; i < 256; ++i)
            if (r.uniform() < 0.1) sp.indices.push_back(i);
        sp.strength = 50 * r.uniform();
        steer_mismatch += steer_features(z, sp) != oracle::steer(z, sp);
    }
    if (steer_mismatch) bad.push_back(fmt("steer_features %d/1000", steer_mismatch));

    // metric ops: 1e-9
    double worst_metric = 0;
    for (int t = 0; t < 200; ++t) {
        eval_set es;
        int G = 1 + int(r.below(60)), V = 2 + int(r.below(6));
        for (int g = 0; g < G; ++g) {
            eval_group e{uint64_t(g), int(r.below(2)), {}, {}};
            for (int v = 0; v < V; ++v) {
                e.predictions.push_back(int(r.below(2)));
                e.embeddings.push_back(random_vec(r, 16));
            }
            es.groups.push_back(e);
        }
        auto a = accuracy_and_std(es), ao = oracle::accuracy(es);
        worst_metric = std::max({worst_metric, std::fabs(a.mean - ao.mean), std::fabs(a.std - ao.std),
                                 std::fabs(mean_pairwise_cosine(es) - oracle::pairwise_cosine(es))});
    }
    if (worst_metric > 1e-9) bad.push_back(fmt("metrics diff %.3g", worst_metric));

    double secs = since(t0);
    if (secs >= 60) bad.push_back(fmt("runtime %.1fs", secs));
    std::string detail = bad.empty() ? fmt("topk, encode/decode (rel %.1e), avg_feature_diff, steer, metrics (%.1e) in %.2fs",
                                           std::max(worst_enc, worst_dec), worst_metric, secs)
                                     : "";
    for (auto& b : bad) detail += b + "; ";
    verdict(1, "oracle equivalence", bad.empty(), detail);
}

void gradient_check() {
    auto t0 = clk::now();
    double worst = 0;
    int checked = 0, skipped = 0;
    for (int inst = 0; inst < 20; ++inst) {
        auto p = random_sae(8, 16, 4, 1000 + inst);
        rng r(2000 + inst);
        auto res = oracle::grad_check(p, random_vec(r, 8 * 8), 8);
        worst = std::max(worst, res.worst);
        checked += res.checked;
        skipped += res.skipped;
    }
    double secs = since(t0);
    verdict(2, "gradient check", worst < 1e-3 && secs < 60 && checked > 0,
            fmt("max rel error %.2e over %d coordinates (%d on topk kinks skipped), %.2fs", worst, checked, skipped,
                secs));
}

// ---- pipeline runs ----

struct seed_run {
    uint64_t seed = 0;
    pipeline_run run;
    double train_secs = 0;
    std::vector<sweep_row> t_sweep, alpha_sweep;
    std::map<std::string, std::vector<ablation_row>> ablations;
};

seed_run run_seed(uint64_t seed) {
    seed_run s;
    s.seed = seed;
    auto c = default_config(seed);
    auto t0 = clk::now();
    s.run = run_pipeline(c);
    s.train_secs = since(t0);
    auto& d = s.run.data;
    s.t_sweep = sweep_param(c, d.world, d.bench, d.bench_groups, s.run.sae.params, s.run.located, "t",
                            default_sweep_values("t"));
    s.alpha_sweep = sweep_param(c, d.world, d.bench, d.bench_groups, s.run.sae.params, s.run.located, "alpha",
                                default_sweep_values("alpha"));
    for (auto& m : c.ablate.modes) s.ablations[m] = ablate(c, d, s.run.sae.params, s.run.located, m, c.ablate.seed);
    std::printf("  seed %llu: layer %d, |I| %zu, acc %.3f -> %.3f, std %.3f -> %.3f, ood %+.4f (%.1fs)\n",
                (unsigned long long)seed, s.run.layer, s.run.located.spec.indices.size(), s.run.base.acc.mean,
                s.run.steered.acc.mean, s.run.base.acc.std, s.run.steered.acc.std, s.run.ood.loc.delta,
                since(t0));
    std::fflush(stdout);
    return s;
}

void dictionary_recovery(const seed_run& s) {
    auto c = default_config(s.seed);
    int n = 0;
    auto rows = open_rows(s.run.data.open, s.run.layer, n);
    double nmse = normalized_mse(s.run.sae.params, rows, n);
    double mmc = mean_max_cosine(s.run.data.world, s.run.sae.params);
    int steps = s.run.sae.report.steps_run;
    verdict(3, "dictionary recovery", nmse < 0.05 && mmc > 0.9 && steps <= 5000 && s.train_secs < 600,
            fmt("seed %llu: nmse %.4f (< 0.05), mean max-cosine %.4f (> 0.9), %d steps, full pipeline %.1fs",
                (unsigned long long)s.seed, nmse, mmc, steps, s.train_secs));
}

void layer_locating(const seed_run& s) {
    const auto& rk = s.run.ranking;
    int sig = s.run.data.world.cfg.signal_layer;
    bool ok = rk.front().layer_index == sig && rk.front().test_accuracy > 0.8;
    std::string others;
    for (auto& p : rk) {
        if (p.layer_index == sig) continue;
        ok = ok && std::fabs(p.test_accuracy - 0.5) <= 0.12;
        others += fmt(" L%d=%.2f", p.layer_index, p.test_accuracy);
    }
    verdict(4, "layer locating", ok,
            fmt("seed %llu: top-1 L%d acc %.3f (signal L%d, > 0.8); others within 0.5+-0.12:",
                (unsigned long long)s.seed, rk.front().layer_index, rk.front().test_accuracy, sig) +
                others);
}

void feature_locating(const seed_run& s) {
    const auto& w = s.run.data.world;
    auto match = match_latents(w, s.run.sae.params);
    const auto& I = s.run.located.spec.indices;
    auto cf = w.consistency_features();
    int hit = 0;
    for (int f : cf) hit += std::binary_search(I.begin(), I.end(), match[f]);
    double frac = double(hit) / cf.size();
    std::string sizes;
    bool mono = true;
    size_t prev = SIZE_MAX;
    for (double t : default_sweep_values("t")) {
        size_t n = select_key_features(s.run.located.g, t, true).size();
        mono = mono && n <= prev;
        prev = n;
        sizes += fmt(" %zu", n);
    }
    verdict(5, "feature locating", frac >= 0.8 && mono,
            fmt("seed %llu: %d/%zu planted consistency features in I at t=0.1 (>= 80%%); |I(t)| over the t grid:",
                (unsigned long long)s.seed, hit, cf.size()) +
                sizes);
}

void steering_efficacy(const std::vector<seed_run>& runs) {
    std::vector<double> gain, red;
    std::string per;
    for (auto& s : runs) {
        gain.push_back(s.run.steered.acc.mean - s.run.base.acc.mean);
        red.push_back(1 - s.run.steered.acc.std / s.run.base.acc.std);
        per += fmt(" %+.3f/%.0f%%", gain.back(), 100 * red.back());
    }
    double mg = median(gain), mr = median(red);
    verdict(6, "steering efficacy", mg >= 0.10 && mr >= 0.30,
            fmt("median accuracy gain %+.3f (>= +0.10), median std reduction %.1f%% (>= 30%%); per seed:", mg,
                100 * mr) +
                per);
}

void ablation_direction(const std::vector<seed_run>& runs) {
    std::map<std::string, std::vector<double>> acc, sd;
    for (auto& s : runs)
        for (auto& [mode, rows] : s.ablations)
            for (auto& r : rows) {
                std::string key = r.name == "baseline" || r.name == "located" ? r.name : mode;
                if (r.name == "located" && mode != runs[0].ablations.begin()->first) continue;
                if (r.name == "baseline") continue;
                acc[key].push_back(r.accuracy);
                sd[key].push_back(r.std);
            }
    double la = median(acc["located"]), ls = median(sd["located"]);
    bool ok = true;
    std::string detail = fmt("located acc %.3f std %.3f", la, ls);
    for (auto& [k, v] : acc) {
        if (k == "located") continue;
        double a = median(v), s = median(sd[k]);
        ok = ok && la > a && ls < s;
        detail += fmt("; %s acc %.3f std %.3f", k.c_str(), a, s);
    }
    verdict(7, "ablation direction", ok && acc.size() == 3, detail + " (5-seed medians)");
}

void locality(const std::vector<const seed_run*>& runs) {
    bool ok = true;
    std::string per;
    for (auto* s : runs) {
        ok = ok && std::fabs(s->run.ood.loc.delta) <= 0.02;
        per += fmt(" s%llu=%+.4f", (unsigned long long)s->seed, s->run.ood.loc.delta);
    }
    // engine-level no-op: alpha 0 with passthrough returns the input
    auto& s7 = *runs.back();
    auto spec = s7.run.located.spec;
    spec.strength = 0;
    steering_session sess(s7.run.sae.params, spec, true);
    double worst = 0;
    for (auto& rec : s7.run.data.bench.records) {
        if (rec.layer_index != spec.layer) continue;
        std::vector<double> h(rec.vec.begin(), rec.vec.end());
        auto out = steer_hidden_state(sess, h);
        for (size_t j = 0; j < h.size(); ++j) worst = std::max(worst, std::fabs(out[j] - h[j]));
    }
    ok = ok && worst <= 1e-6;
    verdict(8, "locality", ok,
            fmt("ood accuracy delta within +-0.02 on every seed:%s; alpha=0 passthrough max |h'-h| %.1e (<= 1e-6)",
                per.c_str(), worst));
}

void hyperparameter_shape(const std::vector<seed_run>& runs) {
    auto curve = [&](auto member) {
        std::vector<double> out;
        const auto& first = runs[0].*member;
        for (size_t i = 0; i < first.size(); ++i) {
            std::vector<double> v;
            for (auto& s : runs) {
                const auto& row = (s.*member)[i];
                v.push_back(row.ok ? row.point.accuracy : 0.0);
            }
            out.push_back(median(v));
        }
        return out;
    };
    auto tv = default_sweep_values("t"), av = default_sweep_values("alpha");
    auto tc = curve(&seed_run::t_sweep), ac = curve(&seed_run::alpha_sweep);
    bool all_ok = true;
    for (auto& s : runs)
        for (auto* rows : {&s.t_sweep, &s.alpha_sweep})
            for (auto& r : *rows) all_ok = all_ok && r.ok;

    // peak at moderate t: the best interior grid point is at least the low edge and beats the high edge
    double interior = *std::max_element(tc.begin() + 1, tc.end() - 1);
    size_t peak_at = std::max_element(tc.begin() + 1, tc.end() - 1) - tc.begin();
    bool t_ok = interior >= tc.front() && tc.back() < interior;

    // alpha 0 reproduces the baseline exactly on every seed; the extreme alpha is below the best alpha
    bool zero_ok = true;
    for (auto& s : runs) {
        for (size_t i = 0; i < av.size(); ++i)
            if (av[i] == 0) zero_ok = zero_ok && s.alpha_sweep[i].point.accuracy == s.run.base.acc.mean &&
                                      s.alpha_sweep[i].point.std == s.run.base.acc.std;
    }
    double best_alpha = *std::max_element(ac.begin(), ac.end());
    bool a_ok = zero_ok && ac.back() < best_alpha;

    std::string detail = "median acc over t:";
    for (size_t i = 0; i < tv.size(); ++i) detail += fmt(" %.2f=%.3f", tv[i], tc[i]);
    detail += fmt(" (peak t=%.2f); over alpha:", tv[peak_at]);
    for (size_t i = 0; i < av.size(); ++i) detail += fmt(" %g=%.3f", av[i], ac[i]);
    detail += zero_ok ? "; alpha=0 equals baseline" : "; alpha=0 differs from baseline";
    verdict(9, "hyperparameter shape", all_ok && t_ok && a_ok, detail);
}

// ---- determinism through the cli ----

std::map<std::string, std::string> artifacts(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (auto* sub : {"reports", "checkpoints"})
        for (auto& e : fs::directory_iterator(root / sub)) out[std::string(sub) + "/" + e.path().filename().string()] = read_file(e.path().string());
    return out;
}

void determinism(const std::string& lfsteer) {
    auto t0 = clk::now();
    temp_dir td("acceptance-determinism");
    std::vector<std::map<std::string, std::string>> runs;
    for (int rep = 0; rep < 2; ++rep) {
        auto dir = td.path / ("run" + std::to_string(rep));
        for (auto* stage : {"gen", "locate-layer", "train-sae", "locate-features", "evaluate", "sweep", "ablate",
                            "report"}) {
            std::string cmd = "\"" + lfsteer + "\" --out-dir \"" + dir.string() + "\" " + stage + " > /dev/null";
            int rc = std::system(cmd.c_str());
            if (rc != 0) {
                verdict(10, "determinism", false, fmt("stage %s exited with %d", stage, rc));
                return;
            }
        }
        runs.push_back(artifacts(dir));
    }
    std::vector<std::string> diff;
    for (auto& [k, v] : runs[0])
        if (!runs[1].count(k) || runs[1][k] != v) diff.push_back(k);
    if (runs[1].size() != runs[0].size()) diff.push_back("file sets differ");
    size_t n_reports = std::count_if(runs[0].begin(), runs[0].end(),
                                     [](auto& kv) { return kv.first.rfind("reports/", 0) == 0; });
    std::string detail = diff.empty() ? fmt("%zu reports and %zu checkpoints byte-identical across two full cli runs (%.1fs)",
                                            n_reports, runs[0].size() - n_reports, since(t0))
                                      : "differing:";
    for (auto& d : diff) detail += " " + d;
    verdict(10, "determinism", diff.empty() && n_reports >= 8, detail);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <path to lfsteer>\n");
        return 2;
    }
    std::string lfsteer = fs::absolute(argv[1]).string();
    guarded(1, "oracle equivalence", oracle_equivalence);
    guarded(2, "gradient check", gradient_check);

    std::vector<seed_run> five;
    seed_run single;
    try {
        for (uint64_t s = 1; s <= 5; ++s) five.push_back(run_seed(s));
        single = run_seed(7);
    } catch (const std::exception& e) {
        std::printf("pipeline run threw: %s\n", e.what());
        for (int n = 3; n <= 9; ++n) verdict(n, "pipeline", false, "not run");
        guarded(10, "determinism", [&] { determinism(lfsteer); });
        return 1;
    }
    guarded(3, "dictionary recovery", [&] { dictionary_recovery(single); });
    guarded(4, "layer locating", [&] { layer_locating(single); });
    guarded(5, "feature locating", [&] { feature_locating(single); });
    guarded(6, "steering efficacy", [&] { steering_efficacy(five); });
    guarded(7, "ablation direction", [&] { ablation_direction(five); });
    guarded(8, "locality", [&] {
        std::vector<const seed_run*> all;
        for (auto& s : five) all.push_back(&s);
        all.push_back(&single);
        locality(all);
    });
    guarded(9, "hyperparameter shape", [&] { hyperparameter_shape(five); });
    guarded(10, "determinism", [&] { determinism(lfsteer); });

    std::printf("%d of 10 criteria failed\n", failures);
    return failures ? 1 : 0;
}
