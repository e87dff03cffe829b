// Acceptance gate: each numbered check prints one PASS/FAIL line.  Run with a
// list of check numbers, or no arguments for all of them.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "properties.hpp"
#include "vilmap/cluster.hpp"
#include "vilmap/core.hpp"
#include "vilmap/data.hpp"
#include "vilmap/eval.hpp"
#include "vilmap/organize.hpp"

using namespace vilmap;
using testutil::naive_alignment;
using testutil::repo_path;

namespace {

constexpr int kSweepN = 100;             // parameter sets per search
constexpr std::uint64_t kLhsSeed = 42;   // sampler seed for both searches
constexpr std::uint64_t kNegSeed = 7;    // negative-set seed
constexpr double kRecallFloor = 0.90;    // high-recall regime for best-of-sweep

int n_threads() {
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double mean_recall(const std::vector<EvalReport>& rs) {
    double s = 0.0;
    for (const auto& r : rs) s += r.recall;
    return rs.empty() ? 0.0 : s / static_cast<double>(rs.size());
}

PhonemeTable feature_table() {
    return PhonemeTable::load_csv(repo_path("data/phoneme_features.csv"));
}

Corpus corpus_from_fixture(const std::string& rel) {
    const PronDict dict = PronDict::load(repo_path("tests/fixtures/pronounce.dict"));
    TextConversion conv = corpus_from_text(repo_path(rel), dict, false);
    if (!conv.oov.empty())
        std::cout << "  note: " << conv.oov.size() << " out-of-vocabulary words skipped\n";
    return std::move(conv.corpus);
}

// ---- 1: best_alignment equals an independent brute force ----------------
bool check_alignment_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 gen(20250817);
    int mismatches = 0;
    const int trials = 1500;
    for (int t = 0; t < trials; ++t) {
        Node node;
        node.id = t;
        const std::size_t nlen = 1 + testutil::rand_index(gen, 80);
        const std::size_t plen = 1 + testutil::rand_index(gen, 80);
        for (std::size_t i = 0; i < nlen; ++i) {
            node.center.push_back(testutil::rand01(gen));
            // mix exact-zero relevances in to exercise masked dimensions
            node.relevance.push_back(testutil::rand_index(gen, 5) == 0
                                         ? 0.0
                                         : testutil::rand01(gen));
        }
        node.distance_avg.assign(nlen, 0.0);
        Pattern x;
        for (std::size_t i = 0; i < plen; ++i) x.values.push_back(testutil::rand01(gen));
        const MatchResult got = best_alignment(node, x, 1e-9);
        const MatchResult want = naive_alignment(node, x, 1e-9);
        if (got.activation != want.activation || got.offset != want.offset ||
            got.mode != want.mode || got.overlap_len != want.overlap_len)
            ++mismatches;
    }
    const double dt = seconds_since(t0);
    std::cout << "  " << trials << " random pairs, lengths 1-80: " << mismatches
              << " mismatches in " << dt << " s\n";
    return mismatches == 0 && dt < 10.0;
}

// ---- 2: closed-form distance/activation examples ------------------------
bool check_equation_examples() {
    struct Row {
        const char* name;
        double got, want;
    };
    const Vec zeros2{0.0, 0.0};
    const std::vector<Row> rows = {
        {"distance 3-4-5 triangle", weighted_distance(Vec{3.0, 4.0}, zeros2, Vec{1.0, 1.0}),
         5.0},
        {"distance quarter weight", weighted_distance(Vec{2.0, 1.0}, zeros2, Vec{0.25, 1.0}),
         std::sqrt(2.0)},
        {"distance of identical vectors",
         weighted_distance(Vec{0.3, 0.7, 0.1}, Vec{0.3, 0.7, 0.1}, Vec{1.0, 0.5, 0.2}), 0.0},
        {"activation unit-offset", activation(Vec{1.0, 0.0}, zeros2, Vec{1.0, 1.0}, 1e-15),
         2.0 / 3.0},
        {"activation at zero distance",
         activation(Vec{0.2, 0.8, 0.5}, Vec{0.2, 0.8, 0.5}, Vec{1.0, 1.0, 1.0}, 1e-9),
         3.0 / (3.0 + 1e-9)},
        {"activation fully masked", activation(Vec{1.0, 1.0}, zeros2, Vec{0.0, 0.0}, 1e-9),
         0.0},
    };
    bool ok = true;
    for (const auto& r : rows) {
        const double err = std::abs(r.got - r.want);
        if (!(err <= 1e-12)) {
            std::cout << "  " << r.name << ": |" << r.got << " - " << r.want
                      << "| = " << err << " exceeds 1e-12\n";
            ok = false;
        }
    }
    if (ok) std::cout << "  " << rows.size() << " closed-form examples within 1e-12\n";
    return ok;
}

// ---- 3: gesture dataset collapses to two nodes, motifs inside class bands
std::string env_or(const char* var, const std::string& fallback) {
    const char* v = std::getenv(var);
    return v && *v ? std::string(v) : fallback;
}

bool check_two_node_structure() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string train_path =
        env_or("VILMAP_GUNPOINT_TRAIN", repo_path("tests/fixtures/gunpoint_surrogate_TRAIN.tsv"));
    const std::string test_path =
        env_or("VILMAP_GUNPOINT_TEST", repo_path("tests/fixtures/gunpoint_surrogate_TEST.tsv"));
    const std::vector<Pattern> train = load_ucr(train_path);
    const std::vector<Pattern> test = load_ucr(test_path);
    if (train.empty() || test.empty()) {
        std::cout << "  missing dataset files\n";
        return false;
    }

    Params p;
    p.a_t = 0.702;
    p.e_b = 0.060;
    p.e_n = 0.247;
    p.beta = 0.092;
    p.eps_ds = 0.070;
    p.n_max = 10000;
    p.minwd = 0.223;
    MapState map = init_map(train.front(), p);
    train_stream(map, {train.begin() + 1, train.end()});
    std::cout << "  nodes after one pass over " << train.size()
              << " training patterns: " << map.nodes.size() << " (want 2)\n";

    // per-class per-point mean +/- 2*std envelopes over the test set
    std::vector<std::string> labels;
    for (const auto& t : test)
        if (std::find(labels.begin(), labels.end(), t.label) == labels.end())
            labels.push_back(t.label);
    std::sort(labels.begin(), labels.end());
    const std::size_t dims = test.front().size();
    struct Band {
        std::string label;
        Vec mean, sd;
    };
    std::vector<Band> bands;
    for (const auto& lab : labels) {
        Band b;
        b.label = lab;
        b.mean.assign(dims, 0.0);
        b.sd.assign(dims, 0.0);
        double n = 0.0;
        for (const auto& t : test)
            if (t.label == lab) {
                ++n;
                for (std::size_t i = 0; i < dims; ++i) b.mean[i] += t.values[i];
            }
        for (std::size_t i = 0; i < dims; ++i) b.mean[i] /= n;
        for (const auto& t : test)
            if (t.label == lab)
                for (std::size_t i = 0; i < dims; ++i) {
                    const double d = t.values[i] - b.mean[i];
                    b.sd[i] += d * d;
                }
        for (std::size_t i = 0; i < dims; ++i) b.sd[i] = std::sqrt(b.sd[i] / (n - 1.0));
        bands.push_back(std::move(b));
    }

    bool envelopes_ok = true;
    for (const Motif& m : extract_motifs(map)) {
        double best_frac = 0.0;
        std::string best_label = "?";
        for (const auto& b : bands) {
            std::size_t inside = 0;
            const std::size_t upto = std::min(m.prototype.size(), dims);
            for (std::size_t i = 0; i < upto; ++i)
                if (std::abs(m.prototype[i] - b.mean[i]) <= 2.0 * b.sd[i]) ++inside;
            const double frac = static_cast<double>(inside) / static_cast<double>(dims);
            if (frac > best_frac) {
                best_frac = frac;
                best_label = b.label;
            }
        }
        std::cout << "  motif node " << m.node_id << " (len " << m.prototype.size()
                  << ", support " << m.support << "): " << best_frac * 100.0
                  << "% of points inside class " << best_label << " band\n";
        if (best_frac < 0.90) envelopes_ok = false;
    }
    const double dt = seconds_since(t0);
    std::cout << "  elapsed " << dt << " s\n";
    return map.nodes.size() == 2 && envelopes_ok && dt < 5.0;
}

// ---- 4/5: shared single-size sweep + cumulative rerun of its best --------
struct ForgettingRuns {
    SweepResult a;                 // full sweep of the fresh-map-per-size protocol
    std::vector<EvalReport> b;     // the selected config retrained cumulatively
};

const ForgettingRuns& forgetting_runs() {
    static std::optional<ForgettingRuns> cache;
    if (!cache) {
        const PhonemeTable table = feature_table();
        const Corpus corpus = corpus_from_fixture("tests/fixtures/sentences.txt");
        const auto sets =
            build_recognition_sets(corpus, table, {2, 3, 4, 5, 6}, kNegSeed);
        LHSSpec spec;
        spec.n = kSweepN;
        spec.seed = kLhsSeed;
        const std::vector<Params> paramsets = lhs_sample(spec);
        const int threads = n_threads();
        std::cout << "  sweep: " << paramsets.size() << " parameter sets, " << threads
                  << " thread(s)\n";
        ForgettingRuns r;
        r.a = search_best(
            paramsets, [&](const Params& p) { return procedure_a(sets, p); }, threads,
            kRecallFloor);
        // the comparison is one configuration under both test protocols, so the
        // cumulative pass reruns exactly the selected parameter set
        r.b = procedure_b(sets, r.a.best.params);
        cache = std::move(r);
    }
    return *cache;
}

bool check_forgetting() {
    const auto& runs = forgetting_runs();
    const auto& a = runs.a.best.reports;
    const auto& b = runs.b;
    const int sizes[] = {24, 36, 48, 60, 72};
    bool ok = true;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const bool within = b[j].f_measure >= a[j].f_measure - 0.05;
        std::cout << "  size " << sizes[j] << ": single-size F=" << a[j].f_measure
                  << " cumulative F=" << b[j].f_measure << (within ? "" : "  <-- degraded")
                  << "\n";
        if (!within) ok = false;
    }
    const bool smallest_up = b[0].f_measure >= a[0].f_measure;
    std::cout << "  smallest size: cumulative " << b[0].f_measure
              << (smallest_up ? " >= " : " < ") << a[0].f_measure << " single-size\n";
    const Params& bp = runs.a.best.params;
    std::cout << "  selected config: idx " << runs.a.best.index << " a_t=" << bp.a_t
              << " beta=" << bp.beta << " e_b=" << bp.e_b << "; sweep median F "
              << runs.a.median_score << "\n";
    return ok && smallest_up;
}

bool check_sweep_magnitudes() {
    const auto& runs = forgetting_runs();
    const double mean_r = mean_recall(runs.a.best.reports);
    const double mean_f = runs.a.best.score;
    std::cout << "  best single-size run: mean recall " << mean_r << " (want >= 0.90), mean F "
              << mean_f << " (want >= 0.60); sweep median F " << runs.a.median_score << "\n";
    return mean_r >= 0.90 && mean_f >= 0.60;
}

// ---- 6: word recognition among displaced chunks -------------------------
bool check_segmentation() {
    const PhonemeTable table = feature_table();
    const Corpus corpus = corpus_from_fixture("tests/fixtures/cds.txt");
    // window sizes spanning typical content-word lengths; shorter windows yield
    // mostly function-word fragments that no threshold can separate
    const SegmentationSets sets = build_segmentation_sets(corpus, table, {4, 5, 6});
    std::cout << "  train chunks " << sets.train.size() << ", word tokens "
              << sets.positives.size() << ", non-word chunks " << sets.negatives.size()
              << "\n";
    LHSSpec spec;
    spec.n = kSweepN;
    spec.seed = kLhsSeed;
    // modest node budget: once the map fills, rare crossing chunks are dropped
    // while frequently repeated words hold onto their nodes
    spec.base.n_max = 80;
    const std::vector<Params> paramsets = lhs_sample(spec);
    const SweepResult sweep = search_best(
        paramsets,
        [&](const Params& p) { return std::vector<EvalReport>{segmentation_eval(sets, p)}; },
        n_threads(), 0.0);
    const EvalReport& best = sweep.best.reports.front();
    std::cout << "  best run F=" << best.f_measure << " P=" << best.precision
              << " R=" << best.recall << " (idx " << sweep.best.index << "); sweep median F "
              << sweep.median_score << "\n";

    // the published comparison rows must be internally consistent: F == 2PR/(P+R)
    struct Row {
        const char* name;
        double p, r, f;
    };
    const Row rows[] = {
        {"vilmap", 0.856, 0.667, 0.750}, {"puddle", 0.682, 0.733, 0.706},
        {"dibs", 0.234, 0.240, 0.236},   {"agu", 0.787, 0.777, 0.782},
        {"tps", 0.432, 0.512, 0.468},
    };
    bool rows_ok = true;
    for (const auto& row : rows) {
        const double f = 2.0 * row.p * row.r / (row.p + row.r);
        if (std::abs(f - row.f) > 1e-3) {
            std::cout << "  reference row " << row.name << ": recomputed F " << f
                      << " differs from quoted " << row.f << "\n";
            rows_ok = false;
        }
    }
    if (rows_ok) std::cout << "  5 reference rows internally consistent to 1e-3\n";
    return best.f_measure >= 0.70 && rows_ok;
}

// ---- 7: full invariant suite --------------------------------------------
bool check_invariants() {
    bool ok = true;
    std::size_t n = 0;
    for (const auto& r : testutil::run_property_suite()) {
        ++n;
        if (!r.ok) {
            std::cout << "  property failed: " << r.name << " — " << r.detail << "\n";
            ok = false;
        }
    }
#ifdef VILMAP_CLI_PATH
    for (const auto& r : testutil::run_cli_properties(VILMAP_CLI_PATH)) {
        ++n;
        if (!r.ok) {
            std::cout << "  property failed: " << r.name << " — " << r.detail << "\n";
            ok = false;
        }
    }
#endif
    if (ok) std::cout << "  " << n << " properties hold\n";
    return ok;
}

// ---- 8: train -> save -> load -> cluster is bit-identical ----------------
bool check_roundtrip() {
    std::mt19937_64 gen(4242);
    const std::vector<std::size_t> proto_lens = {10, 14, 18};
    std::vector<Vec> protos;
    for (auto L : proto_lens) {
        Vec v;
        for (std::size_t i = 0; i < L; ++i) v.push_back(testutil::rand01(gen));
        protos.push_back(std::move(v));
    }
    auto jitter = [&](const Vec& base, std::size_t len) {
        Pattern x;
        for (std::size_t i = 0; i < len; ++i) {
            double v = base[i] + 0.05 * (testutil::rand01(gen) - 0.5);
            x.values.push_back(std::clamp(v, 0.0, 1.0));
        }
        return x;
    };
    Params p;
    p.a_t = 0.9;
    p.e_b = 0.05;
    p.e_n = 0.01;
    p.beta = 0.2;
    p.minwd = 0.3;
    std::vector<Pattern> stream;
    for (int i = 0; i < 90; ++i) {
        const Vec& base = protos[testutil::rand_index(gen, protos.size())];
        stream.push_back(jitter(base, 4 + testutil::rand_index(gen, base.size() - 3)));
    }
    MapState trained = init_map(stream.front(), p);
    train_stream(trained, {stream.begin() + 1, stream.end()});

    std::vector<Pattern> probes;
    for (int i = 0; i < 60; ++i) {
        const Vec& base = protos[testutil::rand_index(gen, protos.size())];
        probes.push_back(jitter(base, 4 + testutil::rand_index(gen, base.size() - 3)));
    }
    const auto path =
        (std::filesystem::temp_directory_path() / "vilmap_acceptance_roundtrip.vlm").string();
    save_map(trained, path);
    const MapState loaded = load_map(path);
    std::filesystem::remove(path);

    if (serialize_map(trained) != serialize_map(loaded)) {
        std::cout << "  serialized forms differ after reload\n";
        return false;
    }
    const auto want = cluster_batch(trained, probes);
    const auto got = cluster_batch(loaded, probes);
    int diffs = 0;
    for (std::size_t i = 0; i < want.size(); ++i)
        if (want[i].node_id != got[i].node_id || want[i].activation != got[i].activation ||
            want[i].offset != got[i].offset || want[i].mode != got[i].mode)
            ++diffs;
    std::cout << "  " << probes.size() << " probe assignments compared bitwise: " << diffs
              << " differences over " << trained.nodes.size() << " nodes\n";
    return diffs == 0;
}

struct Check {
    int number;
    const char* label;
    bool (*fn)();
};

const Check kChecks[] = {
    {1, "alignment matches brute force", check_alignment_oracle},
    {2, "closed-form equation examples", check_equation_examples},
    {3, "two-node gesture map with motif envelopes", check_two_node_structure},
    {4, "cumulative training preserves per-size scores", check_forgetting},
    {5, "single-size sweep magnitudes", check_sweep_magnitudes},
    {6, "word recognition among displaced chunks", check_segmentation},
    {7, "invariant suite", check_invariants},
    {8, "serialized model reproduces assignments", check_roundtrip},
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
    int failures = 0;
    for (const Check& c : kChecks) {
        if (!wanted.empty() &&
            std::find(wanted.begin(), wanted.end(), c.number) == wanted.end())
            continue;
        bool ok = false;
        try {
            ok = c.fn();
        } catch (const std::exception& e) {
            std::cout << "  exception: " << e.what() << "\n";
        }
        std::cout << "criterion " << c.number << ": " << (ok ? "PASS" : "FAIL") << " — "
                  << c.label << "\n";
        if (!ok) ++failures;
    }
    return failures;
}
