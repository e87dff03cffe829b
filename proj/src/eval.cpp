#include "vilmap/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace vilmap {

EvalReport make_report(std::int64_t tp, std::int64_t fp, std::int64_t fn, std::int64_t tn) {
    EvalReport r;
    r.tp = tp;
    r.fp = fp;
    r.fn = fn;
    r.tn = tn;
    r.precision = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    r.recall = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    r.f_measure = (r.precision + r.recall > 0.0)
                      ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                      : 0.0;
    return r;
}

static std::int64_t count_assigned(const MapState& map, const std::vector<Pattern>& xs,
                                   int n_threads) {
    const std::vector<ClusterAssignment> rows = cluster_batch(map, xs, n_threads);
    std::int64_t acc = 0;
    for (const ClusterAssignment& a : rows) acc += a.node_id.has_value();
    return acc;
}

EvalReport recognition_eval(const MapState& map, const std::vector<Pattern>& positives,
                            const std::vector<Pattern>& negatives, int n_threads) {
    const std::int64_t tp = count_assigned(map, positives, n_threads);
    const std::int64_t fp = count_assigned(map, negatives, n_threads);
    return make_report(tp, fp, static_cast<std::int64_t>(positives.size()) - tp,
                       static_cast<std::int64_t>(negatives.size()) - fp);
}

// ------------------------------------------------------ experiment datasets

std::vector<SizedSets> build_recognition_sets(const Corpus& corpus,
                                              const PhonemeTable& table,
                                              const std::vector<int>& ks,
                                              std::uint64_t seed) {
    std::vector<SizedSets> out;
    const std::set<std::string> alpha = corpus.alphabet();
    for (std::size_t si = 0; si < ks.size(); ++si) {
        const int k = ks[si];
        SizedSets s;
        s.k = k;
        std::set<PhonemeSeqT> member;
        for (const Utterance& u : corpus.utterances)
            for (const Window& w : window_stream(u, k)) {
                s.train.push_back(phonemes_to_features(w.phones, table));
                member.insert(w.phones);
            }
        s.positives = s.train;
        const auto negs =
            generate_negatives(member, alpha, s.train.size(), seed + 1000 * si);
        for (const PhonemeSeqT& q : negs)
            s.negatives.push_back(phonemes_to_features(q, table));
        out.push_back(std::move(s));
    }
    return out;
}

static MapState train_on(const std::vector<Pattern>& stream, const Params& p,
                         MapState* carry) {
    if (stream.empty()) {
        if (!carry) throw std::invalid_argument("empty training stream");
        return std::move(*carry);
    }
    std::size_t from = 0;
    MapState map = carry ? std::move(*carry) : init_map(stream[from++], p);
    for (; from < stream.size(); ++from) train_step(map, stream[from]);
    return map;
}

std::vector<EvalReport> procedure_a(const std::vector<SizedSets>& sets, const Params& p) {
    std::vector<EvalReport> out;
    for (const SizedSets& s : sets) {
        const MapState map = train_on(s.train, p, nullptr);
        out.push_back(recognition_eval(map, s.positives, s.negatives));
    }
    return out;
}

std::vector<EvalReport> procedure_b(const std::vector<SizedSets>& sets, const Params& p) {
    MapState map;
    bool first = true;
    for (const SizedSets& s : sets) {
        map = train_on(s.train, p, first ? nullptr : &map);
        first = false;
    }
    std::vector<EvalReport> out;
    for (const SizedSets& s : sets)
        out.push_back(recognition_eval(map, s.positives, s.negatives));
    return out;
}

SegmentationSets build_segmentation_sets(const Corpus& corpus, const PhonemeTable& table,
                                         const std::vector<int>& ks) {
    if (corpus.utterances.empty()) throw std::invalid_argument("empty corpus");
    SegmentationSets out;
    // non-overlapping windows (stride = k): each pass re-chunks the stream at a
    // different granularity, so a word is sometimes presented whole and
    // sometimes split across adjacent chunks
    for (int k : ks)
        for (const Utterance& u : corpus.utterances)
            for (const Window& w : window_stream(u, k, k)) {
                out.train.push_back(phonemes_to_features(w.phones, table));
                if (w.crosses_boundary && !corpus.lexicon.count(w.phones))
                    out.negatives.push_back(out.train.back());
            }
    for (const Utterance& u : corpus.utterances)
        for (const PhonemeSeqT& w : u.words)
            out.positives.push_back(phonemes_to_features(w, table));
    return out;
}

EvalReport segmentation_eval(const SegmentationSets& sets, const Params& p) {
    const MapState map = train_on(sets.train, p, nullptr);
    return recognition_eval(map, sets.positives, sets.negatives);
}

// -------------------------------------------------------------- LHS sampling

static double rand01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// one stratified column: sample i lands in stratum i, then a seeded shuffle
// decouples the pairing across parameters
static std::vector<double> lhs_column(const LHSRange& r, int n, std::mt19937_64& rng) {
    std::vector<double> col(n);
    for (int i = 0; i < n; ++i)
        col[i] = r.lo + (static_cast<double>(i) + rand01(rng)) / static_cast<double>(n) *
                            (r.hi - r.lo);
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rand01(rng) * (i + 1)) % (i + 1);
        std::swap(col[i], col[j]);
    }
    return col;
}

std::vector<Params> lhs_sample(const LHSSpec& spec) {
    if (spec.n < 1) throw std::invalid_argument("lhs_sample: n must be >= 1");
    for (const LHSRange* r : {&spec.a_t, &spec.beta, &spec.e_b, &spec.u, &spec.minwd,
                              &spec.eps_ds})
        if (r->lo > r->hi) throw std::invalid_argument("lhs_sample: lower > upper");
    std::mt19937_64 rng(spec.seed);
    const auto a_t = lhs_column(spec.a_t, spec.n, rng);
    const auto beta = lhs_column(spec.beta, spec.n, rng);
    const auto e_b = lhs_column(spec.e_b, spec.n, rng);
    const auto u = lhs_column(spec.u, spec.n, rng);
    const auto minwd = lhs_column(spec.minwd, spec.n, rng);
    const auto eps_ds = lhs_column(spec.eps_ds, spec.n, rng);
    std::vector<Params> out(spec.n, spec.base);
    for (int i = 0; i < spec.n; ++i) {
        out[i].a_t = a_t[i];
        out[i].beta = beta[i];
        out[i].e_b = e_b[i];
        out[i].e_n = u[i] * e_b[i];  // guarantees e_n <= e_b
        out[i].minwd = minwd[i];
        out[i].eps_ds = eps_ds[i];
    }
    return out;
}

// ------------------------------------------------------------------- search

static double mean_f(const std::vector<EvalReport>& rs) {
    if (rs.empty()) return 0.0;
    double acc = 0.0;
    for (const EvalReport& r : rs) acc += r.f_measure;
    return acc / static_cast<double>(rs.size());
}

static double mean_p(const std::vector<EvalReport>& rs) {
    if (rs.empty()) return 0.0;
    double acc = 0.0;
    for (const EvalReport& r : rs) acc += r.precision;
    return acc / static_cast<double>(rs.size());
}

static double mean_r(const std::vector<EvalReport>& rs) {
    if (rs.empty()) return 0.0;
    double acc = 0.0;
    for (const EvalReport& r : rs) acc += r.recall;
    return acc / static_cast<double>(rs.size());
}

SweepResult search_best(const std::vector<Params>& paramsets, const Experiment& run,
                        int n_threads, double recall_floor) {
    SweepResult res;
    res.all.resize(paramsets.size());
    if (paramsets.empty()) return res;
    const int workers = std::max(1, std::min<int>(n_threads, static_cast<int>(paramsets.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < paramsets.size(); ++i) res.all[i] = run(paramsets[i]);
    } else {
        std::atomic<std::size_t> cursor{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = cursor.fetch_add(1);
                    if (i >= paramsets.size()) return;
                    res.all[i] = run(paramsets[i]);
                }
            });
        for (auto& th : pool) th.join();
    }
    const int n = static_cast<int>(paramsets.size());
    std::vector<int> pool;
    if (recall_floor > 0.0) {
        for (int i = 0; i < n; ++i)
            if (mean_r(res.all[i]) >= recall_floor) pool.push_back(i);
    }
    if (pool.empty()) {
        pool.resize(n);
        std::iota(pool.begin(), pool.end(), 0);
    }
    int best = pool.front();
    for (const int i : pool) {
        const double fi = mean_f(res.all[i]), fb = mean_f(res.all[best]);
        if (fi > fb || (fi == fb && mean_p(res.all[i]) > mean_p(res.all[best]))) best = i;
    }
    res.best.index = best;
    res.best.params = paramsets[best];
    res.best.reports = res.all[best];
    res.best.score = mean_f(res.all[best]);
    std::vector<double> scores(n);
    for (int i = 0; i < n; ++i) scores[i] = mean_f(res.all[i]);
    std::sort(scores.begin(), scores.end());
    res.median_score = (n % 2) ? scores[n / 2] : 0.5 * (scores[n / 2 - 1] + scores[n / 2]);
    return res;
}

std::string report_to_text(const EvalReport& r) {
    std::ostringstream out;
    out << "tp=" << r.tp << " fp=" << r.fp << " fn=" << r.fn << " tn=" << r.tn
        << " precision=" << r.precision << " recall=" << r.recall
        << " f=" << r.f_measure;
    return out.str();
}

}  // namespace vilmap
