// Command-line surface: train, cluster, motifs, experiment, sample-params.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "vilmap/cluster.hpp"
#include "vilmap/core.hpp"
#include "vilmap/data.hpp"
#include "vilmap/eval.hpp"
#include "vilmap/organize.hpp"

namespace fs = std::filesystem;
using namespace vilmap;

namespace {

// shortest decimal form that parses back to the same double
std::string fmt17(double v) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

// write-then-rename so partial output never lands at the final path
void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
    }
    fs::rename(tmp, path);
}

// line-based key=value configuration; flags override file entries
std::map<std::string, std::string> read_config(const std::string& path) {
    std::map<std::string, std::string> kv;
    if (path.empty()) return kv;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key=value");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

struct ParamCli {
    Params p;
    std::string config_path;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key=value parameter file");
        cmd->add_option("--a-t", p.a_t, "activation threshold");
        cmd->add_option("--e-b", p.e_b, "winner learning rate");
        cmd->add_option("--e-n", p.e_n, "neighbor learning rate");
        cmd->add_option("--beta", p.beta, "distance moving-average rate");
        cmd->add_option("--eps-ds", p.eps_ds, "relevance smoothness");
        cmd->add_option("--n-max", p.n_max, "node budget");
        cmd->add_option("--d-min", p.d_min, "minimum pattern length");
        cmd->add_option("--d-max", p.d_max, "maximum pattern length");
        cmd->add_option("--minwd", p.minwd, "connection similarity threshold");
        cmd->add_option("--epsilon", p.epsilon, "activation division guard");
    }

    // config file first, then explicit flags on top
    Params resolve(CLI::App* cmd) {
        Params base = p;
        const auto kv = read_config(config_path);
        auto num = [&](const char* key, double& slot) {
            auto it = kv.find(key);
            if (it != kv.end()) slot = std::strtod(it->second.c_str(), nullptr);
        };
        auto integer = [&](const char* key, int& slot) {
            auto it = kv.find(key);
            if (it != kv.end()) slot = std::atoi(it->second.c_str());
        };
        num("a_t", base.a_t);
        num("e_b", base.e_b);
        num("e_n", base.e_n);
        num("beta", base.beta);
        num("eps_ds", base.eps_ds);
        integer("n_max", base.n_max);
        integer("d_min", base.d_min);
        integer("d_max", base.d_max);
        num("minwd", base.minwd);
        num("epsilon", base.epsilon);
        auto flag = [&](const char* name, double& slot, double cli_value) {
            if (cmd->count(name)) slot = cli_value;
        };
        flag("--a-t", base.a_t, p.a_t);
        flag("--e-b", base.e_b, p.e_b);
        flag("--e-n", base.e_n, p.e_n);
        flag("--beta", base.beta, p.beta);
        flag("--eps-ds", base.eps_ds, p.eps_ds);
        flag("--minwd", base.minwd, p.minwd);
        flag("--epsilon", base.epsilon, p.epsilon);
        if (cmd->count("--n-max")) base.n_max = p.n_max;
        if (cmd->count("--d-min")) base.d_min = p.d_min;
        if (cmd->count("--d-max")) base.d_max = p.d_max;
        warn_ranges(base);
        return base;
    }

    // the sampler never leaves the published ranges; explicit values may,
    // with a warning
    static void warn_ranges(const Params& q) {
        auto warn = [](const char* name, double v, double lo, double hi) {
            if (v < lo || v > hi)
                std::cerr << "warning: " << name << "=" << v << " outside sampler range ["
                          << lo << ", " << hi << "]\n";
        };
        warn("a_t", q.a_t, 0.70, 0.999);
        warn("beta", q.beta, 0.001, 0.5);
        warn("e_b", q.e_b, 0.0001, 0.01);
        warn("minwd", q.minwd, 0.001, 0.5);
        warn("eps_ds", q.eps_ds, 0.01, 0.1);
        if (q.e_n > q.e_b)
            std::cerr << "warning: e_n=" << q.e_n << " exceeds e_b=" << q.e_b << "\n";
    }
};

std::string params_block(const Params& q) {
    std::ostringstream out;
    out << "a_t=" << fmt17(q.a_t) << "\ne_b=" << fmt17(q.e_b) << "\ne_n=" << fmt17(q.e_n)
        << "\nbeta=" << fmt17(q.beta) << "\neps_ds=" << fmt17(q.eps_ds)
        << "\nn_max=" << q.n_max << "\nd_min=" << q.d_min << "\nd_max=" << q.d_max
        << "\nminwd=" << fmt17(q.minwd) << "\nepsilon=" << fmt17(q.epsilon) << '\n';
    return out.str();
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const Params& q, std::uint64_t seed,
                    const std::map<std::string, std::string>& extra) {
    std::ostringstream out;
    out << "command=" << command << '\n' << "seed=" << seed << '\n' << params_block(q);
    for (const auto& [k, v] : extra) out << k << '=' << v << '\n';
    write_atomic(out_dir + "/manifest.txt", out.str());
}

std::vector<Pattern> load_patterns_any(const std::string& path, const std::string& format,
                                       const std::string& dict_path,
                                       const std::string& features_path, int window,
                                       std::vector<int>* window_sizes) {
    if (format == "ucr") return load_ucr(path);
    const PhonemeTable table = PhonemeTable::load_csv(features_path);
    Corpus corpus;
    if (format == "phoneme") {
        corpus = load_phoneme_corpus(path);
    } else if (format == "text") {
        const PronDict dict = PronDict::load(dict_path);
        TextConversion tc = corpus_from_text(path, dict);
        for (const std::string& w : tc.oov) std::cerr << "oov: " << w << '\n';
        corpus = std::move(tc.corpus);
    } else {
        throw std::runtime_error("unknown --format " + format);
    }
    std::vector<Pattern> out;
    if (window > 0) {
        for (const Utterance& u : corpus.utterances)
            for (const Window& w : window_stream(u, window))
                out.push_back(phonemes_to_features(w.phones, table));
        if (window_sizes) window_sizes->push_back(window);
    } else {
        for (const Utterance& u : corpus.utterances)
            if (!u.stream().empty())
                out.push_back(phonemes_to_features(u.stream(), table));
    }
    return out;
}

int cmd_train(const std::string& input, const std::string& format,
              const std::string& dict_path, const std::string& features_path, int window,
              ParamCli& pc, CLI::App* cmd, const std::string& out_dir, std::uint64_t seed) {
    const Params q = pc.resolve(cmd);
    fs::create_directories(out_dir);
    std::vector<Pattern> stream =
        load_patterns_any(input, format, dict_path, features_path, window, nullptr);
    if (stream.empty()) throw std::runtime_error("no training patterns in " + input);
    MapState map = init_map(stream.front(), q);
    for (std::size_t i = 1; i < stream.size(); ++i) train_step(map, stream[i]);
    save_map(map, out_dir + "/model.vlm");
    write_manifest(out_dir, "train", q, seed,
                   {{"input", input},
                    {"patterns", std::to_string(stream.size())},
                    {"nodes", std::to_string(map.nodes.size())}});
    std::cout << "trained " << map.nodes.size() << " nodes from " << stream.size()
              << " patterns -> " << out_dir << "/model.vlm\n";
    return 0;
}

int cmd_cluster(const std::string& model_path, const std::string& input,
                const std::string& format, const std::string& dict_path,
                const std::string& features_path, int window, const std::string& out_dir,
                int threads) {
    const MapState map = load_map(model_path);
    fs::create_directories(out_dir);
    const std::vector<Pattern> patterns =
        load_patterns_any(input, format, dict_path, features_path, window, nullptr);
    const auto rows = cluster_batch(map, patterns, threads);
    write_atomic(out_dir + "/assignments.tsv", assignments_to_text(rows));
    std::int64_t kept = 0;
    for (const auto& r : rows) kept += r.node_id.has_value();
    std::cout << "assigned " << kept << "/" << rows.size() << " patterns -> " << out_dir
              << "/assignments.tsv\n";
    return 0;
}

int cmd_motifs(const std::string& model_path, const std::string& out_dir) {
    const MapState map = load_map(model_path);
    fs::create_directories(out_dir);
    write_atomic(out_dir + "/motifs.txt", motifs_to_text(extract_motifs(map)));
    std::cout << map.nodes.size() << " motifs -> " << out_dir << "/motifs.txt\n";
    return 0;
}

std::string reports_tsv(const std::vector<int>& ks, const std::vector<EvalReport>& rs) {
    std::ostringstream out;
    out << "size\ttp\tfp\tfn\ttn\tprecision\trecall\tf\n";
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const EvalReport& r = rs[i];
        out << (i < ks.size() ? ks[i] * 12 : 0) << '\t' << r.tp << '\t' << r.fp << '\t'
            << r.fn << '\t' << r.tn << '\t' << fmt17(r.precision) << '\t'
            << fmt17(r.recall) << '\t' << fmt17(r.f_measure) << '\n';
    }
    return out.str();
}

int cmd_experiment(const std::string& which, const std::string& input,
                   const std::string& test_input, const std::string& dict_path,
                   const std::string& features_path, const std::string& format,
                   ParamCli& pc, CLI::App* cmd, const std::string& out_dir,
                   std::uint64_t seed, int lhs_n, const std::string& params_file,
                   int threads, double recall_floor) {
    fs::create_directories(out_dir);

    if (which == "gunpoint") {
        // hand-tuned defaults for the two-class gesture benchmark
        Params q;
        q.a_t = 0.702;
        q.e_b = 0.060;
        q.e_n = 0.247;
        q.beta = 0.092;
        q.eps_ds = 0.070;
        q.n_max = 10000;
        q.minwd = 0.223;
        if (!pc.config_path.empty() || cmd->count("--a-t") || cmd->count("--e-b") ||
            cmd->count("--e-n") || cmd->count("--beta") || cmd->count("--eps-ds") ||
            cmd->count("--n-max") || cmd->count("--minwd") || cmd->count("--epsilon")) {
            pc.p = q;
            q = pc.resolve(cmd);
        } else {
            ParamCli::warn_ranges(q);
        }
        std::vector<Pattern> train = load_ucr(input);
        if (train.empty()) throw std::runtime_error("empty training set " + input);
        MapState map = init_map(train.front(), q);
        for (std::size_t i = 1; i < train.size(); ++i) train_step(map, train[i]);
        save_map(map, out_dir + "/model.vlm");
        write_atomic(out_dir + "/motifs.txt", motifs_to_text(extract_motifs(map)));
        std::ostringstream sum;
        sum << "nodes=" << map.nodes.size() << '\n';
        if (!test_input.empty()) {
            const std::vector<Pattern> test = load_ucr(test_input);
            const auto rows = cluster_batch(map, test, threads);
            write_atomic(out_dir + "/assignments.tsv", assignments_to_text(rows));
            std::int64_t kept = 0;
            for (const auto& r : rows) kept += r.node_id.has_value();
            sum << "test_patterns=" << test.size() << "\ntest_assigned=" << kept << '\n';
        }
        write_atomic(out_dir + "/summary.txt", sum.str());
        write_manifest(out_dir, "experiment gunpoint", q, seed, {{"input", input}});
        std::cout << sum.str();
        return 0;
    }

    // phoneme experiments: forgetting | segmentation
    const PhonemeTable table = PhonemeTable::load_csv(features_path);
    Corpus corpus;
    if (format == "text") {
        const PronDict dict = PronDict::load(dict_path);
        TextConversion tc = corpus_from_text(input, dict);
        for (const std::string& w : tc.oov) std::cerr << "oov: " << w << '\n';
        corpus = std::move(tc.corpus);
    } else {
        corpus = load_phoneme_corpus(input);
    }

    std::vector<Params> paramsets;
    if (!params_file.empty()) {
        // one params block per line set: reuse the config reader per line group
        std::ifstream in(params_file);
        if (!in) throw std::runtime_error("cannot read " + params_file);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            Params q;
            std::istringstream row(line);
            std::string kvtok;
            while (row >> kvtok) {
                const auto eq = kvtok.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = kvtok.substr(0, eq);
                const double val = std::strtod(kvtok.c_str() + eq + 1, nullptr);
                if (key == "a_t") q.a_t = val;
                else if (key == "e_b") q.e_b = val;
                else if (key == "e_n") q.e_n = val;
                else if (key == "beta") q.beta = val;
                else if (key == "eps_ds") q.eps_ds = val;
                else if (key == "minwd") q.minwd = val;
                else if (key == "epsilon") q.epsilon = val;
                else if (key == "n_max") q.n_max = static_cast<int>(val);
                else if (key == "d_min") q.d_min = static_cast<int>(val);
                else if (key == "d_max") q.d_max = static_cast<int>(val);
            }
            paramsets.push_back(q);
        }
    } else {
        LHSSpec spec;
        spec.n = lhs_n;
        spec.seed = seed;
        // segmentation relies on the map filling up so that rare crossing
        // chunks are shed; a modest budget is part of that protocol
        if (which == "segmentation") spec.base.n_max = 80;
        paramsets = lhs_sample(spec);
    }

    if (which == "forgetting") {
        const std::vector<int> ks = {2, 3, 4, 5, 6};  // 24..72 dims ascending
        const auto sets = build_recognition_sets(corpus, table, ks, seed);
        const SweepResult ra =
            search_best(paramsets, [&](const Params& q) { return procedure_a(sets, q); },
                        threads, recall_floor);
        // the cumulative protocol reruns the selected configuration so both
        // curves describe the same map under two test regimes
        const std::vector<EvalReport> rb = procedure_b(sets, ra.best.params);
        write_atomic(out_dir + "/procedure_a.tsv", reports_tsv(ks, ra.best.reports));
        write_atomic(out_dir + "/procedure_b.tsv", reports_tsv(ks, rb));
        std::ostringstream sum;
        sum << "best_index=" << ra.best.index << " mean_f=" << ra.best.score
            << " median_f=" << ra.median_score << '\n';
        for (std::size_t i = 0; i < ra.best.reports.size(); ++i)
            sum << "A size " << ks[i] * 12 << ": " << report_to_text(ra.best.reports[i])
                << '\n';
        for (std::size_t i = 0; i < rb.size(); ++i)
            sum << "B size " << ks[i] * 12 << ": " << report_to_text(rb[i]) << '\n';
        write_atomic(out_dir + "/summary.txt", sum.str());
        write_manifest(out_dir, "experiment forgetting", ra.best.params, seed,
                       {{"paramsets", std::to_string(paramsets.size())}});
        std::cout << sum.str();
        return 0;
    }

    if (which == "segmentation") {
        // window sizes spanning typical content-word lengths (see eval header)
        const auto sets = build_segmentation_sets(corpus, table, {4, 5, 6});
        const SweepResult rs = search_best(
            paramsets,
            [&](const Params& q) {
                return std::vector<EvalReport>{segmentation_eval(sets, q)};
            },
            threads);
        std::ostringstream sum;
        sum << "best_index=" << rs.best.index << " median_f=" << rs.median_score << '\n'
            << report_to_text(rs.best.reports.front()) << '\n';
        write_atomic(out_dir + "/summary.txt", sum.str());
        write_atomic(out_dir + "/report.tsv", reports_tsv({}, rs.best.reports));
        write_manifest(out_dir, "experiment segmentation", rs.best.params, seed,
                       {{"paramsets", std::to_string(paramsets.size())}});
        std::cout << sum.str();
        return 0;
    }

    throw std::runtime_error("unknown experiment '" + which + "'");
}

int cmd_sample_params(int n, std::uint64_t seed, const std::string& out_path) {
    LHSSpec spec;
    spec.n = n;
    spec.seed = seed;
    const std::vector<Params> ps = lhs_sample(spec);
    std::ostringstream out;
    for (const Params& q : ps)
        out << "a_t=" << fmt17(q.a_t) << " e_b=" << fmt17(q.e_b) << " e_n=" << fmt17(q.e_n)
            << " beta=" << fmt17(q.beta) << " eps_ds=" << fmt17(q.eps_ds)
            << " minwd=" << fmt17(q.minwd) << '\n';
    write_atomic(out_path, out.str());
    std::cout << n << " parameter sets -> " << out_path << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"variable-input-length self-organizing map"};
    app.require_subcommand(1);

    std::string input, test_input, model_path, out_dir = "out", format = "ucr";
    std::string dict_path, features_path = "data/phoneme_features.csv", params_file;
    std::string experiment_name, sample_out = "params.txt";
    std::uint64_t seed = 1;
    int window = 0, threads = 1, lhs_n = 100, sample_n = 100;
    double recall_floor = 0.90;
    ParamCli pc;

    CLI::App* train = app.add_subcommand("train", "train a map on a pattern stream");
    train->add_option("--input", input, "training data path")->required();
    train->add_option("--format", format, "ucr | phoneme | text");
    train->add_option("--dict", dict_path, "pronunciation dictionary (text format)");
    train->add_option("--features", features_path, "phoneme feature CSV");
    train->add_option("--window", window, "phonemes per training window (0 = whole utterance)");
    train->add_option("--out", out_dir, "output directory");
    train->add_option("--seed", seed, "recorded in the manifest");
    pc.attach(train);

    CLI::App* cluster = app.add_subcommand("cluster", "assign patterns with a trained map");
    cluster->add_option("--model", model_path, "model file")->required();
    cluster->add_option("--input", input, "patterns path")->required();
    cluster->add_option("--format", format, "ucr | phoneme | text");
    cluster->add_option("--dict", dict_path, "pronunciation dictionary");
    cluster->add_option("--features", features_path, "phoneme feature CSV");
    cluster->add_option("--window", window, "phonemes per window (0 = whole utterance)");
    cluster->add_option("--out", out_dir, "output directory");
    cluster->add_option("--threads", threads, "worker threads");

    CLI::App* motifs = app.add_subcommand("motifs", "export node prototypes");
    motifs->add_option("--model", model_path, "model file")->required();
    motifs->add_option("--out", out_dir, "output directory");

    CLI::App* experiment =
        app.add_subcommand("experiment", "run a named end-to-end pipeline");
    experiment->add_option("name", experiment_name, "gunpoint | forgetting | segmentation")
        ->required();
    experiment->add_option("--input", input, "train data (ucr) or corpus path")->required();
    experiment->add_option("--test", test_input, "test data path (gunpoint)");
    experiment->add_option("--dict", dict_path, "pronunciation dictionary");
    experiment->add_option("--features", features_path, "phoneme feature CSV");
    experiment->add_option("--format", format, "phoneme | text corpus format");
    experiment->add_option("--out", out_dir, "output directory");
    experiment->add_option("--seed", seed, "sampling seed");
    experiment->add_option("--lhs", lhs_n, "parameter sets to sample");
    experiment->add_option("--params-file", params_file, "pre-sampled parameter sets");
    experiment->add_option("--threads", threads, "worker threads");
    experiment->add_option("--recall-floor", recall_floor,
                           "forgetting selection: pick best F among runs with mean "
                           "recall at or above this (0 disables)");
    pc.attach(experiment);

    CLI::App* sample = app.add_subcommand("sample-params", "write a parameter sample file");
    sample->add_option("--n", sample_n, "sample count");
    sample->add_option("--seed", seed, "sampling seed");
    sample->add_option("--out", sample_out, "output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed())
            return cmd_train(input, format, dict_path, features_path, window, pc, train,
                             out_dir, seed);
        if (cluster->parsed())
            return cmd_cluster(model_path, input, format, dict_path, features_path, window,
                               out_dir, threads);
        if (motifs->parsed()) return cmd_motifs(model_path, out_dir);
        if (experiment->parsed())
            return cmd_experiment(experiment_name, input, test_input, dict_path,
                                  features_path, format, pc, experiment, out_dir, seed,
                                  lhs_n, params_file, threads, recall_floor);
        if (sample->parsed()) return cmd_sample_params(sample_n, seed, sample_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
