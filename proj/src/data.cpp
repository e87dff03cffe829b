#include "vilmap/data.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace vilmap {

static std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

// ----------------------------------------------------------------- UCR files

std::vector<Pattern> load_ucr(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::vector<Pattern> out;
    std::string line;
    int lineno = 0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    while (std::getline(in, line)) {
        ++lineno;
        for (char& ch : line)
            if (ch == ',' || ch == '\t') ch = ' ';
        if (line.find_first_not_of(" \r") == std::string::npos) continue;
        std::istringstream row(line);
        std::string tok;
        Pattern p;
        bool first = true;
        while (row >> tok) {
            char* end = nullptr;
            const double v = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str() || *end != '\0')
                throw std::runtime_error(path + " line " + std::to_string(lineno) +
                                         ": non-numeric token '" + tok + "'");
            if (first) {
                p.label = std::to_string(static_cast<long long>(v));
                first = false;
            } else {
                p.values.push_back(v);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        if (p.values.empty())
            throw std::runtime_error(path + " line " + std::to_string(lineno) +
                                     ": row has a label but no values");
        out.push_back(std::move(p));
    }
    if (!out.empty() && hi > lo)
        for (Pattern& p : out)
            for (double& v : p.values) v = (v - lo) / (hi - lo);
    else if (!out.empty())
        for (Pattern& p : out)
            for (double& v : p.values) v = 0.0;
    return out;
}

// ------------------------------------------------------------- phoneme table

PhonemeTable PhonemeTable::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    PhonemeTable t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream row(line);
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        if (cells.size() != 13)
            throw std::runtime_error(path + " line " + std::to_string(lineno) +
                                     ": expected 13 columns, got " +
                                     std::to_string(cells.size()));
        char* end = nullptr;
        std::strtod(cells[1].c_str(), &end);
        if (end == cells[1].c_str() && lineno == 1) continue;  // header row
        std::array<double, 12> f{};
        for (int i = 0; i < 12; ++i) {
            const std::string& c = cells[i + 1];
            const double v = std::strtod(c.c_str(), &end);
            if (end == c.c_str())
                throw std::runtime_error(path + " line " + std::to_string(lineno) +
                                         ": non-numeric feature '" + c + "'");
            f[i] = v;
        }
        if (!t.feats.emplace(cells[0], f).second)
            throw std::runtime_error(path + ": duplicate symbol " + cells[0]);
    }
    return t;
}

const std::array<double, 12>& PhonemeTable::at(const std::string& symbol) const {
    auto it = feats.find(symbol);
    if (it == feats.end())
        throw std::runtime_error("unknown phoneme symbol '" + symbol + "'");
    return it->second;
}

// ---------------------------------------------------------------- dictionary

static std::string strip_stress(const std::string& ph) {
    std::string out = ph;
    while (!out.empty() && std::isdigit(static_cast<unsigned char>(out.back())))
        out.pop_back();
    return out;
}

PronDict PronDict::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    PronDict d;
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(";;;", 0) == 0) continue;  // comment convention
        std::vector<std::string> toks = split_ws(line);
        if (toks.size() < 2) continue;
        std::string word = toks[0];
        if (word.find('(') != std::string::npos) continue;  // alternate entries
        PhonemeSeqT phones;
        for (std::size_t i = 1; i < toks.size(); ++i)
            phones.push_back(strip_stress(toks[i]));
        d.entries.emplace(std::move(word), std::move(phones));  // first one wins
    }
    return d;
}

const PhonemeSeqT* PronDict::find(const std::string& word) const {
    auto it = entries.find(word);
    return it == entries.end() ? nullptr : &it->second;
}

// -------------------------------------------------------------- corpus forms

PhonemeSeqT Utterance::stream() const {
    PhonemeSeqT out;
    for (const auto& w : words) out.insert(out.end(), w.begin(), w.end());
    return out;
}

std::set<std::size_t> Utterance::boundaries() const {
    std::set<std::size_t> b;
    std::size_t pos = 0;
    for (std::size_t i = 0; i + 1 < words.size(); ++i) {
        pos += words[i].size();
        b.insert(pos);
    }
    return b;
}

void Corpus::rebuild_lexicon() {
    lexicon.clear();
    for (const Utterance& u : utterances)
        for (const auto& w : u.words)
            if (!w.empty()) lexicon.insert(w);
}

std::set<std::string> Corpus::alphabet() const {
    std::set<std::string> a;
    for (const Utterance& u : utterances)
        for (const auto& w : u.words) a.insert(w.begin(), w.end());
    return a;
}

Corpus load_phoneme_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    Corpus c;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> toks = split_ws(line);
        if (toks.empty()) continue;
        Utterance u;
        PhonemeSeqT cur;
        for (const std::string& t : toks) {
            if (t == ";") {
                if (!cur.empty()) u.words.push_back(std::move(cur));
                cur = {};
            } else {
                cur.push_back(t);
            }
        }
        if (!cur.empty()) u.words.push_back(std::move(cur));
        if (!u.words.empty()) c.utterances.push_back(std::move(u));
    }
    c.rebuild_lexicon();
    return c;
}

static std::string normalize_word(const std::string& raw) {
    std::string out;
    for (char ch : raw) {
        const unsigned char u = static_cast<unsigned char>(ch);
        if (std::isalnum(u) || ch == '\'')
            out.push_back(static_cast<char>(std::toupper(u)));
    }
    return out;
}

Utterance phonemize_line(const std::string& line, const PronDict& dict, bool strict,
                         std::vector<std::string>* oov) {
    Utterance u;
    for (const std::string& raw : split_ws(line)) {
        const std::string word = normalize_word(raw);
        if (word.empty()) continue;
        if (const PhonemeSeqT* ph = dict.find(word)) {
            u.words.push_back(*ph);
        } else if (strict) {
            throw std::runtime_error("out-of-vocabulary word '" + word + "'");
        } else if (oov) {
            if (std::find(oov->begin(), oov->end(), word) == oov->end())
                oov->push_back(word);
        }
    }
    return u;
}

TextConversion corpus_from_text(const std::string& path, const PronDict& dict,
                                bool strict) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    TextConversion tc;
    std::string line;
    while (std::getline(in, line)) {
        Utterance u = phonemize_line(line, dict, strict, &tc.oov);
        if (!u.words.empty()) tc.corpus.utterances.push_back(std::move(u));
    }
    tc.corpus.rebuild_lexicon();
    return tc;
}

// -------------------------------------------------------------- featurization

Pattern phonemes_to_features(const PhonemeSeqT& seq, const PhonemeTable& table) {
    if (seq.empty()) throw std::invalid_argument("empty phoneme sequence");
    Pattern p;
    p.values.reserve(seq.size() * 12);
    for (const std::string& s : seq) {
        const auto& f = table.at(s);
        p.values.insert(p.values.end(), f.begin(), f.end());
    }
    return p;
}

std::vector<Window> window_stream(const Utterance& utt, int k, int stride) {
    if (k < 1 || stride < 1) throw std::invalid_argument("window_stream: k and stride must be >= 1");
    const PhonemeSeqT stream = utt.stream();
    const std::set<std::size_t> bounds = utt.boundaries();
    std::vector<Window> out;
    if (stream.size() < static_cast<std::size_t>(k)) return out;
    for (std::size_t i = 0; i + k <= stream.size(); i += stride) {
        Window w;
        w.phones.assign(stream.begin() + i, stream.begin() + i + k);
        w.start = i;
        auto it = bounds.upper_bound(i);  // first boundary strictly inside (i, i+k)
        w.crosses_boundary = it != bounds.end() && *it < i + k;
        out.push_back(std::move(w));
    }
    return out;
}

// ---------------------------------------------------------------- negatives

static double rand01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

static std::size_t rand_index(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rand01(rng) * static_cast<double>(n)) % n;
}

std::vector<PhonemeSeqT> generate_negatives(const std::set<PhonemeSeqT>& true_set,
                                            const std::set<std::string>& alphabet,
                                            std::size_t n, std::uint64_t seed) {
    if (n == 0) return {};
    if (alphabet.empty()) throw std::invalid_argument("generate_negatives: empty alphabet");
    const std::vector<std::string> syms(alphabet.begin(), alphabet.end());
    std::vector<std::size_t> lengths;
    for (const auto& s : true_set) lengths.push_back(s.size());
    if (lengths.empty()) lengths.push_back(1);
    std::mt19937_64 rng(seed);
    std::vector<PhonemeSeqT> out;
    out.reserve(n);
    std::size_t budget = 1000 * n + 10000;
    while (out.size() < n) {
        if (budget-- == 0)
            throw std::runtime_error("generate_negatives: rejection budget exhausted "
                                     "(alphabet too small for the requested count)");
        const std::size_t len = lengths[rand_index(rng, lengths.size())];
        PhonemeSeqT cand;
        cand.reserve(len);
        for (std::size_t i = 0; i < len; ++i) cand.push_back(syms[rand_index(rng, syms.size())]);
        if (!true_set.count(cand)) out.push_back(std::move(cand));
    }
    return out;
}

}  // namespace vilmap
