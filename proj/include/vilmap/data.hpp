// Corpus ingestion and featurization: UCR series, pronunciation dictionary,
// phoneme feature table, windowing, and negative-sequence generation.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "vilmap/core.hpp"

namespace vilmap {

using PhonemeSeqT = std::vector<std::string>;

// delimiter-separated rows, first column an integer class label; values
// min-max normalized to [0,1] over the whole file
std::vector<Pattern> load_ucr(const std::string& path);

// symbol -> 12 features in [0,1], loaded from CSV (symbol,f1..f12; optional header)
struct PhonemeTable {
    std::map<std::string, std::array<double, 12>> feats;

    static PhonemeTable load_csv(const std::string& path);
    const std::array<double, 12>& at(const std::string& symbol) const;
};

// pronunciation dictionary, one entry per line: WORD  PH1 PH2 ...
// stress digits are stripped at load; parenthesized alternates are ignored
struct PronDict {
    std::map<std::string, PhonemeSeqT> entries;

    static PronDict load(const std::string& path);
    const PhonemeSeqT* find(const std::string& word) const;  // null when absent
};

struct Utterance {
    std::vector<PhonemeSeqT> words;  // per-word phoneme sequences

    PhonemeSeqT stream() const;                // concatenated phonemes
    std::set<std::size_t> boundaries() const;  // interior word-start positions
};

struct Corpus {
    std::vector<Utterance> utterances;
    std::set<PhonemeSeqT> lexicon;  // distinct word phoneme sequences

    void rebuild_lexicon();
    std::set<std::string> alphabet() const;
};

// phonemized-text corpus format: one utterance per line, space-separated
// phonemes, ';' between words
Corpus load_phoneme_corpus(const std::string& path);

// orthographic corpus via the dictionary; OOV words are recorded and skipped
// unless strict, which throws instead
struct TextConversion {
    Corpus corpus;
    std::vector<std::string> oov;  // distinct out-of-vocabulary words, in order seen
};
TextConversion corpus_from_text(const std::string& path, const PronDict& dict,
                                bool strict = false);

// single line of words -> one utterance (same OOV policy)
Utterance phonemize_line(const std::string& line, const PronDict& dict, bool strict,
                         std::vector<std::string>* oov);

// concatenated per-phoneme features; length 12 * |seq|; throws on an unknown
// symbol or an empty sequence
Pattern phonemes_to_features(const PhonemeSeqT& seq, const PhonemeTable& table);

struct Window {
    PhonemeSeqT phones;
    std::size_t start = 0;          // position in the utterance stream
    bool crosses_boundary = false;  // displacement chunk: spans a word boundary
};

// all length-k windows of the utterance stream at the given stride; windows
// never span utterances
std::vector<Window> window_stream(const Utterance& utt, int k, int stride = 1);

// n random sequences over the alphabet, lengths drawn from the true set's
// length distribution, none a member of the true set; deterministic per seed;
// throws when the rejection budget is exhausted
std::vector<PhonemeSeqT> generate_negatives(const std::set<PhonemeSeqT>& true_set,
                                            const std::set<std::string>& alphabet,
                                            std::size_t n, std::uint64_t seed);

}  // namespace vilmap
