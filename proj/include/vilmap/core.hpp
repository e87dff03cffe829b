// Stateless math of the map: weighted distance, activation, variable-length
// alignment and winner selection.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vilmap {

using Vec = std::vector<double>;

// variable-length input vector; label is carried for evaluation only
struct Pattern {
    Vec values;
    std::string label;

    std::size_t size() const { return values.size(); }
};

// cluster prototype: three equal-length vectors plus bookkeeping
struct Node {
    int id = 0;
    Vec center;        // c
    Vec relevance;     // w, each component in [0,1]
    Vec distance_avg;  // moving average of |x - c|, components >= 0
    std::int64_t wins = 0;

    std::size_t size() const { return center.size(); }
};

struct Params {
    double a_t = 0.95;        // activation threshold
    double e_b = 0.001;       // winner learning rate
    double e_n = 0.0005;      // neighbor learning rate
    double beta = 0.1;        // distance moving-average rate
    double eps_ds = 0.05;     // relevance smoothness
    int n_max = 10000;        // node budget
    int d_min = 1;            // accepted pattern-length bounds
    int d_max = 1 << 20;
    double minwd = 0.1;       // connection similarity threshold
    double epsilon = 1e-9;    // division guard
};

enum class Mode { regular, sliding, truncated };

const char* mode_name(Mode m);

// outcome of comparing one pattern against one node
struct MatchResult {
    double activation = 0.0;
    int offset = 0;       // start of the shorter signal inside the longer
    Mode mode = Mode::regular;
    int overlap_len = 0;  // number of compared dimensions
};

// sqrt(sum_i w_i * (x_i - c_i)^2); throws std::invalid_argument on length mismatch
double weighted_distance(std::span<const double> x, std::span<const double> c,
                         std::span<const double> w);

// sum(w) / (sum(w) + weighted_distance + epsilon)
double activation(std::span<const double> x, std::span<const double> c,
                  std::span<const double> w, double epsilon);

// equal lengths -> regular; node longer -> sliding (max over offsets, ties to
// the smallest offset, relevance sum taken over the overlapped slice); node
// shorter -> truncated against the pattern prefix
MatchResult best_alignment(const Node& node, const Pattern& pattern, double epsilon);

// argmax of best_alignment activation; ties broken by lowest node id.
// throws std::runtime_error on an empty node list
std::pair<int, MatchResult> winner(const std::vector<Node>& nodes,
                                   const Pattern& pattern, double epsilon);

}  // namespace vilmap
