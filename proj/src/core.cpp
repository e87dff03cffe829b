#include "vilmap/core.hpp"

#include <cmath>
#include <stdexcept>

namespace vilmap {

const char* mode_name(Mode m) {
    switch (m) {
        case Mode::regular: return "regular";
        case Mode::sliding: return "sliding";
        case Mode::truncated: return "truncated";
    }
    return "?";
}

double weighted_distance(std::span<const double> x, std::span<const double> c,
                         std::span<const double> w) {
    if (x.size() != c.size() || x.size() != w.size())
        throw std::invalid_argument("weighted_distance: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - c[i];
        acc += w[i] * d * d;
    }
    return std::sqrt(acc);
}

double activation(std::span<const double> x, std::span<const double> c,
                  std::span<const double> w, double epsilon) {
    const double dist = weighted_distance(x, c, w);
    double sw = 0.0;
    for (double v : w) sw += v;
    return sw / (sw + dist + epsilon);
}

MatchResult best_alignment(const Node& node, const Pattern& pattern, double epsilon) {
    const std::size_t nlen = node.size(), plen = pattern.size();
    const std::span<const double> x(pattern.values);
    const std::span<const double> c(node.center);
    const std::span<const double> w(node.relevance);

    if (nlen == plen)
        return {activation(x, c, w, epsilon), 0, Mode::regular, static_cast<int>(plen)};

    if (nlen > plen) {
        // pattern slides inside the node; the relevance slice at each offset
        // enters both the distance and the relevance sum
        MatchResult best{-1.0, 0, Mode::sliding, static_cast<int>(plen)};
        for (std::size_t off = 0; off + plen <= nlen; ++off) {
            const double a = activation(x, c.subspan(off, plen), w.subspan(off, plen), epsilon);
            if (a > best.activation) {
                best.activation = a;
                best.offset = static_cast<int>(off);
            }
        }
        return best;
    }

    // node shorter: only the pattern prefix is compared
    return {activation(x.first(nlen), c, w, epsilon), 0, Mode::truncated,
            static_cast<int>(nlen)};
}

std::pair<int, MatchResult> winner(const std::vector<Node>& nodes,
                                   const Pattern& pattern, double epsilon) {
    if (nodes.empty()) throw std::runtime_error("winner: empty map");
    int best_id = nodes.front().id;
    MatchResult best = best_alignment(nodes.front(), pattern, epsilon);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        MatchResult m = best_alignment(nodes[i], pattern, epsilon);
        // strict > keeps the lowest id on ties (nodes are stored in id order)
        if (m.activation > best.activation) {
            best = m;
            best_id = nodes[i].id;
        }
    }
    return {best_id, best};
}

}  // namespace vilmap
