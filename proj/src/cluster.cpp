#include "vilmap/cluster.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <thread>

namespace vilmap {

ClusterAssignment assign(const MapState& map, const Pattern& pattern, int pattern_index) {
    auto [id, m] = winner(map.nodes, pattern, map.params.epsilon);
    ClusterAssignment a;
    a.pattern_index = pattern_index;
    if (m.activation >= map.params.a_t) a.node_id = id;
    a.activation = m.activation;
    a.offset = m.offset;
    a.mode = m.mode;
    return a;
}

std::vector<ClusterAssignment> cluster_batch(const MapState& map,
                                             const std::vector<Pattern>& patterns,
                                             int n_threads) {
    std::vector<ClusterAssignment> out(patterns.size());
    if (patterns.empty()) return out;
    const int workers = std::max(1, std::min<int>(n_threads, static_cast<int>(patterns.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < patterns.size(); ++i)
            out[i] = assign(map, patterns[i], static_cast<int>(i));
        return out;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < patterns.size(); i += workers)
                out[i] = assign(map, patterns[i], static_cast<int>(i));
        });
    for (auto& th : pool) th.join();
    return out;
}

std::vector<Motif> extract_motifs(const MapState& map) {
    std::vector<Motif> out;
    out.reserve(map.nodes.size());
    for (const Node& n : map.nodes)
        out.push_back({n.id, n.center, n.relevance, n.wins});
    std::stable_sort(out.begin(), out.end(), [](const Motif& a, const Motif& b) {
        return a.support > b.support;
    });
    return out;
}

std::string assignments_to_text(const std::vector<ClusterAssignment>& rows) {
    std::ostringstream out;
    char buf[40];
    for (const ClusterAssignment& a : rows) {
        std::snprintf(buf, sizeof buf, "%.17g", a.activation);
        out << a.pattern_index << '\t';
        if (a.node_id) out << *a.node_id;
        else out << '-';
        out << '\t' << buf << '\t' << a.offset << '\t' << mode_name(a.mode) << '\n';
    }
    return out.str();
}

std::string motifs_to_text(const std::vector<Motif>& motifs) {
    std::ostringstream out;
    char buf[40];
    auto line = [&](const Vec& v) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", v[i]);
            if (i) out << ' ';
            out << buf;
        }
        out << '\n';
    };
    for (const Motif& m : motifs) {
        out << "node " << m.node_id << ' ' << m.prototype.size() << ' ' << m.support << '\n';
        line(m.prototype);
        line(m.relevance);
    }
    return out.str();
}

}  // namespace vilmap
