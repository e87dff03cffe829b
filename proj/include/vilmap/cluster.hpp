// Clustering phase: threshold assignment of patterns to trained nodes and
// motif export.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vilmap/core.hpp"
#include "vilmap/organize.hpp"

namespace vilmap {

struct ClusterAssignment {
    int pattern_index = 0;
    std::optional<int> node_id;  // absent <=> rejected (activation < a_t)
    double activation = 0.0;     // best activation either way
    int offset = 0;
    Mode mode = Mode::regular;
};

struct Motif {
    int node_id = 0;
    Vec prototype;   // node center
    Vec relevance;
    std::int64_t support = 0;  // wins
};

// winner exactly as in training's competition; assigned iff activation >= a_t;
// the map is never mutated
ClusterAssignment assign(const MapState& map, const Pattern& pattern,
                         int pattern_index = 0);

// element-wise assign, order preserved; read-only so patterns fan out over
// n_threads when > 1
std::vector<ClusterAssignment> cluster_batch(const MapState& map,
                                             const std::vector<Pattern>& patterns,
                                             int n_threads = 1);

// one motif per node, sorted by descending support (ties by ascending id)
std::vector<Motif> extract_motifs(const MapState& map);

// delimiter-separated export: index, node id or '-', activation, offset, mode
std::string assignments_to_text(const std::vector<ClusterAssignment>& rows);

// motif export in the model's node text block format
std::string motifs_to_text(const std::vector<Motif>& motifs);

}  // namespace vilmap
