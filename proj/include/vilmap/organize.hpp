// Online self-organization: node insertion, dimension growth, winner/neighbor
// adaptation, connection maintenance, and model serialization.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vilmap/core.hpp"

namespace vilmap {

// symmetric adjacency over node indices, one bitset row per node.
// rows use a shared word stride so the structure can grow without realloc
// of every row; indices are map-internal (nodes stay sorted by id).
class Adjacency {
public:
    void reset(std::size_t n);
    void add_node();  // appends an isolated node
    std::size_t size() const { return n_; }

    bool test(std::size_t i, std::size_t j) const;
    void set(std::size_t i, std::size_t j);    // symmetric
    void clear(std::size_t i, std::size_t j);  // symmetric
    void isolate(std::size_t i);               // drop all edges of i
    void connect_to_all(std::size_t i);        // edge to every other node

    // ascending neighbor indices of i
    void for_each_neighbor(std::size_t i, const std::function<void(std::size_t)>& f) const;
    std::size_t degree(std::size_t i) const;

    // removes the given ascending node indices, compacting the rest in order
    void remove_nodes(const std::vector<std::size_t>& sorted_idx);

private:
    std::size_t n_ = 0;
    std::size_t stride_ = 0;  // words per row
    std::vector<std::uint64_t> bits_;

    void regrow(std::size_t new_stride, std::size_t new_cap_rows);
    std::size_t cap_rows_ = 0;
};

struct MapState {
    Params params;
    std::vector<Node> nodes;  // ascending id order, index-aligned with adj
    Adjacency adj;
    int next_id = 0;
    std::int64_t patterns_seen = 0;

    std::size_t index_of(int id) const;  // throws if id unknown
};

struct StreamOptions {
    bool skip_on_error = false;  // drop out-of-bounds patterns instead of throwing
    int prune_interval = 0;      // every N patterns; 0 disables the hook
    double prune_fraction = 0.0; // remove nodes with wins/patterns_seen below this
};

// one node copying the first pattern: relevance all ones, distance average all
// zeros; throws on a length outside [d_min, d_max]
MapState init_map(const Pattern& first, const Params& params);

// extends all three node vectors to the pattern length: new center entries copy
// the pattern, new distance entries are 0, new relevance entries are 0.5
void grow_node(Node& node, const Pattern& pattern);

// full-vector relevance recompute from the distance averages:
// w_i = 1/(1+exp((d_i - mean)/(eps_ds*(max-min)))), all ones when max == min
void update_relevances(Node& node, double eps_ds);

// winner (rate e_b) and every connected neighbor (rate e_n) adapt over their
// own aligned overlap, in order: distance average, relevance, center.
// relevance is recomputed from the full distance vector but written only to
// the overlapped positions
void update_winner_and_neighbors(MapState& map, int winner_id, const Pattern& pattern,
                                 const MatchResult& match);

// replaces the winner's edges with {node : similarity > minwd}, where
// similarity = 1 - mean |w_a - w_b| over the common relevance prefix
void recompute_connections(MapState& map, int winner_id);

// one online step: create a node (below threshold, capacity left), adapt the
// winner and neighbors (at/above threshold; winner grows first if shorter), or
// drop the pattern (below threshold, map full)
void train_step(MapState& map, const Pattern& pattern);

// folds train_step over the sequence in order; single pass
void train_stream(MapState& map, const std::vector<Pattern>& patterns,
                  const StreamOptions& opts = {});

// off-by-default pruning hook: removes nodes with wins/patterns_seen < fraction
// (never the last node); returns the number removed
int prune_low_win_nodes(MapState& map, double fraction);

// versioned text model format; round-trips doubles exactly (17 significant digits)
void save_map(const MapState& map, const std::string& path);
MapState load_map(const std::string& path);
std::string serialize_map(const MapState& map);
MapState deserialize_map(const std::string& text);

}  // namespace vilmap
