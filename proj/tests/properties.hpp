// Shared invariant checks and test helpers used by both the unit suites and
// the acceptance runner.
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "vilmap/core.hpp"

namespace vilmap::testutil {

struct PropResult {
    std::string name;
    bool ok = true;
    std::string detail;
};

// every library invariant check; all must come back ok
std::vector<PropResult> run_property_suite();

// command-level checks (manifest reproducibility, exit status discipline)
std::vector<PropResult> run_cli_properties(const std::string& cli_path);

inline std::string repo_path(const std::string& rel) {
    return std::string(VILMAP_REPO_DIR) + "/" + rel;
}

// uniform [0,1) from raw engine output; identical across platforms
inline double rand01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline int rand_index(std::mt19937_64& g, int n) {
    return static_cast<int>(g() % static_cast<std::uint64_t>(n));
}

Vec random_vec(std::mt19937_64& g, int len);
Node random_node(std::mt19937_64& g, int id, int len);

// straight double-loop re-derivation of the alignment competition: slides the
// shorter signal when the node is longer, compares against the pattern prefix
// when the node is shorter.  written independently of the library's span-based
// implementation so the two can be demanded to agree exactly
MatchResult naive_alignment(const Node& node, const Pattern& pattern, double epsilon);

}  // namespace vilmap::testutil
