#pragma once

#include "mcrkit/matcore.hpp"

#include <utility>
#include <vector>

namespace mcr {

struct NonzeroDigraph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;  // row-major order, self-loops included
    std::vector<std::vector<int>> out;       // adjacency lists
};

// Edge i -> j iff |M(i, j)| > threshold.
NonzeroDigraph adjacency_from_nonzeros(const Matrix& m, double threshold = 0.0);

struct IrreducibilityResult {
    bool irreducible = false;
    // each component sorted, components ordered by their smallest node
    std::vector<std::vector<int>> components;
};

std::vector<std::vector<int>> strongly_connected_components(const NonzeroDigraph& g);
IrreducibilityResult is_irreducible(const Matrix& m, double threshold = 0.0);

}  // namespace mcr
