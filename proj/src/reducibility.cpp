#include "mcrkit/reducibility.hpp"

#include "mcrkit/error.hpp"

#include <algorithm>
#include <cmath>

namespace mcr {

NonzeroDigraph adjacency_from_nonzeros(const Matrix& m, double threshold) {
    if (m.rows() != m.cols())
        throw InputError("matrix must be square, got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    if (!(threshold >= 0) || !std::isfinite(threshold)) throw InputError("threshold must be finite and >= 0");
    require_finite(m, "adjacency_from_nonzeros");
    NonzeroDigraph g;
    g.n = static_cast<int>(m.rows());
    g.out.resize(static_cast<size_t>(g.n));
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            if (std::abs(m(i, j)) > threshold) {
                g.edges.emplace_back(i, j);
                g.out[static_cast<size_t>(i)].push_back(j);
            }
    return g;
}

// Tarjan's algorithm with an explicit call stack.
std::vector<std::vector<int>> strongly_connected_components(const NonzeroDigraph& g) {
    const int n = g.n;
    std::vector<int> index(static_cast<size_t>(n), -1), low(static_cast<size_t>(n), 0);
    std::vector<char> on_stack(static_cast<size_t>(n), 0);
    std::vector<int> stack;
    std::vector<std::pair<int, size_t>> calls;  // node, next edge position
    std::vector<std::vector<int>> comps;
    int counter = 0;

    for (int root = 0; root < n; ++root) {
        if (index[static_cast<size_t>(root)] >= 0) continue;
        calls.emplace_back(root, 0);
        index[static_cast<size_t>(root)] = low[static_cast<size_t>(root)] = counter++;
        stack.push_back(root);
        on_stack[static_cast<size_t>(root)] = 1;

        while (!calls.empty()) {
            auto& [v, pos] = calls.back();
            const auto& adj = g.out[static_cast<size_t>(v)];
            if (pos < adj.size()) {
                const int w = adj[pos++];
                if (index[static_cast<size_t>(w)] < 0) {
                    index[static_cast<size_t>(w)] = low[static_cast<size_t>(w)] = counter++;
                    stack.push_back(w);
                    on_stack[static_cast<size_t>(w)] = 1;
                    calls.emplace_back(w, 0);
                } else if (on_stack[static_cast<size_t>(w)]) {
                    low[static_cast<size_t>(v)] = std::min(low[static_cast<size_t>(v)], index[static_cast<size_t>(w)]);
                }
                continue;
            }
            const int done = v;
            calls.pop_back();
            if (!calls.empty()) {
                const int parent = calls.back().first;
                low[static_cast<size_t>(parent)] =
                    std::min(low[static_cast<size_t>(parent)], low[static_cast<size_t>(done)]);
            }
            if (low[static_cast<size_t>(done)] == index[static_cast<size_t>(done)]) {
                std::vector<int> comp;
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[static_cast<size_t>(w)] = 0;
                    comp.push_back(w);
                } while (w != done);
                std::sort(comp.begin(), comp.end());
                comps.push_back(std::move(comp));
            }
        }
    }
    std::sort(comps.begin(), comps.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return comps;
}

IrreducibilityResult is_irreducible(const Matrix& m, double threshold) {
    const NonzeroDigraph g = adjacency_from_nonzeros(m, threshold);
    IrreducibilityResult r;
    r.components = strongly_connected_components(g);
    r.irreducible = r.components.size() == 1;
    return r;
}

}  // namespace mcr
