#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "query_graph.hpp"

namespace pathvote {

// Tree-shape and volume knobs for the two-stage construction. Depth2 = 0 is
// allowed: the crossing edge then joins first-stage leaves directly.
struct PathParams {
    double length_scale = 0.0;  // L
    double epsilon = 0.0;
    int depth1 = 1;             // first-stage tree depth
    int depth2 = 1;             // second-stage tree depth (0 = none)
    int branch_first = 1;       // root branching of the first-stage trees
    int branch_rest = 1;        // branching everywhere else
    int min_paths = 1;          // below this the build reports failure
    int max_paths = std::numeric_limits<int>::max();
    double read_k_scale = 0.0;  // target_read_k = ceil(N / this) when > 0

    int path_length() const { return 2 * (depth1 + depth2) + 1; }
};

// Textbook parameters: L = ln n / ln ln n, eps = 1/sqrt(ln ln n),
// depths (ceil(eps L), ceil((1/2+eps) L)), branching
// (ceil(4 ln n (2c)^-L), ceil(4 ln n)). These only fit very large n;
// see derive_path_params for sizes that fit in memory.
inline PathParams default_path_params(int n, double c) {
    if (n < 3) throw std::invalid_argument("path params: n must be >= 3");
    if (!(c > 0.0 && c <= 0.5))
        throw std::invalid_argument("path params: c must be in (0,1/2]");
    PathParams p;
    const double ln_n = std::log(n);
    const double ln_ln_n = std::log(ln_n);
    p.length_scale = ln_n / ln_ln_n;
    p.epsilon = 1.0 / std::sqrt(ln_ln_n);
    p.depth1 = std::max(1, static_cast<int>(std::ceil(p.epsilon * p.length_scale)));
    p.depth2 = std::max(
        1, static_cast<int>(std::ceil((0.5 + p.epsilon) * p.length_scale)));
    p.read_k_scale = 4.0 * ln_n * std::pow(2.0 * c, -p.length_scale);
    p.branch_first = static_cast<int>(std::ceil(p.read_k_scale));
    p.branch_rest = static_cast<int>(std::ceil(4.0 * ln_n));
    return p;
}

// Desk-scale parameters: searches depth pairs (d1 >= 1, d2 >= 0) no larger
// than the textbook ones, keeping the whole two-sided construction under
// ~0.9 n vertices and the branching under the expected degree, and picks the
// shape maximising the signal proxy (2c)^len * sqrt(E[#paths]).
inline PathParams derive_path_params(int n, double c, double edge_density) {
    PathParams base = default_path_params(n, c);
    if (!(edge_density >= 0.0 && edge_density <= 1.0))
        throw std::invalid_argument("path params: density must be in [0,1]");

    const double ln_n = std::log(n);
    const double deg_exp = edge_density * (n - 1);
    const int deg_cap = std::max(1, static_cast<int>(std::floor(0.8 * deg_exp)));
    const int br = std::min(static_cast<int>(std::ceil(4.0 * ln_n)), deg_cap);

    PathParams best = base;
    double best_score = -1.0;
    int best_len = std::numeric_limits<int>::max();
    for (int d1 = 1; d1 <= base.depth1; ++d1) {
        for (int d2 = 0; d2 <= base.depth2; ++d2) {
            // vertices consumed per first-level child, one side
            double unit1 = 0.0, leaf_w = 1.0;
            for (int i = 0; i < d1; ++i) {
                unit1 += leaf_w;
                if (i + 1 < d1) leaf_w *= br;
            }
            double t2 = 0.0, w = 1.0;
            for (int j = 1; j <= d2; ++j) {
                w *= br;
                t2 += w;
            }
            const double per_child = unit1 + leaf_w * t2;
            const int b1_room = static_cast<int>(
                std::floor((0.45 * n - 1.0) / std::max(per_child, 1.0)));
            const int b1 = std::min(b1_room, deg_cap);
            if (b1 < 1) continue;

            const double leaves2 = std::pow(br, d2);
            double cross;
            if (edge_density >= 1.0)
                cross = 1.0;
            else
                cross = -std::expm1(leaves2 * leaves2 *
                                    std::log1p(-edge_density));
            const double n_est = b1 * leaf_w * cross;
            const int len = 2 * (d1 + d2) + 1;
            const double score = std::pow(2.0 * c, len) * std::sqrt(n_est);
            if (score > best_score + 1e-15 ||
                (std::abs(score - best_score) <= 1e-15 && len < best_len)) {
                best_score = score;
                best_len = len;
                best.depth1 = d1;
                best.depth2 = d2;
                best.branch_first = b1;
                best.branch_rest = std::max(br, 1);
                best.max_paths =
                    static_cast<int>(std::min<double>(b1 * leaf_w, 1 << 20));
            }
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// BFS trees
// ---------------------------------------------------------------------------

struct BfsTree {
    int root = -1;
    std::vector<std::vector<int>> levels;  // levels[0] = {root}
    std::unordered_map<int, int> parent;
    int depth = 0;
    bool degraded = false;    // some expansion got fewer children than asked
    int max_bad_edges = 0;    // worst per-expansion bad-edge count

    const std::vector<int>& leaves() const { return levels.back(); }

    bool contains(int v) const { return v == root || parent.count(v) > 0; }

    int size() const { return 1 + static_cast<int>(parent.size()); }

    // root..v inclusive; v must be in the tree.
    std::vector<int> path_from_root(int v) const {
        std::vector<int> path{v};
        while (v != root) {
            auto it = parent.find(v);
            if (it == parent.end())
                throw std::invalid_argument("tree: node not in tree");
            v = it->second;
            path.push_back(v);
        }
        std::reverse(path.begin(), path.end());
        return path;
    }
};

struct GrowFailure {
    int level = -1;  // level whose expansion stalled
    int node = -1;   // parent that could not expand
};

struct GrowResult {
    std::optional<BfsTree> tree;
    GrowFailure failure;
    bool ok() const { return tree.has_value(); }
};

// Candidate's neighbors already inside the growing tree.
inline int count_bad_edges(const QueryGraph& g, const BfsTree& tree,
                           int candidate) {
    int count = 0;
    for (int nb : g.neighbors(candidate))
        if (tree.contains(nb)) ++count;
    return count;
}

namespace detail {

// Membership of the whole per-pair forest (both endpoint trees plus every
// second-stage tree grown so far), with O(1) epoch reset between builds.
struct ForestState {
    std::vector<std::uint32_t> stamp;
    std::uint32_t epoch = 0;
    explicit ForestState(int n) : stamp(n, 0) {}
    void reset() { ++epoch; }
    bool contains(int v) const { return stamp[v] == epoch; }
    void insert(int v) { stamp[v] = epoch; }
};

struct GrowSpec {
    int depth = 1;
    int branch_first = 1;
    int branch_rest = 1;
    int min_leaves = 1;
};

// BFS with pruning: each parent takes the lowest-index eligible neighbors up
// to its branching quota. Eligible = not yet claimed by this pair's forest.
// Accepted nodes are claimed immediately (even if the growth later fails, the
// vertices stay blocked for subsequent trees of the same pair).
inline GrowResult grow(const QueryGraph& g, int root, const GrowSpec& spec,
                       ForestState& forest) {
    BfsTree tree;
    tree.root = root;
    tree.depth = spec.depth;
    tree.levels.assign(1, {root});
    forest.insert(root);

    GrowFailure stall;
    bool stalled = false;
    for (int level = 1; level <= spec.depth; ++level) {
        const int need = level == 1 ? spec.branch_first : spec.branch_rest;
        std::vector<int> next;
        next.reserve(tree.levels[level - 1].size() * need);
        for (int parent : tree.levels[level - 1]) {
            int taken = 0;
            for (int nb : g.neighbors(parent)) {
                if (taken == need) break;
                if (forest.contains(nb)) continue;
                int bad = 0;
                for (int nb2 : g.neighbors(nb))
                    if (forest.contains(nb2)) ++bad;
                tree.max_bad_edges = std::max(tree.max_bad_edges, bad);
                forest.insert(nb);
                tree.parent.emplace(nb, parent);
                next.push_back(nb);
                ++taken;
            }
            if (taken < need) {
                tree.degraded = true;
                if (!stalled) {
                    stalled = true;
                    stall.level = level;
                    stall.node = parent;
                }
            }
        }
        if (next.empty()) return {std::nullopt, stall};
        tree.levels.push_back(std::move(next));
    }
    if (static_cast<int>(tree.leaves().size()) < spec.min_leaves)
        return {std::nullopt, stall};
    return {std::move(tree), stall};
}

}  // namespace detail

// Standalone first-stage tree growth (the building block of the full
// construction). `forbidden` items are never entered.
inline GrowResult grow_tree(const QueryGraph& g, int root,
                            const PathParams& params,
                            const std::vector<int>& forbidden = {}) {
    if (root < 0 || root >= g.n())
        throw std::invalid_argument("grow_tree: root out of range");
    detail::ForestState forest(g.n());
    forest.reset();
    for (int v : forbidden) {
        if (v == root)
            throw std::invalid_argument("grow_tree: root is forbidden");
        forest.insert(v);
    }
    detail::GrowSpec spec{params.depth1, params.branch_first,
                          params.branch_rest, params.min_paths};
    return detail::grow(g, root, spec, forest);
}

// ---------------------------------------------------------------------------
// Path families
// ---------------------------------------------------------------------------

struct PathFamily {
    int u = -1, v = -1;
    std::vector<std::vector<int>> paths;  // each path: u .. v
    std::unordered_map<std::uint64_t, int> edge_multiplicity;
    int max_read = 0;
    int target_read_k = 1;
    PathParams params;  // effective parameters for this build
    bool degraded = false;
    int leaf_pairs = 0;             // matched leaf pairs attempted
    int cross_misses = 0;           // pairs with no crossing edge
    int second_stage_failures = 0;  // pairs whose second-stage growth died
    int max_bad_edges = 0;

    int size() const { return static_cast<int>(paths.size()); }
};

enum class BuildFailureReason { tree_growth, too_few_paths };

struct BuildResult {
    std::optional<PathFamily> family;
    BuildFailureReason reason = BuildFailureReason::tree_growth;
    GrowFailure where;    // tree_growth only
    int paths_built = 0;  // too_few_paths only
    bool ok() const { return family.has_value(); }
};

namespace detail {

inline void validate_params(const PathParams& p) {
    if (p.depth1 < 1) throw std::invalid_argument("path params: depth1 < 1");
    if (p.depth2 < 0) throw std::invalid_argument("path params: depth2 < 0");
    if (p.branch_first < 1 || p.branch_rest < 1)
        throw std::invalid_argument("path params: branch factors must be >= 1");
    if (p.min_paths < 1) throw std::invalid_argument("path params: min_paths < 1");
    if (p.max_paths < p.min_paths)
        throw std::invalid_argument("path params: max_paths < min_paths");
}

}  // namespace detail

// Full two-stage construction between u and v:
//   1. grow T_u, then T_v vertex-disjoint from it;
//   2. match leaf i of T_u with leaf i of T_v;
//   3. per matched pair, grow second-stage trees disjoint from everything
//      built so far for this pair, then find one crossing edge between their
//      leaf sets (lexicographically smallest hit);
//   4. assemble u -> leaf_u -> cross -> leaf_v -> v and count every edge's
//      multiplicity across the family.
// Deterministic for fixed (graph, u, v, params).
inline BuildResult build_path_family(const QueryGraph& g, int u, int v,
                                     const PathParams& params) {
    if (u == v) throw std::invalid_argument("build: u == v");
    if (u < 0 || v < 0 || u >= g.n() || v >= g.n())
        throw std::invalid_argument("build: endpoint out of range");
    detail::validate_params(params);

    detail::ForestState forest(g.n());
    forest.reset();
    forest.insert(v);  // T_u must not swallow the other endpoint
    detail::GrowSpec first{params.depth1, params.branch_first,
                           params.branch_rest, params.min_paths};

    GrowResult ru = detail::grow(g, u, first, forest);
    if (!ru.ok()) return {std::nullopt, BuildFailureReason::tree_growth, ru.failure, 0};
    GrowResult rv = detail::grow(g, v, first, forest);
    if (!rv.ok()) return {std::nullopt, BuildFailureReason::tree_growth, rv.failure, 0};

    const BfsTree& tu = *ru.tree;
    const BfsTree& tv = *rv.tree;

    PathFamily fam;
    fam.u = u;
    fam.v = v;
    fam.params = params;
    fam.degraded = tu.degraded || tv.degraded;
    fam.max_bad_edges = std::max(tu.max_bad_edges, tv.max_bad_edges);

    const int matched = static_cast<int>(
        std::min(tu.leaves().size(), tv.leaves().size()));
    if (tu.leaves().size() != tv.leaves().size()) fam.degraded = true;

    detail::GrowSpec second{params.depth2, params.branch_rest,
                            params.branch_rest, 1};
    for (int i = 0; i < matched; ++i) {
        if (fam.size() >= params.max_paths) break;
        ++fam.leaf_pairs;
        const int lu = tu.leaves()[i];
        const int lv = tv.leaves()[i];

        std::vector<int> xs{lu}, ys{lv};
        std::optional<BfsTree> su, sv;
        if (params.depth2 > 0) {
            GrowResult gu = detail::grow(g, lu, second, forest);
            if (!gu.ok()) {
                ++fam.second_stage_failures;
                continue;
            }
            GrowResult gv = detail::grow(g, lv, second, forest);
            if (!gv.ok()) {
                ++fam.second_stage_failures;
                continue;
            }
            fam.degraded = fam.degraded || gu.tree->degraded || gv.tree->degraded;
            fam.max_bad_edges = std::max(
                {fam.max_bad_edges, gu.tree->max_bad_edges, gv.tree->max_bad_edges});
            su = std::move(gu.tree);
            sv = std::move(gv.tree);
            xs = su->leaves();
            ys = sv->leaves();
            std::sort(xs.begin(), xs.end());
            std::sort(ys.begin(), ys.end());
        }

        int cx = -1, cy = -1;
        for (int x : xs) {
            for (int y : ys) {
                if (g.has_edge(x, y)) {
                    cx = x;
                    cy = y;
                    break;
                }
            }
            if (cx >= 0) break;
        }
        if (cx < 0) {
            ++fam.cross_misses;
            continue;
        }

        std::vector<int> path = tu.path_from_root(lu);
        if (params.depth2 > 0) {
            std::vector<int> a = su->path_from_root(cx);
            path.insert(path.end(), a.begin() + 1, a.end());
            std::vector<int> b = sv->path_from_root(cy);
            std::reverse(b.begin(), b.end());
            path.insert(path.end(), b.begin(), b.end());
        }
        std::vector<int> tail = tv.path_from_root(lv);
        std::reverse(tail.begin(), tail.end());
        path.insert(path.end(),
                    params.depth2 > 0 ? tail.begin() + 1 : tail.begin(),
                    tail.end());
        for (std::size_t e = 0; e + 1 < path.size(); ++e) {
            int a = std::min(path[e], path[e + 1]);
            int b = std::max(path[e], path[e + 1]);
            ++fam.edge_multiplicity[pair_key(a, b)];
        }
        fam.paths.push_back(std::move(path));
    }

    if (fam.size() < params.min_paths)
        return {std::nullopt, BuildFailureReason::too_few_paths, GrowFailure{},
                fam.size()};

    for (const auto& [key, count] : fam.edge_multiplicity)
        fam.max_read = std::max(fam.max_read, count);
    const double scale =
        params.read_k_scale > 0 ? params.read_k_scale : params.branch_first;
    fam.target_read_k = std::max(
        1, static_cast<int>(std::ceil(fam.size() / std::max(scale, 1.0))));
    return {std::move(fam), BuildFailureReason::tree_growth, GrowFailure{}, 0};
}

// Debug dump: one path per line, space-separated item indices.
inline void write_paths(std::ostream& os, const PathFamily& fam) {
    for (const auto& path : fam.paths) {
        for (std::size_t i = 0; i < path.size(); ++i) {
            if (i) os << ' ';
            os << path[i];
        }
        os << '\n';
    }
}

}  // namespace pathvote
