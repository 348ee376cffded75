#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "labeling.hpp"
#include "path_builder.hpp"
#include "query_graph.hpp"

namespace pathvote {

// Product of edge signs along a path. Every consecutive pair must be a
// queried edge of a sign-model graph.
inline int path_sign(const std::vector<int>& path, const QueryGraph& g) {
    if (g.variant() != NoiseModel::sign_flip)
        throw std::invalid_argument("path_sign: graph is not sign-valued");
    if (path.size() < 2)
        throw std::invalid_argument("path_sign: path needs >= 2 items");
    int sign = 1;
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
        sign *= g.value(path[i], path[i + 1]);
    return sign;
}

// Oriented telescoping sum of modular responses along a path, mod k. Edges
// traversed against their stored orientation contribute the negation.
inline int path_difference(const std::vector<int>& path, const QueryGraph& g,
                           int k) {
    if (g.variant() == NoiseModel::sign_flip)
        throw std::invalid_argument("path_difference: graph is sign-valued");
    if (path.size() < 2)
        throw std::invalid_argument("path_difference: path needs >= 2 items");
    int sum = 0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
        sum = (sum + g.value(path[i], path[i + 1])) % k;
    return sum;
}

// Decision for one endpoint pair. For the sign model the statistic is the
// signed majority sum; for the modular models it is the per-difference path
// counts. `difference` estimates (group(u) - group(v)) mod k; the sign model
// uses 0 for "same", 1 for "different".
struct PairVerdict {
    int u = -1, v = -1;
    bool same = true;
    int difference = 0;
    long long majority_sum = 0;
    std::vector<int> counts;
    int n_paths = 0;
    int max_read = 0;
    bool tie = false;
};

inline PairVerdict decide_pair(const PathFamily& family, const QueryGraph& g) {
    if (family.size() < 1)
        throw std::invalid_argument("decide_pair: empty path family");

    PairVerdict verdict;
    verdict.u = family.u;
    verdict.v = family.v;
    verdict.n_paths = family.size();
    verdict.max_read = family.max_read;

    if (g.variant() == NoiseModel::sign_flip) {
        long long sum = 0;
        for (const auto& path : family.paths) sum += path_sign(path, g);
        verdict.majority_sum = sum;
        verdict.same = sum >= 0;
        verdict.difference = verdict.same ? 0 : 1;
        verdict.tie = sum == 0;
        return verdict;
    }

    const int k = g.k();
    verdict.counts.assign(k, 0);
    for (const auto& path : family.paths)
        ++verdict.counts[path_difference(path, g, k)];
    // plurality; ties break toward the value nearest 0 mod k, then smaller
    int best = 0;
    for (int d = 1; d < k; ++d) {
        if (verdict.counts[d] > verdict.counts[best]) {
            best = d;
        } else if (verdict.counts[d] == verdict.counts[best]) {
            int dd = std::min(d, k - d), db = std::min(best, k - best);
            if (dd < db || (dd == db && d < best)) best = d;
        }
    }
    for (int d = 0; d < k; ++d)
        if (d != best && verdict.counts[d] == verdict.counts[best])
            verdict.tie = true;
    verdict.difference = best;
    verdict.same = best == 0;
    return verdict;
}

// ---------------------------------------------------------------------------
// Whole-instance recovery
// ---------------------------------------------------------------------------

struct Clustering {
    int n = 0;
    int k = 2;
    std::vector<int> assignment;
};

inline void to_json(nlohmann::json& j, const Clustering& c) {
    j = nlohmann::json{{"n", c.n}, {"k", c.k}, {"assignment", c.assignment}};
}

inline void from_json(const nlohmann::json& j, Clustering& c) {
    j.at("n").get_to(c.n);
    j.at("k").get_to(c.k);
    j.at("assignment").get_to(c.assignment);
    if (static_cast<int>(c.assignment.size()) != c.n)
        throw std::invalid_argument("clustering json: assignment length != n");
}

enum class RecoveryMode { anchored, all_pairs };

inline std::string to_string(RecoveryMode m) {
    return m == RecoveryMode::anchored ? "anchored" : "all-pairs";
}

inline RecoveryMode recovery_mode_from_string(const std::string& s) {
    if (s == "anchored") return RecoveryMode::anchored;
    if (s == "all-pairs" || s == "all_pairs") return RecoveryMode::all_pairs;
    throw std::invalid_argument("unknown recovery mode: " + s);
}

struct RecoveryDiagnostics {
    int pairs_attempted = 0;
    int pairs_failed = 0;
    int ties = 0;
    std::vector<int> unassigned;            // items left in cluster 0 by failure
    long long inconsistent_triangles = 0;   // all-pairs mode only
    double mean_paths = 0.0;                // over built pairs
    double mean_max_read = 0.0;
    int max_bad_edges = 0;
    bool degraded = false;
};

struct RecoveryResult {
    Clustering clustering;
    RecoveryDiagnostics diag;
};

namespace detail {

// Class the verdict votes for, given the anchor's class is 0:
// difference estimates group(x) - group(y), so y's class is -d mod k.
inline int vote_class(int d, int k) { return (k - d % k) % k; }

}  // namespace detail

// Recovers the clustering from the observed graph. Anchored mode decides the
// n-1 pairs (0, v) and reads classes straight off the verdicts. All-pairs
// mode decides every pair and resolves each item by plurality over all
// anchor-composed votes, counting inconsistent triangles as a diagnostic.
// Pair construction failures leave items in cluster 0, flagged in the
// diagnostics, rather than aborting.
inline RecoveryResult recover_clusters(const QueryGraph& g,
                                       const PathParams& params,
                                       RecoveryMode mode) {
    const int n = g.n();
    if (n < 2) throw std::invalid_argument("recover: graph needs >= 2 items");
    const bool sign = g.variant() == NoiseModel::sign_flip;
    const int k = sign ? 2 : g.k();

    RecoveryResult out;
    out.clustering.n = n;
    out.clustering.k = k;
    out.clustering.assignment.assign(n, 0);
    RecoveryDiagnostics& diag = out.diag;

    long long paths_total = 0, read_total = 0;
    int built = 0;
    auto absorb = [&](const PathFamily& fam) {
        paths_total += fam.size();
        read_total += fam.max_read;
        diag.max_bad_edges = std::max(diag.max_bad_edges, fam.max_bad_edges);
        diag.degraded = diag.degraded || fam.degraded;
        ++built;
    };

    if (mode == RecoveryMode::anchored) {
        for (int v = 1; v < n; ++v) {
            ++diag.pairs_attempted;
            BuildResult built_pair = build_path_family(g, 0, v, params);
            if (!built_pair.ok()) {
                ++diag.pairs_failed;
                diag.unassigned.push_back(v);
                continue;
            }
            absorb(*built_pair.family);
            PairVerdict verdict = decide_pair(*built_pair.family, g);
            if (verdict.tie) ++diag.ties;
            int d = sign ? (verdict.same ? 0 : 1) : verdict.difference;
            out.clustering.assignment[v] = detail::vote_class(d, k);
        }
    } else {
        auto offset = [n](long long a) { return a * n - a * (a + 1) / 2; };
        auto rank = [&](int a, int b) { return offset(a) + (b - a - 1); };
        std::vector<int> dval(pair_count(n), -1);
        for (int a = 0; a < n; ++a) {
            for (int b = a + 1; b < n; ++b) {
                ++diag.pairs_attempted;
                BuildResult built_pair = build_path_family(g, a, b, params);
                if (!built_pair.ok()) {
                    ++diag.pairs_failed;
                    continue;
                }
                absorb(*built_pair.family);
                PairVerdict verdict = decide_pair(*built_pair.family, g);
                if (verdict.tie) ++diag.ties;
                dval[rank(a, b)] =
                    sign ? (verdict.same ? 0 : 1) : verdict.difference;
            }
        }
        // d oriented from x to y for any x != y
        auto d_of = [&](int x, int y) {
            int v = dval[rank(std::min(x, y), std::max(x, y))];
            if (v < 0) return -1;
            return x < y ? v : (k - v) % k;
        };
        for (int v = 1; v < n; ++v) {
            std::vector<long long> votes(k, 0);
            bool any = false;
            if (int d = d_of(0, v); d >= 0) {
                ++votes[detail::vote_class(d, k)];
                any = true;
            }
            for (int w = 1; w < n; ++w) {
                if (w == v) continue;
                int d0w = d_of(0, w), dwv = d_of(w, v);
                if (d0w < 0 || dwv < 0) continue;
                ++votes[detail::vote_class((d0w + dwv) % k, k)];
                any = true;
            }
            if (!any) {
                diag.unassigned.push_back(v);
                continue;
            }
            int best = 0;
            for (int cls = 1; cls < k; ++cls)
                if (votes[cls] > votes[best]) best = cls;
            out.clustering.assignment[v] = best;
        }
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                for (int c = b + 1; c < n; ++c) {
                    int ab = d_of(a, b), bc = d_of(b, c), ac = d_of(a, c);
                    if (ab < 0 || bc < 0 || ac < 0) continue;
                    if ((ab + bc) % k != ac) ++diag.inconsistent_triangles;
                }
    }

    if (built > 0) {
        diag.mean_paths = static_cast<double>(paths_total) / built;
        diag.mean_max_read = static_cast<double>(read_total) / built;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

struct ClusteringScore {
    bool exact = false;
    int misclassified = 0;
};

// Minimum mislabel count over relabelings of the predicted clusters:
// exhaustive over all permutations up to k = 7, greedy confusion-matrix
// matching beyond.
inline ClusteringScore clustering_error(const Clustering& predicted,
                                        const Labeling& truth) {
    if (predicted.n != truth.n)
        throw std::invalid_argument("clustering_error: size mismatch");
    const int k = std::max(predicted.k, truth.k);
    std::vector<std::vector<long long>> conf(k, std::vector<long long>(k, 0));
    for (int i = 0; i < truth.n; ++i)
        ++conf[predicted.assignment[i]][truth.groups[i]];

    long long best_hit = -1;
    if (k <= 7) {
        std::vector<int> perm(k);
        std::iota(perm.begin(), perm.end(), 0);
        do {
            long long hit = 0;
            for (int p = 0; p < k; ++p) hit += conf[p][perm[p]];
            best_hit = std::max(best_hit, hit);
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        std::vector<char> row_used(k, 0), col_used(k, 0);
        best_hit = 0;
        for (int round = 0; round < k; ++round) {
            long long top = -1;
            int tr = -1, tc = -1;
            for (int r = 0; r < k; ++r) {
                if (row_used[r]) continue;
                for (int c = 0; c < k; ++c) {
                    if (col_used[c]) continue;
                    if (conf[r][c] > top) {
                        top = conf[r][c];
                        tr = r;
                        tc = c;
                    }
                }
            }
            if (tr < 0) break;
            row_used[tr] = col_used[tc] = 1;
            best_hit += top;
        }
    }

    ClusteringScore score;
    score.misclassified = truth.n - static_cast<int>(best_hit);
    score.exact = score.misclassified == 0;
    return score;
}

}  // namespace pathvote
