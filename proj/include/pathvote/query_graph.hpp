#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "oracle.hpp"

namespace pathvote {

inline std::uint64_t pair_key(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

inline long long pair_count(int n) {
    return static_cast<long long>(n) * (n - 1) / 2;
}

// Which pairs get queried up front.
struct SamplingPlan {
    enum class Mode { fixed_count, bernoulli };
    Mode mode = Mode::bernoulli;
    long long query_count = 0;  // fixed_count
    double edge_prob = 0.0;     // bernoulli

    static SamplingPlan fixed_count(long long q) {
        if (q < 0) throw std::invalid_argument("sampling: query count < 0");
        SamplingPlan p;
        p.mode = Mode::fixed_count;
        p.query_count = q;
        return p;
    }

    static SamplingPlan bernoulli(double prob) {
        if (!(prob >= 0.0 && prob <= 1.0))
            throw std::invalid_argument("sampling: p must be in [0,1]");
        SamplingPlan p;
        p.mode = Mode::bernoulli;
        p.edge_prob = prob;
        return p;
    }
};

// The observed graph: queried pairs with their (possibly corrupted) answers.
// Immutable once built; all lookups are read-only and thread-safe.
//
// Modular responses are stored oriented from min(x,y) to max(x,y); reading
// the edge in the other direction negates the value mod k.
class QueryGraph {
  public:
    QueryGraph(int n, int k, NoiseModel variant)
        : n_(n), k_(k), variant_(variant), adj_(n) {
        if (n < 1) throw std::invalid_argument("graph: n must be >= 1");
        if (k < 2) throw std::invalid_argument("graph: k must be >= 2");
    }

    int n() const { return n_; }
    int k() const { return k_; }
    NoiseModel variant() const { return variant_; }
    long long edge_count() const { return static_cast<long long>(values_.size()); }

    void add_edge(int x, int y, int value) {
        if (x == y) throw std::invalid_argument("graph: self-loop");
        if (x < 0 || y < 0 || x >= n_ || y >= n_)
            throw std::invalid_argument("graph: item out of range");
        if (variant_ == NoiseModel::sign_flip) {
            if (value != 1 && value != -1)
                throw std::invalid_argument("graph: sign value must be +1/-1");
        } else if (value < 0 || value >= k_) {
            throw std::invalid_argument("graph: modular value out of range");
        }
        int a = std::min(x, y), b = std::max(x, y);
        int stored = value;
        if (variant_ != NoiseModel::sign_flip && x != a)
            stored = (k_ - value) % k_;
        auto [it, inserted] = values_.emplace(pair_key(a, b), stored);
        if (!inserted) throw std::invalid_argument("graph: duplicate edge");
        adj_[a].push_back(b);
        adj_[b].push_back(a);
    }

    // Sorts adjacency lists; call once after the last add_edge.
    void finalize() {
        for (auto& nbrs : adj_) std::sort(nbrs.begin(), nbrs.end());
    }

    bool has_edge(int x, int y) const {
        if (x == y) return false;
        return values_.count(pair_key(std::min(x, y), std::max(x, y))) > 0;
    }

    // Response value oriented from x to y. Throws if the pair was not queried.
    int value(int x, int y) const {
        auto it = values_.find(pair_key(std::min(x, y), std::max(x, y)));
        if (it == values_.end())
            throw std::invalid_argument("graph: pair not queried");
        if (variant_ == NoiseModel::sign_flip || x < y) return it->second;
        return (k_ - it->second) % k_;
    }

    const std::vector<int>& neighbors(int v) const { return adj_.at(v); }
    int degree(int v) const { return static_cast<int>(adj_.at(v).size()); }

    // Edges as (a, b, stored value) with a < b, ascending — the canonical
    // order used by the text format.
    std::vector<std::tuple<int, int, int>> sorted_edges() const {
        std::vector<std::tuple<int, int, int>> out;
        out.reserve(values_.size());
        for (const auto& [key, val] : values_)
            out.emplace_back(static_cast<int>(key >> 32),
                             static_cast<int>(key & 0xffffffffULL), val);
        std::sort(out.begin(), out.end());
        return out;
    }

  private:
    int n_;
    int k_;
    NoiseModel variant_;
    std::vector<std::vector<int>> adj_;
    std::unordered_map<std::uint64_t, int> values_;
};

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

// Pair index -> (a, b) with a < b, under the ordering (0,1),(0,2),..,(1,2),..
inline std::pair<int, int> unrank_pair(long long idx, int n) {
    // pairs with first element < a: offset(a) = a*n - a(a+1)/2
    auto offset = [n](long long a) { return a * n - a * (a + 1) / 2; };
    long long a = static_cast<long long>(
        (2.0 * n - 1.0 -
         std::sqrt((2.0 * n - 1.0) * (2.0 * n - 1.0) - 8.0 * static_cast<double>(idx))) /
        2.0);
    a = std::max(0LL, a - 2);
    while (offset(a + 1) <= idx) ++a;
    long long b = a + 1 + (idx - offset(a));
    return {static_cast<int>(a), static_cast<int>(b)};
}

inline QueryGraph sample_query_graph(const Labeling& labeling,
                                     const NoiseSpec& noise,
                                     const SamplingPlan& plan,
                                     std::uint64_t seed) {
    const int n = labeling.n;
    const long long total = pair_count(n);
    if (plan.mode == SamplingPlan::Mode::fixed_count && plan.query_count > total)
        throw std::invalid_argument("sampling: query count exceeds pair count");

    NoisyOracle oracle(labeling, noise, derive_seed(seed, 0x04ac1eu));
    SplitMix64 rng(derive_seed(seed, 0x5a3971eu));
    QueryGraph g(n, labeling.k, noise.model);

    if (plan.mode == SamplingPlan::Mode::bernoulli) {
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                if (rng.next_unit() < plan.edge_prob)
                    g.add_edge(a, b, oracle.query(a, b).value);
    } else {
        // Floyd's sampling: exactly Q distinct pair indices, uniform.
        std::unordered_set<long long> chosen;
        chosen.reserve(static_cast<std::size_t>(plan.query_count) * 2);
        for (long long j = total - plan.query_count; j < total; ++j) {
            long long idx = static_cast<long long>(
                rng.next_below(static_cast<std::uint64_t>(j) + 1));
            if (!chosen.insert(idx).second) chosen.insert(j);
        }
        std::vector<long long> order(chosen.begin(), chosen.end());
        std::sort(order.begin(), order.end());
        for (long long idx : order) {
            auto [a, b] = unrank_pair(idx, n);
            g.add_edge(a, b, oracle.query(a, b).value);
        }
    }
    g.finalize();
    return g;
}

// ---------------------------------------------------------------------------
// Budget
// ---------------------------------------------------------------------------

struct BudgetReport {
    long long budget = 0;  // after clamping
    double raw = 0.0;      // constant * n * ln n * (2c)^(-L)
    double length_scale = 0.0;
    bool clamped = false;
};

// ceil(constant * n * ln(n) * (2c)^(-L)) with L = ln n / ln ln n, clamped to
// C(n,2). c = 1/2 is the noiseless limit where the factor is 1.
inline BudgetReport query_budget_report(int n, double c, double constant = 20.0) {
    if (n < 3) throw std::invalid_argument("query_budget: n must be >= 3");
    if (!(c > 0.0 && c <= 0.5))
        throw std::invalid_argument("query_budget: c must be in (0,1/2]");
    if (!(constant > 0.0))
        throw std::invalid_argument("query_budget: constant must be > 0");

    BudgetReport rep;
    rep.length_scale = std::log(n) / std::log(std::log(n));
    rep.raw = constant * n * std::log(n) *
              std::pow(2.0 * c, -rep.length_scale);
    long long budget = static_cast<long long>(std::ceil(rep.raw));
    long long total = pair_count(n);
    rep.clamped = budget > total;
    rep.budget = rep.clamped ? total : budget;
    return rep;
}

inline long long query_budget(int n, double c, double constant = 20.0) {
    return query_budget_report(n, c, constant).budget;
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

struct DegreeReport {
    int min_degree = 0;
    std::vector<int> violating;  // items with degree < threshold
};

inline DegreeReport check_min_degree(const QueryGraph& g, double threshold) {
    DegreeReport rep;
    rep.min_degree = g.n() > 0 ? g.degree(0) : 0;
    for (int v = 0; v < g.n(); ++v) {
        int d = g.degree(v);
        rep.min_degree = std::min(rep.min_degree, d);
        if (d < threshold) rep.violating.push_back(v);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Text serialization: "n k variant" header, then "x y value" per edge.
// ---------------------------------------------------------------------------

inline void write_graph(std::ostream& os, const QueryGraph& g) {
    os << g.n() << ' ' << g.k() << ' ' << to_string(g.variant()) << '\n';
    for (const auto& [a, b, v] : g.sorted_edges())
        os << a << ' ' << b << ' ' << v << '\n';
}

inline QueryGraph read_graph(std::istream& is) {
    std::string header;
    if (!std::getline(is, header))
        throw std::invalid_argument("graph parse: missing header");
    std::istringstream hs(header);
    int n = 0, k = 0;
    std::string variant;
    if (!(hs >> n >> k >> variant))
        throw std::invalid_argument("graph parse: bad header");
    QueryGraph g(n, k, noise_model_from_string(variant));

    std::string line;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        int x = 0, y = 0, v = 0;
        if (!(ls >> x >> y >> v))
            throw std::invalid_argument("graph parse: bad edge at line " +
                                        std::to_string(lineno));
        g.add_edge(x, y, v);
    }
    g.finalize();
    return g;
}

}  // namespace pathvote
