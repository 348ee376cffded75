#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rng.hpp"

namespace pathvote {

// Ground-truth assignment of n items to k clusters. The recovery pipeline
// never reads this directly; only the oracle and the scorer do.
struct Labeling {
    int n = 0;
    int k = 2;
    std::vector<int> groups;  // groups[item] in [0, k)

    bool same_group(int x, int y) const { return groups.at(x) == groups.at(y); }

    // (group(x) - group(y)) mod k, in [0, k).
    int difference(int x, int y) const {
        int d = (groups.at(x) - groups.at(y)) % k;
        return d < 0 ? d + k : d;
    }

    std::vector<int> group_sizes() const {
        std::vector<int> sizes(k, 0);
        for (int g : groups) ++sizes[g];
        return sizes;
    }
};

// Random labeling. With `sizes` empty each item picks its group uniformly;
// otherwise sizes must have k entries summing to n and the labeling is a
// seeded shuffle of exactly that composition.
inline Labeling make_labeling(int n, int k, const std::vector<int>& sizes,
                              std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("make_labeling: n must be >= 1");
    if (k < 2) throw std::invalid_argument("make_labeling: k must be >= 2");

    Labeling lab;
    lab.n = n;
    lab.k = k;
    lab.groups.resize(n);

    SplitMix64 rng(derive_seed(seed, 0x1ab31u));
    if (sizes.empty()) {
        for (int i = 0; i < n; ++i)
            lab.groups[i] = static_cast<int>(rng.next_below(k));
        return lab;
    }

    if (static_cast<int>(sizes.size()) != k)
        throw std::invalid_argument("make_labeling: sizes must have k entries");
    long long total = 0;
    for (int s : sizes) {
        if (s < 0) throw std::invalid_argument("make_labeling: negative size");
        total += s;
    }
    if (total != n)
        throw std::invalid_argument("make_labeling: sizes must sum to n");

    int pos = 0;
    for (int g = 0; g < k; ++g)
        for (int c = 0; c < sizes[g]; ++c) lab.groups[pos++] = g;
    // Fisher-Yates
    for (int i = n - 1; i > 0; --i) {
        int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
        std::swap(lab.groups[i], lab.groups[j]);
    }
    return lab;
}

inline std::vector<int> balanced_sizes(int n, int k) {
    std::vector<int> sizes(k, n / k);
    for (int g = 0; g < n % k; ++g) ++sizes[g];
    return sizes;
}

inline void to_json(nlohmann::json& j, const Labeling& lab) {
    j = nlohmann::json{{"n", lab.n}, {"k", lab.k}, {"groups", lab.groups}};
}

inline void from_json(const nlohmann::json& j, Labeling& lab) {
    j.at("n").get_to(lab.n);
    j.at("k").get_to(lab.k);
    j.at("groups").get_to(lab.groups);
    if (static_cast<int>(lab.groups.size()) != lab.n)
        throw std::invalid_argument("labeling json: groups length != n");
    for (int g : lab.groups)
        if (g < 0 || g >= lab.k)
            throw std::invalid_argument("labeling json: group out of range");
}

}  // namespace pathvote
