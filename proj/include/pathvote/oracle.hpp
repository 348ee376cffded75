#pragma once

#include <cstdint>
#include <stdexcept>

#include "labeling.hpp"
#include "noise.hpp"
#include "rng.hpp"

namespace pathvote {

// One answered query. `value` is +1/-1 for the sign model and a residue in
// [0, k) for the modular models, oriented from x to y.
struct QueryResponse {
    int x = 0;
    int y = 0;
    int value = 0;
};

// Answers pairwise queries under the configured corruption model. The answer
// for a pair is a pure function of (seed, min(x,y), max(x,y)): asking again —
// in either order — replays the same corruption, so no response cache is
// needed to make the oracle consistent.
class NoisyOracle {
  public:
    NoisyOracle(const Labeling& labeling, NoiseSpec noise, std::uint64_t seed)
        : labeling_(&labeling), noise_(std::move(noise)), seed_(seed) {
        if (noise_.model == NoiseModel::modular_general &&
            static_cast<int>(noise_.dist.size()) != labeling.k)
            throw std::invalid_argument(
                "oracle: modular_general dist must have k entries");
    }

    const Labeling& labeling() const { return *labeling_; }
    const NoiseSpec& noise() const { return noise_; }

    QueryResponse query(int x, int y) const {
        if (x == y) throw std::invalid_argument("oracle: x == y");
        if (x < 0 || y < 0 || x >= labeling_->n || y >= labeling_->n)
            throw std::invalid_argument("oracle: item out of range");

        const int a = x < y ? x : y;
        const int b = x < y ? y : x;
        SplitMix64 rng(derive_seed(seed_, static_cast<std::uint64_t>(a),
                                   static_cast<std::uint64_t>(b)));
        const double u = rng.next_unit();

        QueryResponse r;
        r.x = x;
        r.y = y;
        if (noise_.model == NoiseModel::sign_flip) {
            int truth = labeling_->same_group(a, b) ? +1 : -1;
            r.value = (u < noise_.q) ? -truth : truth;
            return r;
        }

        const int k = labeling_->k;
        int err = 0;
        if (noise_.model == NoiseModel::modular_pm) {
            // Same threshold layout as modular_general([1-q, q/2, 0.., q/2]),
            // so the two models agree bit-for-bit under one seed.
            if (u < 1.0 - noise_.q)
                err = 0;
            else if (u < 1.0 - noise_.q / 2)
                err = 1;
            else
                err = k - 1;
        } else {
            double cum = 0.0;
            err = k - 1;
            for (int j = 0; j < k; ++j) {
                cum += noise_.dist[j];
                if (u < cum) {
                    err = j;
                    break;
                }
            }
        }
        int forward = (labeling_->difference(a, b) + err) % k;
        r.value = (x == a) ? forward : (k - forward) % k;
        return r;
    }

  private:
    const Labeling* labeling_;
    NoiseSpec noise_;
    std::uint64_t seed_;
};

}  // namespace pathvote
