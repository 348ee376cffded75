#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace pathvote {

enum class NoiseModel { sign_flip, modular_pm, modular_general };

inline std::string to_string(NoiseModel m) {
    switch (m) {
        case NoiseModel::sign_flip: return "sign_flip";
        case NoiseModel::modular_pm: return "modular_pm";
        case NoiseModel::modular_general: return "modular_general";
    }
    throw std::logic_error("unknown noise model");
}

inline NoiseModel noise_model_from_string(const std::string& s) {
    if (s == "sign_flip") return NoiseModel::sign_flip;
    if (s == "modular_pm") return NoiseModel::modular_pm;
    if (s == "modular_general") return NoiseModel::modular_general;
    throw std::invalid_argument("unknown noise model: " + s);
}

// Corruption model for pairwise queries.
//
//   sign_flip        same/different answers, each flipped with prob q
//   modular_pm       difference answers shifted by +1 or -1 mod k,
//                    each with prob q/2
//   modular_general  difference answers shifted by +j with prob dist[j]
struct NoiseSpec {
    NoiseModel model = NoiseModel::sign_flip;
    double q = 0.0;
    std::vector<double> dist;  // modular_general only, dist[0] = P(no error)

    static NoiseSpec sign_flip(double q) {
        check_q(q);
        NoiseSpec s;
        s.model = NoiseModel::sign_flip;
        s.q = q;
        return s;
    }

    static NoiseSpec modular_pm(double q) {
        check_q(q);
        NoiseSpec s;
        s.model = NoiseModel::modular_pm;
        s.q = q;
        return s;
    }

    static NoiseSpec modular_general(std::vector<double> dist) {
        if (dist.size() < 2)
            throw std::invalid_argument("noise: dist needs >= 2 entries");
        double sum = 0.0;
        for (double p : dist) {
            if (p < 0.0 || p > 1.0)
                throw std::invalid_argument("noise: dist entries must be in [0,1]");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("noise: dist must sum to 1");
        NoiseSpec s;
        s.model = NoiseModel::modular_general;
        s.q = 1.0 - dist[0];
        s.dist = std::move(dist);
        return s;
    }

    bool modular() const { return model != NoiseModel::sign_flip; }

    // Bias gap c driving the budget/length formulas. For the general model
    // there is no single q; we use the no-error mass as a stand-in and clamp
    // away from zero so auto-budgeting stays finite.
    double gap() const {
        if (model == NoiseModel::modular_general)
            return std::clamp(dist[0] - 0.5, 0.02, 0.5);
        return 0.5 - q;
    }

  private:
    static void check_q(double q) {
        if (!(q >= 0.0) || !(q < 0.5))
            throw std::invalid_argument("noise: q must satisfy 0 <= q < 1/2");
    }
};

}  // namespace pathvote
