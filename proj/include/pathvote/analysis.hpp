#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace pathvote {

// ---------------------------------------------------------------------------
// Path parity
// ---------------------------------------------------------------------------

// Probability that the sign product along a length-L path matches the truth,
// i.e. that an even number of its edges were flipped: (1 + (1-2q)^L) / 2.
inline double path_agree_prob(double q, int L) {
    if (!(q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("path_agree_prob: q must be in [0,1]");
    if (L < 0) throw std::invalid_argument("path_agree_prob: L must be >= 0");
    return (1.0 + std::pow(1.0 - 2.0 * q, L)) / 2.0;
}

// Same quantity computed by stepwise dynamic programming over the flip count
// parity, with no reference to the closed form. Cross-check oracle.
inline double parity_prob_oracle(double q, int L) {
    if (!(q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("parity_prob_oracle: q must be in [0,1]");
    if (L < 0) throw std::invalid_argument("parity_prob_oracle: L must be >= 0");
    double even = 1.0;
    for (int step = 0; step < L; ++step)
        even = even * (1.0 - q) + (1.0 - even) * q;
    return even;
}

// ---------------------------------------------------------------------------
// Accumulated modular noise: lazy walk on the k-cycle
// ---------------------------------------------------------------------------

// Distribution of the accumulated error after t queries: probs[m] is the
// probability the noise walk sits at residue m.
struct ChainDistribution {
    int k = 0;
    int t = 0;
    std::vector<double> probs;
};

// Spectral evaluation via the circulant eigenvalues 1 - q + q*cos(2*pi*j/k).
// Real cosine sums only; the imaginary parts cancel in exact arithmetic.
inline ChainDistribution chain_closed_form(double q, int k, int t) {
    if (k < 3) throw std::invalid_argument("chain_closed_form: k must be >= 3");
    if (!(q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("chain_closed_form: q must be in [0,1]");
    if (t < 0) throw std::invalid_argument("chain_closed_form: t must be >= 0");

    ChainDistribution out;
    out.k = k;
    out.t = t;
    out.probs.resize(k);
    const double tau = 2.0 * std::numbers::pi / k;
    for (int m = 0; m < k; ++m) {
        double sum = 0.0;
        for (int j = 0; j < k; ++j) {
            double lambda = 1.0 - q + q * std::cos(tau * j);
            sum += std::cos(tau * j * m) * std::pow(lambda, t);
        }
        out.probs[m] = std::max(sum / k, 0.0);
    }
    return out;
}

// Brute-force oracle: t-fold circular convolution of the one-step error
// distribution, starting from the point mass at 0. Also covers the general
// error model where step j has its own probability.
inline ChainDistribution chain_power_oracle(const std::vector<double>& q_dist,
                                            int k, int t) {
    if (static_cast<int>(q_dist.size()) != k)
        throw std::invalid_argument("chain_power_oracle: q_dist must have k entries");
    if (t < 0) throw std::invalid_argument("chain_power_oracle: t must be >= 0");
    double sum = 0.0;
    for (double p : q_dist) {
        if (p < 0.0) throw std::invalid_argument("chain_power_oracle: negative mass");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("chain_power_oracle: q_dist must sum to 1");

    ChainDistribution out;
    out.k = k;
    out.t = t;
    out.probs.assign(k, 0.0);
    out.probs[0] = 1.0;
    for (int step = 0; step < t; ++step) {
        std::vector<double> next(k, 0.0);
        for (int a = 0; a < k; ++a) {
            if (out.probs[a] == 0.0) continue;
            for (int b = 0; b < k; ++b)
                next[(a + b) % k] += out.probs[a] * q_dist[b];
        }
        out.probs = std::move(next);
    }
    return out;
}

// One-step distribution of the +/-1 walk: stay with prob 1-q, step each way
// with prob q/2.
inline std::vector<double> pm_step_dist(double q, int k) {
    std::vector<double> d(k, 0.0);
    d[0] = 1.0 - q;
    d[1 % k] += q / 2.0;
    d[(k - 1) % k] += q / 2.0;
    return d;
}

// Exact gap between the correct residue's mass and the runner-up residue,
// together with the nominal closed-form lower bound. The bound's prefactor
// can exceed the exact gap at small t, so callers should treat `bound` as a
// reported reference value, not a guarantee (see README notes).
struct PluralityGap {
    double exact = 0.0;  // probs[0] - probs[1]
    double bound = 0.0;  // 2(1-cos(2pi/k)) * (1-q+q cos(2pi/k))^t
};

inline PluralityGap plurality_gap(double q, int k, int t) {
    if (!(q >= 0.0 && q <= 0.5))
        throw std::invalid_argument("plurality_gap: q must be in [0,1/2]");
    ChainDistribution d = chain_closed_form(q, k, t);
    PluralityGap g;
    g.exact = d.probs[0] - d.probs[1];
    const double tau = 2.0 * std::numbers::pi / k;
    g.bound = 2.0 * (1.0 - std::cos(tau)) *
              std::pow(1.0 - q + q * std::cos(tau), t);
    return g;
}

// ---------------------------------------------------------------------------
// Tail bounds
// ---------------------------------------------------------------------------

// Binary KL divergence between Bernoulli(a) and Bernoulli(b).
inline double kl_divergence(double a, double b) {
    if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0))
        throw std::invalid_argument("kl_divergence: arguments must be in (0,1)");
    return a * std::log(a / b) + (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
}

enum class TailForm { kl, multiplicative_upper, multiplicative_lower };

inline TailForm tail_form_from_string(const std::string& s) {
    if (s == "kl") return TailForm::kl;
    if (s == "multiplicative-upper") return TailForm::multiplicative_upper;
    if (s == "multiplicative-lower") return TailForm::multiplicative_lower;
    throw std::invalid_argument("unknown tail form: " + s);
}

struct TailBound {
    long long r = 0;
    int k_read = 0;
    double q = 0.0;
    double epsilon = 0.0;
    double bound = 1.0;
};

// Concentration bound for a sum of r Bernoulli(q) indicators forming a
// read-k family (each underlying independent variable influences at most
// k_read of them). The exponent is the independent-case exponent divided by
// k_read.
//
//   kl                    P(Y >= (q+eps) r)     <= exp(-KL(q+eps||q) r / k)
//   multiplicative-upper  P(Y >= (1+eps) E[Y])  <= exp(-eps^2 E[Y] / (2k(1+eps/3)))
//   multiplicative-lower  P(Y <= (1-eps) E[Y])  <= exp(-eps^2 E[Y] / (2k))
//
// eps is the absolute shift for the KL form and the relative deviation for
// the multiplicative forms.
inline TailBound read_k_tail(long long r, int k_read, double q, double epsilon,
                             TailForm form) {
    if (r < 1) throw std::invalid_argument("read_k_tail: r must be >= 1");
    if (k_read < 1) throw std::invalid_argument("read_k_tail: k_read must be >= 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("read_k_tail: epsilon must be > 0");

    TailBound tb;
    tb.r = r;
    tb.k_read = k_read;
    tb.q = q;
    tb.epsilon = epsilon;
    const double mean = static_cast<double>(r) * q;
    switch (form) {
        case TailForm::kl:
            tb.bound = std::exp(-kl_divergence(q + epsilon, q) * r / k_read);
            break;
        case TailForm::multiplicative_upper:
            if (!(q > 0.0 && q <= 1.0))
                throw std::invalid_argument("read_k_tail: q must be in (0,1]");
            tb.bound = std::exp(-epsilon * epsilon * mean /
                                (2.0 * k_read * (1.0 + epsilon / 3.0)));
            break;
        case TailForm::multiplicative_lower:
            if (!(q > 0.0 && q <= 1.0))
                throw std::invalid_argument("read_k_tail: q must be in (0,1]");
            tb.bound = std::exp(-epsilon * epsilon * mean / (2.0 * k_read));
            break;
    }
    tb.bound = std::min(tb.bound, 1.0);
    return tb;
}

// Expected signed-majority statistic for N paths of length L at gap c:
// N * (2c)^L. c = 1/2 is the legitimate noiseless limit.
inline double expected_majority_mean(long long N, double c, int L) {
    if (N < 1) throw std::invalid_argument("expected_majority_mean: N must be >= 1");
    if (!(c > 0.0 && c <= 0.5))
        throw std::invalid_argument("expected_majority_mean: c must be in (0,1/2]");
    if (L < 0) throw std::invalid_argument("expected_majority_mean: L must be >= 0");
    return static_cast<double>(N) * std::pow(2.0 * c, L);
}

}  // namespace pathvote
