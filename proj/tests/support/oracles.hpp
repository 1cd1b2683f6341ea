#pragma once

// Brute-force reference computations used only by tests. None of these share
// code paths with the library beyond the elementary gft/rev definitions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "gbbtrade/benchmarks.hpp"
#include "gbbtrade/distribution.hpp"
#include "gbbtrade/trade.hpp"

namespace oracle {

// Dense scan of every two-action mixture x*a + (1-x)*b with x on a 1/steps
// lattice; singletons are the x = 0 and x = 1 ends. Returns -inf when nothing
// is feasible. For g in [0,1] the lattice loses at most 1/steps.
inline double dense_mixture_lp(const std::vector<gbbtrade::ActionScore>& scores, int steps = 10000) {
    double best = -std::numeric_limits<double>::infinity();
    const std::size_t n = scores.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (scores[i].r >= 0.0) best = std::max(best, scores[i].g);
        for (std::size_t j = i + 1; j < n; ++j) {
            for (int k = 1; k < steps; ++k) {
                const double x = static_cast<double>(k) / steps;
                const double r = x * scores[i].r + (1.0 - x) * scores[j].r;
                if (r >= 0.0) best = std::max(best, x * scores[i].g + (1.0 - x) * scores[j].g);
            }
        }
    }
    return best;
}

// Same LP over three-action mixtures on a coarse simplex lattice; used to
// confirm that larger supports never beat the two-point optimum.
inline double dense_triple_lp(const std::vector<gbbtrade::ActionScore>& scores, int steps = 60) {
    double best = -std::numeric_limits<double>::infinity();
    const std::size_t n = scores.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k)
                for (int a = 0; a <= steps; ++a)
                    for (int b = 0; a + b <= steps; ++b) {
                        const double x = static_cast<double>(a) / steps;
                        const double y = static_cast<double>(b) / steps;
                        const double z = 1.0 - x - y;
                        const double r = x * scores[i].r + y * scores[j].r + z * scores[k].r;
                        if (r >= 0.0) best = std::max(best, x * scores[i].g + y * scores[j].g + z * scores[k].g);
                    }
    return best;
}

// Best fixed price by direct summation at every candidate price. The value
// is a sum of indicators of closed intervals [s, b], so some s_t (or 0)
// attains the maximum; every b_t and the unit endpoints are tried as well.
inline double fixed_price(const std::vector<gbbtrade::MarketOutcome>& outcomes) {
    std::vector<double> candidates{0.0, 1.0};
    for (const auto& o : outcomes) {
        candidates.push_back(o.s());
        candidates.push_back(o.b());
    }
    double best = -std::numeric_limits<double>::infinity();
    for (double p : candidates) {
        double v = 0.0;
        for (const auto& o : outcomes) {
            if (o.s() <= p && p <= o.b()) v += o.b() - o.s();
        }
        best = std::max(best, v);
    }
    return best;
}

inline double fixed_price_value(const std::vector<gbbtrade::MarketOutcome>& outcomes, double p) {
    double v = 0.0;
    for (const auto& o : outcomes) v += gbbtrade::gft(gbbtrade::PriceQuote(p, p), o);
    return v;
}

// Midpoint-rule total variation on an n x n lattice; exact when every box
// edge lies on a multiple of 1/n.
inline double tv_lattice(const gbbtrade::BoxMixture& a, const gbbtrade::BoxMixture& b, int n) {
    double sum = 0.0;
    const double h = 1.0 / n;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double s = (i + 0.5) * h;
            const double v = (j + 0.5) * h;
            sum += std::abs(a.density(s, v) - b.density(s, v)) * h * h;
        }
    }
    return 0.5 * sum;
}

// Plain trade-term definitions straight from the integrals, evaluated by a
// fine Riemann sum over U (or V).
inline double seller_term_numeric(const gbbtrade::PriceQuote& q, const gbbtrade::MarketOutcome& o, int n = 200000) {
    if (o.b() < q.q()) return 0.0;
    long long hits = 0;
    for (int i = 0; i < n; ++i) {
        const double u = (i + 0.5) / n;
        if (o.s() <= u && u <= q.p()) ++hits;
    }
    return static_cast<double>(hits) / n;
}

}  // namespace oracle
