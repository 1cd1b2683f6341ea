#pragma once

#include <cstddef>
#include <vector>

namespace gbbtrade {

// Private valuations of one round: seller cost s and buyer value b.
class MarketOutcome {
public:
    MarketOutcome(double s, double b);

    double s() const { return s_; }
    double b() const { return b_; }

    friend bool operator==(const MarketOutcome&, const MarketOutcome&) = default;

private:
    double s_;
    double b_;
};

// Posted prices: p to the seller, q to the buyer.
class PriceQuote {
public:
    PriceQuote(double p, double q);

    double p() const { return p_; }
    double q() const { return q_; }

    friend bool operator==(const PriceQuote&, const PriceQuote&) = default;

private:
    double p_;
    double q_;
};

// The single bit revealed to the learner, with the quote that produced it.
struct TradeFeedback {
    bool traded;
    PriceQuote posted;
};

// Trade fires iff s <= p and b >= q.
inline bool trades(const PriceQuote& quote, const MarketOutcome& outcome) {
    return outcome.s() <= quote.p() && outcome.b() >= quote.q();
}

TradeFeedback observe(const PriceQuote& quote, const MarketOutcome& outcome);

// Gain from trade (b - s) when the trade fires; signed.
double gft(const PriceQuote& quote, const MarketOutcome& outcome);

// Revenue (q - p) of the intermediary when the trade fires; signed.
double rev(const PriceQuote& quote, const MarketOutcome& outcome);

// E_U[1(s <= U <= p, q <= b)] for U ~ Uniform[0,1], in closed form.
double seller_term(const PriceQuote& quote, const MarketOutcome& outcome);

// E_V[1(s <= p, q <= V <= b)] for V ~ Uniform[0,1], in closed form.
double buyer_term(const PriceQuote& quote, const MarketOutcome& outcome);

// Revenue recoverable from the one-bit feedback alone.
inline double realized_rev(const TradeFeedback& fb) {
    return fb.traded ? fb.posted.q() - fb.posted.p() : 0.0;
}

// Uniform K x K price grid {(i/(K-1), j/(K-1))}. Action index = i*K + j with
// i the seller coordinate and j the buyer coordinate, so index order is
// lexicographic in (p, q).
class GridSpec {
public:
    explicit GridSpec(int k);

    int k() const { return k_; }
    std::size_t size() const { return points_.size(); }

    const std::vector<PriceQuote>& points() const { return points_; }
    const std::vector<double>& seller_prices() const { return seller_prices_; }
    const std::vector<double>& buyer_prices() const { return buyer_prices_; }

    const PriceQuote& point(std::size_t index) const { return points_[index]; }
    std::size_t index(int seller_idx, int buyer_idx) const {
        return static_cast<std::size_t>(seller_idx) * static_cast<std::size_t>(k_) +
               static_cast<std::size_t>(buyer_idx);
    }
    int seller_index(std::size_t index) const { return static_cast<int>(index / k_); }
    int buyer_index(std::size_t index) const { return static_cast<int>(index % k_); }

    // Coordinate i/(K-1); the endpoints are exact.
    double coordinate(int i) const;

private:
    int k_;
    std::vector<PriceQuote> points_;
    std::vector<double> seller_prices_;
    std::vector<double> buyer_prices_;
};

GridSpec grid_build(int k);

}  // namespace gbbtrade
