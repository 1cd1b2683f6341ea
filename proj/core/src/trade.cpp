#include "gbbtrade/trade.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gbbtrade/errors.hpp"

namespace gbbtrade {

namespace {

void require_unit(double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw DomainError(std::string(what) + " must lie in [0,1], got " + std::to_string(v));
    }
}

}  // namespace

MarketOutcome::MarketOutcome(double s, double b) : s_(s), b_(b) {
    require_unit(s, "seller valuation");
    require_unit(b, "buyer valuation");
}

PriceQuote::PriceQuote(double p, double q) : p_(p), q_(q) {
    require_unit(p, "seller price");
    require_unit(q, "buyer price");
}

TradeFeedback observe(const PriceQuote& quote, const MarketOutcome& outcome) {
    return TradeFeedback{trades(quote, outcome), quote};
}

double gft(const PriceQuote& quote, const MarketOutcome& outcome) {
    return trades(quote, outcome) ? outcome.b() - outcome.s() : 0.0;
}

double rev(const PriceQuote& quote, const MarketOutcome& outcome) {
    return trades(quote, outcome) ? quote.q() - quote.p() : 0.0;
}

double seller_term(const PriceQuote& quote, const MarketOutcome& outcome) {
    if (outcome.b() < quote.q()) return 0.0;
    return std::max(0.0, quote.p() - outcome.s());
}

double buyer_term(const PriceQuote& quote, const MarketOutcome& outcome) {
    if (outcome.s() > quote.p()) return 0.0;
    return std::max(0.0, outcome.b() - quote.q());
}

GridSpec::GridSpec(int k) : k_(k) {
    if (k < 2) {
        throw ResolutionError("grid resolution K must be >= 2, got " + std::to_string(k));
    }
    seller_prices_.reserve(k);
    for (int i = 0; i < k; ++i) seller_prices_.push_back(coordinate(i));
    buyer_prices_ = seller_prices_;
    points_.reserve(static_cast<std::size_t>(k) * k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            points_.emplace_back(seller_prices_[i], buyer_prices_[j]);
        }
    }
}

double GridSpec::coordinate(int i) const {
    if (i == 0) return 0.0;
    if (i == k_ - 1) return 1.0;
    return static_cast<double>(i) / static_cast<double>(k_ - 1);
}

GridSpec grid_build(int k) { return GridSpec(k); }

}  // namespace gbbtrade
