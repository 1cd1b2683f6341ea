#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "gbbtrade/errors.hpp"
#include "gbbtrade/random.hpp"
#include "gbbtrade/trade.hpp"
#include "oracles.hpp"

using namespace gbbtrade;

TEST(Valuations, RejectOutsideUnitInterval) {
    EXPECT_THROW(MarketOutcome(-0.01, 0.5), DomainError);
    EXPECT_THROW(MarketOutcome(0.5, 1.01), DomainError);
    EXPECT_THROW(MarketOutcome(std::nan(""), 0.5), DomainError);
    EXPECT_THROW(PriceQuote(0.5, -1e-9), DomainError);
    EXPECT_THROW(PriceQuote(2.0, 0.5), DomainError);
    EXPECT_NO_THROW(MarketOutcome(0.0, 1.0));
    EXPECT_NO_THROW(PriceQuote(1.0, 0.0));
}

TEST(Gft, Examples) {
    EXPECT_DOUBLE_EQ(gft(PriceQuote(0.5, 0.5), MarketOutcome(0.2, 0.8)), 0.6);
    EXPECT_DOUBLE_EQ(gft(PriceQuote(0.1, 0.5), MarketOutcome(0.2, 0.8)), 0.0);
    EXPECT_DOUBLE_EQ(gft(PriceQuote(1.0, 0.0), MarketOutcome(0.9, 0.1)), 0.1 - 0.9);
}

TEST(Rev, Examples) {
    EXPECT_DOUBLE_EQ(rev(PriceQuote(0.3, 0.7), MarketOutcome(0.2, 0.8)), 0.7 - 0.3);
    EXPECT_DOUBLE_EQ(rev(PriceQuote(1.0, 0.0), MarketOutcome(0.5, 0.5)), -1.0);
    EXPECT_DOUBLE_EQ(rev(PriceQuote(0.0, 1.0), MarketOutcome(0.5, 0.5)), 0.0);
}

TEST(SellerTerm, Examples) {
    EXPECT_NEAR(seller_term(PriceQuote(0.5, 0.5), MarketOutcome(0.2, 0.8)), 0.3, 1e-15);
    EXPECT_DOUBLE_EQ(seller_term(PriceQuote(0.1, 0.5), MarketOutcome(0.2, 0.8)), 0.0);
    EXPECT_DOUBLE_EQ(seller_term(PriceQuote(0.5, 0.9), MarketOutcome(0.2, 0.8)), 0.0);
}

TEST(BuyerTerm, Examples) {
    EXPECT_NEAR(buyer_term(PriceQuote(0.5, 0.5), MarketOutcome(0.2, 0.8)), 0.3, 1e-15);
    EXPECT_DOUBLE_EQ(buyer_term(PriceQuote(0.5, 0.9), MarketOutcome(0.2, 0.8)), 0.0);
    EXPECT_DOUBLE_EQ(buyer_term(PriceQuote(0.1, 0.5), MarketOutcome(0.2, 0.8)), 0.0);
}

TEST(SellerTerm, MatchesIntegralDefinition) {
    const PriceQuote q(0.63, 0.4);
    for (double s : {0.0, 0.1, 0.5, 0.63, 0.9}) {
        for (double b : {0.2, 0.4, 0.7}) {
            const MarketOutcome o(s, b);
            EXPECT_NEAR(seller_term(q, o), oracle::seller_term_numeric(q, o), 1e-5) << s << "," << b;
        }
    }
}

TEST(Observe, FeedbackIsTheTradeIndicator) {
    const MarketOutcome o(0.3, 0.6);
    EXPECT_TRUE(observe(PriceQuote(0.3, 0.6), o).traded);  // both ties fire
    EXPECT_FALSE(observe(PriceQuote(0.29, 0.6), o).traded);
    EXPECT_FALSE(observe(PriceQuote(0.3, 0.61), o).traded);
    const auto fb = observe(PriceQuote(0.4, 0.5), o);
    EXPECT_EQ(fb.posted, PriceQuote(0.4, 0.5));
    EXPECT_DOUBLE_EQ(realized_rev(fb), 0.5 - 0.4);
}

TEST(Decomposition, HoldsOnRandomAndBoundaryTuples) {
    StreamRng rng(11);
    const double lattice[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    double worst = 0.0;
    for (int i = 0; i < 200000; ++i) {
        double v[4];
        for (double& x : v) x = (rng() & 3) == 0 ? lattice[rng() % 5] : uniform01(rng);
        const PriceQuote q(v[0], v[1]);
        const MarketOutcome o(v[2], v[3]);
        const double lhs = seller_term(q, o) + buyer_term(q, o) + rev(q, o);
        worst = std::max(worst, std::abs(lhs - gft(q, o)));
        if (!trades(q, o)) {
            EXPECT_EQ(seller_term(q, o), 0.0);
            EXPECT_EQ(buyer_term(q, o), 0.0);
            EXPECT_EQ(rev(q, o), 0.0);
        }
        ASSERT_LE(std::abs(gft(q, o)), 1.0);
        ASSERT_LE(std::abs(rev(q, o)), 1.0);
    }
    EXPECT_LE(worst, 1e-12);
}

TEST(Grid, RejectsLowResolution) {
    EXPECT_THROW(GridSpec(1), ResolutionError);
    EXPECT_THROW(grid_build(0), ResolutionError);
}

TEST(Grid, Examples) {
    const auto g2 = grid_build(2);
    const std::vector<PriceQuote> expect{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    EXPECT_EQ(g2.points(), expect);
    EXPECT_EQ(grid_build(3).seller_prices(), (std::vector<double>{0.0, 0.5, 1.0}));
    EXPECT_EQ(grid_build(5).size(), 25u);
}

TEST(Grid, StructuralProperties) {
    for (int k : {2, 3, 7, 10, 17}) {
        const GridSpec g(k);
        ASSERT_EQ(g.size(), static_cast<std::size_t>(k * k));
        for (const auto* axis : {&g.seller_prices(), &g.buyer_prices()}) {
            ASSERT_EQ(axis->size(), static_cast<std::size_t>(k));
            EXPECT_TRUE(std::is_sorted(axis->begin(), axis->end()));
            EXPECT_EQ(axis->front(), 0.0);
            EXPECT_EQ(axis->back(), 1.0);
        }
        std::set<std::pair<double, double>> seen;
        for (std::size_t a = 0; a < g.size(); ++a) {
            const auto& p = g.point(a);
            EXPECT_TRUE(seen.insert({p.p(), p.q()}).second);
            EXPECT_EQ(p.p(), g.seller_prices()[g.seller_index(a)]);
            EXPECT_EQ(p.q(), g.buyer_prices()[g.buyer_index(a)]);
            EXPECT_EQ(g.index(g.seller_index(a), g.buyer_index(a)), a);
        }
    }
}

TEST(Grid, RefinementNestsPoints) {
    const GridSpec coarse(6);
    const GridSpec fine(11);
    for (int i = 0; i < 6; ++i) EXPECT_EQ(coarse.coordinate(i), fine.coordinate(2 * i));
}
