#pragma once

#include <variant>
#include <vector>

#include "gbbtrade/random.hpp"
#include "gbbtrade/trade.hpp"

namespace gbbtrade {

// Axis-aligned rectangle [s0,s1] x [b0,b1] inside the unit square.
struct Box {
    double s0;
    double s1;
    double b0;
    double b1;

    double area() const { return (s1 - s0) * (b1 - b0); }
    bool contains(double s, double b) const { return s >= s0 && s <= s1 && b >= b0 && b <= b1; }

    friend bool operator==(const Box&, const Box&) = default;
};

struct BoxComponent {
    double weight;
    Box box;

    friend bool operator==(const BoxComponent&, const BoxComponent&) = default;
};

// Finite mixture of uniform densities on boxes.
class BoxMixture {
public:
    explicit BoxMixture(std::vector<BoxComponent> components);

    static BoxMixture uniform(const Box& box = Box{0.0, 1.0, 0.0, 1.0});

    const std::vector<BoxComponent>& components() const { return components_; }

    // Density at (s, b); on shared box edges every covering box counts.
    double density(double s, double b) const;

    friend bool operator==(const BoxMixture&, const BoxMixture&) = default;

private:
    std::vector<BoxComponent> components_;
};

struct Atom {
    double weight;
    MarketOutcome outcome;

    friend bool operator==(const Atom&, const Atom&) = default;
};

class PointMass {
public:
    explicit PointMass(std::vector<Atom> atoms);

    static PointMass at(double s, double b);

    const std::vector<Atom>& atoms() const { return atoms_; }

    friend bool operator==(const PointMass&, const PointMass&) = default;

private:
    std::vector<Atom> atoms_;
};

// Valuation distribution: one of the supported families.
class Distribution {
public:
    Distribution(BoxMixture d) : family_(std::move(d)) {}
    Distribution(PointMass d) : family_(std::move(d)) {}

    bool is_box_mixture() const { return std::holds_alternative<BoxMixture>(family_); }
    bool is_point_mass() const { return std::holds_alternative<PointMass>(family_); }
    const BoxMixture& box_mixture() const { return std::get<BoxMixture>(family_); }
    const PointMass& point_mass() const { return std::get<PointMass>(family_); }

    const std::variant<BoxMixture, PointMass>& family() const { return family_; }

    friend bool operator==(const Distribution&, const Distribution&) = default;

private:
    std::variant<BoxMixture, PointMass> family_;
};

MarketOutcome sample(const Distribution& d, StreamRng& rng);

// Exact total variation distance.
double tv_distance(const Distribution& a, const Distribution& b);

// Largest sigma with density <= 1/sigma everywhere.
double smoothness_of(const BoxMixture& d);

struct Moments {
    double gft;
    double rev;
};

// Exact E[GFT], E[Rev], E[seller term], E[buyer term] at one quote.
struct ExpectedTrade {
    double gft;
    double rev;
    double seller;
    double buyer;
};

ExpectedTrade expected_trade(const Distribution& d, const PriceQuote& quote);

// Exact (E[GFT], E[Rev]) per grid point, in grid index order.
std::vector<Moments> expected_moments(const Distribution& d, const GridSpec& grid);

}  // namespace gbbtrade
