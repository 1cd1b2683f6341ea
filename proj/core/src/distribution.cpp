#include "gbbtrade/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "gbbtrade/errors.hpp"

namespace gbbtrade {

namespace {

constexpr double kWeightTolerance = 1e-12;

void check_weight_sum(double total, const char* family) {
    if (std::abs(total - 1.0) > kWeightTolerance) {
        throw DomainError(std::string(family) + " weights must sum to 1, got " +
                          std::to_string(total));
    }
}

std::vector<double> sorted_unique(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

// Cell decomposition of the union of box edges: density is constant on the
// interior of every cell.
struct Arrangement {
    std::vector<double> xs;
    std::vector<double> ys;
};

Arrangement arrangement_of(std::initializer_list<const BoxMixture*> mixtures) {
    Arrangement a;
    for (const BoxMixture* m : mixtures) {
        for (const auto& c : m->components()) {
            a.xs.push_back(c.box.s0);
            a.xs.push_back(c.box.s1);
            a.ys.push_back(c.box.b0);
            a.ys.push_back(c.box.b1);
        }
    }
    a.xs = sorted_unique(std::move(a.xs));
    a.ys = sorted_unique(std::move(a.ys));
    return a;
}

double interior_density(const BoxMixture& m, double s, double b) {
    double d = 0.0;
    for (const auto& c : m.components()) {
        if (c.box.contains(s, b)) d += c.weight / c.box.area();
    }
    return d;
}

double tv_boxes(const BoxMixture& x, const BoxMixture& y) {
    const Arrangement a = arrangement_of({&x, &y});
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < a.xs.size(); ++i) {
        const double sm = 0.5 * (a.xs[i] + a.xs[i + 1]);
        const double w = a.xs[i + 1] - a.xs[i];
        for (std::size_t j = 0; j + 1 < a.ys.size(); ++j) {
            const double bm = 0.5 * (a.ys[j] + a.ys[j + 1]);
            const double h = a.ys[j + 1] - a.ys[j];
            total += std::abs(interior_density(x, sm, bm) - interior_density(y, sm, bm)) * w * h;
        }
    }
    return std::clamp(0.5 * total, 0.0, 1.0);
}

double tv_atoms(const PointMass& x, const PointMass& y) {
    std::map<std::pair<double, double>, double> diff;
    for (const auto& a : x.atoms()) diff[{a.outcome.s(), a.outcome.b()}] += a.weight;
    for (const auto& a : y.atoms()) diff[{a.outcome.s(), a.outcome.b()}] -= a.weight;
    double total = 0.0;
    for (const auto& [pt, w] : diff) total += std::abs(w);
    return std::clamp(0.5 * total, 0.0, 1.0);
}

// Integral of (p - s) over s in [lo, min(hi, p)].
double ramp_integral_below(double p, double lo, double hi) {
    const double top = std::min(hi, p);
    if (top <= lo) return 0.0;
    return 0.5 * ((p - lo) * (p - lo) - (p - top) * (p - top));
}

// Integral of (b - q) over b in [max(lo, q), hi].
double ramp_integral_above(double q, double lo, double hi) {
    const double bottom = std::max(lo, q);
    if (bottom >= hi) return 0.0;
    return 0.5 * ((hi - q) * (hi - q) - (bottom - q) * (bottom - q));
}

ExpectedTrade box_expectation(const Box& box, const PriceQuote& quote) {
    const double ws = box.s1 - box.s0;
    const double wb = box.b1 - box.b0;
    // Seller accepts on [s0, min(s1, p)], buyer on [max(b0, q), b1].
    const double s_hi = std::min(box.s1, quote.p());
    const double b_lo = std::max(box.b0, quote.q());
    const double ls = std::max(0.0, s_hi - box.s0);
    const double lb = std::max(0.0, box.b1 - b_lo);
    const double prob_s = ls / ws;
    const double prob_b = lb / wb;
    const double prob = prob_s * prob_b;

    ExpectedTrade e{0.0, 0.0, 0.0, 0.0};
    if (prob > 0.0) {
        const double mean_s = box.s0 + 0.5 * ls;
        const double mean_b = b_lo + 0.5 * lb;
        e.gft = prob * (mean_b - mean_s);
        e.rev = prob * (quote.q() - quote.p());
    }
    e.seller = ramp_integral_below(quote.p(), box.s0, box.s1) / ws * prob_b;
    e.buyer = ramp_integral_above(quote.q(), box.b0, box.b1) / wb * prob_s;
    return e;
}

}  // namespace

BoxMixture::BoxMixture(std::vector<BoxComponent> components) : components_(std::move(components)) {
    if (components_.empty()) throw DomainError("box mixture needs at least one component");
    double total = 0.0;
    for (const auto& c : components_) {
        const Box& b = c.box;
        if (!(c.weight > 0.0)) throw DomainError("box mixture weights must be positive");
        if (!(b.s0 >= 0.0 && b.s1 <= 1.0 && b.b0 >= 0.0 && b.b1 <= 1.0)) {
            throw DomainError("box must lie inside the unit square");
        }
        if (!(b.s1 > b.s0 && b.b1 > b.b0)) throw DomainError("box must have positive area");
        total += c.weight;
    }
    check_weight_sum(total, "box mixture");
}

BoxMixture BoxMixture::uniform(const Box& box) { return BoxMixture({BoxComponent{1.0, box}}); }

double BoxMixture::density(double s, double b) const { return interior_density(*this, s, b); }

PointMass::PointMass(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw DomainError("point mass needs at least one atom");
    double total = 0.0;
    for (const auto& a : atoms_) {
        if (!(a.weight > 0.0)) throw DomainError("atom weights must be positive");
        total += a.weight;
    }
    check_weight_sum(total, "point mass");
}

PointMass PointMass::at(double s, double b) { return PointMass({Atom{1.0, MarketOutcome(s, b)}}); }

MarketOutcome sample(const Distribution& d, StreamRng& rng) {
    if (d.is_point_mass()) {
        const auto& atoms = d.point_mass().atoms();
        if (atoms.size() == 1) return atoms.front().outcome;
        const double u = uniform01(rng);
        double acc = 0.0;
        for (const auto& a : atoms) {
            acc += a.weight;
            if (u < acc) return a.outcome;
        }
        return atoms.back().outcome;
    }
    const auto& comps = d.box_mixture().components();
    const BoxComponent* chosen = &comps.back();
    if (comps.size() > 1) {
        const double u = uniform01(rng);
        double acc = 0.0;
        for (const auto& c : comps) {
            acc += c.weight;
            if (u < acc) {
                chosen = &c;
                break;
            }
        }
    }
    const Box& b = chosen->box;
    const double s = b.s0 + uniform01(rng) * (b.s1 - b.s0);
    const double v = b.b0 + uniform01(rng) * (b.b1 - b.b0);
    return MarketOutcome(s, v);
}

double tv_distance(const Distribution& a, const Distribution& b) {
    if (a.is_box_mixture() && b.is_box_mixture()) return tv_boxes(a.box_mixture(), b.box_mixture());
    if (a.is_point_mass() && b.is_point_mass()) return tv_atoms(a.point_mass(), b.point_mass());
    // An absolutely continuous law and a purely atomic one are mutually singular.
    return 1.0;
}

double smoothness_of(const BoxMixture& d) {
    const Arrangement a = arrangement_of({&d});
    double peak = 0.0;
    for (std::size_t i = 0; i + 1 < a.xs.size(); ++i) {
        const double sm = 0.5 * (a.xs[i] + a.xs[i + 1]);
        for (std::size_t j = 0; j + 1 < a.ys.size(); ++j) {
            const double bm = 0.5 * (a.ys[j] + a.ys[j + 1]);
            peak = std::max(peak, d.density(sm, bm));
        }
    }
    return std::min(1.0, 1.0 / peak);
}

ExpectedTrade expected_trade(const Distribution& d, const PriceQuote& quote) {
    ExpectedTrade total{0.0, 0.0, 0.0, 0.0};
    if (d.is_point_mass()) {
        for (const auto& a : d.point_mass().atoms()) {
            total.gft += a.weight * gft(quote, a.outcome);
            total.rev += a.weight * rev(quote, a.outcome);
            total.seller += a.weight * seller_term(quote, a.outcome);
            total.buyer += a.weight * buyer_term(quote, a.outcome);
        }
        return total;
    }
    for (const auto& c : d.box_mixture().components()) {
        const ExpectedTrade e = box_expectation(c.box, quote);
        total.gft += c.weight * e.gft;
        total.rev += c.weight * e.rev;
        total.seller += c.weight * e.seller;
        total.buyer += c.weight * e.buyer;
    }
    return total;
}

std::vector<Moments> expected_moments(const Distribution& d, const GridSpec& grid) {
    std::vector<Moments> out;
    out.reserve(grid.size());
    for (const auto& pt : grid.points()) {
        const ExpectedTrade e = expected_trade(d, pt);
        out.push_back(Moments{e.gft, e.rev});
    }
    return out;
}

}  // namespace gbbtrade
