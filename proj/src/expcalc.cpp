#include "ctmdp/expcalc.h"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace ctmdp {

TimeInterval::TimeInterval(double lo, double hi) : lower(lo), upper(hi) {
    if (!(lo >= 0.0) || !std::isfinite(lo)) throw std::invalid_argument("interval lower bound must be finite and >= 0");
    if (!(hi >= lo)) throw std::invalid_argument("interval upper bound below lower bound");
}

ExpPoly::ExpPoly(std::vector<ExpTerm> terms) {
    std::sort(terms.begin(), terms.end(), [](const ExpTerm& a, const ExpTerm& b) {
        return std::tie(a.decay, a.power) < std::tie(b.decay, b.power);
    });
    for (const auto& t : terms) {
        if (!terms_.empty() && terms_.back().decay == t.decay && terms_.back().power == t.power) {
            terms_.back().coeff += t.coeff;
        } else {
            terms_.push_back(t);
        }
    }
    std::erase_if(terms_, [](const ExpTerm& t) { return t.coeff == 0.0; });
}

ExpPoly ExpPoly::term(double coeff, int power, double decay) { return ExpPoly({{coeff, power, decay}}); }

ExpPoly ExpPoly::exp_density(double rate) { return term(rate, 0, rate); }

double ExpPoly::operator()(double t) const {
    double sum = 0.0;
    for (const auto& term : terms_) sum += term.coeff * std::pow(t, term.power) * std::exp(-term.decay * t);
    return sum;
}

ExpPoly ep_add(const ExpPoly& a, const ExpPoly& b) {
    std::vector<ExpTerm> all = a.terms();
    all.insert(all.end(), b.terms().begin(), b.terms().end());
    return ExpPoly(std::move(all));
}

ExpPoly ep_scale(const ExpPoly& a, double factor) {
    std::vector<ExpTerm> all = a.terms();
    for (auto& t : all) t.coeff *= factor;
    return ExpPoly(std::move(all));
}

ExpPoly ep_mul_exp(const ExpPoly& a, double decay, int power_shift) {
    if (power_shift < 0) throw std::invalid_argument("power shift must be non-negative");
    std::vector<ExpTerm> all = a.terms();
    for (auto& t : all) {
        t.decay += decay;
        t.power += power_shift;
    }
    return ExpPoly(std::move(all));
}

namespace {

// Antiderivative of t^k e^{-d t} at finite t.
double antiderivative(int k, double d, double t) {
    if (d == 0.0) return std::pow(t, k + 1) / (k + 1);
    // -e^{-dt} * sum_j k!/(j! d^{k-j+1}) t^j, built from j=k downwards.
    double sum = 0.0;
    double coef = 1.0 / d;  // k!/(k! d^1)
    for (int j = k; j >= 0; --j) {
        sum += coef * std::pow(t, j);
        coef *= static_cast<double>(j) / d;
    }
    return -std::exp(-d * t) * sum;
}

}  // namespace

double ep_integrate(const ExpPoly& a, double lo, double hi) {
    double total = 0.0;
    for (const auto& t : a.terms()) {
        total += t.coeff * (antiderivative(t.power, t.decay, hi) - antiderivative(t.power, t.decay, lo));
    }
    return total;
}

double ep_integrate(const ExpPoly& a, const TimeInterval& over) {
    if (over.bounded()) return ep_integrate(a, over.lower, over.upper);
    double total = 0.0;
    for (const auto& t : a.terms()) {
        if (!(t.decay > 0.0)) throw DivergentIntegral("integral to infinity of a term with non-positive decay");
        total -= t.coeff * antiderivative(t.power, t.decay, over.lower);
    }
    return total;
}

ExpPoly ep_convolve_exp(const ExpPoly& f, double rate, double lower) {
    std::vector<ExpTerm> out;
    double tail = 0.0;  // coefficient of e^{-rate t}
    for (const auto& term : f.terms()) {
        const double lc = rate * term.coeff;
        const int k = term.power;
        const double beta = term.decay - rate;
        if (beta == 0.0) {
            out.push_back({lc / (k + 1), k + 1, rate});
            tail -= lc * std::pow(lower, k + 1) / (k + 1);
            continue;
        }
        double coef = 1.0 / beta;
        for (int j = k; j >= 0; --j) {
            out.push_back({-lc * coef, j, term.decay});
            coef *= static_cast<double>(j) / beta;
        }
        tail -= lc * antiderivative(k, beta, lower);
    }
    out.push_back({tail, 0, rate});
    return ExpPoly(std::move(out));
}

double interval_mass(double rate, const TimeInterval& over) {
    if (!(rate > 0.0)) throw std::invalid_argument("rate must be positive");
    const double head = std::exp(-rate * over.lower);
    if (!over.bounded()) return head;
    return -head * std::expm1(-rate * (over.upper - over.lower));
}

}  // namespace ctmdp
