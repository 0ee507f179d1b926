#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctmdp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Closed non-empty interval [lower, upper] of non-negative times; upper may be +inf.
struct TimeInterval {
    double lower = 0.0;
    double upper = kInfinity;

    TimeInterval() = default;
    /// Throws std::invalid_argument unless 0 <= lower <= upper and lower is finite.
    TimeInterval(double lower, double upper);

    bool bounded() const { return upper != kInfinity; }
    bool contains(double t) const { return t >= lower && t <= upper; }

    friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
};

class DivergentIntegral : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// c * t^power * e^{-decay t}
struct ExpTerm {
    double coeff = 0.0;
    int power = 0;
    double decay = 0.0;

    friend bool operator==(const ExpTerm&, const ExpTerm&) = default;
};

/// Sum of ExpTerms in canonical form: sorted by (decay, power), equal (power, decay)
/// pairs merged (decays compared bitwise), zero coefficients dropped.
class ExpPoly {
public:
    ExpPoly() = default;
    explicit ExpPoly(std::vector<ExpTerm> terms);
    static ExpPoly term(double coeff, int power, double decay);
    /// rate * e^{-rate t}
    static ExpPoly exp_density(double rate);

    const std::vector<ExpTerm>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    double operator()(double t) const;

    friend bool operator==(const ExpPoly&, const ExpPoly&) = default;

private:
    std::vector<ExpTerm> terms_;
};

ExpPoly ep_add(const ExpPoly& a, const ExpPoly& b);
ExpPoly ep_scale(const ExpPoly& a, double factor);
/// Multiplies by t^power_shift * e^{-decay t}. `decay` may be negative.
ExpPoly ep_mul_exp(const ExpPoly& a, double decay, int power_shift);

/// Definite integral over the interval, from the closed-form antiderivative.
/// Throws DivergentIntegral for an unbounded interval with a non-positive decay.
double ep_integrate(const ExpPoly& a, const TimeInterval& over);
/// Same, for finite bounds lo <= hi where lo need not be >= 0 semantics-wise.
double ep_integrate(const ExpPoly& a, double lo, double hi);

/// g(t) = integral_{lower}^{t} f(u) * rate * e^{-rate (t-u)} du, valid for t >= lower.
/// Decays of the result are exactly those of f plus `rate`, so repeated
/// convolution never drifts.
ExpPoly ep_convolve_exp(const ExpPoly& f, double rate, double lower);

/// e^{-rate*lower} - e^{-rate*upper}: probability that an Exp(rate) delay lands in `over`.
double interval_mass(double rate, const TimeInterval& over);

}  // namespace ctmdp
