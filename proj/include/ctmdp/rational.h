#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>
#include <string_view>

namespace ctmdp {

/// Exact rational number. All model data (probabilities, rates) lives in this type.
using Rational = mpq_class;

class RationalFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses "3/10", "0.3", "-2", "1.5e-3" into an exact rational.
/// Throws RationalFormatError on anything else.
Rational parse_rational(std::string_view text);

/// Canonical text form: integers as "n", terminating decimals with at most
/// 30 fractional digits as "0.xxx", everything else as "p/q".
std::string format_rational(const Rational& value);

/// n/d in canonical form. Prefer this over Rational(n, d), which GMP leaves unreduced.
inline Rational ratio(long n, long d) {
    Rational r(n, d);
    r.canonicalize();
    return r;
}

inline double to_double(const Rational& value) { return value.get_d(); }

/// Exact rational equal to the binary double `value` (which must be finite).
Rational from_double(double value);

}  // namespace ctmdp
