#pragma once

#include "ctmdp/bisim.h"
#include "ctmdp/evaluator.h"
#include "ctmdp/formula.h"

#include <stdexcept>
#include <string>

namespace ctmdp {

class NotDistinguishable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DistinguishResult {
    StatePtr formula;        // s satisfies it, r does not (verified by the evaluator)
    std::string method;      // "label", "rate", "hull" or "window"
    std::size_t round = 0;   // refinement round in which s and r were separated
    bool negated = false;    // the probabilistic core holds at r and was negated
    double value_s = 0.0;    // upper bounds of the core path formula at s and r
    double value_r = 0.0;
};

/// Synthesises a CSL-or state formula telling s from r. Throws NotDistinguishable
/// if the states are strongly bisimilar.
DistinguishResult distinguish(const Ctmdp& model, StateId s, StateId r);

/// Shortest decimal strictly inside (lo, hi), within the middle half of the gap.
Rational pick_threshold(double lo, double hi);

}  // namespace ctmdp
