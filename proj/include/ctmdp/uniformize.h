#pragma once

#include "ctmdp/model.h"

namespace ctmdp {

/// Default uniformization rate: the largest rate in the model.
Rational uniformization_rate(const Ctmdp& model);

struct Uniformized {
    Ctmdp model;
    /// transition_map[i] is the index of the output transition that input transition i became.
    /// Distinct inputs may collapse onto one output (identical triples are merged).
    std::vector<std::size_t> transition_map;
};

/// Every transition (s, l, mu) becomes (s, e, (l/e) mu + (1 - l/e) delta_s).
/// Throws ModelError if e is below some rate of the model.
Uniformized uniformize_with_map(const Ctmdp& model, const Rational& e);
Ctmdp uniformize(const Ctmdp& model, const Rational& e);
Ctmdp uniformize(const Ctmdp& model);

}  // namespace ctmdp
