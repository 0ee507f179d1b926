#pragma once

#include "ctmdp/model.h"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctmdp {

enum class GadgetVariant { Fig1Pair, Example2Rates, Example3X, Example4Modified, Fig2Successors, Fig3Ttp, SubsetSum };

std::string to_string(GadgetVariant v);
std::optional<GadgetVariant> parse_variant(std::string_view text);
const std::vector<GadgetVariant>& all_variants();

class GadgetError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct GadgetParams {
    GadgetVariant variant = GadgetVariant::Fig1Pair;
    Rational x = ratio(3, 8);    // example3-x / fig2-successors, in [0,1]
    std::vector<Rational> weights;  // subset-sum, each in [-1/(4n), 1/(4n)]
};

/// A built model plus the names of its states ("s0", "r0", "u1", ...).
struct GadgetModel {
    Ctmdp model;
    std::map<std::string, StateId> roles;

    StateId role(const std::string& name) const;
};

/// Throws GadgetError for out-of-range parameters.
GadgetModel build_gadget(const GadgetParams& params);
Ctmdp build(const GadgetParams& params);

/// Whether some non-empty subset of `weights` sums to zero. Brute force; n <= 20.
bool subset_sum_verdict(const std::vector<Rational>& weights);

}  // namespace ctmdp
