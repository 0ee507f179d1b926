#include "ctmdp/gadgets.h"

#include <cstdlib>

namespace ctmdp {

std::string to_string(GadgetVariant v) {
    switch (v) {
        case GadgetVariant::Fig1Pair: return "fig1-pair";
        case GadgetVariant::Example2Rates: return "example2-rates";
        case GadgetVariant::Example3X: return "example3-x";
        case GadgetVariant::Example4Modified: return "example4-modified";
        case GadgetVariant::Fig2Successors: return "fig2-successors";
        case GadgetVariant::Fig3Ttp: return "fig3-ttp";
        case GadgetVariant::SubsetSum: return "subset-sum";
    }
    return "fig1-pair";
}

const std::vector<GadgetVariant>& all_variants() {
    static const std::vector<GadgetVariant> variants = {
        GadgetVariant::Fig1Pair,       GadgetVariant::Example2Rates, GadgetVariant::Example3X,
        GadgetVariant::Example4Modified, GadgetVariant::Fig2Successors, GadgetVariant::Fig3Ttp,
        GadgetVariant::SubsetSum};
    return variants;
}

std::optional<GadgetVariant> parse_variant(std::string_view text) {
    for (GadgetVariant v : all_variants()) {
        if (to_string(v) == text) return v;
    }
    return std::nullopt;
}

StateId GadgetModel::role(const std::string& name) const {
    auto it = roles.find(name);
    if (it == roles.end()) throw GadgetError("gadget has no state named '" + name + "'");
    return it->second;
}

namespace {

// Accumulates states and transitions; every state gets its own label "l<k>"
// unless it shares one explicitly.
class Builder {
public:
    StateId state(const std::string& role, int label) {
        const auto id = static_cast<StateId>(labels_.size());
        labels_.push_back({"l" + std::to_string(label)});
        roles_[role] = id;
        max_label_ = std::max(max_label_, label);
        return id;
    }

    void edge(StateId from, const Rational& rate, std::map<StateId, Rational> to) {
        Transition t{from, rate, Distribution(std::move(to))};
        for (const auto& existing : transitions_) {
            if (existing == t) return;
        }
        transitions_.push_back(std::move(t));
    }

    void loop(StateId s) { edge(s, 1, {{s, 1}}); }

    GadgetModel finish(StateId initial) {
        std::vector<std::string> ap;
        for (int k = 0; k <= max_label_; ++k) ap.push_back("l" + std::to_string(k));
        return {Ctmdp(std::move(ap), std::move(labels_), std::move(transitions_), initial), std::move(roles_)};
    }

private:
    std::vector<LabelSet> labels_;
    std::vector<Transition> transitions_;
    std::map<std::string, StateId> roles_;
    int max_label_ = 0;
};

Rational q(long n, long d) { return ratio(n, d); }

GadgetModel fig1(bool modified) {
    Builder b;
    const StateId s0 = b.state("s0", 0);
    const StateId r0 = b.state("r0", 0);
    const StateId u1 = b.state("u1", 1);
    const StateId u2 = b.state("u2", 2);
    const StateId u3 = b.state("u3", 3);
    const std::map<StateId, Rational> left{{u1, q(3, 10)}, {u2, q(3, 10)}, {u3, q(4, 10)}};
    const std::map<StateId, Rational> middle{{u1, q(4, 10)}, {u2, q(3, 10)}, {u3, q(3, 10)}};
    const std::map<StateId, Rational> right{{u1, q(5, 10)}, {u2, q(4, 10)}, {u3, q(1, 10)}};
    b.edge(s0, 1, left);
    b.edge(s0, 1, right);
    b.edge(r0, 1, left);
    b.edge(r0, 1, middle);
    b.edge(r0, 1, right);
    b.loop(u1);
    b.loop(u2);
    if (modified) {
        const StateId u3p = b.state("u3'", 4);
        b.edge(u3, 1, {{u3p, 1}});
        b.loop(u3p);
    } else {
        b.loop(u3);
    }
    return b.finish(s0);
}

GadgetModel example2() {
    Builder b;
    const StateId s1 = b.state("s1", 0);
    const StateId r1 = b.state("r1", 0);
    const StateId u1 = b.state("u1", 1);
    b.edge(s1, 1, {{u1, 1}});
    b.edge(s1, 4, {{u1, 1}});
    b.edge(r1, 1, {{u1, 1}});
    b.edge(r1, 2, {{u1, 1}});
    b.edge(r1, 4, {{u1, 1}});
    b.loop(u1);
    return b.finish(s1);
}

GadgetModel example3(const Rational& x) {
    if (x < 0 || x > 1) throw GadgetError("example3-x needs x in [0,1], got " + format_rational(x));
    Builder b;
    const StateId s2 = b.state("s2", 0);
    const StateId r2 = b.state("r2", 0);
    const StateId u1 = b.state("u1", 1);
    const StateId u2 = b.state("u2", 2);
    const std::map<StateId, Rational> mu1{{u1, q(1, 4)}, {u2, q(3, 4)}};
    const std::map<StateId, Rational> mu2{{u1, x}, {u2, 1 - x}};
    const std::map<StateId, Rational> mu3{{u1, q(1, 2)}, {u2, q(1, 2)}};
    b.edge(s2, 1, mu1);
    b.edge(s2, 1, mu3);
    b.edge(r2, 1, mu1);
    b.edge(r2, 1, mu2);
    b.edge(r2, 1, mu3);
    b.loop(u1);
    b.loop(u2);
    return b.finish(s2);
}

GadgetModel fig3() {
    Builder b;
    const StateId s4 = b.state("s4", 0);
    const StateId s5 = b.state("s5", 1);
    const StateId s6 = b.state("s6", 2);
    const StateId s7 = b.state("s7", 0);
    const StateId s8 = b.state("s8", 3);
    const StateId s9 = b.state("s9", 4);
    b.edge(s4, 1, {{s5, q(1, 2)}, {s6, q(1, 2)}});
    b.edge(s5, 1, {{s7, 1}});
    b.edge(s6, 1, {{s7, 1}});
    b.edge(s7, 1, {{s8, 1}});
    b.edge(s7, 1, {{s9, 1}});
    b.loop(s8);
    b.loop(s9);
    return b.finish(s4);
}

GadgetModel subset_sum(const std::vector<Rational>& w) {
    const std::size_t n = w.size();
    if (n == 0 || n > 20) throw GadgetError("subset-sum needs between 1 and 20 weights");
    const Rational limit(1, static_cast<long>(4 * n));
    for (const auto& wi : w) {
        if (abs(wi) > limit) {
            throw GadgetError("subset-sum weight " + format_rational(wi) + " outside [-1/(4n), 1/(4n)] = [-" +
                              format_rational(limit) + ", " + format_rational(limit) + "]");
        }
    }
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, 2 * n);
    const Rational eps(mpz_class(1), scale);

    Builder b;
    const StateId s0 = b.state("s0", 0);
    const StateId s0p = b.state("s0'", 0);
    const StateId r = b.state("r", 1);
    std::vector<StateId> si;
    for (std::size_t i = 0; i < n; ++i) si.push_back(b.state("s" + std::to_string(i + 1), static_cast<int>(i + 2)));

    std::map<StateId, Rational> mu, nu1, nu2;
    Rational rest_mu = 1, rest_nu1 = 1, rest_nu2 = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const Rational a = abs(w[i]);
        mu[si[i]] = a + eps;
        nu1[si[i]] = w[i] + a;
        nu2[si[i]] = -w[i] + a;
        rest_mu -= a + eps;
        rest_nu1 -= w[i] + a;
        rest_nu2 -= -w[i] + a;
    }
    mu[r] = rest_mu;
    nu1[r] = rest_nu1;
    nu2[r] = rest_nu2;
    b.edge(s0, 1, mu);
    b.edge(s0p, 1, nu1);
    b.edge(s0p, 1, nu2);
    b.loop(r);
    for (StateId s : si) b.loop(s);
    return b.finish(s0);
}

}  // namespace

GadgetModel build_gadget(const GadgetParams& params) {
    switch (params.variant) {
        case GadgetVariant::Fig1Pair: return fig1(false);
        case GadgetVariant::Example4Modified: return fig1(true);
        case GadgetVariant::Example2Rates: return example2();
        case GadgetVariant::Example3X:
        case GadgetVariant::Fig2Successors: return example3(params.x);
        case GadgetVariant::Fig3Ttp: return fig3();
        case GadgetVariant::SubsetSum: return subset_sum(params.weights);
    }
    throw GadgetError("unknown gadget variant");
}

Ctmdp build(const GadgetParams& params) { return build_gadget(params).model; }

bool subset_sum_verdict(const std::vector<Rational>& weights) {
    const std::size_t n = weights.size();
    if (n > 20) throw GadgetError("subset_sum_verdict is brute force and limited to 20 weights");
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        Rational sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) sum += weights[i];
        }
        if (sum == 0) return true;
    }
    return false;
}

}  // namespace ctmdp
