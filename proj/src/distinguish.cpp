#include "ctmdp/distinguish.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace ctmdp {

Rational pick_threshold(double lo, double hi) {
    if (!(hi > lo)) throw std::invalid_argument("empty threshold gap");
    const double mid = 0.5 * (lo + hi);
    const double slack = 0.25 * (hi - lo);
    for (int digits = 1; digits <= 17; ++digits) {
        const double scale = std::pow(10.0, digits);
        const double rounded = std::round(mid * scale);
        Rational candidate(mpz_class(std::to_string(static_cast<long long>(rounded))), mpz_class(1));
        mpz_class den;
        mpz_ui_pow_ui(den.get_mpz_t(), 10, static_cast<unsigned long>(digits));
        candidate /= den;
        const double v = to_double(candidate);
        if (v > lo + slack && v < hi - slack) return candidate;
    }
    return from_double(mid);
}

namespace {

constexpr double kMinGap = 1e-7;

double mass(double rate, double a, double b) { return interval_mass(rate, TimeInterval(a, b)); }

// Interval whose Exp(rate) mass beats that of every rate in `others` (which excludes `rate`).
TimeInterval peaked_interval(double rate, const std::set<double>& others) {
    if (others.empty()) return TimeInterval(0.0, kInfinity);
    const double lowest = *others.begin();
    const double highest = *others.rbegin();
    if (rate > highest) {
        return TimeInterval(0.0, std::log(rate / highest) / (rate - highest));
    }
    if (rate < lowest) {
        return TimeInterval(std::log(lowest / rate) / (lowest - rate), kInfinity);
    }
    const double below = *std::prev(others.lower_bound(rate));
    const double above = *others.upper_bound(rate);
    TimeInterval best;
    double best_gap = -1.0;
    for (double q : {1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 15.0, 20.0}) {
        // rate = ln(b/a)/(b-a) with b = q a.
        const double a = std::log(q) / (rate * (q - 1.0));
        const double b = q * a;
        const double peak = mass(rate, a, b);
        const double gap = std::min(peak - mass(below, a, b), peak - mass(above, a, b));
        if (gap > best_gap) {
            best_gap = gap;
            best = TimeInterval(a, b);
        }
    }
    return best;
}

std::map<Rational, std::vector<LiftedDistribution>> lifted_by_rate(const Ctmdp& model, const Partition& part,
                                                                   StateId s) {
    std::map<Rational, std::vector<LiftedDistribution>> out;
    for (std::size_t index : model.steps(s)) {
        const Transition& t = model.transition(index);
        auto& list = out[t.rate];
        LiftedDistribution l = lift(t.target, part);
        if (std::find(list.begin(), list.end(), l) == list.end()) list.push_back(std::move(l));
    }
    return out;
}

class Synthesiser {
public:
    Synthesiser(const Ctmdp& model, RefinementTrace trace) : model_(model), trace_(std::move(trace)), eval_(model) {}

    const RefinementTrace& trace() const { return trace_; }

    // Formula true at `a` and false at `b`, built from round-(i-1) block formulas,
    // where a and b share a block in round i-1 but not in round i.
    DistinguishResult separate(std::size_t round, StateId a, StateId b) {
        const Partition& prev = trace_.rounds[round - 1];
        const auto hulls_a = lifted_by_rate(model_, prev, a);
        const auto hulls_b = lifted_by_rate(model_, prev, b);

        std::set<Rational> rates_a, rates_b;
        for (const auto& e : hulls_a) rates_a.insert(e.first);
        for (const auto& e : hulls_b) rates_b.insert(e.first);

        if (rates_a != rates_b) {
            // The state owning the unmatched rate gets the larger upper bound.
            for (const Rational& rate : rates_a) {
                if (rates_b.count(rate) == 0) return by_rate(round, a, b, rate, rates_b, true);
            }
            for (const Rational& rate : rates_b) {
                if (rates_a.count(rate) == 0) return by_rate(round, a, b, rate, rates_a, false);
            }
        }
        for (const auto& [rate, va] : hulls_a) {
            const auto& vb = hulls_b.at(rate);
            for (const auto& v : va) {
                HullResult h = convex_hull_membership(vb, v);
                if (!h.feasible) return by_hull(round, a, b, rate, rates_a, h, true);
            }
            for (const auto& v : vb) {
                HullResult h = convex_hull_membership(va, v);
                if (!h.feasible) return by_hull(round, a, b, rate, rates_a, h, false);
            }
        }
        throw std::logic_error("refinement separated two transfer-equivalent states");
    }

    // Formula satisfied exactly by the states of block `id` of round `round`.
    StatePtr block_formula(std::size_t round, std::size_t id) {
        auto key = std::make_pair(round, id);
        if (auto it = chi_.find(key); it != chi_.end()) return it->second;
        const Partition& part = trace_.rounds[round];
        StatePtr f;
        if (round == 0) {
            f = label_formula(*part.block(id).begin());
        } else {
            const Partition& prev = trace_.rounds[round - 1];
            const StateId rep = *part.block(id).begin();
            const std::size_t parent = prev.block_of(rep);
            f = block_formula(round - 1, parent);
            for (std::size_t other = 0; other < part.size(); ++other) {
                if (other == id) continue;
                const StateId other_rep = *part.block(other).begin();
                if (prev.block_of(other_rep) != parent) continue;
                f = f_and(f, separate(round, rep, other_rep).formula);
            }
        }
        if (eval_.sat(f) != part.block(id)) throw std::logic_error("block formula does not characterise its block");
        chi_.emplace(key, f);
        return f;
    }

    Evaluator& evaluator() { return eval_; }

private:
    StatePtr label_formula(StateId s) {
        const LabelSet& mine = model_.labels(s);
        StatePtr f;
        for (const auto& atom : mine) f = f ? f_and(f, f_atom(atom)) : f_atom(atom);
        std::set<LabelSet> others;
        for (StateId t = 0; t < model_.num_states(); ++t) {
            const LabelSet& theirs = model_.labels(t);
            if (theirs != mine && std::includes(theirs.begin(), theirs.end(), mine.begin(), mine.end())) {
                others.insert(theirs);
            }
        }
        // Exclude each strictly larger label set by negating one of its extra atoms.
        std::set<std::string> negated;
        for (const auto& theirs : others) {
            bool covered = false;
            for (const auto& atom : negated) covered = covered || theirs.count(atom) != 0;
            if (covered) continue;
            for (const auto& atom : theirs) {
                if (mine.count(atom) == 0) {
                    negated.insert(atom);
                    break;
                }
            }
        }
        for (const auto& atom : negated) f = f ? f_and(f, f_not(f_atom(atom))) : f_not(f_atom(atom));
        return f ? f : f_true();
    }

    // `winner` is a if a_wins, else b; its upper bound must come out strictly larger.
    DistinguishResult finish(std::size_t round, StateId a, StateId b, const PathPtr& psi, bool a_wins,
                             const std::string& method) {
        const double ua = eval_.bounds(a, psi).upper;
        const double ub = eval_.bounds(b, psi).upper;
        const double hi = a_wins ? ua : ub;
        const double lo = a_wins ? ub : ua;
        if (!(hi - lo >= kMinGap)) {
            throw NotDistinguishable("separating gap " + std::to_string(hi - lo) + " too small to verify");
        }
        StatePtr core = f_prob(Comparison::LessEqual, pick_threshold(lo, hi), psi);
        DistinguishResult out;
        out.negated = a_wins;
        out.formula = a_wins ? f_not(core) : core;
        out.method = method;
        out.round = round;
        out.value_s = ua;
        out.value_r = ub;
        if (!eval_.holds(a, out.formula) || eval_.holds(b, out.formula)) {
            throw NotDistinguishable("synthesised formula failed verification");
        }
        return out;
    }

    DistinguishResult by_rate(std::size_t round, StateId a, StateId b, const Rational& rate,
                              const std::set<Rational>& other_rates, bool a_wins) {
        std::set<double> others;
        for (const auto& r : other_rates) others.insert(to_double(r));
        const TimeInterval interval = peaked_interval(to_double(rate), others);
        return finish(round, a, b, p_next(interval, p_state(f_true())), a_wins, "rate");
    }

    DistinguishResult by_hull(std::size_t round, StateId a, StateId b, const Rational& rate,
                              const std::set<Rational>& rates, const HullResult& h, bool a_wins) {
        const Partition& prev = trace_.rounds[round - 1];
        std::vector<StatePtr> chi;
        for (std::size_t id = 0; id < prev.size(); ++id) chi.push_back(block_formula(round - 1, id));

        // Certificate rescaled to [0,1]; any affine image separates equally well
        // because every lifted distribution has total mass 1.
        std::vector<double> c;
        for (const auto& x : h.certificate) c.push_back(to_double(x));
        const double cmin = *std::min_element(c.begin(), c.end());
        const double cmax = *std::max_element(c.begin(), c.end());
        std::vector<double> u;
        for (double x : c) u.push_back((x - cmin) / (cmax - cmin));

        const double lambda = to_double(rate);
        auto disjunction = [&](const std::vector<TimeInterval>& intervals) {
            PathPtr psi;
            for (std::size_t id = 0; id < chi.size(); ++id) {
                PathPtr clause = p_next(intervals[id], p_state(chi[id]));
                psi = psi ? p_or(psi, clause) : clause;
            }
            return psi;
        };

        {
            std::vector<TimeInterval> intervals;
            for (double ub : u) intervals.emplace_back(0.0, -std::log1p(-(0.05 + 0.9 * ub)) / lambda);
            try {
                return finish(round, a, b, disjunction(intervals), a_wins, "hull");
            } catch (const NotDistinguishable&) {
                // Other rates can mask the difference; retry inside a window peaked at `rate`.
            }
        }

        std::set<double> others;
        for (const auto& r : rates) {
            if (r != rate) others.insert(to_double(r));
        }
        const TimeInterval base = peaked_interval(lambda, others);
        const double head = std::exp(-lambda * base.lower);
        const double kappa = interval_mass(lambda, base);
        for (double eta = 0.5; eta >= 1e-6; eta *= 0.5) {
            std::vector<TimeInterval> intervals;
            for (double ub : u) {
                const double w = kappa * (1.0 - eta * (1.0 - ub));
                double upper = head - w > 0.0 ? -std::log(head - w) / lambda : kInfinity;
                if (base.bounded()) upper = std::min(upper, base.upper);
                intervals.emplace_back(base.lower, std::max(upper, base.lower));
            }
            try {
                return finish(round, a, b, disjunction(intervals), a_wins, "window");
            } catch (const NotDistinguishable&) {
            }
        }
        throw NotDistinguishable("no separating disjunctive next formula found at rate " + format_rational(rate));
    }

    const Ctmdp& model_;
    RefinementTrace trace_;
    Evaluator eval_;
    std::map<std::pair<std::size_t, std::size_t>, StatePtr> chi_;
};

}  // namespace

DistinguishResult distinguish(const Ctmdp& model, StateId s, StateId r) {
    require_valid(model);
    if (!model.has_state(s) || !model.has_state(r)) throw ModelError("unknown state id");

    const LabelSet& ls = model.labels(s);
    const LabelSet& lr = model.labels(r);
    if (ls != lr) {
        DistinguishResult out;
        out.method = "label";
        for (const auto& atom : ls) {
            if (lr.count(atom) == 0) {
                out.formula = f_atom(atom);
                return out;
            }
        }
        for (const auto& atom : lr) {
            if (ls.count(atom) == 0) {
                out.formula = f_not(f_atom(atom));
                out.negated = true;
                return out;
            }
        }
    }

    Synthesiser synth(model, strong_refinement(model));
    const auto& rounds = synth.trace().rounds;
    if (rounds.back().same_block(s, r)) {
        throw NotDistinguishable("states " + std::to_string(s) + " and " + std::to_string(r) +
                                 " are strongly bisimilar");
    }
    std::size_t round = 1;
    while (rounds[round].same_block(s, r)) ++round;
    return synth.separate(round, s, r);
}

}  // namespace ctmdp
