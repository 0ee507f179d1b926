#include "ctmdp/evaluator.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

namespace ctmdp {

std::string to_string(SchedulerClass c) {
    return c == SchedulerClass::Vertex ? "vertex" : "positional-deterministic";
}

namespace {

constexpr double kPrecisionWarning = 1e-9;
constexpr double kSchedulerCap = 1e6;

void check_state(const Ctmdp& model, StateId s) {
    if (!model.has_state(s)) throw ModelError("unknown state id " + std::to_string(s));
}

ProbBounds constant(double v, SchedulerClass cls) {
    ProbBounds b;
    b.lower = b.upper = v;
    b.scheduler_class = cls;
    return b;
}

// Max/min of a per-transition value over the transitions of s.
template <typename F>
ProbBounds over_transitions(const Ctmdp& model, StateId s, F value) {
    check_state(model, s);
    ProbBounds out;
    bool first = true;
    for (std::size_t index : model.steps(s)) {
        const double v = value(model.transition(index));
        if (first || v > out.upper) {
            out.upper = v;
            out.upper_choice = {{s, index}};
        }
        if (first || v < out.lower) {
            out.lower = v;
            out.lower_choice = {{s, index}};
        }
        first = false;
    }
    if (first) throw ModelError("state " + std::to_string(s) + " has no transition");
    return out;
}

bool disjoint(const StateSet& a, const StateSet& b) {
    for (StateId x : a) {
        if (b.count(x) != 0) return false;
    }
    return true;
}

}  // namespace

ProbBounds next_bounds(const Ctmdp& model, StateId s, const TimeInterval& interval, const StateSet& target) {
    return over_transitions(model, s, [&](const Transition& t) {
        return to_double(t.target.mass(target)) * interval_mass(to_double(t.rate), interval);
    });
}

ProbBounds disjunctive_next_bounds(const Ctmdp& model, StateId s, const std::vector<NextClause>& clauses) {
    for (std::size_t i = 0; i < clauses.size(); ++i) {
        for (std::size_t j = i + 1; j < clauses.size(); ++j) {
            if (!disjoint(clauses[i].target, clauses[j].target)) {
                throw UnsupportedFormula("disjunctive next clauses " + std::to_string(i) + " and " + std::to_string(j) +
                                         " have overlapping targets");
            }
        }
    }
    return over_transitions(model, s, [&](const Transition& t) {
        double sum = 0.0;
        const double rate = to_double(t.rate);
        for (const auto& c : clauses) sum += to_double(t.target.mass(c.target)) * interval_mass(rate, c.interval);
        return sum;
    });
}

ProbBounds csl_star_one_jump(const Ctmdp& model, StateId s, const std::vector<UntilDisjunct>& disjuncts) {
    check_state(model, s);
    const StateSet succ = successors(model, s);
    for (std::size_t i = 0; i < disjuncts.size(); ++i) {
        const auto& d = disjuncts[i];
        const std::string name = "disjunct " + std::to_string(i);
        if (d.lhs.count(s) == 0) throw UnsupportedFormula(name + ": start state does not satisfy the left operand");
        if (d.rhs.count(s) != 0) throw UnsupportedFormula(name + ": start state already satisfies the right operand");
        if (!disjoint(succ, d.lhs)) throw UnsupportedFormula(name + ": a successor satisfies the left operand");
        for (std::size_t j = i + 1; j < disjuncts.size(); ++j) {
            if (!disjoint(d.rhs, disjuncts[j].rhs)) {
                throw UnsupportedFormula(name + " and disjunct " + std::to_string(j) + " have overlapping right operands");
            }
        }
    }
    if (disjuncts.empty()) return constant(0.0, SchedulerClass::Vertex);
    return over_transitions(model, s, [&](const Transition& t) {
        double sum = 0.0;
        const double rate = to_double(t.rate);
        for (const auto& d : disjuncts) sum += to_double(t.target.mass(d.rhs)) * interval_mass(rate, d.interval);
        return sum;
    });
}

namespace {

// A transition of a continuing state after folding its self-loop into the sojourn.
struct Folded {
    std::size_t index = 0;
    double rate = 0.0;
    bool dead = false;  // the chosen transition only loops back
    std::vector<std::pair<StateId, double>> next;
};

struct Density {
    ExpPoly lo;  // arrival density on [0, a)
    ExpPoly hi;  // arrival density on [a, inf)
};

}  // namespace

ProbBounds until_bounds_acyclic(const Ctmdp& model, StateId s, const TimeInterval& interval, const StateSet& lhs,
                                const StateSet& rhs) {
    check_state(model, s);
    const double a = interval.lower;
    const SchedulerClass cls = SchedulerClass::PositionalDeterministic;
    if (rhs.count(s) != 0 && a == 0.0) return constant(1.0, cls);
    if (lhs.count(s) == 0) return constant(0.0, cls);

    const std::size_t n = model.num_states();
    auto continuing = [&](StateId q) { return lhs.count(q) != 0 && (rhs.count(q) == 0 || a > 0.0); };

    // Continuing states reachable from s through continuing states.
    std::vector<bool> region(n, false);
    std::vector<StateId> stack{s};
    region[s] = true;
    while (!stack.empty()) {
        StateId q = stack.back();
        stack.pop_back();
        for (StateId t : successors(model, q)) {
            if (continuing(t) && !region[t]) {
                region[t] = true;
                stack.push_back(t);
            }
        }
    }

    // good[q]: q can still contribute, i.e. rhs is reachable through the region.
    std::vector<bool> good(n, false);
    for (StateId q : rhs) {
        if (q < n) good[q] = true;
    }
    for (bool changed = true; changed;) {
        changed = false;
        for (StateId q = 0; q < n; ++q) {
            if (!region[q] || good[q]) continue;
            for (StateId t : successors(model, q)) {
                if (t != q && good[t]) {
                    good[q] = true;
                    changed = true;
                    break;
                }
            }
        }
    }
    if (!good[s]) return constant(0.0, cls);
    auto live = [&](StateId q) { return region[q] && good[q]; };

    std::vector<std::vector<Folded>> options(n);
    for (StateId q = 0; q < n; ++q) {
        if (!live(q)) continue;
        for (std::size_t index : model.steps(q)) {
            const Transition& t = model.transition(index);
            Folded f;
            f.index = index;
            const Rational loop = t.target(q);
            if (loop != 0 && rhs.count(q) != 0) {
                throw UnsupportedFormula("until region is cyclic: state " + std::to_string(q) +
                                         " satisfies both operands and has a self-loop");
            }
            if (loop == 1) {
                f.dead = true;
            } else {
                const Rational stay = 1 - loop;
                f.rate = to_double(t.rate * stay);
                for (const auto& [target, p] : t.target.entries()) {
                    if (target != q) f.next.emplace_back(target, to_double(p / stay));
                }
            }
            options[q].push_back(std::move(f));
        }
    }

    // Topological order of live states; a back edge means a cycle.
    std::vector<int> mark(n, 0);
    std::vector<StateId> order;
    std::function<void(StateId)> visit = [&](StateId q) {
        mark[q] = 1;
        for (const auto& f : options[q]) {
            for (const auto& edge : f.next) {
                if (!live(edge.first)) continue;
                if (mark[edge.first] == 1) {
                    throw UnsupportedFormula("until region is cyclic through state " + std::to_string(edge.first));
                }
                if (mark[edge.first] == 0) visit(edge.first);
            }
        }
        mark[q] = 2;
        order.push_back(q);
    };
    visit(s);
    std::reverse(order.begin(), order.end());

    std::vector<StateId> choice_states;
    double count = 1.0;
    for (StateId q : order) {
        if (options[q].size() > 1) {
            choice_states.push_back(q);
            count *= static_cast<double>(options[q].size());
        }
    }
    if (count > kSchedulerCap) {
        throw UnsupportedFormula("until evaluation would enumerate more than 10^6 positional schedulers");
    }

    auto mass_in = [&](const ExpPoly& hi) { return ep_integrate(hi, interval); };

    auto evaluate = [&](const std::vector<std::size_t>& pick) {
        std::vector<std::optional<Density>> dens(n);
        double success = 0.0;
        for (StateId q : order) {
            const std::size_t which = options[q].size() > 1
                                          ? pick[static_cast<std::size_t>(
                                                std::find(choice_states.begin(), choice_states.end(), q) -
                                                choice_states.begin())]
                                          : 0;
            const Folded& f = options[q][which];
            ExpPoly new_lo, new_hi;
            if (q == s) {
                if (f.dead) continue;
                new_lo = new_hi = ExpPoly::exp_density(f.rate);
            } else {
                if (!dens[q]) continue;
                Density in = std::move(*dens[q]);
                if (rhs.count(q) != 0) {
                    success += mass_in(in.hi);
                    in.hi = ExpPoly();
                }
                if (f.dead) continue;
                const double K = ep_integrate(ep_mul_exp(in.lo, -f.rate, 0), 0.0, a);
                new_lo = a > 0.0 ? ep_convolve_exp(in.lo, f.rate, 0.0) : ExpPoly();
                new_hi = ep_add(ep_scale(ExpPoly::exp_density(f.rate), K), ep_convolve_exp(in.hi, f.rate, a));
            }
            if (a == 0.0) new_lo = ExpPoly();
            for (const auto& [t, p] : f.next) {
                if (!good[t]) continue;
                if (!live(t)) {
                    // Terminal right-operand state.
                    success += p * mass_in(new_hi);
                    continue;
                }
                if (!dens[t]) dens[t] = Density{};
                dens[t]->lo = ep_add(dens[t]->lo, ep_scale(new_lo, p));
                dens[t]->hi = ep_add(dens[t]->hi, ep_scale(new_hi, p));
            }
        }
        return std::clamp(success, 0.0, 1.0);
    };

    ProbBounds out;
    out.scheduler_class = cls;
    std::vector<std::size_t> pick(choice_states.size(), 0);
    bool first = true;
    while (true) {
        const double v = evaluate(pick);
        if (first || v > out.upper || v < out.lower) {
            PositionalChoice choice;
            for (std::size_t i = 0; i < choice_states.size(); ++i) {
                choice[choice_states[i]] = options[choice_states[i]][pick[i]].index;
            }
            if (first || v > out.upper) {
                out.upper = v;
                out.upper_choice = choice;
            }
            if (first || v < out.lower) {
                out.lower = v;
                out.lower_choice = choice;
            }
        }
        first = false;
        std::size_t i = 0;
        while (i < pick.size() && ++pick[i] == options[choice_states[i]].size()) pick[i++] = 0;
        if (i == pick.size()) break;
    }
    return out;
}

Evaluator::Evaluator(const Ctmdp& model) : model_(model) { require_valid(model); }

std::vector<bool> Evaluator::sat_vector(const StatePtr& phi) {
    if (auto it = sat_cache_.find(phi.get()); it != sat_cache_.end()) return it->second;
    const std::size_t n = model_.num_states();
    std::vector<bool> out(n, false);
    switch (phi->kind) {
        case StateFormula::Kind::True: out.assign(n, true); break;
        case StateFormula::Kind::Atom:
            for (StateId s = 0; s < n; ++s) out[s] = model_.labels(s).count(phi->atom) != 0;
            break;
        case StateFormula::Kind::Not: {
            auto inner = sat_vector(phi->left);
            for (std::size_t s = 0; s < n; ++s) out[s] = !inner[s];
            break;
        }
        case StateFormula::Kind::And:
        case StateFormula::Kind::Or: {
            auto l = sat_vector(phi->left);
            auto r = sat_vector(phi->right);
            const bool conj = phi->kind == StateFormula::Kind::And;
            for (std::size_t s = 0; s < n; ++s) out[s] = conj ? (l[s] && r[s]) : (l[s] || r[s]);
            break;
        }
        case StateFormula::Kind::Prob: {
            const double p = to_double(phi->bound);
            const bool upper_side = phi->cmp == Comparison::Less || phi->cmp == Comparison::LessEqual;
            for (StateId s = 0; s < n; ++s) {
                const ProbBounds b = bounds(s, phi->path);
                const double v = upper_side ? b.upper : b.lower;
                switch (phi->cmp) {
                    case Comparison::Less: out[s] = v < p; break;
                    case Comparison::LessEqual: out[s] = v <= p; break;
                    case Comparison::GreaterEqual: out[s] = v >= p; break;
                    case Comparison::Greater: out[s] = v > p; break;
                }
                if (std::abs(v - p) < kPrecisionWarning) {
                    warnings_.push_back("state " + std::to_string(s) + ": bound " + std::to_string(v) +
                                        " is within 1e-9 of threshold " + format_rational(phi->bound) + " in " +
                                        to_string(*phi));
                }
            }
            break;
        }
    }
    state_keep_.push_back(phi);
    sat_cache_.emplace(phi.get(), out);
    return out;
}

StateSet Evaluator::sat(const StatePtr& phi) {
    auto v = sat_vector(phi);
    StateSet out;
    for (StateId s = 0; s < v.size(); ++s) {
        if (v[s]) out.insert(s);
    }
    return out;
}

bool Evaluator::holds(StateId s, const StatePtr& phi) {
    check_state(model_, s);
    return sat_vector(phi)[s];
}

ProbBounds Evaluator::bounds(StateId s, const PathPtr& psi) {
    check_state(model_, s);
    auto key = std::make_pair(psi.get(), s);
    if (auto it = bounds_cache_.find(key); it != bounds_cache_.end()) return it->second;
    ProbBounds b = compute_bounds(s, *psi);
    path_keep_.push_back(psi);
    bounds_cache_.emplace(key, b);
    return b;
}

namespace {

void flatten_or(const PathPtr& p, std::vector<PathPtr>& out) {
    if (p->kind == PathFormula::Kind::Or) {
        flatten_or(p->left, out);
        flatten_or(p->right, out);
    } else {
        out.push_back(p);
    }
}

bool is_state(const PathPtr& p) { return p->kind == PathFormula::Kind::State; }

}  // namespace

ProbBounds Evaluator::compute_bounds(StateId s, const PathFormula& psi) {
    switch (psi.kind) {
        case PathFormula::Kind::State: return constant(holds(s, psi.state) ? 1.0 : 0.0, SchedulerClass::Vertex);
        case PathFormula::Kind::Not: {
            ProbBounds inner = bounds(s, psi.left);
            ProbBounds out = inner;
            out.lower = 1.0 - inner.upper;
            out.upper = 1.0 - inner.lower;
            out.upper_choice = inner.lower_choice;
            out.lower_choice = inner.upper_choice;
            return out;
        }
        case PathFormula::Kind::Next:
            if (is_state(psi.left)) return next_bounds(model_, s, psi.interval, sat(psi.left->state));
            break;
        case PathFormula::Kind::Until:
            if (is_state(psi.left) && is_state(psi.right)) {
                return until_bounds_acyclic(model_, s, psi.interval, sat(psi.left->state), sat(psi.right->state));
            }
            break;
        case PathFormula::Kind::Or: {
            std::vector<PathPtr> leaves;
            flatten_or(psi.left, leaves);
            flatten_or(psi.right, leaves);
            const bool all_next = std::all_of(leaves.begin(), leaves.end(), [](const PathPtr& p) {
                return p->kind == PathFormula::Kind::Next && is_state(p->left);
            });
            if (all_next) {
                std::vector<NextClause> clauses;
                for (const auto& p : leaves) clauses.push_back({p->interval, sat(p->left->state)});
                return disjunctive_next_bounds(model_, s, clauses);
            }
            const bool all_until = std::all_of(leaves.begin(), leaves.end(), [](const PathPtr& p) {
                return p->kind == PathFormula::Kind::Until && is_state(p->left) && is_state(p->right);
            });
            if (all_until) {
                std::vector<UntilDisjunct> disjuncts;
                for (const auto& p : leaves) {
                    UntilDisjunct d{p->interval, sat(p->left->state), sat(p->right->state)};
                    // Instant 0 decides a disjunct unless s keeps it open through lhs.
                    if (d.rhs.count(s) != 0 && d.interval.contains(0.0)) return constant(1.0, SchedulerClass::Vertex);
                    if (d.lhs.count(s) != 0) disjuncts.push_back(std::move(d));
                }
                return csl_star_one_jump(model_, s, disjuncts);
            }
            break;
        }
        case PathFormula::Kind::And: break;
    }
    throw UnsupportedFormula("no evaluation procedure for path formula " + to_string(psi));
}

StateSet sat(const Ctmdp& model, const StatePtr& phi) { return Evaluator(model).sat(phi); }

std::vector<StatePtr> logical_equiv_check(const Ctmdp& model, StateId s, StateId r,
                                          const std::vector<StatePtr>& corpus) {
    Evaluator ev(model);
    std::vector<StatePtr> differing;
    for (const auto& f : corpus) {
        if (ev.holds(s, f) != ev.holds(r, f)) differing.push_back(f);
    }
    return differing;
}

}  // namespace ctmdp
