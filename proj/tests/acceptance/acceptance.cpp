// Acceptance run: one [PASS]/[FAIL] line per criterion.

#include "ctmdp/bisim.h"
#include "ctmdp/distinguish.h"
#include "ctmdp/evaluator.h"
#include "ctmdp/formula.h"
#include "ctmdp/gadgets.h"
#include "ctmdp/recurrence.h"
#include "ctmdp/simulate.h"
#include "ctmdp/uniformize.h"

#include "support/corpus.h"
#include "support/random_model.h"
#include "support/subset_oracle.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace ctmdp;

namespace {

class Check {
public:
    void expect(bool ok, const std::string& what) {
        ++checks_;
        if (!ok && failures_.size() < 8) failures_.push_back(what);
        if (!ok) ++failed_;
    }
    void near(double got, double want, double tol, const std::string& what) {
        std::ostringstream s;
        s.precision(15);
        s << what << ": got " << got << " want " << want;
        expect(std::abs(got - want) <= tol, s.str());
    }
    void note(const std::string& text) { notes_.push_back(text); }

    bool ok() const { return failed_ == 0; }
    std::size_t checks() const { return checks_; }
    const std::vector<std::string>& failures() const { return failures_; }
    const std::vector<std::string>& notes() const { return notes_; }
    std::size_t failed() const { return failed_; }

private:
    std::size_t checks_ = 0;
    std::size_t failed_ = 0;
    std::vector<std::string> failures_;
    std::vector<std::string> notes_;
};

StateSet roles(const GadgetModel& g, std::initializer_list<const char*> names) {
    StateSet out;
    for (const char* n : names) out.insert(g.role(n));
    return out;
}

GadgetModel gadget(GadgetVariant v, Rational x = ratio(3, 8)) {
    GadgetParams p;
    p.variant = v;
    p.x = x;
    return build_gadget(p);
}

PathPtr path_of(const std::string& text, Dialect d = Dialect::CslStar) {
    return parse_formula("P>=0 (" + text + ")", d)->path;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// Closed-form values exercised by criteria 1-5, replayed by Monte Carlo in 10.
struct McCase {
    std::string what;
    const Ctmdp* model;
    StateId state;
    PositionalChoice choice;
    PathPtr psi;
    double expected;
};

const double kE = std::exp(1.0);

// Fixed gadgets shared by the closed-form checks and the simulation replay.
const GadgetModel& fig1() {
    static const GadgetModel g = gadget(GadgetVariant::Fig1Pair);
    return g;
}
const GadgetModel& ex2() {
    static const GadgetModel g = gadget(GadgetVariant::Example2Rates);
    return g;
}
const GadgetModel& ex4() {
    static const GadgetModel g = gadget(GadgetVariant::Example4Modified);
    return g;
}
const GadgetModel& ex3(int which) {
    static const GadgetModel fifth = gadget(GadgetVariant::Example3X, ratio(1, 5));
    static const GadgetModel three_fifths = gadget(GadgetVariant::Example3X, ratio(3, 5));
    return which == 0 ? fifth : three_fifths;
}

std::vector<McCase> mc_cases;

const std::vector<std::pair<double, double>> kGrid = {{0, 1}, {0.2, 1}, {0.5, 2}, {1, 3}, {0, 0.1}};

void criterion1(Check& c) {
    const auto& g = fig1();
    const Partition p = strong_bisimilarity(g.model);
    c.expect(!p.same_block(g.role("s0"), g.role("r0")), "s0 and r0 share a strong block");

    const std::vector<RationalVector> cands = {{ratio(3, 10), ratio(3, 10), ratio(2, 5)},
                                               {ratio(1, 2), ratio(2, 5), ratio(1, 10)}};
    const RationalVector target = {ratio(2, 5), ratio(3, 10), ratio(3, 10)};
    const HullResult h = combined_match(cands, target);
    c.expect(!h.feasible, "combined_match reports M as a combination of L and R");
    if (!h.feasible) {
        auto dot = [](const RationalVector& a, const RationalVector& b) {
            Rational s = 0;
            for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
            return s;
        };
        bool sound = h.certificate.size() == target.size() && dot(h.certificate, target) > h.bound;
        for (const auto& v : cands) sound = sound && dot(h.certificate, v) <= h.bound;
        c.expect(sound, "separating certificate does not separate");
    }

    const StateSet lhs = roles(g, {"s0", "r0"}), rhs = roles(g, {"u2", "u3"});
    for (auto [a, b] : kGrid) {
        const double want = 0.7 * (std::exp(-a) - std::exp(-b));
        for (const char* s : {"s0", "r0"}) {
            const std::string tag = std::string(s) + " [" + fmt(a) + "," + fmt(b) + "]";
            const ProbBounds r = until_bounds_acyclic(g.model, g.role(s), TimeInterval(a, b), lhs, rhs);
            c.near(r.upper, want, 1e-9, "until upper " + tag);
            std::ostringstream f;
            f.precision(17);
            f << "\"l0\" U[" << a << "," << b << "] (\"l2\" | \"l3\")";
            mc_cases.push_back({"1: until upper " + tag, &g.model, g.role(s), r.upper_choice, path_of(f.str()), want});
        }
    }
}

void criterion2(Check& c) {
    const auto& g = ex2();
    const TimeInterval i(0.2, 1);
    const StateSet u1 = roles(g, {"u1"});
    auto mass = [&](double rate) { return std::exp(-0.2 * rate) - std::exp(-rate); };
    const ProbBounds s1 = next_bounds(g.model, g.role("s1"), i, u1);
    const ProbBounds r1 = next_bounds(g.model, g.role("r1"), i, u1);
    c.near(s1.upper, mass(1), 1e-9, "s1 upper (rate 1)");
    c.near(s1.lower, mass(4), 1e-9, "s1 lower (rate 4)");
    c.near(r1.upper, mass(2), 1e-9, "r1 upper (rate 2)");
    c.near(r1.lower, mass(4), 1e-9, "r1 lower (rate 4)");
    c.expect(std::abs(mass(1) - 0.45) < 5e-3 && std::abs(mass(2) - 0.53) < 5e-3 && std::abs(mass(4) - 0.43) < 5e-3,
             "per-rate values are not near 0.45/0.53/0.43");

    const PathPtr psi = path_of("X[0.2,1] \"l1\"");
    mc_cases.push_back({"2: s1 upper", &g.model, g.role("s1"), s1.upper_choice, psi, mass(1)});
    mc_cases.push_back({"2: s1 lower", &g.model, g.role("s1"), s1.lower_choice, psi, mass(4)});
    mc_cases.push_back({"2: r1 upper", &g.model, g.role("r1"), r1.upper_choice, psi, mass(2)});

    const StateSet in = sat(g.model, parse_formula("P<=0.46 (X[0.2,1] \"l1\")", Dialect::Csl));
    c.expect(in.count(g.role("s1")) == 1, "s1 does not satisfy P<=0.46");
    c.expect(in.count(g.role("r1")) == 0, "r1 satisfies P<=0.46");

    const DistinguishResult d = distinguish(g.model, g.role("s1"), g.role("r1"));
    const StateSet ds = sat(g.model, d.formula);
    c.expect(ds.count(g.role("s1")) == 1 && ds.count(g.role("r1")) == 0,
             "distinguishing formula " + to_string(*d.formula) + " does not separate");
    c.note("separator " + to_string(*d.formula) + " via " + d.method);
}

void criterion3(Check& c) {
    for (const Rational& x : {ratio(1, 4), ratio(3, 8), ratio(1, 2)}) {
        const std::string tag = "x=" + format_rational(x);
        const auto g = gadget(GadgetVariant::Example3X, x);
        const Partition p = strong_bisimilarity(g.model);
        c.expect(p.same_block(g.role("s2"), g.role("r2")), tag + ": s2 and r2 separated");
        std::vector<LiftedDistribution> cands;
        for (std::size_t t : g.model.steps(g.role("s2"))) cands.push_back(lift(g.model.transition(t).target, p));
        const StateId u1 = g.role("u1");
        LiftedDistribution target;
        for (std::size_t t : g.model.steps(g.role("r2"))) {
            if (g.model.transition(t).target(u1) == x) target = lift(g.model.transition(t).target, p);
        }
        c.expect(!target.empty(), tag + ": r2 has no x-transition");
        if (target.empty()) continue;
        const HullResult h = combined_match(cands, target);
        c.expect(h.feasible && h.weights == RationalVector{2 - 4 * x, 4 * x - 1}, tag + ": weights differ from (2-4x, 4x-1)");
    }
    for (int which : {0, 1}) {
        const auto& g = ex3(which);
        const Rational x = which == 0 ? ratio(1, 5) : ratio(3, 5);
        const std::string tag = "x=" + format_rational(x);
        c.expect(!strong_bisimilarity(g.model).same_block(g.role("s2"), g.role("r2")), tag + ": s2 and r2 merged");
        const TimeInterval all(0, kInfinity);
        const StateSet u1 = roles(g, {"u1"});
        const ProbBounds s = next_bounds(g.model, g.role("s2"), all, u1);
        const ProbBounds r = next_bounds(g.model, g.role("r2"), all, u1);
        c.expect(s.upper != r.upper || s.lower != r.lower, tag + ": next bounds coincide");
        const double xd = to_double(x);
        c.near(s.upper, 0.5, 1e-12, tag + " s2 upper");
        c.near(s.lower, 0.25, 1e-12, tag + " s2 lower");
        c.near(r.upper, std::max(0.5, xd), 1e-12, tag + " r2 upper");
        c.near(r.lower, std::min(0.25, xd), 1e-12, tag + " r2 lower");
        const PathPtr psi = path_of("X[0,inf] \"l1\"");
        mc_cases.push_back({"3: " + tag + " s2 upper", &g.model, g.role("s2"), s.upper_choice, psi, 0.5});
        mc_cases.push_back({"3: " + tag + " s2 lower", &g.model, g.role("s2"), s.lower_choice, psi, 0.25});
        mc_cases.push_back({"3: " + tag + " r2 upper", &g.model, g.role("r2"), r.upper_choice, psi, std::max(0.5, xd)});
        mc_cases.push_back({"3: " + tag + " r2 lower", &g.model, g.role("r2"), r.lower_choice, psi, std::min(0.25, xd)});
    }
}

void criterion4(Check& c) {
    const auto& g = ex4();
    const Ctmdp& m = g.model;
    const StateSet lhs = roles(g, {"s0", "r0", "u3"}), rhs = roles(g, {"u2", "u3'"});
    const double w1 = 1 - 1 / kE, w2 = 1 - 2 / kE;
    const double values[] = {0.3 * w1 + 0.4 * w2, 0.3 * w1 + 0.3 * w2, 0.4 * w1 + 0.1 * w2};  // L, M, R
    const char* names[] = {"L", "M", "R"};
    const double approx[] = {0.295, 0.269, 0.279};
    const TimeInterval i(0, 1);
    const PathPtr psi = path_of("(\"l0\" | \"l3\") U[0,1] (\"l2\" | \"l4\")");

    const ProbBounds r0 = until_bounds_acyclic(m, g.role("r0"), i, lhs, rhs);
    c.near(r0.lower, values[1], 1e-9, "r0 lower (M)");
    c.near(r0.upper, values[0], 1e-9, "r0 upper (L)");
    mc_cases.push_back({"4: r0 lower (M)", &m, g.role("r0"), r0.lower_choice, psi, values[1]});

    const auto steps = m.steps(g.role("r0"));
    c.expect(steps.size() == 3, "r0 does not have three transitions");
    for (std::size_t j = 0; j < steps.size() && j < 3; ++j) {
        c.expect(std::abs(values[j] - approx[j]) < 5e-4, std::string(names[j]) + " not near " + fmt(approx[j]));
        std::vector<Transition> ts;
        for (std::size_t k = 0; k < m.transitions().size(); ++k) {
            if (m.transition(k).source != g.role("r0") || k == steps[j]) ts.push_back(m.transition(k));
        }
        const Ctmdp fixed(m.ap(), m.all_labels(), ts, m.initial());
        const ProbBounds one = until_bounds_acyclic(fixed, g.role("r0"), i, lhs, rhs);
        c.near(one.upper, values[j], 1e-9, std::string("scheduler ") + names[j]);
        c.near(one.lower, values[j], 1e-9, std::string("scheduler ") + names[j]);
        mc_cases.push_back({std::string("4: scheduler ") + names[j], &m, g.role("r0"), {{g.role("r0"), steps[j]}}, psi,
                            values[j]});
    }
    c.expect(r0.lower_choice.count(g.role("r0")) && r0.lower_choice.at(g.role("r0")) == steps[1],
             "lower bound not attained by M");

    const RecurrenceVerdict v4 = classify(m);
    c.expect(v4.status == RecurrenceStatus::NonRecurrent, "example4-modified classified " + to_string(v4.status));
    const RecurrenceVerdict v1 = classify(fig1().model);
    c.expect(v1.status == RecurrenceStatus::Recurrent, "fig1-pair classified " + to_string(v1.status));
}

void criterion5(Check& c) {
    const auto& g = fig1();
    const StateSet lhs = roles(g, {"s0", "r0"});
    const std::vector<UntilDisjunct> psi = {{TimeInterval(0.6, kInfinity), lhs, roles(g, {"u1"})},
                                            {TimeInterval(1, kInfinity), lhs, roles(g, {"u3"})}};
    const double s_up = std::max(0.3 * std::exp(-0.6) + 0.4 * std::exp(-1.0), 0.5 * std::exp(-0.6) + 0.1 * std::exp(-1.0));
    const double r_up = 0.4 * std::exp(-0.6) + 0.3 * std::exp(-1.0);
    c.expect(s_up < 0.312 && r_up > 0.312, "closed forms do not straddle 0.312");
    const ProbBounds s = csl_star_one_jump(g.model, g.role("s0"), psi);
    const ProbBounds r = csl_star_one_jump(g.model, g.role("r0"), psi);
    c.near(s.upper, s_up, 1e-9, "s0 upper");
    c.near(r.upper, r_up, 1e-9, "r0 upper");

    const std::string text = "(\"l0\" U[0.6,inf] \"l1\") | (\"l0\" U[1,inf] \"l3\")";
    const StateSet in = sat(g.model, parse_formula("P<=0.312 (" + text + ")", Dialect::CslStar));
    c.expect(in.count(g.role("s0")) == 1, "s0 does not satisfy P<=0.312");
    c.expect(in.count(g.role("r0")) == 0, "r0 satisfies P<=0.312");
    mc_cases.push_back({"5: s0 upper", &g.model, g.role("s0"), s.upper_choice, path_of(text), s_up});
    mc_cases.push_back({"5: r0 upper", &g.model, g.role("r0"), r.upper_choice, path_of(text), r_up});
}

void criterion6(Check& c) {
    std::mt19937_64 rng(601);
    std::size_t strictly_coarser = 0;
    for (int i = 0; i < 200; ++i) {
        const Ctmdp m = testkit::random_model(rng);
        const Partition strong = strong_bisimilarity(m), weak = weak_bisimilarity(m);
        c.expect(strong.refines(weak), "model " + std::to_string(i) + ": weak is not coarser than strong");
        strictly_coarser += weak.size() < strong.size();
        const Ctmdp u = uniformize(m);
        c.expect(strong_bisimilarity(u) == weak_bisimilarity(u), "model " + std::to_string(i) + ": strong != weak after uniformizing");
    }
    c.note(std::to_string(strictly_coarser) + "/200 with weak strictly coarser");
}

void criterion7(Check& c) {
    std::mt19937_64 rng(701);
    testkit::RandomModelOptions opts;
    opts.max_transitions = 1;
    for (int i = 0; i < 100; ++i) {
        const Ctmdp m = testkit::random_model(rng, opts);
        c.expect(is_ctmc(m), "model " + std::to_string(i) + " is not a CTMC");
        c.expect(ctmc_strong(m) == strong_bisimilarity(m), "model " + std::to_string(i) + ": ctmc_strong differs");
        c.expect(ctmc_weak(m) == weak_bisimilarity(m), "model " + std::to_string(i) + ": ctmc_weak differs");
    }
}

void monotone(Check& c, const Ctmdp& m, const std::string& what, std::size_t& recurrent) {
    // Finest first.
    const std::vector<Partition> chain = {strong_bisimilarity(m), preorder_relation(m), label_relation(m)};
    for (std::size_t i = 0; i < chain.size(); ++i) {
        for (std::size_t j = i + 1; j < chain.size(); ++j) {
            c.expect(chain[i].refines(chain[j]), what + ": relation chain out of order");
            for (StateId s = 0; s < m.num_states(); ++s) {
                if (two_step_recurrent_wrt(m, chain[i], s)) {
                    c.expect(two_step_recurrent_wrt(m, chain[j], s).has_value(),
                             what + ": state " + std::to_string(s) + " loses recurrence under a coarser relation");
                }
            }
        }
    }
    recurrent += classify(m).status == RecurrenceStatus::Recurrent;
}

void criterion8(Check& c) {
    std::size_t recurrent = 0;
    for (const auto& name : testkit::fixture_names()) monotone(c, testkit::load_fixture(name), name, recurrent);
    std::mt19937_64 rng(801);
    testkit::RandomModelOptions opts;
    opts.num_labels = 1;
    for (int i = 0; i < 100; ++i) monotone(c, testkit::random_model(rng, opts), "random " + std::to_string(i), recurrent);
    c.note(std::to_string(recurrent) + " recurrent models");
}

void criterion9(Check& c) {
    std::mt19937_64 rng(901);
    std::size_t yes = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const long n = 1 + static_cast<long>(rng() % 8);
        std::vector<Rational> w;
        for (long i = 0; i < n; ++i) w.push_back(ratio(static_cast<long>(rng() % 11) - 5, 20 * n));
        GadgetParams p;
        p.variant = GadgetVariant::SubsetSum;
        p.weights = w;
        const bool verdict = subset_sum_verdict(w);
        c.expect(verdict == testkit::gadget_separable(build_gadget(p)), "trial " + std::to_string(trial) + " disagrees");
        yes += verdict;
    }
    c.note(std::to_string(yes) + "/100 yes-instances");
}

void criterion10(Check& c) {
    std::uint64_t seed = 1000;
    double worst = 0.0;
    for (const McCase& k : mc_cases) {
        const Estimate e = simulate_estimate(*k.model, k.state, SchedulerSpec::from_choice(k.choice), *k.psi, 40.0, 100000, ++seed);
        c.expect(e.undecided == 0, k.what + ": " + std::to_string(e.undecided) + " undecided paths");
        const double z = std::abs(e.pessimistic - k.expected) / std::max(e.std_error, 1e-12);
        worst = std::max(worst, z);
        c.expect(z <= 4.0, k.what + ": estimate " + fmt(e.pessimistic) + " vs " + fmt(k.expected) + " (" + fmt(z) + " se)");
    }
    c.note(std::to_string(mc_cases.size()) + " bounds replayed, worst " + fmt(worst) + " se");
}

void criterion11(Check& c) {
    std::size_t quotient_pairs = 0, uniform_pairs = 0, skipped = 0;
    for (const auto& name : testkit::fixture_names()) {
        const Ctmdp m = testkit::load_fixture(name);
        const Partition p = strong_bisimilarity(m);
        const Ctmdp q = quotient(m, p);
        const Ctmdp u = uniformize(m);
        Evaluator em(m), eq(q), eu(u);
        for (const StatePtr& f : testkit::regression_corpus(m)) {
            for (StateId s = 0; s < m.num_states(); ++s) {
                const std::string tag = name + " state " + std::to_string(s) + " " + to_string(*f);
                ProbBounds a;
                try {
                    a = em.bounds(s, f->path);
                } catch (const UnsupportedFormula&) {
                    ++skipped;
                    continue;
                }
                try {
                    const ProbBounds b = eq.bounds(static_cast<StateId>(p.block_of(s)), f->path);
                    c.near(b.lower, a.lower, 1e-9, "quotient lower " + tag);
                    c.near(b.upper, a.upper, 1e-9, "quotient upper " + tag);
                    ++quotient_pairs;
                } catch (const UnsupportedFormula& e) {
                    c.expect(false, "quotient rejects " + tag + ": " + e.what());
                }
                if (f->path->kind != PathFormula::Kind::Until) continue;
                try {
                    const ProbBounds b = eu.bounds(s, f->path);
                    c.near(b.lower, a.lower, 1e-9, "uniformized lower " + tag);
                    c.near(b.upper, a.upper, 1e-9, "uniformized upper " + tag);
                    ++uniform_pairs;
                } catch (const UnsupportedFormula&) {
                    ++skipped;
                }
            }
        }
    }
    c.expect(quotient_pairs > 0 && uniform_pairs > 0, "nothing was compared");
    c.note(std::to_string(quotient_pairs) + " quotient and " + std::to_string(uniform_pairs) + " uniformization comparisons, " +
           std::to_string(skipped) + " unsupported (cyclic) skipped");
}

struct Criterion {
    int id;
    std::string title;
    double budget_s;  // 0: no budget
    std::function<void(Check&)> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "fig1-pair: strong separation, infeasible match, until closed form", 1, criterion1},
        {2, "example2-rates: per-rate next bounds, sat, verified separator", 1, criterion2},
        {3, "example3-x: merge window and weights, separation outside it", 1, criterion3},
        {4, "example4-modified: scheduler values, recurrence verdicts", 0, criterion4},
        {5, "fig1-pair: one-jump disjunction straddles 0.312", 0, criterion5},
        {6, "200 random models: weak coarser than strong, equal once uniformized", 60, criterion6},
        {7, "100 random CTMCs: CTMC relations agree", 0, criterion7},
        {8, "recurrence monotone along the relation chain", 0, criterion8},
        {9, "subset-sum gadget against exhaustive oracle", 30, criterion9},
        {10, "Monte Carlo concordance of closed-form bounds", 120, criterion10},
        {11, "quotient and uniformization preserve bounds", 0, criterion11},
    };
    int failed = 0;
    for (const Criterion& k : criteria) {
        Check c;
        const auto start = std::chrono::steady_clock::now();
        try {
            k.run(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (k.budget_s > 0) c.expect(secs < k.budget_s, "took " + fmt(secs) + " s, budget " + fmt(k.budget_s) + " s");
        failed += !c.ok();
        std::cout << (c.ok() ? "[PASS] " : "[FAIL] ") << k.id << ". " << k.title << " (" << c.checks() << " checks, "
                  << fmt(secs) << " s)\n";
        for (const auto& n : c.notes()) std::cout << "       " << n << "\n";
        for (const auto& f : c.failures()) std::cout << "       ! " << f << "\n";
        if (c.failed() > c.failures().size()) std::cout << "       ! ... " << c.failed() - c.failures().size() << " more\n";
        std::cout.flush();
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
