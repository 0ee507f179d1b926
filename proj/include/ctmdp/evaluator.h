#pragma once

#include "ctmdp/formula.h"
#include "ctmdp/model.h"

#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace ctmdp {

class UnsupportedFormula : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SchedulerClass { Vertex, PositionalDeterministic };
std::string to_string(SchedulerClass c);

/// Positional choice: state -> index into model.transitions().
using PositionalChoice = std::map<StateId, std::size_t>;

/// Extremal probabilities of a path formula from one state.
/// `upper_choice` / `lower_choice` are schedulers attaining the bounds; states
/// they omit do not influence the value.
struct ProbBounds {
    double lower = 0.0;
    double upper = 0.0;
    SchedulerClass scheduler_class = SchedulerClass::Vertex;
    bool exact = true;
    PositionalChoice upper_choice;
    PositionalChoice lower_choice;
};

struct NextClause {
    TimeInterval interval;
    StateSet target;
};

struct UntilDisjunct {
    TimeInterval interval;
    StateSet lhs;
    StateSet rhs;
};

/// max/min over transitions (l, mu) of s of mu(target) * interval_mass(l, I).
ProbBounds next_bounds(const Ctmdp& model, StateId s, const TimeInterval& interval, const StateSet& target);

/// Disjunction of next clauses with pairwise disjoint targets.
ProbBounds disjunctive_next_bounds(const Ctmdp& model, StateId s, const std::vector<NextClause>& clauses);

/// lhs U^I rhs over deterministic positional schedulers, for regions without cycles.
/// Throws UnsupportedFormula on a cyclic region or more than 10^6 schedulers.
ProbBounds until_bounds_acyclic(const Ctmdp& model, StateId s, const TimeInterval& interval, const StateSet& lhs,
                                const StateSet& rhs);

/// Disjunction of untils decided by the first jump: s is in every lhs and no rhs,
/// no successor of s is in any lhs, and the rhs sets are pairwise disjoint.
ProbBounds csl_star_one_jump(const Ctmdp& model, StateId s, const std::vector<UntilDisjunct>& disjuncts);

/// Recursive satisfaction with memoisation on formula nodes. One instance per model.
class Evaluator {
public:
    explicit Evaluator(const Ctmdp& model);

    StateSet sat(const StatePtr& phi);
    bool holds(StateId s, const StatePtr& phi);
    ProbBounds bounds(StateId s, const PathPtr& psi);

    /// Threshold comparisons that came within 1e-9 of the bound.
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    std::vector<bool> sat_vector(const StatePtr& phi);
    ProbBounds compute_bounds(StateId s, const PathFormula& psi);

    const Ctmdp& model_;
    std::unordered_map<const StateFormula*, std::vector<bool>> sat_cache_;
    std::map<std::pair<const PathFormula*, StateId>, ProbBounds> bounds_cache_;
    // Keeps cached keys alive.
    std::vector<StatePtr> state_keep_;
    std::vector<PathPtr> path_keep_;
    std::vector<std::string> warnings_;
};

StateSet sat(const Ctmdp& model, const StatePtr& phi);

/// Corpus formulas on which s and r disagree.
std::vector<StatePtr> logical_equiv_check(const Ctmdp& model, StateId s, StateId r, const std::vector<StatePtr>& corpus);

}  // namespace ctmdp
