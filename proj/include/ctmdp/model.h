#pragma once

#include "ctmdp/rational.h"

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctmdp {

using StateId = std::uint32_t;
using LabelSet = std::set<std::string>;
using StateSet = std::set<StateId>;

/// Raised when an operation receives a model or state id it cannot work with.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Finitely supported probability mapping over states. Exact zeros are never stored.
class Distribution {
public:
    Distribution() = default;
    explicit Distribution(std::map<StateId, Rational> entries);

    static Distribution dirac(StateId state);

    const std::map<StateId, Rational>& entries() const { return entries_; }
    Rational operator()(StateId state) const;
    Rational mass(const StateSet& states) const;
    Rational total() const;
    StateSet support() const;
    bool empty() const { return entries_.empty(); }

    friend bool operator==(const Distribution& a, const Distribution& b) { return a.entries_ == b.entries_; }
    friend bool operator<(const Distribution& a, const Distribution& b) { return a.entries_ < b.entries_; }

private:
    std::map<StateId, Rational> entries_;
};

struct Transition {
    StateId source = 0;
    Rational rate;
    Distribution target;

    friend bool operator==(const Transition& a, const Transition& b) {
        return a.source == b.source && a.rate == b.rate && a.target == b.target;
    }
};

/// A continuous-time Markov decision process (S, ->, AP, L, s0).
///
/// States are the integers 0..n-1. The value is immutable once built; it may
/// violate the well-formedness rules (see validate), so file input can be
/// reported on rather than rejected wholesale. Analyses call require_valid.
class Ctmdp {
public:
    Ctmdp() = default;
    Ctmdp(std::vector<std::string> ap, std::vector<LabelSet> labels, std::vector<Transition> transitions,
          StateId initial);

    std::size_t num_states() const { return labels_.size(); }
    bool has_state(StateId s) const { return s < labels_.size(); }

    const std::vector<std::string>& ap() const { return ap_; }
    const LabelSet& labels(StateId s) const;
    const std::vector<LabelSet>& all_labels() const { return labels_; }

    const std::vector<Transition>& transitions() const { return transitions_; }
    const Transition& transition(std::size_t index) const { return transitions_.at(index); }
    /// Indices into transitions() of the transitions leaving `s`, in input order.
    std::span<const std::size_t> steps(StateId s) const;

    StateId initial() const { return initial_; }

    /// Source-model state each state was derived from (identity unless set by a transform).
    const std::vector<StateId>& origin() const { return origin_; }
    Ctmdp with_origin(std::vector<StateId> origin) const;

private:
    std::vector<std::string> ap_;
    std::vector<LabelSet> labels_;
    std::vector<Transition> transitions_;
    StateId initial_ = 0;
    std::vector<std::vector<std::size_t>> steps_;
    std::vector<StateId> origin_;
};

/// Equivalence relation on states as an ordered block list. Blocks are kept
/// sorted by their minimum state so equal relations compare equal.
class Partition {
public:
    Partition() = default;
    /// Throws ModelError unless `blocks` are disjoint, non-empty and cover 0..n-1.
    Partition(std::vector<StateSet> blocks, std::size_t num_states);
    /// Block ids given per state (any labelling); renumbered canonically.
    static Partition from_keys(const std::vector<std::size_t>& keys);
    static Partition identity(std::size_t num_states);
    static Partition single(std::size_t num_states);

    std::size_t size() const { return blocks_.size(); }
    std::size_t num_states() const { return index_.size(); }
    const std::vector<StateSet>& blocks() const { return blocks_; }
    const StateSet& block(std::size_t id) const { return blocks_.at(id); }
    std::size_t block_of(StateId s) const { return index_.at(s); }
    bool same_block(StateId a, StateId b) const { return block_of(a) == block_of(b); }
    const std::vector<std::size_t>& index() const { return index_; }

    /// True iff every block of *this lies inside a block of `coarser`.
    bool refines(const Partition& coarser) const;

    friend bool operator==(const Partition& a, const Partition& b) { return a.blocks_ == b.blocks_; }

private:
    std::vector<StateSet> blocks_;
    std::vector<std::size_t> index_;
};

/// Every well-formedness violation, each naming the offending state or transition.
std::vector<std::string> validate(const Ctmdp& model);

/// Throws ModelError listing the violations if validate() is non-empty.
void require_valid(const Ctmdp& model);

StateSet successors(const Ctmdp& model, StateId s);
/// Transitive closure of successors; always contains `s`.
StateSet reachable(const Ctmdp& model, StateId s);
/// States whose reachable set agrees on labels and on the set of exit rates.
StateSet silent_states(const Ctmdp& model);
bool is_ctmc(const Ctmdp& model);

std::set<Rational> exit_rates(const Ctmdp& model, StateId s);
Rational max_rate(const Ctmdp& model);

/// States whose label set contains `atom`.
StateSet states_with_label(const Ctmdp& model, const std::string& atom);

}  // namespace ctmdp
