#include "ctmdp/model.h"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <numeric>
#include <sstream>

namespace ctmdp {

Distribution::Distribution(std::map<StateId, Rational> entries) {
    for (auto& [state, prob] : entries) {
        prob.canonicalize();
        if (prob != 0) entries_.emplace(state, std::move(prob));
    }
}

Distribution Distribution::dirac(StateId state) { return Distribution({{state, Rational(1)}}); }

Rational Distribution::operator()(StateId state) const {
    auto it = entries_.find(state);
    return it == entries_.end() ? Rational(0) : it->second;
}

Rational Distribution::mass(const StateSet& states) const {
    Rational sum = 0;
    for (const auto& [state, prob] : entries_) {
        if (states.count(state) != 0) sum += prob;
    }
    return sum;
}

Rational Distribution::total() const {
    Rational sum = 0;
    for (const auto& entry : entries_) sum += entry.second;
    return sum;
}

StateSet Distribution::support() const {
    StateSet out;
    for (const auto& entry : entries_) {
        if (entry.second > 0) out.insert(entry.first);
    }
    return out;
}

Ctmdp::Ctmdp(std::vector<std::string> ap, std::vector<LabelSet> labels, std::vector<Transition> transitions,
             StateId initial)
    : ap_(std::move(ap)),
      labels_(std::move(labels)),
      transitions_(std::move(transitions)),
      initial_(initial),
      steps_(labels_.size()),
      origin_(labels_.size()) {
    std::sort(ap_.begin(), ap_.end());
    ap_.erase(std::unique(ap_.begin(), ap_.end()), ap_.end());
    for (std::size_t i = 0; i < transitions_.size(); ++i) {
        if (has_state(transitions_[i].source)) steps_[transitions_[i].source].push_back(i);
    }
    std::iota(origin_.begin(), origin_.end(), StateId{0});
    for (auto& t : transitions_) t.rate.canonicalize();
}

const LabelSet& Ctmdp::labels(StateId s) const {
    if (!has_state(s)) throw ModelError("unknown state id " + std::to_string(s));
    return labels_[s];
}

std::span<const std::size_t> Ctmdp::steps(StateId s) const {
    if (!has_state(s)) throw ModelError("unknown state id " + std::to_string(s));
    return steps_[s];
}

Ctmdp Ctmdp::with_origin(std::vector<StateId> origin) const {
    if (origin.size() != num_states()) throw ModelError("origin map size does not match state count");
    Ctmdp copy = *this;
    copy.origin_ = std::move(origin);
    return copy;
}

Partition::Partition(std::vector<StateSet> blocks, std::size_t num_states) : index_(num_states, SIZE_MAX) {
    for (const auto& b : blocks) {
        if (b.empty()) throw ModelError("partition has an empty block");
    }
    std::sort(blocks.begin(), blocks.end(), [](const StateSet& a, const StateSet& b) { return *a.begin() < *b.begin(); });
    for (std::size_t id = 0; id < blocks.size(); ++id) {
        for (StateId s : blocks[id]) {
            if (s >= num_states) throw ModelError("partition mentions unknown state " + std::to_string(s));
            if (index_[s] != SIZE_MAX) throw ModelError("partition blocks overlap at state " + std::to_string(s));
            index_[s] = id;
        }
    }
    for (std::size_t s = 0; s < num_states; ++s) {
        if (index_[s] == SIZE_MAX) throw ModelError("partition misses state " + std::to_string(s));
    }
    blocks_ = std::move(blocks);
}

Partition Partition::from_keys(const std::vector<std::size_t>& keys) {
    std::map<std::size_t, StateSet> groups;
    for (StateId s = 0; s < keys.size(); ++s) groups[keys[s]].insert(s);
    std::vector<StateSet> blocks;
    for (auto& g : groups) blocks.push_back(std::move(g.second));
    return Partition(std::move(blocks), keys.size());
}

Partition Partition::identity(std::size_t num_states) {
    std::vector<std::size_t> keys(num_states);
    std::iota(keys.begin(), keys.end(), std::size_t{0});
    return from_keys(keys);
}

Partition Partition::single(std::size_t num_states) { return from_keys(std::vector<std::size_t>(num_states, 0)); }

bool Partition::refines(const Partition& coarser) const {
    if (coarser.num_states() != num_states()) return false;
    for (const auto& b : blocks_) {
        std::size_t target = coarser.block_of(*b.begin());
        for (StateId s : b) {
            if (coarser.block_of(s) != target) return false;
        }
    }
    return true;
}

std::vector<std::string> validate(const Ctmdp& model) {
    std::vector<std::string> violations;
    const std::size_t n = model.num_states();
    if (n == 0) violations.emplace_back("model has no states");
    if (n != 0 && !model.has_state(model.initial())) {
        violations.push_back("initial state " + std::to_string(model.initial()) + " does not exist");
    }

    const std::set<std::string> universe(model.ap().begin(), model.ap().end());
    for (StateId s = 0; s < n; ++s) {
        for (const auto& atom : model.labels(s)) {
            if (universe.count(atom) == 0) {
                violations.push_back("state " + std::to_string(s) + " carries label '" + atom +
                                     "' outside the atomic-proposition set");
            }
        }
        if (model.steps(s).empty()) {
            violations.push_back("state " + std::to_string(s) +
                                 " has no outgoing transition (every state needs at least one)");
        }
    }

    const auto& transitions = model.transitions();
    for (std::size_t i = 0; i < transitions.size(); ++i) {
        const Transition& t = transitions[i];
        const std::string name = "transition " + std::to_string(i) + " (from state " + std::to_string(t.source) + ")";
        if (!model.has_state(t.source)) violations.push_back(name + ": source state does not exist");
        if (t.rate <= 0) violations.push_back(name + ": rate " + format_rational(t.rate) + " is not positive");
        for (const auto& [target, prob] : t.target.entries()) {
            if (!model.has_state(target)) {
                violations.push_back(name + ": target state " + std::to_string(target) + " does not exist");
            }
            if (prob < 0 || prob > 1) {
                violations.push_back(name + ": probability " + format_rational(prob) + " for state " +
                                     std::to_string(target) + " is outside [0,1]");
            }
        }
        if (Rational total = t.target.total(); total != 1) {
            violations.push_back(name + ": target distribution sums to " + format_rational(total) + ", not 1");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (transitions[j] == t) {
                violations.push_back(name + ": duplicates transition " + std::to_string(j));
                break;
            }
        }
    }
    return violations;
}

void require_valid(const Ctmdp& model) {
    auto violations = validate(model);
    if (violations.empty()) return;
    std::ostringstream message;
    message << "invalid model:";
    for (const auto& v : violations) message << "\n  " << v;
    throw ModelError(message.str());
}

StateSet successors(const Ctmdp& model, StateId s) {
    StateSet out;
    for (std::size_t index : model.steps(s)) {
        for (const auto& entry : model.transition(index).target.entries()) {
            if (entry.second > 0) out.insert(entry.first);
        }
    }
    return out;
}

StateSet reachable(const Ctmdp& model, StateId s) {
    StateSet seen{s};
    std::deque<StateId> queue{s};
    while (!queue.empty()) {
        StateId current = queue.front();
        queue.pop_front();
        for (StateId next : successors(model, current)) {
            if (model.has_state(next) && seen.insert(next).second) queue.push_back(next);
        }
    }
    return seen;
}

StateSet silent_states(const Ctmdp& model) {
    const std::size_t n = model.num_states();
    std::vector<std::set<Rational>> rates(n);
    for (StateId s = 0; s < n; ++s) rates[s] = exit_rates(model, s);

    StateSet out;
    for (StateId s = 0; s < n; ++s) {
        bool silent = true;
        for (StateId r : reachable(model, s)) {
            if (model.labels(r) != model.labels(s) || rates[r] != rates[s]) {
                silent = false;
                break;
            }
        }
        if (silent) out.insert(s);
    }
    return out;
}

bool is_ctmc(const Ctmdp& model) {
    for (StateId s = 0; s < model.num_states(); ++s) {
        if (model.steps(s).size() != 1) return false;
    }
    return true;
}

std::set<Rational> exit_rates(const Ctmdp& model, StateId s) {
    std::set<Rational> out;
    for (std::size_t index : model.steps(s)) out.insert(model.transition(index).rate);
    return out;
}

Rational max_rate(const Ctmdp& model) {
    if (model.transitions().empty()) throw ModelError("model has no transitions");
    Rational best = model.transitions().front().rate;
    for (const auto& t : model.transitions()) best = std::max(best, t.rate);
    return best;
}

StateSet states_with_label(const Ctmdp& model, const std::string& atom) {
    StateSet out;
    for (StateId s = 0; s < model.num_states(); ++s) {
        if (model.labels(s).count(atom) != 0) out.insert(s);
    }
    return out;
}

}  // namespace ctmdp
