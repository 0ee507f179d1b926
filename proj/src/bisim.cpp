#include "ctmdp/bisim.h"

#include "ctmdp/uniformize.h"

#include <algorithm>
#include <map>

namespace ctmdp {

LiftedDistribution lift(const Distribution& dist, const Partition& part) {
    LiftedDistribution out(part.size(), Rational(0));
    for (const auto& [state, p] : dist.entries()) out[part.block_of(state)] += p;
    return out;
}

HullResult combined_match(const std::vector<LiftedDistribution>& candidates, const LiftedDistribution& target) {
    return convex_hull_membership(candidates, target);
}

Partition label_partition(const Ctmdp& model) {
    std::map<LabelSet, std::size_t> ids;
    std::vector<std::size_t> keys;
    for (StateId s = 0; s < model.num_states(); ++s) {
        keys.push_back(ids.emplace(model.labels(s), ids.size()).first->second);
    }
    return Partition::from_keys(keys);
}

namespace {

// Distinct lifted targets of a state, grouped by rate.
using RateHulls = std::map<Rational, std::vector<LiftedDistribution>>;

RateHulls lifted_by_rate(const Ctmdp& model, const Partition& part, StateId s) {
    RateHulls out;
    for (std::size_t index : model.steps(s)) {
        const Transition& t = model.transition(index);
        auto& list = out[t.rate];
        LiftedDistribution l = lift(t.target, part);
        if (std::find(list.begin(), list.end(), l) == list.end()) list.push_back(std::move(l));
    }
    for (auto& entry : out) std::sort(entry.second.begin(), entry.second.end());
    return out;
}

bool inside(const std::vector<LiftedDistribution>& vertices, const std::vector<LiftedDistribution>& hull) {
    for (const auto& v : vertices) {
        if (std::find(hull.begin(), hull.end(), v) != hull.end()) continue;
        if (!convex_hull_membership(hull, v).feasible) return false;
    }
    return true;
}

bool same_hulls(const RateHulls& a, const RateHulls& b) {
    if (a.size() != b.size()) return false;
    for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
        if (ia->first != ib->first) return false;
        if (ia->second == ib->second) continue;
        if (!inside(ia->second, ib->second) || !inside(ib->second, ia->second)) return false;
    }
    return true;
}

std::vector<StateSet> predecessors(const Ctmdp& model) {
    std::vector<StateSet> pred(model.num_states());
    for (const auto& t : model.transitions()) {
        for (const auto& entry : t.target.entries()) pred[entry.first].insert(t.source);
    }
    return pred;
}

}  // namespace

bool transfer_equivalent(const Ctmdp& model, const Partition& part, StateId s, StateId r) {
    return same_hulls(lifted_by_rate(model, part, s), lifted_by_rate(model, part, r));
}

RefinementTrace strong_refinement(const Ctmdp& model) {
    require_valid(model);
    const std::size_t n = model.num_states();
    const auto pred = predecessors(model);

    RefinementTrace trace;
    trace.rounds.push_back(label_partition(model));
    std::vector<bool> dirty(trace.rounds.back().size(), true);

    while (true) {
        const Partition& current = trace.rounds.back();
        std::vector<std::size_t> keys(n);
        std::size_t next_key = 0;
        // Which old block each new key descends from, to detect splits.
        std::vector<std::size_t> parent_of_key;
        for (std::size_t b = 0; b < current.size(); ++b) {
            const StateSet& block = current.block(b);
            if (!dirty[b] || block.size() == 1) {
                for (StateId s : block) keys[s] = next_key;
                parent_of_key.push_back(b);
                ++next_key;
                continue;
            }
            std::vector<std::pair<RateHulls, std::size_t>> reps;
            for (StateId s : block) {
                RateHulls mine = lifted_by_rate(model, current, s);
                auto match = std::find_if(reps.begin(), reps.end(),
                                          [&](const auto& rep) { return same_hulls(rep.first, mine); });
                if (match != reps.end()) {
                    keys[s] = match->second;
                } else {
                    keys[s] = next_key;
                    parent_of_key.push_back(b);
                    reps.emplace_back(std::move(mine), next_key++);
                }
            }
        }
        if (next_key == current.size()) break;

        Partition refined = Partition::from_keys(keys);
        std::vector<bool> split(current.size(), false);
        std::vector<std::size_t> pieces(current.size(), 0);
        for (const auto& block : refined.blocks()) ++pieces[current.block_of(*block.begin())];
        for (std::size_t b = 0; b < current.size(); ++b) split[b] = pieces[b] > 1;

        std::vector<bool> next_dirty(refined.size(), false);
        for (StateId s = 0; s < n; ++s) {
            if (!split[current.block_of(s)]) continue;
            for (StateId p : pred[s]) next_dirty[refined.block_of(p)] = true;
        }
        dirty = std::move(next_dirty);
        trace.rounds.push_back(std::move(refined));
    }
    return trace;
}

Partition strong_bisimilarity(const Ctmdp& model) { return strong_refinement(model).rounds.back(); }

bool is_strong_bisimulation(const Ctmdp& model, const Partition& part) {
    if (part.num_states() != model.num_states()) return false;
    for (const auto& block : part.blocks()) {
        const StateId rep = *block.begin();
        const RateHulls rep_hulls = lifted_by_rate(model, part, rep);
        for (StateId s : block) {
            if (s == rep) continue;
            if (model.labels(s) != model.labels(rep)) return false;
            if (!same_hulls(rep_hulls, lifted_by_rate(model, part, s))) return false;
        }
    }
    return true;
}

Partition weak_bisimilarity(const Ctmdp& model, const std::optional<Rational>& e) {
    require_valid(model);
    return strong_bisimilarity(uniformize(model, e.value_or(uniformization_rate(model))));
}

Ctmdp quotient(const Ctmdp& model, const Partition& part) {
    require_valid(model);
    if (part.num_states() != model.num_states()) throw ModelError("partition does not match the model's state count");
    if (!is_strong_bisimulation(model, part)) {
        throw ModelError("partition is not label-uniform or not a strong bisimulation");
    }
    std::vector<LabelSet> labels;
    std::vector<StateId> origin;
    std::vector<Transition> transitions;
    for (std::size_t b = 0; b < part.size(); ++b) {
        const StateId rep = *part.block(b).begin();
        labels.push_back(model.labels(rep));
        origin.push_back(model.origin()[rep]);
        for (std::size_t index : model.steps(rep)) {
            const Transition& t = model.transition(index);
            std::map<StateId, Rational> entries;
            for (const auto& [target, p] : t.target.entries()) entries[static_cast<StateId>(part.block_of(target))] += p;
            Transition q{static_cast<StateId>(b), t.rate, Distribution(std::move(entries))};
            if (std::find(transitions.begin(), transitions.end(), q) == transitions.end()) {
                transitions.push_back(std::move(q));
            }
        }
    }
    return Ctmdp(model.ap(), std::move(labels), std::move(transitions),
                 static_cast<StateId>(part.block_of(model.initial())))
        .with_origin(std::move(origin));
}

namespace {

Partition ctmc_refine(const Ctmdp& model, bool weak) {
    require_valid(model);
    if (!is_ctmc(model)) throw ModelError("model is not a CTMC (some state has more than one transition)");
    Partition current = label_partition(model);
    while (true) {
        using Signature = std::pair<std::size_t, std::map<std::size_t, Rational>>;
        std::map<Signature, std::size_t> ids;
        std::vector<std::size_t> keys;
        for (StateId s = 0; s < model.num_states(); ++s) {
            const Transition& t = model.transition(model.steps(s).front());
            const std::size_t own = current.block_of(s);
            std::map<std::size_t, Rational> flow;
            for (const auto& [target, p] : t.target.entries()) {
                const std::size_t b = current.block_of(target);
                if (weak && b == own) continue;
                flow[b] += t.rate * p;
            }
            keys.push_back(ids.emplace(Signature{own, std::move(flow)}, ids.size()).first->second);
        }
        Partition refined = Partition::from_keys(keys);
        if (refined.size() == current.size()) return refined;
        current = std::move(refined);
    }
}

}  // namespace

Partition ctmc_strong(const Ctmdp& model) { return ctmc_refine(model, false); }

Partition ctmc_weak(const Ctmdp& model) { return ctmc_refine(model, true); }

}  // namespace ctmdp
