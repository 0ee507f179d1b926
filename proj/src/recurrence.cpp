#include "ctmdp/recurrence.h"

#include "ctmdp/bisim.h"

#include <map>

namespace ctmdp {

std::string to_string(RecurrenceStatus status) {
    switch (status) {
        case RecurrenceStatus::NonRecurrent: return "non-recurrent";
        case RecurrenceStatus::Recurrent: return "recurrent";
        case RecurrenceStatus::Unknown: return "unknown";
    }
    return "unknown";
}

std::string to_string(RelationKind kind) {
    switch (kind) {
        case RelationKind::Label: return "label";
        case RelationKind::Preorder: return "pre-order";
        case RelationKind::StrongBisim: return "strong-bisim";
    }
    return "label";
}

Partition label_relation(const Ctmdp& model) { return label_partition(model); }

Partition preorder_relation(const Ctmdp& model) {
    require_valid(model);
    // Mutual satisfaction of the pre-order amounts to equal maxima of mu(C)
    // per (rate, block), which also forces equal rate sets.
    Partition current = label_partition(model);
    while (true) {
        using Signature = std::pair<std::size_t, std::map<std::pair<Rational, std::size_t>, Rational>>;
        std::map<Signature, std::size_t> ids;
        std::vector<std::size_t> keys;
        for (StateId s = 0; s < model.num_states(); ++s) {
            std::map<std::pair<Rational, std::size_t>, Rational> best;
            for (std::size_t index : model.steps(s)) {
                const Transition& t = model.transition(index);
                std::vector<Rational> mass(current.size(), Rational(0));
                for (const auto& [target, p] : t.target.entries()) mass[current.block_of(target)] += p;
                for (std::size_t c = 0; c < current.size(); ++c) {
                    auto [it, fresh] = best.emplace(std::make_pair(t.rate, c), mass[c]);
                    if (!fresh && mass[c] > it->second) it->second = mass[c];
                }
            }
            keys.push_back(ids.emplace(Signature{current.block_of(s), std::move(best)}, ids.size()).first->second);
        }
        Partition refined = Partition::from_keys(keys);
        if (refined.size() == current.size()) return refined;
        current = std::move(refined);
    }
}

namespace {

std::optional<std::size_t> recurrent_with(const Ctmdp& model, const Partition& part, const StateSet& silent,
                                          StateId s) {
    if (silent.count(s) != 0) return std::nullopt;
    if (successors(model, s).size() <= 2) return std::nullopt;
    const StateSet& own = part.block(part.block_of(s));
    for (std::size_t index : model.steps(s)) {
        bool ok = true;
        for (const auto& entry : model.transition(index).target.entries()) {
            const StateId next = entry.first;
            if (own.count(next) != 0) continue;
            StateSet allowed = own;
            const StateSet& theirs = part.block(part.block_of(next));
            allowed.insert(theirs.begin(), theirs.end());
            for (std::size_t inner : model.steps(next)) {
                if (model.transition(inner).target.mass(allowed) != 1) {
                    ok = false;
                    break;
                }
            }
            if (!ok) break;
        }
        if (ok) return index;
    }
    return std::nullopt;
}

std::optional<RecurrenceWitness> first_recurrent(const Ctmdp& model, const Partition& part, const StateSet& silent) {
    for (StateId s = 0; s < model.num_states(); ++s) {
        if (auto index = recurrent_with(model, part, silent, s)) return RecurrenceWitness{s, *index};
    }
    return std::nullopt;
}

}  // namespace

std::optional<std::size_t> two_step_recurrent_wrt(const Ctmdp& model, const Partition& part, StateId s) {
    require_valid(model);
    if (!model.has_state(s)) throw ModelError("unknown state id " + std::to_string(s));
    if (part.num_states() != model.num_states()) throw ModelError("partition does not match the model's state count");
    return recurrent_with(model, part, silent_states(model), s);
}

RecurrenceVerdict classify(const Ctmdp& model) {
    require_valid(model);
    const StateSet silent = silent_states(model);
    RecurrenceVerdict verdict;

    if (!first_recurrent(model, label_relation(model), silent)) {
        verdict.status = RecurrenceStatus::NonRecurrent;
        verdict.relation_used = RelationKind::Label;
        return verdict;
    }
    if (!first_recurrent(model, preorder_relation(model), silent)) {
        verdict.status = RecurrenceStatus::NonRecurrent;
        verdict.relation_used = RelationKind::Preorder;
        return verdict;
    }
    verdict.relation_used = RelationKind::StrongBisim;
    if (auto witness = first_recurrent(model, strong_bisimilarity(model), silent)) {
        verdict.status = RecurrenceStatus::Recurrent;
        verdict.witness = witness;
    } else {
        verdict.status = RecurrenceStatus::Unknown;
    }
    return verdict;
}

}  // namespace ctmdp
