#pragma once

#include "ctmdp/model.h"

#include <optional>
#include <string>

namespace ctmdp {

enum class RecurrenceStatus { NonRecurrent, Recurrent, Unknown };
enum class RelationKind { Label, Preorder, StrongBisim };

std::string to_string(RecurrenceStatus status);
std::string to_string(RelationKind kind);

struct RecurrenceWitness {
    StateId state = 0;
    std::size_t transition = 0;  // index into model.transitions()
};

struct RecurrenceVerdict {
    RecurrenceStatus status = RecurrenceStatus::Unknown;
    std::optional<RecurrenceWitness> witness;
    RelationKind relation_used = RelationKind::Label;
};

/// Same as label_partition: states related iff their labels agree.
Partition label_relation(const Ctmdp& model);

/// Greatest relation inside label equality where, for every block C and
/// every s -l-> mu, some r -l-> mu' has mu'(C) >= mu(C), and symmetrically.
Partition preorder_relation(const Ctmdp& model);

/// A transition of `s` satisfying the two-step return condition w.r.t. `part`,
/// provided s is not silent and has more than two successors.
std::optional<std::size_t> two_step_recurrent_wrt(const Ctmdp& model, const Partition& part, StateId s);

/// Label relation, then pre-order, then strong bisimilarity; see RecurrenceStatus.
RecurrenceVerdict classify(const Ctmdp& model);

}  // namespace ctmdp
