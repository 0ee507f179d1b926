#pragma once

#include "ctmdp/lp.h"
#include "ctmdp/model.h"

#include <optional>

namespace ctmdp {

/// Block masses of a distribution, indexed by block id of a fixed partition.
using LiftedDistribution = RationalVector;

LiftedDistribution lift(const Distribution& dist, const Partition& part);

/// Is `target` a combined transition of `candidates` (all of one rate, lifted to one partition)?
HullResult combined_match(const std::vector<LiftedDistribution>& candidates, const LiftedDistribution& target);

/// Blocks are the classes of equal label sets.
Partition label_partition(const Ctmdp& model);

/// Partitions produced by refinement: rounds.front() is the label partition,
/// rounds.back() the fixpoint. Consecutive entries differ.
struct RefinementTrace {
    std::vector<Partition> rounds;
};

RefinementTrace strong_refinement(const Ctmdp& model);
Partition strong_bisimilarity(const Ctmdp& model);

/// True iff the two states satisfy the transfer condition w.r.t. `part` in both
/// directions: equal rate sets and, per rate, equal convex hulls of lifted targets.
bool transfer_equivalent(const Ctmdp& model, const Partition& part, StateId s, StateId r);

/// Label-uniform and closed under the transfer condition.
bool is_strong_bisimulation(const Ctmdp& model, const Partition& part);

/// Strong bisimilarity of the uniformized model (rate `e`, default the maximal rate).
Partition weak_bisimilarity(const Ctmdp& model, const std::optional<Rational>& e = std::nullopt);

/// One state per block; the representative (least member) supplies the transitions.
/// Throws ModelError if `part` is not a strong bisimulation.
Ctmdp quotient(const Ctmdp& model, const Partition& part);

/// Signature refinement on CTMCs over rate-weighted block masses.
/// Throws ModelError if the model is not a CTMC.
Partition ctmc_strong(const Ctmdp& model);
Partition ctmc_weak(const Ctmdp& model);

}  // namespace ctmdp
