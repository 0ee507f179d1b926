#pragma once

#include "ctmdp/evaluator.h"
#include "ctmdp/formula.h"
#include "ctmdp/model.h"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <vector>

namespace ctmdp {

/// One time bin of a total-time-positional scheduler: applies while the elapsed
/// time is below `upper` (the last bin is unbounded).
struct TtpBin {
    double upper = kInfinity;
    std::map<std::size_t, double> choice;  // transition index -> probability
};

/// Positional: state -> transition index. Ttp: state -> time bins.
/// States that are not listed take their first transition.
struct SchedulerSpec {
    enum class Kind { Positional, Ttp };
    Kind kind = Kind::Positional;
    std::map<StateId, std::size_t> positional;
    std::map<StateId, std::vector<TtpBin>> ttp;

    static SchedulerSpec from_choice(const PositionalChoice& choice);
};

/// Throws ModelError naming the first problem (missing transition, wrong source,
/// bins not increasing or not ending unbounded, weights not summing to 1).
void check_scheduler(const Ctmdp& model, const SchedulerSpec& spec);

SchedulerSpec scheduler_from_json(const nlohmann::json& doc);
nlohmann::json scheduler_to_json(const SchedulerSpec& spec);

/// states[i] is occupied for sojourn[i]; the last state was still occupied at the
/// horizon, so the path has one more state than sojourns.
struct SampledPath {
    std::vector<StateId> states;
    std::vector<double> sojourn;
    double horizon = 0.0;

    double total_time() const;
};

/// Counter-based generator: draw k of path p under seed is a pure function of (seed, p, k).
double uniform_open(std::uint64_t seed, std::uint64_t path, std::uint64_t draw);

/// Worker count: CTMDP_THREADS if set (>= 1), else hardware concurrency.
unsigned worker_count();

std::vector<SampledPath> sample_paths(const Ctmdp& model, StateId s, const SchedulerSpec& sched, double horizon,
                                      std::size_t n, std::uint64_t seed);

enum class Truth { False, Unknown, True };

/// Pointwise three-valued truth of psi at the start of a path prefix. Undecided
/// only when the answer depends on what happens after the horizon.
Truth check_path(const SampledPath& path, const PathFormula& psi, const Ctmdp& model);

struct Estimate {
    double pessimistic = 0.0;  // undecided paths count as failures
    double optimistic = 0.0;   // undecided paths count as successes
    double std_error = 0.0;    // sqrt(p(1-p)/n) at the pessimistic estimate
    double wilson_low = 0.0;   // 95% Wilson interval around the pessimistic estimate
    double wilson_high = 0.0;
    std::size_t n = 0;
    std::size_t undecided = 0;
};

/// psi's state subformulas must be free of P operators.
Estimate estimate(const std::vector<SampledPath>& paths, const PathFormula& psi, const Ctmdp& model);

/// 10 x the largest finite interval bound in psi (10 if there is none).
double default_horizon(const PathFormula& psi);

/// Samples and checks in one pass without keeping the paths.
Estimate simulate_estimate(const Ctmdp& model, StateId s, const SchedulerSpec& sched, const PathFormula& psi,
                           double horizon, std::size_t n, std::uint64_t seed);

}  // namespace ctmdp
