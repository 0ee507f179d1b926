#include "ctmdp/simulate.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>
#include <unordered_map>

namespace ctmdp {

SchedulerSpec SchedulerSpec::from_choice(const PositionalChoice& choice) {
    SchedulerSpec spec;
    spec.positional = choice;
    return spec;
}

void check_scheduler(const Ctmdp& model, const SchedulerSpec& spec) {
    auto check_index = [&](StateId s, std::size_t index) {
        if (!model.has_state(s)) throw ModelError("scheduler mentions unknown state " + std::to_string(s));
        if (index >= model.transitions().size()) {
            throw ModelError("scheduler references missing transition " + std::to_string(index));
        }
        if (model.transition(index).source != s) {
            throw ModelError("scheduler picks transition " + std::to_string(index) + " for state " + std::to_string(s) +
                             ", but it leaves state " + std::to_string(model.transition(index).source));
        }
    };
    for (const auto& [s, index] : spec.positional) check_index(s, index);
    for (const auto& [s, bins] : spec.ttp) {
        if (bins.empty()) throw ModelError("scheduler has no time bins for state " + std::to_string(s));
        for (std::size_t i = 0; i < bins.size(); ++i) {
            if (i > 0 && !(bins[i].upper > bins[i - 1].upper)) {
                throw ModelError("time bins for state " + std::to_string(s) + " are not strictly increasing");
            }
            double sum = 0.0;
            for (const auto& [index, w] : bins[i].choice) {
                check_index(s, index);
                if (!(w >= 0.0)) throw ModelError("negative scheduler weight for state " + std::to_string(s));
                sum += w;
            }
            if (std::abs(sum - 1.0) > 1e-12) {
                throw ModelError("scheduler weights for state " + std::to_string(s) + " do not sum to 1");
            }
        }
        if (bins.back().upper != kInfinity) {
            throw ModelError("last time bin for state " + std::to_string(s) + " must be unbounded");
        }
    }
}

SchedulerSpec scheduler_from_json(const nlohmann::json& doc) {
    auto bad = [](const std::string& what) { return ModelError("scheduler file: " + what); };
    if (!doc.is_object()) throw bad("expected an object");
    const std::string kind = doc.value("kind", "positional");
    auto key_state = [&](const std::string& key) {
        if (key.empty() || key.find_first_not_of("0123456789") != std::string::npos || key.size() > 9) {
            throw bad("'" + key + "' is not a state id");
        }
        return static_cast<StateId>(std::stoul(key));
    };
    auto index_of = [&](const std::string& key) {
        if (key.empty() || key.find_first_not_of("0123456789") != std::string::npos || key.size() > 9) {
            throw bad("'" + key + "' is not a transition index");
        }
        return static_cast<std::size_t>(std::stoul(key));
    };
    SchedulerSpec spec;
    if (kind == "positional") {
        spec.kind = SchedulerSpec::Kind::Positional;
        const nlohmann::json choices = doc.value("choices", nlohmann::json::object());
        for (const auto& [key, value] : choices.items()) {
            if (!value.is_number_unsigned()) throw bad("choice for state " + key + " must be a transition index");
            spec.positional[key_state(key)] = value.get<std::size_t>();
        }
    } else if (kind == "ttp") {
        spec.kind = SchedulerSpec::Kind::Ttp;
        const nlohmann::json all_bins = doc.value("bins", nlohmann::json::object());
        for (const auto& [key, bins] : all_bins.items()) {
            if (!bins.is_array()) throw bad("bins for state " + key + " must be an array");
            std::vector<TtpBin> list;
            for (const auto& b : bins) {
                TtpBin bin;
                const auto& upper = b.at("upper");
                if (upper.is_number()) {
                    bin.upper = upper.get<double>();
                } else if (!(upper.is_null() || (upper.is_string() && upper.get<std::string>() == "inf"))) {
                    throw bad("bin upper bound must be a number, null or \"inf\"");
                }
                for (const auto& [idx, w] : b.at("choice").items()) {
                    if (!w.is_number()) throw bad("scheduler weights must be numbers");
                    bin.choice[index_of(idx)] = w.get<double>();
                }
                list.push_back(std::move(bin));
            }
            spec.ttp[key_state(key)] = std::move(list);
        }
    } else {
        throw bad("unknown kind '" + kind + "' (expected positional or ttp)");
    }
    return spec;
}

nlohmann::json scheduler_to_json(const SchedulerSpec& spec) {
    nlohmann::json doc;
    if (spec.kind == SchedulerSpec::Kind::Positional) {
        doc["kind"] = "positional";
        doc["choices"] = nlohmann::json::object();
        for (const auto& [s, index] : spec.positional) doc["choices"][std::to_string(s)] = index;
        return doc;
    }
    doc["kind"] = "ttp";
    doc["bins"] = nlohmann::json::object();
    for (const auto& [s, bins] : spec.ttp) {
        auto list = nlohmann::json::array();
        for (const auto& bin : bins) {
            nlohmann::json b;
            b["upper"] = bin.upper == kInfinity ? nlohmann::json("inf") : nlohmann::json(bin.upper);
            b["choice"] = nlohmann::json::object();
            for (const auto& [index, w] : bin.choice) b["choice"][std::to_string(index)] = w;
            list.push_back(std::move(b));
        }
        doc["bins"][std::to_string(s)] = std::move(list);
    }
    return doc;
}

double SampledPath::total_time() const {
    double t = 0.0;
    for (double x : sojourn) t += x;
    return t;
}

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Per-state sampling tables built once per run.
struct Table {
    std::vector<std::size_t> steps;
    std::vector<double> rate;
    std::vector<std::vector<std::pair<StateId, double>>> cumulative;
};

std::vector<Table> build_tables(const Ctmdp& model) {
    std::vector<Table> tables(model.num_states());
    for (StateId s = 0; s < model.num_states(); ++s) {
        for (std::size_t index : model.steps(s)) {
            const Transition& t = model.transition(index);
            tables[s].steps.push_back(index);
            tables[s].rate.push_back(to_double(t.rate));
            std::vector<std::pair<StateId, double>> cum;
            Rational acc = 0;
            for (const auto& [target, p] : t.target.entries()) {
                acc += p;
                cum.emplace_back(target, to_double(acc));
            }
            tables[s].cumulative.push_back(std::move(cum));
        }
    }
    return tables;
}

std::size_t local_choice(const Ctmdp& model, const SchedulerSpec& sched, const Table& table, StateId s, double now,
                         double u) {
    auto local = [&](std::size_t global) {
        return static_cast<std::size_t>(std::find(table.steps.begin(), table.steps.end(), global) - table.steps.begin());
    };
    if (auto it = sched.positional.find(s); it != sched.positional.end()) return local(it->second);
    if (auto it = sched.ttp.find(s); it != sched.ttp.end()) {
        const auto& bins = it->second;
        const TtpBin* bin = &bins.back();
        for (const auto& b : bins) {
            if (now < b.upper) {
                bin = &b;
                break;
            }
        }
        double acc = 0.0;
        std::size_t last = 0;
        for (const auto& [index, w] : bin->choice) {
            if (w <= 0.0) continue;
            acc += w;
            last = index;
            if (u <= acc) return local(index);
        }
        return local(last);
    }
    (void)model;
    return 0;
}

SampledPath sample_one(const Ctmdp& model, const std::vector<Table>& tables, StateId s, const SchedulerSpec& sched,
                       double horizon, std::uint64_t seed, std::uint64_t index) {
    SampledPath path;
    path.horizon = horizon;
    path.states.push_back(s);
    double now = 0.0;
    for (std::uint64_t step = 0;; ++step) {
        const StateId q = path.states.back();
        const Table& table = tables[q];
        const std::size_t c = local_choice(model, sched, table, q, now, uniform_open(seed, index, 3 * step));
        const double dwell = -std::log(uniform_open(seed, index, 3 * step + 1)) / table.rate[c];
        if (now + dwell > horizon) break;
        now += dwell;
        const double u = uniform_open(seed, index, 3 * step + 2);
        const auto& cum = table.cumulative[c];
        StateId next = cum.back().first;
        for (const auto& [target, acc] : cum) {
            if (u <= acc) {
                next = target;
                break;
            }
        }
        path.sojourn.push_back(dwell);
        path.states.push_back(next);
    }
    return path;
}

template <typename Work>
void parallel_for(std::size_t n, Work work) {
    const unsigned workers = std::max(1u, std::min<unsigned>(worker_count(), static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (workers == 1) {
        work(0, 0, n);
        return;
    }
    std::vector<std::thread> threads;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(n, w * chunk);
        const std::size_t end = std::min(n, begin + chunk);
        threads.emplace_back([&work, w, begin, end] { work(w, begin, end); });
    }
    for (auto& t : threads) t.join();
}

Truth t_not(Truth a) { return a == Truth::True ? Truth::False : a == Truth::False ? Truth::True : Truth::Unknown; }
Truth t_and(Truth a, Truth b) {
    if (a == Truth::False || b == Truth::False) return Truth::False;
    if (a == Truth::True && b == Truth::True) return Truth::True;
    return Truth::Unknown;
}
Truth t_or(Truth a, Truth b) { return t_not(t_and(t_not(a), t_not(b))); }

class PathChecker {
public:
    PathChecker(const Ctmdp& model, const PathFormula& psi) : model_(model), psi_(psi) { prepare(psi); }

    Truth check(const SampledPath& path) const {
        // Absolute jump times, for interval arithmetic relative to any position.
        std::vector<double> at(path.states.size(), 0.0);
        for (std::size_t i = 0; i < path.sojourn.size(); ++i) at[i + 1] = at[i] + path.sojourn[i];
        return eval(psi_, path, at, 0);
    }

private:
    void prepare(const PathFormula& f) {
        if (f.kind == PathFormula::Kind::State) {
            if (!prob_free(*f.state)) {
                throw UnsupportedFormula("simulation needs path formulas without nested P operators");
            }
            std::vector<bool> v(model_.num_states());
            for (StateId s = 0; s < model_.num_states(); ++s) v[s] = holds(*f.state, s);
            sat_.emplace(f.state.get(), std::move(v));
            return;
        }
        if (f.left) prepare(*f.left);
        if (f.right) prepare(*f.right);
    }

    bool holds(const StateFormula& f, StateId s) const {
        switch (f.kind) {
            case StateFormula::Kind::True: return true;
            case StateFormula::Kind::Atom: return model_.labels(s).count(f.atom) != 0;
            case StateFormula::Kind::Not: return !holds(*f.left, s);
            case StateFormula::Kind::And: return holds(*f.left, s) && holds(*f.right, s);
            case StateFormula::Kind::Or: return holds(*f.left, s) || holds(*f.right, s);
            case StateFormula::Kind::Prob: break;
        }
        return false;
    }

    Truth eval(const PathFormula& f, const SampledPath& p, const std::vector<double>& at, std::size_t k) const {
        const std::size_t last = p.states.size() - 1;
        // Time still unaccounted for between position k and the horizon.
        const double room = p.horizon - at[k];
        switch (f.kind) {
            case PathFormula::Kind::State:
                return sat_.at(f.state.get())[p.states[k]] ? Truth::True : Truth::False;
            case PathFormula::Kind::Not: return t_not(eval(*f.left, p, at, k));
            case PathFormula::Kind::And: return t_and(eval(*f.left, p, at, k), eval(*f.right, p, at, k));
            case PathFormula::Kind::Or: return t_or(eval(*f.left, p, at, k), eval(*f.right, p, at, k));
            case PathFormula::Kind::Next: {
                if (k < last) {
                    if (!f.interval.contains(p.sojourn[k])) return Truth::False;
                    return eval(*f.left, p, at, k + 1);
                }
                // The unseen sojourn exceeds `room`.
                if (f.interval.bounded() && f.interval.upper <= room) return Truth::False;
                return Truth::Unknown;
            }
            case PathFormula::Kind::Until: {
                // Pointwise: only jump instants count.
                Truth acc = Truth::False;
                Truth prefix = Truth::True;
                for (std::size_t i = k; i <= last; ++i) {
                    const double tau = at[i] - at[k];
                    if (f.interval.bounded() && tau > f.interval.upper) return acc;
                    if (f.interval.contains(tau)) {
                        acc = t_or(acc, t_and(prefix, eval(*f.right, p, at, i)));
                        if (acc == Truth::True) return acc;
                    }
                    prefix = t_and(prefix, eval(*f.left, p, at, i));
                    if (prefix == Truth::False) return acc;
                }
                if (f.interval.bounded() && f.interval.upper <= room) return acc;
                return t_or(acc, t_and(prefix, Truth::Unknown));
            }
        }
        return Truth::Unknown;
    }

    const Ctmdp& model_;
    const PathFormula& psi_;
    std::unordered_map<const StateFormula*, std::vector<bool>> sat_;
};

Estimate summarise(std::size_t n, std::size_t yes, std::size_t undecided) {
    Estimate e;
    e.n = n;
    e.undecided = undecided;
    const double dn = static_cast<double>(n);
    e.pessimistic = static_cast<double>(yes) / dn;
    e.optimistic = static_cast<double>(yes + undecided) / dn;
    const double p = e.pessimistic;
    e.std_error = std::sqrt(p * (1.0 - p) / dn);
    const double z = 1.959963984540054;
    const double denom = 1.0 + z * z / dn;
    const double centre = (p + z * z / (2.0 * dn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / dn + z * z / (4.0 * dn * dn)) / denom;
    e.wilson_low = std::max(0.0, centre - half);
    e.wilson_high = std::min(1.0, centre + half);
    return e;
}

void collect_bounds(const PathFormula& f, double& best) {
    if (f.kind == PathFormula::Kind::Next || f.kind == PathFormula::Kind::Until) {
        best = std::max(best, f.interval.lower);
        if (f.interval.bounded()) best = std::max(best, f.interval.upper);
    }
    if (f.left) collect_bounds(*f.left, best);
    if (f.right) collect_bounds(*f.right, best);
}

}  // namespace

double uniform_open(std::uint64_t seed, std::uint64_t path, std::uint64_t draw) {
    const std::uint64_t h = mix64(seed ^ mix64(path ^ mix64(draw)));
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

unsigned worker_count() {
    if (const char* env = std::getenv("CTMDP_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(std::min(v, 256L));
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<SampledPath> sample_paths(const Ctmdp& model, StateId s, const SchedulerSpec& sched, double horizon,
                                      std::size_t n, std::uint64_t seed) {
    require_valid(model);
    if (!model.has_state(s)) throw ModelError("unknown state id " + std::to_string(s));
    if (n == 0) throw std::invalid_argument("need at least one path");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    check_scheduler(model, sched);
    const auto tables = build_tables(model);
    std::vector<SampledPath> paths(n);
    parallel_for(n, [&](unsigned, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) paths[i] = sample_one(model, tables, s, sched, horizon, seed, i);
    });
    return paths;
}

Truth check_path(const SampledPath& path, const PathFormula& psi, const Ctmdp& model) {
    return PathChecker(model, psi).check(path);
}

Estimate estimate(const std::vector<SampledPath>& paths, const PathFormula& psi, const Ctmdp& model) {
    if (paths.empty()) throw std::invalid_argument("no paths to estimate from");
    PathChecker checker(model, psi);
    std::size_t yes = 0, undecided = 0;
    for (const auto& p : paths) {
        const Truth t = checker.check(p);
        yes += t == Truth::True;
        undecided += t == Truth::Unknown;
    }
    return summarise(paths.size(), yes, undecided);
}

double default_horizon(const PathFormula& psi) {
    double best = 0.0;
    collect_bounds(psi, best);
    return best > 0.0 ? 10.0 * best : 10.0;
}

Estimate simulate_estimate(const Ctmdp& model, StateId s, const SchedulerSpec& sched, const PathFormula& psi,
                           double horizon, std::size_t n, std::uint64_t seed) {
    require_valid(model);
    if (!model.has_state(s)) throw ModelError("unknown state id " + std::to_string(s));
    if (n == 0) throw std::invalid_argument("need at least one path");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    check_scheduler(model, sched);
    const auto tables = build_tables(model);
    const PathChecker checker(model, psi);
    const unsigned workers = worker_count();
    std::vector<std::size_t> yes(workers, 0), undecided(workers, 0);
    parallel_for(n, [&](unsigned w, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const Truth t = checker.check(sample_one(model, tables, s, sched, horizon, seed, i));
            yes[w] += t == Truth::True;
            undecided[w] += t == Truth::Unknown;
        }
    });
    std::size_t y = 0, u = 0;
    for (unsigned w = 0; w < workers; ++w) {
        y += yes[w];
        u += undecided[w];
    }
    return summarise(n, y, u);
}

}  // namespace ctmdp
