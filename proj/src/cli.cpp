#include "ctmdp/cli.h"

#include "ctmdp/bisim.h"
#include "ctmdp/distinguish.h"
#include "ctmdp/evaluator.h"
#include "ctmdp/gadgets.h"
#include "ctmdp/model_io.h"
#include "ctmdp/recurrence.h"
#include "ctmdp/simulate.h"
#include "ctmdp/uniformize.h"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

namespace ctmdp::cli {

namespace {

using json = nlohmann::ordered_json;

// Carries an exit code and an error kind up to the report writer.
struct Failure {
    int code;
    std::string kind;
    std::string message;
};

json num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return "sha256:" + hex;
}

struct Context {
    explicit Context(std::istream& input) : in(input) {}
    std::istream& in;
    json parameters = json::object();
    json results = json::object();
    std::vector<std::string> warnings;
    json digest = nullptr;
    int exit_code = 0;
};

std::string read_text(const std::string& path, std::istream& in) {
    if (path == "-") return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    std::ifstream file(path, std::ios::binary);
    if (!file) throw Failure{2, "io", "cannot open '" + path + "'"};
    return std::string(std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>());
}

Ctmdp load(Context& ctx, const std::string& path, bool require = true) {
    const std::string text = read_text(path, ctx.in);
    ctx.digest = sha256_hex(text);
    Ctmdp model;
    try {
        model = parse_model(text);
    } catch (const ModelFormatError& e) {
        throw Failure{2, "format", e.what()};
    }
    if (require) {
        auto violations = validate(model);
        if (!violations.empty()) {
            ctx.results["violations"] = violations;
            throw Failure{2, "invalid-model", "model violates " + std::to_string(violations.size()) + " well-formedness rule(s)"};
        }
    }
    return model;
}

void write_model(const Ctmdp& model, const std::string& path) {
    if (path.empty()) return;
    try {
        save_model(model, path);
    } catch (const ModelFormatError& e) {
        throw Failure{2, "io", e.what()};
    }
}

json blocks_json(const Partition& part) {
    json blocks = json::array();
    for (const auto& b : part.blocks()) blocks.push_back(std::vector<StateId>(b.begin(), b.end()));
    return blocks;
}

void check_state_arg(const Ctmdp& model, StateId s, const char* name) {
    if (!model.has_state(s)) throw Failure{2, "usage", std::string(name) + " " + std::to_string(s) + " is not a state of the model"};
}

Rational rational_arg(const std::string& text, const char* name) {
    try {
        return parse_rational(text);
    } catch (const RationalFormatError& e) {
        throw Failure{2, "usage", std::string(name) + ": " + e.what()};
    }
}

Dialect dialect_arg(const std::string& text) {
    auto d = parse_dialect(text);
    if (!d) throw Failure{2, "usage", "unknown dialect '" + text + "' (csl, cslx, cslstar, cslor)"};
    return *d;
}

StatePtr formula_arg(const std::string& text, Dialect d) {
    try {
        return parse_formula(text, d);
    } catch (const ParseError& e) {
        throw Failure{2, "formula", e.what()};
    }
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    CLI::App app{"Bisimulation, CSL checking and simulation for continuous-time Markov decision processes"};
    app.name("ctmdp");
    app.require_subcommand(1, 1);

    std::string model_path, out_path, mode = "strong", formula, dialect = "csl", rate, scheduler_path, variant, x,
                                      weights;
    StateId s = 0, r = 0, state = 0;
    std::size_t n = 10000;
    std::uint64_t seed = 1;
    double horizon = 0.0;
    bool fail_on_distinguished = false;

    auto add_model = [&](CLI::App* sub) { sub->add_option("model", model_path, "model JSON file, - for stdin")->required(); };

    auto* validate_cmd = app.add_subcommand("validate", "check the well-formedness rules");
    add_model(validate_cmd);

    auto* uniformize_cmd = app.add_subcommand("uniformize", "uniformize to a common rate");
    add_model(uniformize_cmd);
    uniformize_cmd->add_option("--rate", rate, "uniformization rate (default: maximal rate)");
    uniformize_cmd->add_option("--out", out_path, "write the uniformized model here");

    auto* minimize_cmd = app.add_subcommand("minimize", "compute a bisimilarity partition and its quotient");
    add_model(minimize_cmd);
    minimize_cmd->add_option("--mode", mode, "strong, weak, ctmc-strong or ctmc-weak")
        ->check(CLI::IsMember({"strong", "weak", "ctmc-strong", "ctmc-weak"}));
    minimize_cmd->add_option("--rate", rate, "uniformization rate for weak mode");
    minimize_cmd->add_option("--out", out_path, "write the quotient model here");

    auto* classify_cmd = app.add_subcommand("classify", "2-step recurrence classification");
    add_model(classify_cmd);

    auto* check_cmd = app.add_subcommand("check", "evaluate a state formula");
    add_model(check_cmd);
    check_cmd->add_option("--formula", formula, "state formula")->required();
    check_cmd->add_option("--dialect", dialect, "csl, cslx, cslstar or cslor");
    auto* check_state = check_cmd->add_option("--state", state, "only report this state");

    auto* equiv_cmd = app.add_subcommand("equiv", "decide bisimilarity of two states");
    add_model(equiv_cmd);
    equiv_cmd->add_option("--s", s, "first state")->required();
    equiv_cmd->add_option("--r", r, "second state")->required();
    equiv_cmd->add_option("--mode", mode, "strong or weak")->check(CLI::IsMember({"strong", "weak"}));
    equiv_cmd->add_option("--rate", rate, "uniformization rate for weak mode");
    equiv_cmd->add_flag("--fail-on-distinguished", fail_on_distinguished, "exit 1 if the states are not bisimilar");

    auto* distinguish_cmd = app.add_subcommand("distinguish", "synthesise a formula telling two states apart");
    add_model(distinguish_cmd);
    distinguish_cmd->add_option("--s", s, "state that satisfies the formula")->required();
    distinguish_cmd->add_option("--r", r, "state that violates it")->required();

    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo estimate of a path formula");
    add_model(simulate_cmd);
    simulate_cmd->add_option("--formula", formula, "P operator whose path formula is estimated")->required();
    simulate_cmd->add_option("--dialect", dialect, "dialect of the formula (default cslstar)");
    simulate_cmd->add_option("--scheduler", scheduler_path, "scheduler JSON file (default: first transition everywhere)");
    simulate_cmd->add_option("--n", n, "number of paths")->check(CLI::PositiveNumber);
    simulate_cmd->add_option("--seed", seed, "random seed");
    simulate_cmd->add_option("--state", state, "start state (default: the initial state)");
    simulate_cmd->add_option("--horizon", horizon, "truncation time (default: 10 x largest interval bound)");

    auto* gadget_cmd = app.add_subcommand("gadget", "build one of the built-in example models");
    gadget_cmd->add_option("--variant", variant, "fig1-pair, example2-rates, example3-x, example4-modified, "
                                                 "fig2-successors, fig3-ttp or subset-sum")
        ->required();
    gadget_cmd->add_option("--x", x, "parameter x of example3-x / fig2-successors (default 3/8)");
    gadget_cmd->add_option("--weights", weights, "comma-separated subset-sum weights");
    gadget_cmd->add_option("--out", out_path, "write the model here");

    Context ctx(in);
    std::string command = "";
    auto emit = [&](const json& error) {
        json report;
        report["report_version"] = "1";
        report["command"] = command.empty() ? json(nullptr) : json(command);
        report["input_digest"] = ctx.digest;
        report["parameters"] = ctx.parameters;
        report["results"] = ctx.results;
        report["warnings"] = ctx.warnings;
        if (!error.is_null()) report["error"] = error;
        report["wall_time_ms"] =
            num(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
        out << report.dump(2) << "\n";
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, err, err);
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, err, err);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e, err, err);
        if (!app.get_subcommands().empty()) command = app.get_subcommands().front()->get_name();
        emit(json{{"kind", "usage"}, {"message", e.what()}});
        return 2;
    }
    CLI::App* sub = app.get_subcommands().front();
    command = sub->get_name();
    for (const CLI::Option* opt : sub->get_options()) {
        if (opt->count() == 0 || opt->get_name() == "--help") continue;
        std::string name = opt->get_name();
        while (!name.empty() && name.front() == '-') name.erase(name.begin());
        const auto values = opt->results();
        if (opt->get_type_size() == 0) {
            ctx.parameters[name] = true;
        } else {
            ctx.parameters[name] = values.size() == 1 ? json(values.front()) : json(values);
        }
    }

    try {
        if (command == "validate") {
            const Ctmdp model = load(ctx, model_path, false);
            const auto violations = validate(model);
            ctx.results["valid"] = violations.empty();
            ctx.results["violations"] = violations;
            if (!violations.empty()) ctx.exit_code = 2;
        } else if (command == "uniformize") {
            const Ctmdp model = load(ctx, model_path);
            const Rational e = rate.empty() ? uniformization_rate(model) : rational_arg(rate, "--rate");
            Ctmdp u;
            try {
                u = uniformize(model, e);
            } catch (const ModelError& ex) {
                throw Failure{2, "usage", ex.what()};
            }
            write_model(u, out_path);
            ctx.results["uniformization_rate"] = format_rational(e);
            ctx.results["model"] = model_to_json(u);
        } else if (command == "minimize") {
            const Ctmdp model = load(ctx, model_path);
            Partition part;
            Ctmdp base = model;
            if (mode == "strong") {
                part = strong_bisimilarity(model);
            } else if (mode == "weak") {
                const Rational e = rate.empty() ? uniformization_rate(model) : rational_arg(rate, "--rate");
                if (e < max_rate(model)) throw Failure{2, "usage", "--rate is below the maximal rate of the model"};
                base = uniformize(model, e);
                part = strong_bisimilarity(base);
                ctx.results["uniformization_rate"] = format_rational(e);
            } else {
                if (!is_ctmc(model)) throw Failure{2, "usage", "mode " + mode + " needs a CTMC (one transition per state)"};
                part = mode == "ctmc-strong" ? ctmc_strong(model) : ctmc_weak(model);
                if (mode == "ctmc-weak") base = uniformize(model);
            }
            const Ctmdp q = quotient(base, part);
            write_model(q, out_path);
            ctx.results["mode"] = mode;
            ctx.results["blocks"] = blocks_json(part);
            ctx.results["quotient"] = model_to_json(q);
        } else if (command == "classify") {
            const Ctmdp model = load(ctx, model_path);
            const RecurrenceVerdict v = classify(model);
            ctx.results["status"] = to_string(v.status);
            if (v.witness) {
                ctx.results["witness_state"] = v.witness->state;
                ctx.results["witness_transition"] = v.witness->transition;
                ctx.results["witness_rate"] = format_rational(model.transition(v.witness->transition).rate);
            }
            ctx.results["relation_used"] = to_string(v.relation_used);
        } else if (command == "check") {
            const Ctmdp model = load(ctx, model_path);
            const StatePtr f = formula_arg(formula, dialect_arg(dialect));
            if (check_state->count() > 0) check_state_arg(model, state, "--state");
            Evaluator ev(model);
            ctx.results["formula"] = to_string(*f);
            json states = json::array();
            try {
                const StateSet satisfied = ev.sat(f);
                for (StateId q = 0; q < model.num_states(); ++q) {
                    if (check_state->count() > 0 && q != state) continue;
                    json row;
                    row["state"] = q;
                    if (f->kind == StateFormula::Kind::Prob) {
                        const ProbBounds b = ev.bounds(q, f->path);
                        row["lower"] = num(b.lower);
                        row["upper"] = num(b.upper);
                        row["scheduler_class"] = to_string(b.scheduler_class);
                    }
                    row["verdict"] = satisfied.count(q) != 0;
                    states.push_back(std::move(row));
                }
            } catch (const UnsupportedFormula& e) {
                throw Failure{2, "unsupported-formula", e.what()};
            }
            ctx.results["states"] = std::move(states);
            ctx.warnings = ev.warnings();
        } else if (command == "equiv") {
            const Ctmdp model = load(ctx, model_path);
            check_state_arg(model, s, "--s");
            check_state_arg(model, r, "--r");
            Partition part;
            if (mode == "weak") {
                const Rational e = rate.empty() ? uniformization_rate(model) : rational_arg(rate, "--rate");
                if (e < max_rate(model)) throw Failure{2, "usage", "--rate is below the maximal rate of the model"};
                part = weak_bisimilarity(model, e);
            } else {
                part = strong_bisimilarity(model);
            }
            const bool same = part.same_block(s, r);
            ctx.results["bisimilar"] = same;
            ctx.results["mode"] = mode;
            ctx.results["s"] = s;
            ctx.results["r"] = r;
            if (!same && fail_on_distinguished) ctx.exit_code = 1;
        } else if (command == "distinguish") {
            const Ctmdp model = load(ctx, model_path);
            check_state_arg(model, s, "--s");
            check_state_arg(model, r, "--r");
            try {
                const DistinguishResult d = distinguish(model, s, r);
                ctx.results["formula"] = to_string(*d.formula);
                ctx.results["method"] = d.method;
                ctx.results["round"] = d.round;
                ctx.results["negated"] = d.negated;
                if (d.method != "label") {
                    ctx.results["value_s"] = num(d.value_s);
                    ctx.results["value_r"] = num(d.value_r);
                }
                ctx.results["verified"] = true;
            } catch (const NotDistinguishable& e) {
                ctx.results["bisimilar"] = true;
                ctx.warnings.push_back(e.what());
                ctx.exit_code = 1;
            }
        } else if (command == "simulate") {
            const Ctmdp model = load(ctx, model_path);
            const StatePtr f = formula_arg(formula, dialect_arg(simulate_cmd->count("--dialect") ? dialect : "cslstar"));
            if (f->kind != StateFormula::Kind::Prob) throw Failure{2, "formula", "simulate needs a formula of the form P~p (path)"};
            const StateId start = simulate_cmd->count("--state") ? state : model.initial();
            check_state_arg(model, start, "--state");
            SchedulerSpec sched;
            if (!scheduler_path.empty()) {
                try {
                    sched = scheduler_from_json(nlohmann::json::parse(read_text(scheduler_path, ctx.in)));
                    check_scheduler(model, sched);
                } catch (const nlohmann::json::exception& e) {
                    throw Failure{2, "format", std::string("scheduler file: ") + e.what()};
                } catch (const ModelError& e) {
                    throw Failure{2, "format", e.what()};
                }
            }
            const double h = horizon > 0.0 ? horizon : default_horizon(*f->path);
            Estimate est;
            try {
                est = simulate_estimate(model, start, sched, *f->path, h, n, seed);
            } catch (const UnsupportedFormula& e) {
                throw Failure{2, "unsupported-formula", e.what()};
            }
            ctx.results["state"] = start;
            ctx.results["path_formula"] = to_string(*f->path);
            ctx.results["n"] = est.n;
            ctx.results["seed"] = seed;
            ctx.results["horizon"] = num(h);
            ctx.results["estimate"] = num(est.pessimistic);
            ctx.results["pessimistic"] = num(est.pessimistic);
            ctx.results["optimistic"] = num(est.optimistic);
            ctx.results["std_error"] = num(est.std_error);
            ctx.results["wilson_95"] = json::array({num(est.wilson_low), num(est.wilson_high)});
            ctx.results["undecided"] = est.undecided;
            ctx.results["threshold"] = num(to_double(f->bound));
        } else if (command == "gadget") {
            auto v = parse_variant(variant);
            if (!v) throw Failure{2, "usage", "unknown gadget variant '" + variant + "'"};
            GadgetParams params;
            params.variant = *v;
            if (!x.empty()) params.x = rational_arg(x, "--x");
            if (!weights.empty()) {
                std::stringstream ss(weights);
                std::string item;
                while (std::getline(ss, item, ',')) params.weights.push_back(rational_arg(item, "--weights"));
            }
            GadgetModel g;
            try {
                g = build_gadget(params);
            } catch (const GadgetError& e) {
                throw Failure{2, "usage", e.what()};
            }
            write_model(g.model, out_path);
            ctx.results["variant"] = to_string(*v);
            json roles = json::object();
            for (const auto& [name, id] : g.roles) roles[name] = id;
            ctx.results["roles"] = roles;
            ctx.results["model"] = model_to_json(g.model);
        }
    } catch (const Failure& f) {
        emit(json{{"kind", f.kind}, {"message", f.message}});
        return f.code;
    } catch (const ModelError& e) {
        emit(json{{"kind", "invalid-model"}, {"message", e.what()}});
        return 2;
    } catch (const std::exception& e) {
        emit(json{{"kind", "internal"}, {"message", e.what()}});
        return 2;
    }
    emit(nullptr);
    return ctx.exit_code;
}

}  // namespace ctmdp::cli
