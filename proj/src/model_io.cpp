#include "ctmdp/model_io.h"

#include <fstream>
#include <iterator>
#include <sstream>

namespace ctmdp {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ModelFormatError(where + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(where, std::string("missing field \"") + key + "\"");
    return *it;
}

Rational number(const json& value, const std::string& where) {
    try {
        if (value.is_string()) return parse_rational(value.get<std::string>());
        if (value.is_number_integer()) return Rational(value.get<long>());
        // JSON floats go through their shortest decimal text so 0.3 means 3/10.
        if (value.is_number_float()) return parse_rational(value.dump());
    } catch (const RationalFormatError& e) {
        fail(where, e.what());
    }
    fail(where, "expected a decimal or fraction string");
}

StateId state_id(const json& value, const std::string& where) {
    if (!value.is_number_integer() || value.get<long long>() < 0 ||
        value.get<long long>() > static_cast<long long>(UINT32_MAX)) {
        fail(where, "expected a non-negative integer state id");
    }
    return static_cast<StateId>(value.get<long long>());
}

StateId state_key(const std::string& key, const std::string& where) {
    if (key.empty() || key.size() > 10 || key.find_first_not_of("0123456789") != std::string::npos) {
        fail(where, "target key '" + key + "' is not a state id");
    }
    unsigned long long v = std::stoull(key);
    if (v > UINT32_MAX) fail(where, "target key '" + key + "' out of range");
    return static_cast<StateId>(v);
}

}  // namespace

Ctmdp model_from_json(const json& doc) {
    if (!doc.is_object()) fail("$", "model must be a JSON object");

    const json& ap_json = field(doc, "ap", "$");
    if (!ap_json.is_array()) fail("$.ap", "expected an array of strings");
    std::vector<std::string> ap;
    for (std::size_t i = 0; i < ap_json.size(); ++i) {
        if (!ap_json[i].is_string()) fail("$.ap[" + std::to_string(i) + "]", "expected a string");
        ap.push_back(ap_json[i].get<std::string>());
    }

    const json& states_json = field(doc, "states", "$");
    if (!states_json.is_array()) fail("$.states", "expected an array");
    const std::size_t n = states_json.size();
    std::vector<LabelSet> labels(n);
    std::vector<bool> seen(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const std::string where = "$.states[" + std::to_string(i) + "]";
        const json& st = states_json[i];
        if (!st.is_object()) fail(where, "expected an object");
        StateId id = state_id(field(st, "id", where), where + ".id");
        if (id >= n) fail(where + ".id", "state ids must be 0.." + std::to_string(n - 1));
        if (seen[id]) fail(where + ".id", "duplicate state id " + std::to_string(id));
        seen[id] = true;
        LabelSet ls;
        if (auto it = st.find("labels"); it != st.end()) {
            if (!it->is_array()) fail(where + ".labels", "expected an array of strings");
            for (const auto& l : *it) {
                if (!l.is_string()) fail(where + ".labels", "expected an array of strings");
                ls.insert(l.get<std::string>());
            }
        }
        labels[id] = std::move(ls);
    }

    StateId initial = state_id(field(doc, "initial", "$"), "$.initial");

    const json& trans_json = field(doc, "transitions", "$");
    if (!trans_json.is_array()) fail("$.transitions", "expected an array");
    std::vector<Transition> transitions;
    for (std::size_t i = 0; i < trans_json.size(); ++i) {
        const std::string where = "$.transitions[" + std::to_string(i) + "]";
        const json& t = trans_json[i];
        if (!t.is_object()) fail(where, "expected an object");
        Transition tr;
        tr.source = state_id(field(t, "from", where), where + ".from");
        tr.rate = number(field(t, "rate", where), where + ".rate");
        const json& to = field(t, "to", where);
        if (!to.is_object()) fail(where + ".to", "expected an object mapping state ids to probabilities");
        std::map<StateId, Rational> entries;
        for (const auto& [key, value] : to.items()) {
            StateId target = state_key(key, where + ".to");
            Rational p = number(value, where + ".to[\"" + key + "\"]");
            if (!entries.emplace(target, p).second) fail(where + ".to", "duplicate target " + key);
        }
        tr.target = Distribution(std::move(entries));
        transitions.push_back(std::move(tr));
    }
    return Ctmdp(std::move(ap), std::move(labels), std::move(transitions), initial);
}

Ctmdp parse_model(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ModelFormatError(std::string("malformed JSON at byte ") + std::to_string(e.byte) + ": " + e.what());
    }
    return model_from_json(doc);
}

Ctmdp load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelFormatError("cannot open model file '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_model(text);
}

nlohmann::ordered_json model_to_json(const Ctmdp& model) {
    nlohmann::ordered_json doc;
    doc["ap"] = model.ap();
    auto states = nlohmann::ordered_json::array();
    for (StateId s = 0; s < model.num_states(); ++s) {
        nlohmann::ordered_json st;
        st["id"] = s;
        st["labels"] = std::vector<std::string>(model.labels(s).begin(), model.labels(s).end());
        states.push_back(std::move(st));
    }
    doc["states"] = std::move(states);
    doc["initial"] = model.initial();
    auto transitions = nlohmann::ordered_json::array();
    for (const auto& t : model.transitions()) {
        nlohmann::ordered_json tj;
        tj["from"] = t.source;
        tj["rate"] = format_rational(t.rate);
        nlohmann::ordered_json to = nlohmann::ordered_json::object();
        for (const auto& [target, p] : t.target.entries()) to[std::to_string(target)] = format_rational(p);
        tj["to"] = std::move(to);
        transitions.push_back(std::move(tj));
    }
    doc["transitions"] = std::move(transitions);
    return doc;
}

std::string dump_model(const Ctmdp& model) { return model_to_json(model).dump(2) + "\n"; }

void save_model(const Ctmdp& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ModelFormatError("cannot write model file '" + path + "'");
    out << dump_model(model);
}

}  // namespace ctmdp
