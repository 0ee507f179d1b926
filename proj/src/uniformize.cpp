#include "ctmdp/uniformize.h"

namespace ctmdp {

Rational uniformization_rate(const Ctmdp& model) { return max_rate(model); }

Uniformized uniformize_with_map(const Ctmdp& model, const Rational& e) {
    require_valid(model);
    if (e < max_rate(model)) {
        throw ModelError("uniformization rate " + format_rational(e) + " is below the maximal rate " +
                         format_rational(max_rate(model)));
    }
    Uniformized out;
    std::vector<Transition> transitions;
    for (const Transition& t : model.transitions()) {
        const Rational scale = t.rate / e;
        std::map<StateId, Rational> entries;
        for (const auto& [target, p] : t.target.entries()) entries[target] += scale * p;
        entries[t.source] += 1 - scale;
        Transition u{t.source, e, Distribution(std::move(entries))};

        std::size_t index = transitions.size();
        for (std::size_t j = 0; j < transitions.size(); ++j) {
            if (transitions[j] == u) {
                index = j;
                break;
            }
        }
        if (index == transitions.size()) transitions.push_back(std::move(u));
        out.transition_map.push_back(index);
    }
    out.model = Ctmdp(model.ap(), model.all_labels(), std::move(transitions), model.initial()).with_origin(model.origin());
    return out;
}

Ctmdp uniformize(const Ctmdp& model, const Rational& e) { return uniformize_with_map(model, e).model; }

Ctmdp uniformize(const Ctmdp& model) { return uniformize(model, uniformization_rate(model)); }

}  // namespace ctmdp
