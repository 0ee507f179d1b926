#include "ctmdp/formula.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <stdexcept>

namespace ctmdp {

std::string to_string(Dialect d) {
    switch (d) {
        case Dialect::Csl: return "csl";
        case Dialect::CslNoNext: return "cslx";
        case Dialect::CslStar: return "cslstar";
        case Dialect::CslOr: return "cslor";
    }
    return "csl";
}

std::string to_string(Comparison c) {
    switch (c) {
        case Comparison::Less: return "<";
        case Comparison::LessEqual: return "<=";
        case Comparison::GreaterEqual: return ">=";
        case Comparison::Greater: return ">";
    }
    return "<=";
}

std::optional<Dialect> parse_dialect(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "csl") return Dialect::Csl;
    if (lower == "cslx" || lower == "csl\\x") return Dialect::CslNoNext;
    if (lower == "cslstar" || lower == "csl*") return Dialect::CslStar;
    if (lower == "cslor" || lower == "cslvee") return Dialect::CslOr;
    return std::nullopt;
}

namespace {

StatePtr make_state(StateFormula f) { return std::make_shared<const StateFormula>(std::move(f)); }
PathPtr make_path(PathFormula f) { return std::make_shared<const PathFormula>(std::move(f)); }

void need(const void* p) {
    if (p == nullptr) throw std::invalid_argument("null formula operand");
}

}  // namespace

StatePtr f_true() { return make_state({}); }

StatePtr f_atom(std::string name) {
    StateFormula f;
    f.kind = StateFormula::Kind::Atom;
    f.atom = std::move(name);
    return make_state(std::move(f));
}

StatePtr f_not(StatePtr a) {
    need(a.get());
    StateFormula f;
    f.kind = StateFormula::Kind::Not;
    f.left = std::move(a);
    return make_state(std::move(f));
}

StatePtr f_and(StatePtr a, StatePtr b) {
    need(a.get());
    need(b.get());
    StateFormula f;
    f.kind = StateFormula::Kind::And;
    f.left = std::move(a);
    f.right = std::move(b);
    return make_state(std::move(f));
}

StatePtr f_or(StatePtr a, StatePtr b) {
    need(a.get());
    need(b.get());
    StateFormula f;
    f.kind = StateFormula::Kind::Or;
    f.left = std::move(a);
    f.right = std::move(b);
    return make_state(std::move(f));
}

StatePtr f_prob(Comparison cmp, Rational bound, PathPtr path) {
    need(path.get());
    if (bound < 0 || bound > 1) throw std::invalid_argument("probability bound outside [0,1]");
    StateFormula f;
    f.kind = StateFormula::Kind::Prob;
    f.cmp = cmp;
    f.bound = std::move(bound);
    f.path = std::move(path);
    return make_state(std::move(f));
}

PathPtr p_state(StatePtr a) {
    need(a.get());
    PathFormula f;
    f.state = std::move(a);
    return make_path(std::move(f));
}

PathPtr p_not(PathPtr a) {
    need(a.get());
    if (a->kind == PathFormula::Kind::State) return p_state(f_not(a->state));
    PathFormula f;
    f.kind = PathFormula::Kind::Not;
    f.left = std::move(a);
    return make_path(std::move(f));
}

PathPtr p_and(PathPtr a, PathPtr b) {
    need(a.get());
    need(b.get());
    if (a->kind == PathFormula::Kind::State && b->kind == PathFormula::Kind::State) {
        return p_state(f_and(a->state, b->state));
    }
    PathFormula f;
    f.kind = PathFormula::Kind::And;
    f.left = std::move(a);
    f.right = std::move(b);
    return make_path(std::move(f));
}

PathPtr p_or(PathPtr a, PathPtr b) {
    need(a.get());
    need(b.get());
    if (a->kind == PathFormula::Kind::State && b->kind == PathFormula::Kind::State) {
        return p_state(f_or(a->state, b->state));
    }
    PathFormula f;
    f.kind = PathFormula::Kind::Or;
    f.left = std::move(a);
    f.right = std::move(b);
    return make_path(std::move(f));
}

PathPtr p_next(TimeInterval interval, PathPtr a) {
    need(a.get());
    PathFormula f;
    f.kind = PathFormula::Kind::Next;
    f.interval = interval;
    f.left = std::move(a);
    return make_path(std::move(f));
}

PathPtr p_until(TimeInterval interval, PathPtr lhs, PathPtr rhs) {
    need(lhs.get());
    need(rhs.get());
    PathFormula f;
    f.kind = PathFormula::Kind::Until;
    f.interval = interval;
    f.left = std::move(lhs);
    f.right = std::move(rhs);
    return make_path(std::move(f));
}

namespace {

template <typename P>
bool same_ptr_content(const P& a, const P& b) {
    if (!a || !b) return !a && !b;
    return a == b || equal(*a, *b);
}

}  // namespace

bool equal(const StateFormula& a, const StateFormula& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case StateFormula::Kind::True: return true;
        case StateFormula::Kind::Atom: return a.atom == b.atom;
        case StateFormula::Kind::Not: return same_ptr_content(a.left, b.left);
        case StateFormula::Kind::And:
        case StateFormula::Kind::Or: return same_ptr_content(a.left, b.left) && same_ptr_content(a.right, b.right);
        case StateFormula::Kind::Prob:
            return a.cmp == b.cmp && a.bound == b.bound && same_ptr_content(a.path, b.path);
    }
    return false;
}

bool equal(const PathFormula& a, const PathFormula& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case PathFormula::Kind::State: return same_ptr_content(a.state, b.state);
        case PathFormula::Kind::Not: return same_ptr_content(a.left, b.left);
        case PathFormula::Kind::And:
        case PathFormula::Kind::Or: return same_ptr_content(a.left, b.left) && same_ptr_content(a.right, b.right);
        case PathFormula::Kind::Next: return a.interval == b.interval && same_ptr_content(a.left, b.left);
        case PathFormula::Kind::Until:
            return a.interval == b.interval && same_ptr_content(a.left, b.left) && same_ptr_content(a.right, b.right);
    }
    return false;
}

namespace {

std::string shortest(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string quote(const std::string& atom) {
    std::string out = "\"";
    for (char c : atom) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string to_string(const TimeInterval& interval) {
    return "[" + shortest(interval.lower) + "," + (interval.bounded() ? shortest(interval.upper) : "inf") + "]";
}

std::string to_string(const StateFormula& f) {
    switch (f.kind) {
        case StateFormula::Kind::True: return "true";
        case StateFormula::Kind::Atom: return quote(f.atom);
        case StateFormula::Kind::Not: return "!" + to_string(*f.left);
        case StateFormula::Kind::And: return "(" + to_string(*f.left) + " & " + to_string(*f.right) + ")";
        case StateFormula::Kind::Or: return "(" + to_string(*f.left) + " | " + to_string(*f.right) + ")";
        case StateFormula::Kind::Prob:
        {
            // Binary path operators print their own parentheses.
            const auto k = f.path->kind;
            const bool wrapped = k == PathFormula::Kind::Or || k == PathFormula::Kind::And || k == PathFormula::Kind::Until;
            const std::string inner = to_string(*f.path);
            return "P" + to_string(f.cmp) + format_rational(f.bound) + " " + (wrapped ? inner : "(" + inner + ")");
        }
    }
    return "";
}

std::string to_string(const PathFormula& f) {
    switch (f.kind) {
        case PathFormula::Kind::State: return to_string(*f.state);
        case PathFormula::Kind::Not: return "!" + to_string(*f.left);
        case PathFormula::Kind::And: return "(" + to_string(*f.left) + " & " + to_string(*f.right) + ")";
        case PathFormula::Kind::Or: return "(" + to_string(*f.left) + " | " + to_string(*f.right) + ")";
        case PathFormula::Kind::Next: return "X" + to_string(f.interval) + " " + to_string(*f.left);
        case PathFormula::Kind::Until:
            return "(" + to_string(*f.left) + " U" + to_string(f.interval) + " " + to_string(*f.right) + ")";
    }
    return "";
}

namespace {

std::optional<std::string> check_state(const StateFormula& f, Dialect d);

std::optional<std::string> check_nested(const PathFormula& f, Dialect d) {
    if (f.kind == PathFormula::Kind::State) return check_state(*f.state, d);
    if (f.left) {
        if (auto v = check_nested(*f.left, d)) return v;
    }
    if (f.right) {
        if (auto v = check_nested(*f.right, d)) return v;
    }
    return std::nullopt;
}

bool is_state(const PathPtr& p) { return p->kind == PathFormula::Kind::State; }

bool or_of_next(const PathFormula& f) {
    if (f.kind == PathFormula::Kind::Next) return is_state(f.left);
    if (f.kind == PathFormula::Kind::Or) return or_of_next(*f.left) && or_of_next(*f.right);
    return false;
}

std::optional<std::string> check_path_shape(const PathFormula& f, Dialect d) {
    const bool next = f.kind == PathFormula::Kind::Next && is_state(f.left);
    const bool until = f.kind == PathFormula::Kind::Until && is_state(f.left) && is_state(f.right);
    switch (d) {
        case Dialect::CslStar: return std::nullopt;
        case Dialect::Csl:
            if (next || until) return std::nullopt;
            return "csl path formulas must be X^I phi or phi U^I phi, got " + to_string(f);
        case Dialect::CslNoNext:
            if (until) return std::nullopt;
            if (f.kind == PathFormula::Kind::Next) return "next operator is not part of csl\\X: " + to_string(f);
            return "csl\\X path formulas must be phi U^I phi, got " + to_string(f);
        case Dialect::CslOr:
            if (or_of_next(f)) return std::nullopt;
            if (f.kind == PathFormula::Kind::Until) return "until is not part of csl-or: " + to_string(f);
            return "csl-or path formulas must be disjunctions of X^I phi, got " + to_string(f);
    }
    return std::nullopt;
}

std::optional<std::string> check_state(const StateFormula& f, Dialect d) {
    switch (f.kind) {
        case StateFormula::Kind::True:
        case StateFormula::Kind::Atom: return std::nullopt;
        case StateFormula::Kind::Not: return check_state(*f.left, d);
        case StateFormula::Kind::And:
        case StateFormula::Kind::Or:
            if (auto v = check_state(*f.left, d)) return v;
            return check_state(*f.right, d);
        case StateFormula::Kind::Prob:
            if (auto v = check_path_shape(*f.path, d)) return v;
            return check_nested(*f.path, d);
    }
    return std::nullopt;
}

}  // namespace

std::optional<std::string> dialect_violation(const StateFormula& f, Dialect dialect) { return check_state(f, dialect); }

bool prob_free(const StateFormula& f) {
    switch (f.kind) {
        case StateFormula::Kind::True:
        case StateFormula::Kind::Atom: return true;
        case StateFormula::Kind::Not: return prob_free(*f.left);
        case StateFormula::Kind::And:
        case StateFormula::Kind::Or: return prob_free(*f.left) && prob_free(*f.right);
        case StateFormula::Kind::Prob: return false;
    }
    return true;
}

ParseError::ParseError(const std::string& message, std::size_t position)
    : std::runtime_error("at position " + std::to_string(position) + ": " + message), position_(position) {}

}  // namespace ctmdp
