#pragma once

#include "ctmdp/expcalc.h"
#include "ctmdp/rational.h"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ctmdp {

enum class Dialect { Csl, CslNoNext, CslStar, CslOr };
enum class Comparison { Less, LessEqual, GreaterEqual, Greater };

std::string to_string(Dialect d);
std::string to_string(Comparison c);
/// Accepts csl, cslx, cslstar, cslor (case-insensitive).
std::optional<Dialect> parse_dialect(std::string_view text);

struct StateFormula;
struct PathFormula;
using StatePtr = std::shared_ptr<const StateFormula>;
using PathPtr = std::shared_ptr<const PathFormula>;

struct StateFormula {
    enum class Kind { True, Atom, Not, And, Or, Prob };
    Kind kind = Kind::True;
    std::string atom;
    StatePtr left, right;  // Not uses left only
    Comparison cmp = Comparison::LessEqual;
    Rational bound;
    PathPtr path;
};

struct PathFormula {
    enum class Kind { State, Not, And, Or, Next, Until };
    Kind kind = Kind::State;
    StatePtr state;        // Kind::State
    PathPtr left, right;   // Not/Next use left; Until: left U right
    TimeInterval interval;
};

// Builders. Path-level Not/And/Or over purely state-level operands collapse
// into a single State leaf, so every built tree is in the form the parser yields.
StatePtr f_true();
StatePtr f_atom(std::string name);
StatePtr f_not(StatePtr a);
StatePtr f_and(StatePtr a, StatePtr b);
StatePtr f_or(StatePtr a, StatePtr b);
/// Throws std::invalid_argument unless 0 <= bound <= 1.
StatePtr f_prob(Comparison cmp, Rational bound, PathPtr path);

PathPtr p_state(StatePtr a);
PathPtr p_not(PathPtr a);
PathPtr p_and(PathPtr a, PathPtr b);
PathPtr p_or(PathPtr a, PathPtr b);
PathPtr p_next(TimeInterval interval, PathPtr a);
PathPtr p_until(TimeInterval interval, PathPtr lhs, PathPtr rhs);

bool equal(const StateFormula& a, const StateFormula& b);
bool equal(const PathFormula& a, const PathFormula& b);

std::string to_string(const StateFormula& f);
std::string to_string(const PathFormula& f);
std::string to_string(const TimeInterval& interval);

/// Description of the first construct `f` uses that `dialect` forbids.
std::optional<std::string> dialect_violation(const StateFormula& f, Dialect dialect);

/// True iff no Prob operator occurs below `f`.
bool prob_free(const StateFormula& f);

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t position);
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

/// Grammar (loosest first):
///   expr    := and ('|' and)*
///   and     := until ('&' until)*
///   until   := unary ['U' interval unary]          (non-associative)
///   unary   := '!' unary | 'X' interval unary | primary
///   primary := 'true' | 'false' | "atom" | 'P' cmp number '(' expr ')' | '(' expr ')'
///   interval:= '[' number ',' (number | 'inf') ']'
/// X and U may only occur under a P operator.
StatePtr parse_formula(std::string_view text, Dialect dialect);

}  // namespace ctmdp
