#include "ctmdp/formula.h"

#include <cctype>
#include <charconv>

namespace ctmdp {

namespace {

enum class Tok { End, LParen, RParen, LBracket, RBracket, Comma, Bang, Amp, Bar, Cmp, Number, String, Ident };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::size_t pos = 0;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
        Token t;
        t.pos = i_;
        if (i_ >= src_.size()) return t;
        const char c = src_[i_];
        auto single = [&](Tok k) {
            t.kind = k;
            t.text = std::string(1, c);
            ++i_;
            return t;
        };
        switch (c) {
            case '(': return single(Tok::LParen);
            case ')': return single(Tok::RParen);
            case '[': return single(Tok::LBracket);
            case ']': return single(Tok::RBracket);
            case ',': return single(Tok::Comma);
            case '!': return single(Tok::Bang);
            case '&':
                t = single(Tok::Amp);
                if (i_ < src_.size() && src_[i_] == '&') ++i_;
                return t;
            case '|':
                t = single(Tok::Bar);
                if (i_ < src_.size() && src_[i_] == '|') ++i_;
                return t;
            case '<':
            case '>':
                t = single(Tok::Cmp);
                if (i_ < src_.size() && src_[i_] == '=') {
                    t.text += '=';
                    ++i_;
                }
                return t;
            case '"': return string_literal(t);
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            t.kind = Tok::Number;
            while (i_ < src_.size()) {
                const char d = src_[i_];
                if (std::isdigit(static_cast<unsigned char>(d)) || d == '.' || d == '/') {
                    t.text += d;
                    ++i_;
                } else if ((d == 'e' || d == 'E') && i_ + 1 < src_.size()) {
                    t.text += d;
                    ++i_;
                    if (src_[i_] == '+' || src_[i_] == '-') t.text += src_[i_++];
                } else {
                    break;
                }
            }
            return t;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            t.kind = Tok::Ident;
            while (i_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_')) {
                // Keywords X, U and P are always followed by '[' or a comparison, never glued to letters.
                t.text += src_[i_++];
                if (t.text == "X" || t.text == "U" || t.text == "P") break;
            }
            return t;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", i_);
    }

private:
    Token string_literal(Token t) {
        t.kind = Tok::String;
        ++i_;
        while (true) {
            if (i_ >= src_.size()) throw ParseError("unterminated string literal", t.pos);
            char c = src_[i_++];
            if (c == '"') break;
            if (c == '\\') {
                if (i_ >= src_.size()) throw ParseError("unterminated string literal", t.pos);
                c = src_[i_++];
            }
            t.text += c;
        }
        return t;
    }

    std::string_view src_;
    std::size_t i_ = 0;
};

// A parsed subexpression is state-level unless it contains X or U outside a P.
struct Node {
    StatePtr state;
    PathPtr path;
    std::size_t temporal_pos = 0;
};

PathPtr as_path(const Node& n) { return n.path ? n.path : p_state(n.state); }

class Parser {
public:
    explicit Parser(std::string_view src) : lexer_(src) { advance(); }

    StatePtr parse_top() {
        Node n = expr();
        if (cur_.kind != Tok::End) fail("unexpected '" + cur_.text + "' after complete formula");
        if (n.path) throw ParseError("temporal operator outside a P operator", n.temporal_pos);
        return n.state;
    }

private:
    [[noreturn]] void fail(const std::string& message) { throw ParseError(message, cur_.pos); }

    void advance() { cur_ = lexer_.next(); }

    void expect(Tok kind, const char* what) {
        if (cur_.kind != kind) fail(std::string("expected ") + what + (cur_.kind == Tok::End ? " at end of input" : ", found '" + cur_.text + "'"));
        advance();
    }

    bool is_ident(const char* word) const { return cur_.kind == Tok::Ident && cur_.text == word; }

    static Node combine(Node a, Node b, bool conj) {
        Node out;
        if (!a.path && !b.path) {
            out.state = conj ? f_and(a.state, b.state) : f_or(a.state, b.state);
            return out;
        }
        out.temporal_pos = a.path ? a.temporal_pos : b.temporal_pos;
        out.path = conj ? p_and(as_path(a), as_path(b)) : p_or(as_path(a), as_path(b));
        return out;
    }

    Node expr() {
        Node left = conjunction();
        while (cur_.kind == Tok::Bar) {
            advance();
            left = combine(std::move(left), conjunction(), false);
        }
        return left;
    }

    Node conjunction() {
        Node left = until();
        while (cur_.kind == Tok::Amp) {
            advance();
            left = combine(std::move(left), until(), true);
        }
        return left;
    }

    Node until() {
        Node left = unary();
        if (!is_ident("U")) return left;
        const std::size_t pos = cur_.pos;
        advance();
        TimeInterval interval = parse_interval();
        Node right = unary();
        if (is_ident("U")) fail("U is not associative; add parentheses");
        Node out;
        out.temporal_pos = pos;
        out.path = p_until(interval, as_path(left), as_path(right));
        return out;
    }

    Node unary() {
        if (cur_.kind == Tok::Bang) {
            advance();
            Node inner = unary();
            if (inner.path) {
                inner.path = p_not(inner.path);
            } else {
                inner.state = f_not(inner.state);
            }
            return inner;
        }
        if (is_ident("X")) {
            const std::size_t pos = cur_.pos;
            advance();
            TimeInterval interval = parse_interval();
            Node inner = unary();
            Node out;
            out.temporal_pos = pos;
            out.path = p_next(interval, as_path(inner));
            return out;
        }
        return primary();
    }

    Node primary() {
        Node out;
        if (cur_.kind == Tok::LParen) {
            advance();
            out = expr();
            expect(Tok::RParen, "')'");
            return out;
        }
        if (cur_.kind == Tok::String) {
            out.state = f_atom(cur_.text);
            advance();
            return out;
        }
        if (is_ident("true")) {
            advance();
            out.state = f_true();
            return out;
        }
        if (is_ident("false")) {
            advance();
            out.state = f_not(f_true());
            return out;
        }
        if (is_ident("P")) {
            advance();
            if (cur_.kind != Tok::Cmp) fail("expected a comparison (<, <=, >=, >) after P");
            Comparison cmp = cur_.text == "<"    ? Comparison::Less
                             : cur_.text == "<=" ? Comparison::LessEqual
                             : cur_.text == ">=" ? Comparison::GreaterEqual
                                                 : Comparison::Greater;
            advance();
            if (cur_.kind != Tok::Number) fail("expected a probability bound");
            Rational bound;
            try {
                bound = parse_rational(cur_.text);
            } catch (const RationalFormatError&) {
                fail("malformed probability bound '" + cur_.text + "'");
            }
            if (bound < 0 || bound > 1) fail("probability bound " + cur_.text + " outside [0,1]");
            advance();
            expect(Tok::LParen, "'(' after the probability bound");
            Node inner = expr();
            expect(Tok::RParen, "')'");
            out.state = f_prob(cmp, bound, as_path(inner));
            return out;
        }
        if (cur_.kind == Tok::Ident) fail("unknown identifier '" + cur_.text + "' (atomic propositions must be quoted)");
        if (cur_.kind == Tok::End) fail("unexpected end of input");
        fail("unexpected '" + cur_.text + "'");
    }

    double number_value(const char* what) {
        if (cur_.kind != Tok::Number) fail(std::string("expected ") + what);
        double v = 0.0;
        const std::string& t = cur_.text;
        if (t.find('/') == std::string::npos) {
            // from_chars rounds to nearest, so printed intervals read back bit-exactly.
            auto res = std::from_chars(t.data(), t.data() + t.size(), v);
            if (res.ec != std::errc() || res.ptr != t.data() + t.size()) fail("malformed number '" + t + "'");
        } else {
            try {
                v = to_double(parse_rational(t));
            } catch (const RationalFormatError&) {
                fail("malformed number '" + t + "'");
            }
        }
        advance();
        return v;
    }

    TimeInterval parse_interval() {
        const std::size_t pos = cur_.pos;
        expect(Tok::LBracket, "'[' opening a time interval");
        double lower = number_value("interval lower bound");
        expect(Tok::Comma, "','");
        double upper = kInfinity;
        if (is_ident("inf")) {
            advance();
        } else {
            upper = number_value("interval upper bound or inf");
        }
        expect(Tok::RBracket, "']'");
        if (upper < lower) throw ParseError("interval upper bound below lower bound", pos);
        return TimeInterval(lower, upper);
    }

    Lexer lexer_;
    Token cur_;
};

}  // namespace

StatePtr parse_formula(std::string_view text, Dialect dialect) {
    StatePtr f = Parser(text).parse_top();
    if (auto violation = dialect_violation(*f, dialect)) {
        throw ParseError("formula not in dialect " + to_string(dialect) + ": " + *violation, 0);
    }
    return f;
}

}  // namespace ctmdp
