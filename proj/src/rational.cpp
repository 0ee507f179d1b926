#include "ctmdp/rational.h"

#include <cctype>
#include <cmath>

namespace ctmdp {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

mpz_class pow10(unsigned long exponent) {
    mpz_class result;
    mpz_ui_pow_ui(result.get_mpz_t(), 10, exponent);
    return result;
}

[[noreturn]] void fail(std::string_view text) {
    throw RationalFormatError("not a rational literal: '" + std::string(text) + "'");
}

Rational parse_decimal(std::string_view text, std::string_view original) {
    bool negative = false;
    if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }
    long exponent = 0;
    if (auto epos = text.find_first_of("eE"); epos != std::string_view::npos) {
        std::string_view exp_part = text.substr(epos + 1);
        bool exp_negative = false;
        if (!exp_part.empty() && (exp_part.front() == '-' || exp_part.front() == '+')) {
            exp_negative = exp_part.front() == '-';
            exp_part.remove_prefix(1);
        }
        if (!all_digits(exp_part) || exp_part.size() > 6) fail(original);
        exponent = std::stol(std::string(exp_part));
        if (exp_negative) exponent = -exponent;
        text = text.substr(0, epos);
    }
    std::string digits;
    long fraction_digits = 0;
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
        std::string_view int_part = text.substr(0, dot);
        std::string_view frac_part = text.substr(dot + 1);
        if (int_part.empty() && frac_part.empty()) fail(original);
        if (!int_part.empty() && !all_digits(int_part)) fail(original);
        if (!frac_part.empty() && !all_digits(frac_part)) fail(original);
        digits = std::string(int_part) + std::string(frac_part);
        fraction_digits = static_cast<long>(frac_part.size());
    } else {
        if (!all_digits(text)) fail(original);
        digits = std::string(text);
    }
    Rational value{mpz_class(digits, 10)};
    long scale = exponent - fraction_digits;
    if (scale > 0) {
        value *= pow10(static_cast<unsigned long>(scale));
    } else if (scale < 0) {
        value /= pow10(static_cast<unsigned long>(-scale));
    }
    value.canonicalize();
    return negative ? Rational(-value) : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
    std::string_view original = text;
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    if (text.empty()) fail(original);

    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        std::string_view num = text.substr(0, slash);
        std::string_view den = text.substr(slash + 1);
        bool negative = false;
        if (!num.empty() && (num.front() == '-' || num.front() == '+')) {
            negative = num.front() == '-';
            num.remove_prefix(1);
        }
        if (!all_digits(num) || !all_digits(den)) fail(original);
        mpz_class d(std::string{den}, 10);
        if (d == 0) throw RationalFormatError("zero denominator in '" + std::string(original) + "'");
        Rational value(mpz_class(std::string{num}, 10), d);
        value.canonicalize();
        return negative ? Rational(-value) : value;
    }
    return parse_decimal(text, original);
}

std::string format_rational(const Rational& value) {
    if (value.get_den() == 1) return value.get_num().get_str();

    // Terminating decimal iff the denominator only has factors 2 and 5.
    mpz_class den = value.get_den();
    unsigned long twos = mpz_remove(den.get_mpz_t(), den.get_mpz_t(), mpz_class(2).get_mpz_t());
    unsigned long fives = mpz_remove(den.get_mpz_t(), den.get_mpz_t(), mpz_class(5).get_mpz_t());
    unsigned long places = std::max(twos, fives);
    if (den == 1 && places <= 30) {
        mpz_class scaled = value.get_num() * pow10(places) / value.get_den();
        bool negative = scaled < 0;
        if (negative) scaled = -scaled;
        std::string digits = scaled.get_str();
        if (digits.size() <= places) digits.insert(0, places - digits.size() + 1, '0');
        digits.insert(digits.size() - places, ".");
        return negative ? "-" + digits : digits;
    }
    return value.get_str();
}

Rational from_double(double value) {
    if (!std::isfinite(value)) throw RationalFormatError("non-finite double cannot become a rational");
    Rational result(value);
    result.canonicalize();
    return result;
}

}  // namespace ctmdp
