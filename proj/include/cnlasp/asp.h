#pragma once

// Abstract syntax for the ASP subset produced and consumed by the toolkit:
// disjunctive rules, strong and weak constraints, choice rules with
// optional cardinality bounds, and comparison built-ins.

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cnlasp::asp {

struct Term {
    enum class Kind : std::uint8_t { Integer, Constant, Variable };

    Kind         kind = Kind::Constant;
    std::string  text;  // empty for integers
    std::int64_t value = 0;

    static Term integer(std::int64_t v) { return Term{Kind::Integer, {}, v}; }
    static Term constant(std::string s) { return Term{Kind::Constant, std::move(s), 0}; }
    static Term variable(std::string s) { return Term{Kind::Variable, std::move(s), 0}; }
    static Term anonymous() { return variable("_"); }

    [[nodiscard]] bool isVariable() const { return kind == Kind::Variable; }
    [[nodiscard]] bool isAnonymous() const { return kind == Kind::Variable && text == "_"; }
    [[nodiscard]] bool isGround() const { return kind != Kind::Variable; }

    friend auto operator<=>(const Term&, const Term&) = default;
    friend bool operator==(const Term&, const Term&)  = default;
};

struct Atom {
    std::string       predicate;
    std::vector<Term> args;

    [[nodiscard]] std::size_t arity() const { return args.size(); }
    [[nodiscard]] bool        isGround() const;

    friend auto operator<=>(const Atom&, const Atom&) = default;
    friend bool operator==(const Atom&, const Atom&)  = default;
};

struct Literal {
    Atom atom;
    bool negated = false;

    friend auto operator<=>(const Literal&, const Literal&) = default;
    friend bool operator==(const Literal&, const Literal&)  = default;
};

enum class CmpOp : std::uint8_t { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view toString(CmpOp op);
CmpOp            negate(CmpOp op);
bool             evaluate(CmpOp op, const Term& lhs, const Term& rhs);

struct Comparison {
    Term  left;
    CmpOp op = CmpOp::Eq;
    Term  right;

    friend auto operator<=>(const Comparison&, const Comparison&) = default;
    friend bool operator==(const Comparison&, const Comparison&)  = default;
};

using BodyItem = std::variant<Literal, Comparison>;

struct ChoiceElement {
    Atom                 atom;
    std::vector<Literal> condition;

    friend bool operator==(const ChoiceElement&, const ChoiceElement&) = default;
};

struct ChoiceHead {
    std::vector<ChoiceElement>  elements;
    std::optional<std::int64_t> lower;
    std::optional<std::int64_t> upper;

    friend bool operator==(const ChoiceHead&, const ChoiceHead&) = default;
};

/// Disjunctive head; zero atoms means the rule is a constraint.
struct Disjunction {
    std::vector<Atom> atoms;

    friend bool operator==(const Disjunction&, const Disjunction&) = default;
};

struct WeakSpec {
    Term              weight;
    std::int64_t      level = 0;
    std::vector<Term> terms;

    friend bool operator==(const WeakSpec&, const WeakSpec&) = default;
};

struct Rule {
    std::variant<Disjunction, ChoiceHead> head;
    std::vector<BodyItem>                 body;
    std::optional<WeakSpec>               weak;

    static Rule fact(Atom a);
    static Rule constraint(std::vector<BodyItem> body);

    [[nodiscard]] bool isChoice() const { return std::holds_alternative<ChoiceHead>(head); }
    [[nodiscard]] bool isConstraint() const;
    [[nodiscard]] bool isFact() const;
    [[nodiscard]] bool isWeak() const { return weak.has_value(); }

    friend bool operator==(const Rule&, const Rule&) = default;
};

struct Program {
    std::vector<Rule> rules;

    friend bool operator==(const Program&, const Program&) = default;
};

// ---------------------------------------------------------------------------
// Printing

std::string toString(const Term& t);
std::string toString(const Atom& a);
std::string toString(const Literal& l);
std::string toString(const Comparison& c);
std::string toString(const BodyItem& b);
std::string toString(const Rule& r);

/// One rule per line, each terminated by a newline. Empty program prints "".
std::string printProgram(const Program& p);

// ---------------------------------------------------------------------------
// Parsing

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::size_t column, std::string token, const std::string& what);

    [[nodiscard]] std::size_t        line() const { return line_; }
    [[nodiscard]] std::size_t        column() const { return column_; }
    [[nodiscard]] const std::string& token() const { return token_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string token_;
};

/// Parses the printed subset. '%' starts a comment running to end of line.
Program parseProgram(std::string_view text);

// ---------------------------------------------------------------------------
// Safety

struct SafetyViolation {
    std::string variable;
    std::string location;  // "head", "negative literal", "comparison", "weak terms", "choice element"

    friend bool operator==(const SafetyViolation&, const SafetyViolation&) = default;
};

/// Every variable occurring in the head, a negative literal, a comparison, or
/// the weak-constraint annotation must occur in a positive body literal.
/// Anonymous variables are only allowed in positive literals.
/// Choice element variables may also be bound by the element's positive
/// condition literals.
std::vector<SafetyViolation> validateSafety(const Rule& r);

/// Collects all constant and integer terms occurring in p.
std::vector<Term> constants(const Program& p);

}  // namespace cnlasp::asp
