#include <cnlasp/asp.h>

#include <cctype>
#include <charconv>

namespace cnlasp::asp {

ParseError::ParseError(std::size_t line, std::size_t column, std::string token, const std::string& what)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + what +
                         (token.empty() ? std::string(" at end of input") : " near '" + token + "'"))
    , line_(line)
    , column_(column)
    , token_(std::move(token)) {}

namespace {

enum class Tok {
    Ident,
    Variable,
    Integer,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBrack,
    RBrack,
    Comma,
    Dot,
    Bar,
    Semi,
    Colon,
    If,      // :-
    WeakIf,  // :~
    At,
    Cmp,
    End
};

struct Token {
    Tok         kind = Tok::End;
    std::string text;
    std::size_t line = 0;
    std::size_t column = 0;
};

class Lexer {
public:
    explicit Lexer(std::string_view in) : in_(in) {}

    Token next() {
        skipSpace();
        Token t;
        t.line = line_;
        t.column = col_;
        if (pos_ >= in_.size()) return t;
        char c = in_[pos_];
        auto isIdent = [](char x) { return std::isalnum(static_cast<unsigned char>(x)) || x == '_'; };
        if (std::islower(static_cast<unsigned char>(c)) || std::isupper(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t b = pos_;
            while (pos_ < in_.size() && isIdent(in_[pos_])) advance();
            t.text = std::string(in_.substr(b, pos_ - b));
            t.kind = std::islower(static_cast<unsigned char>(c)) ? Tok::Ident : Tok::Variable;
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && pos_ + 1 < in_.size() && std::isdigit(static_cast<unsigned char>(in_[pos_ + 1])))) {
            std::size_t b = pos_;
            advance();
            while (pos_ < in_.size() && std::isdigit(static_cast<unsigned char>(in_[pos_]))) advance();
            t.text = std::string(in_.substr(b, pos_ - b));
            t.kind = Tok::Integer;
            return t;
        }
        auto two = in_.substr(pos_, 2);
        auto take = [&](Tok k, std::size_t n) {
            t.kind = k;
            t.text = std::string(in_.substr(pos_, n));
            for (std::size_t i = 0; i < n; ++i) advance();
            return t;
        };
        if (two == ":-") return take(Tok::If, 2);
        if (two == ":~") return take(Tok::WeakIf, 2);
        if (two == "!=" || two == "<>" || two == "<=" || two == ">=") return take(Tok::Cmp, 2);
        switch (c) {
            case '(': return take(Tok::LParen, 1);
            case ')': return take(Tok::RParen, 1);
            case '{': return take(Tok::LBrace, 1);
            case '}': return take(Tok::RBrace, 1);
            case '[': return take(Tok::LBrack, 1);
            case ']': return take(Tok::RBrack, 1);
            case ',': return take(Tok::Comma, 1);
            case '.': return take(Tok::Dot, 1);
            case '|': return take(Tok::Bar, 1);
            case ';': return take(Tok::Semi, 1);
            case ':': return take(Tok::Colon, 1);
            case '@': return take(Tok::At, 1);
            case '=':
            case '<':
            case '>': return take(Tok::Cmp, 1);
            default: break;
        }
        throw ParseError(t.line, t.column, std::string(1, c), "unexpected character");
    }

private:
    void advance() {
        if (in_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        }
        else {
            ++col_;
        }
        ++pos_;
    }

    void skipSpace() {
        while (pos_ < in_.size()) {
            char c = in_[pos_];
            if (c == '%') {
                while (pos_ < in_.size() && in_[pos_] != '\n') advance();
            }
            else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            }
            else {
                break;
            }
        }
    }

    std::string_view in_;
    std::size_t      pos_ = 0;
    std::size_t      line_ = 1;
    std::size_t      col_ = 1;
};

CmpOp cmpFromText(std::string_view s) {
    if (s == "=") return CmpOp::Eq;
    if (s == "!=" || s == "<>") return CmpOp::Ne;
    if (s == "<") return CmpOp::Lt;
    if (s == "<=") return CmpOp::Le;
    if (s == ">") return CmpOp::Gt;
    return CmpOp::Ge;
}

class Parser {
public:
    explicit Parser(std::string_view text) : lex_(text) { shift(); }

    Program program() {
        Program p;
        while (cur_.kind != Tok::End) p.rules.push_back(statement());
        return p;
    }

private:
    void shift() { cur_ = lex_.next(); }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(cur_.line, cur_.column, cur_.text, what); }

    void expect(Tok k, const char* what) {
        if (cur_.kind != k) fail(std::string("expected ") + what);
        shift();
    }

    bool accept(Tok k) {
        if (cur_.kind != k) return false;
        shift();
        return true;
    }

    std::int64_t integer() {
        if (cur_.kind != Tok::Integer) fail("expected integer");
        std::int64_t v = 0;
        const char*  b = cur_.text.data();
        auto [p, ec] = std::from_chars(b, b + cur_.text.size(), v);
        if (ec != std::errc{}) fail("integer out of range");
        shift();
        return v;
    }

    Term term() {
        switch (cur_.kind) {
            case Tok::Integer: return Term::integer(integer());
            case Tok::Variable: {
                auto t = Term::variable(cur_.text);
                shift();
                return t;
            }
            case Tok::Ident: {
                if (cur_.text == "not") fail("expected term");
                auto t = Term::constant(cur_.text);
                shift();
                return t;
            }
            default: fail("expected term");
        }
    }

    Atom atom() {
        if (cur_.kind != Tok::Ident || cur_.text == "not") fail("expected atom");
        Atom a{cur_.text, {}};
        shift();
        if (accept(Tok::LParen)) {
            do {
                a.args.push_back(term());
            } while (accept(Tok::Comma));
            expect(Tok::RParen, "')'");
        }
        return a;
    }

    Literal literal() {
        bool neg = false;
        if (cur_.kind == Tok::Ident && cur_.text == "not") {
            neg = true;
            shift();
        }
        return Literal{atom(), neg};
    }

    BodyItem bodyItem() {
        if (cur_.kind == Tok::Ident && cur_.text == "not") return literal();
        if (cur_.kind == Tok::Ident) {
            // Either an atom or a comparison whose left side is a constant.
            Atom a = atom();
            if (cur_.kind == Tok::Cmp) {
                if (!a.args.empty()) fail("comparison operands must be terms");
                CmpOp op = cmpFromText(cur_.text);
                shift();
                return Comparison{Term::constant(a.predicate), op, term()};
            }
            return Literal{std::move(a), false};
        }
        Term lhs = term();
        if (cur_.kind != Tok::Cmp) fail("expected comparison operator");
        CmpOp op = cmpFromText(cur_.text);
        shift();
        return Comparison{std::move(lhs), op, term()};
    }

    std::vector<BodyItem> body() {
        std::vector<BodyItem> out;
        do {
            out.push_back(bodyItem());
        } while (accept(Tok::Comma));
        return out;
    }

    ChoiceHead choice(std::optional<std::int64_t> lower) {
        ChoiceHead c;
        c.lower = lower;
        expect(Tok::LBrace, "'{'");
        if (cur_.kind != Tok::RBrace) {
            do {
                ChoiceElement e{atom(), {}};
                if (accept(Tok::Colon)) {
                    do {
                        e.condition.push_back(literal());
                    } while (accept(Tok::Comma));
                }
                c.elements.push_back(std::move(e));
            } while (accept(Tok::Semi));
        }
        expect(Tok::RBrace, "'}'");
        if (cur_.kind == Tok::Cmp && cur_.text == "<=") {
            shift();
            c.upper = integer();
        }
        else if (cur_.kind == Tok::Integer) {
            c.upper = integer();
        }
        return c;
    }

    Rule statement() {
        Rule r;
        if (accept(Tok::WeakIf)) {
            r.head = Disjunction{};
            r.body = body();
            expect(Tok::Dot, "'.'");
            expect(Tok::LBrack, "'['");
            WeakSpec w;
            w.weight = term();
            expect(Tok::At, "'@'");
            w.level = integer();
            while (accept(Tok::Comma)) w.terms.push_back(term());
            expect(Tok::RBrack, "']'");
            r.weak = std::move(w);
            return r;
        }
        if (accept(Tok::If)) {
            r.head = Disjunction{};
            if (cur_.kind != Tok::Dot) r.body = body();
            expect(Tok::Dot, "'.'");
            return r;
        }
        if (cur_.kind == Tok::Integer || cur_.kind == Tok::LBrace) {
            std::optional<std::int64_t> lower;
            if (cur_.kind == Tok::Integer) {
                lower = integer();
                if (cur_.kind == Tok::Cmp && cur_.text == "<=") shift();
            }
            r.head = choice(lower);
        }
        else {
            Disjunction d;
            do {
                d.atoms.push_back(atom());
            } while (accept(Tok::Bar));
            r.head = std::move(d);
        }
        if (accept(Tok::If)) r.body = body();
        expect(Tok::Dot, "'.'");
        return r;
    }

    Lexer lex_;
    Token cur_;
};

}  // namespace

Program parseProgram(std::string_view text) { return Parser(text).program(); }

}  // namespace cnlasp::asp
