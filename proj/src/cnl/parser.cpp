#include <cnlasp/cnl.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <initializer_list>

namespace cnlasp::cnl {

namespace {

enum class Tok { Word, Upper, Number, Comma, Period, End };

struct Token {
    Tok         kind = Tok::End;
    std::string text;
    std::size_t column = 0;  // 1-based
};

constexpr std::array kReserved = {
    "a",    "an",   "and",  "or",   "with",  "equal", "to",         "whenever", "then",    "is",
    "there", "not", "holds", "when", "such", "that",  "we",         "can",      "must",    "have",
    "by",   "has",  "identified", "exactly", "between", "it",
};

bool reserved(std::string_view w) {
    return std::find(kReserved.begin(), kReserved.end(), w) != kReserved.end();
}

bool identChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Token> lex(std::string_view s, std::size_t sentence) {
    std::vector<Token> out;
    std::size_t        i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        Token t;
        t.column = i + 1;
        if (c == ',' || c == '.') {
            t.kind = c == ',' ? Tok::Comma : Tok::Period;
            t.text = std::string(1, static_cast<char>(c));
            ++i;
        }
        else if (std::isalnum(c) || c == '_') {
            std::size_t b = i;
            while (i < s.size() && identChar(s[i])) ++i;
            t.text = std::string(s.substr(b, i - b));
            if (i < s.size() && s[i] == '-' && i + 1 < s.size() && identChar(s[i + 1])) {
                throw CnlError(CnlError::Kind::Syntax, sentence, i + 1,
                               "'-' cannot join words; identifiers are joined with '_'", {"_"});
            }
            if (std::isdigit(c)) {
                if (!std::all_of(t.text.begin(), t.text.end(), [](char x) { return std::isdigit(static_cast<unsigned char>(x)); }))
                    throw CnlError(CnlError::Kind::Syntax, sentence, t.column, "malformed number '" + t.text + "'");
                t.kind = Tok::Number;
            }
            else {
                t.kind = std::isupper(c) ? Tok::Upper : Tok::Word;
            }
        }
        else {
            throw CnlError(CnlError::Kind::Syntax, sentence, i + 1,
                           std::string("unexpected character '") + static_cast<char>(c) + "'");
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.column = s.size() + 1;
    out.push_back(end);
    return out;
}

class SentenceParser {
public:
    SentenceParser(std::string_view text, std::size_t index) : toks_(lex(text, index)), index_(index) {}

    Proposition parse() {
        Proposition p{};
        p.sentence = index_;
        if (isAny({"A", "An"})) {
            shift();
            std::string entity = entityName();
            if (is("is")) {
                p.category = Category::DefinitionConstCompound;
                p.payload = definition(std::move(entity));
            }
            else {
                p.category = Category::DefinitionWhen;
                p.payload = whenDefinition(std::move(entity));
            }
        }
        else if (is("Whenever")) {
            shift();
            auto conds = whenever();
            accept(Tok::Comma);
            expectWords({"then", "we"});
            if (is("must")) {
                shift();
                expectWord("have");
                article();
                p.category = Category::DefinitionWhenever;
                p.payload = DerivedDefinition{entityRef(), std::move(conds)};
            }
            else if (is("can")) {
                shift();
                expectWord("have");
                p.category = Category::QuantifiedChoice;
                p.payload = choice(std::move(conds));
            }
            else {
                fail({"must", "can"});
            }
        }
        else if (is("It")) {
            shift();
            expectWord("is");
            if (is("prohibited") || is("required")) {
                bool prohibited = is("prohibited");
                shift();
                expectWord("that");
                Constraint c{assertion(false), {}};
                while (peekComma("whenever")) {
                    shift();
                    shift();
                    c.conditions.push_back(condition(true));
                }
                p.category = prohibited ? Category::NegativeConstraint : Category::PositiveConstraint;
                p.payload = std::move(c);
            }
            else if (is("preferred")) {
                shift();
                expectWords({"as", "little", "as", "possible", "that"});
                p.category = Category::WeakConstraint;
                p.payload = preference();
            }
            else {
                fail({"prohibited", "required", "preferred"});
            }
        }
        else {
            fail({"A", "An", "Whenever", "It"});
        }
        expect(Tok::Period, ".");
        if (cur().kind != Tok::End) fail({"end of sentence"});
        return p;
    }

private:
    const Token& cur() const { return toks_[pos_]; }
    const Token& peek(std::size_t k) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    void         shift() {
        if (pos_ + 1 < toks_.size()) ++pos_;
    }

    bool is(std::string_view w) const {
        return (cur().kind == Tok::Word || cur().kind == Tok::Upper) && cur().text == w;
    }
    bool isAny(std::initializer_list<std::string_view> ws) const {
        return std::any_of(ws.begin(), ws.end(), [&](std::string_view w) { return is(w); });
    }
    bool peekIs(std::size_t k, std::string_view w) const {
        const auto& t = peek(k);
        return (t.kind == Tok::Word || t.kind == Tok::Upper) && t.text == w;
    }
    // ", <w>" lookahead
    bool peekComma(std::string_view w) const { return cur().kind == Tok::Comma && peekIs(1, w); }

    bool accept(Tok k) {
        if (cur().kind != k) return false;
        shift();
        return true;
    }

    [[noreturn]] void fail(std::vector<std::string> expected, std::string message = {}) const {
        std::string found = cur().kind == Tok::End ? "end of input" : "'" + cur().text + "'";
        if (message.empty()) {
            message = "unexpected " + found + ", expected ";
            for (std::size_t i = 0; i < expected.size(); ++i) {
                if (i) message += i + 1 == expected.size() ? " or " : ", ";
                message += "'" + expected[i] + "'";
            }
        }
        throw CnlError(CnlError::Kind::Syntax, index_, cur().column, std::move(message), std::move(expected));
    }

    void expect(Tok k, const char* what) {
        if (!accept(k)) fail({what});
    }
    void expectWord(std::string_view w) {
        if (!is(w)) fail({std::string(w)});
        shift();
    }
    void expectWords(std::initializer_list<std::string_view> ws) {
        for (auto w : ws) expectWord(w);
    }

    void article() {
        if (!isAny({"a", "an"})) fail({"a", "an"});
        shift();
    }

    std::string entityName() {
        if (cur().kind != Tok::Word || reserved(cur().text)) fail({"entity name"});
        std::string n = cur().text;
        shift();
        return n;
    }

    std::string attributeName() {
        std::string name;
        while (cur().kind == Tok::Word && !reserved(cur().text)) {
            if (!name.empty()) name += ' ';
            name += cur().text;
            shift();
        }
        if (name.empty()) fail({"attribute name"});
        return name;
    }

    static asp::Term number(const Token& t) {
        std::int64_t v = 0;
        std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        return asp::Term::integer(v);
    }

    std::int64_t integer() {
        if (cur().kind != Tok::Number) fail({"number"});
        auto v = number(cur()).value;
        shift();
        return v;
    }

    // Variable or number.
    std::optional<asp::Term> operand() {
        if (cur().kind == Tok::Upper) {
            auto t = asp::Term::variable(cur().text);
            shift();
            return t;
        }
        if (cur().kind == Tok::Number) {
            auto t = number(cur());
            shift();
            return t;
        }
        return std::nullopt;
    }

    asp::Term value(bool allowConstant) {
        if (auto t = operand()) return *t;
        if (allowConstant && cur().kind == Tok::Word && !reserved(cur().text)) {
            auto t = asp::Term::constant(cur().text);
            shift();
            return t;
        }
        fail(allowConstant ? std::vector<std::string>{"variable", "number", "constant"}
                           : std::vector<std::string>{"variable", "number", "equal to"});
    }

    Binding binding() {
        expectWord("with");
        Binding b;
        b.attribute = attributeName();
        if (is("equal")) {
            shift();
            expectWord("to");
            b.value = value(true);
        }
        else {
            b.value = value(false);
        }
        return b;
    }

    // entity name already consumed by caller when `entity` is given.
    EntityRef entityRefTail(std::string entity) {
        EntityRef r{std::move(entity), {}};
        if (auto t = operand()) r.bindings.push_back(Binding{{}, *t});
        if (is("with")) {
            r.bindings.push_back(binding());
            while (cur().kind == Tok::Comma && peekIs(1, "and") && peekIs(2, "with")) {
                shift();
                shift();
                r.bindings.push_back(binding());
            }
        }
        return r;
    }

    EntityRef entityRef() { return entityRefTail(entityName()); }

    asp::CmpOp comparisonPhrase() {
        expectWord("is");
        if (is("equal")) {
            shift();
            expectWord("to");
            return asp::CmpOp::Eq;
        }
        if (is("different")) {
            shift();
            expectWord("from");
            return asp::CmpOp::Ne;
        }
        if (is("less") || is("greater")) {
            bool less = is("less");
            shift();
            expectWord("than");
            if (is("or")) {
                shift();
                expectWords({"equal", "to"});
                return less ? asp::CmpOp::Le : asp::CmpOp::Ge;
            }
            return less ? asp::CmpOp::Lt : asp::CmpOp::Gt;
        }
        if (is("at") && (peekIs(1, "most") || peekIs(1, "least"))) {
            bool most = peekIs(1, "most");
            fail({most ? "less than or equal to" : "greater than or equal to"},
                 std::string("'at ") + (most ? "most" : "least") + "' is not a comparison; use '" +
                     (most ? "less than or equal to" : "greater than or equal to") + "'");
        }
        fail({"equal to", "different from", "less than", "less than or equal to", "greater than",
              "greater than or equal to"});
    }

    asp::Comparison comparison() {
        auto lhs = operand();
        if (!lhs) fail({"there", "variable", "number"});
        asp::CmpOp op = comparisonPhrase();
        return asp::Comparison{*lhs, op, value(true)};
    }

    // "there is [not] a ref" or a comparison.
    Condition condition(bool allowNegation) {
        if (is("there")) {
            shift();
            expectWord("is");
            bool neg = false;
            if (allowNegation && is("not")) {
                shift();
                neg = true;
            }
            article();
            return RefCondition{entityRef(), neg};
        }
        return comparison();
    }

    Condition assertion(bool allowNegation) { return condition(allowNegation); }

    std::vector<Condition> whenever() {
        std::vector<Condition> conds;
        conds.push_back(condition(true));
        while (peekComma("whenever")) {
            shift();
            shift();
            conds.push_back(condition(true));
        }
        return conds;
    }

    Definition definition(std::string entity) {
        EntityDef d;
        d.name = std::move(entity);
        expectWords({"is", "identified", "by"});
        article();
        d.key_attrs.push_back(attributeName());
        while (cur().kind == Tok::Comma) {
            shift();
            expectWord("and");
            if (is("by") && d.value_attrs.empty()) {
                shift();
                article();
                d.key_attrs.push_back(attributeName());
            }
            else if (is("has")) {
                shift();
                article();
                d.value_attrs.push_back(attributeName());
            }
            else {
                fail(d.value_attrs.empty() ? std::vector<std::string>{"by", "has"} : std::vector<std::string>{"has"});
            }
        }
        std::vector<std::string> all = d.key_attrs;
        all.insert(all.end(), d.value_attrs.begin(), d.value_attrs.end());
        std::sort(all.begin(), all.end());
        if (auto it = std::adjacent_find(all.begin(), all.end()); it != all.end()) {
            fail({}, "attribute '" + *it + "' declared twice for '" + d.name + "'");
        }
        return Definition{std::move(d)};
    }

    DerivedDefinition whenDefinition(std::string entity) {
        DerivedDefinition d;
        d.head = entityRefTail(std::move(entity));
        expectWords({"holds", "when"});
        d.conditions.push_back(condition(true));
        while (cur().kind == Tok::Comma && peekIs(1, "and")) {
            shift();
            shift();
            d.conditions.push_back(condition(true));
        }
        return d;
    }

    Choice choice(std::vector<Condition> conds) {
        Choice c;
        c.conditions = std::move(conds);
        if (is("exactly") || is("between") || (is("at") && (peekIs(1, "most") || peekIs(1, "least")))) {
            c.bounded = true;
            if (is("exactly")) {
                shift();
                c.lower = c.upper = integer();
            }
            else if (is("between")) {
                shift();
                c.lower = integer();
                expectWord("and");
                c.upper = integer();
                if (*c.lower > *c.upper) fail({}, "empty bound range");
            }
            else {
                shift();
                bool most = is("most");
                shift();
                (most ? c.upper : c.lower) = integer();
            }
            c.alternatives.push_back(entityRef());
            if (is("such")) {
                shift();
                expectWord("that");
                for (;;) {
                    expectWords({"there", "is"});
                    bool neg = false;
                    if (is("not")) {
                        shift();
                        neg = true;
                    }
                    article();
                    c.element_conditions.push_back(RefCondition{entityRef(), neg});
                    if (!(cur().kind == Tok::Comma && peekIs(1, "and") && peekIs(2, "there"))) break;
                    shift();
                    shift();
                }
            }
            return c;
        }
        article();
        c.alternatives.push_back(entityRef());
        while (peekComma("or")) {
            shift();
            shift();
            article();
            c.alternatives.push_back(entityRef());
        }
        return c;
    }

    Preference preference() {
        Preference p{assertion(true), {}};
        while (peekComma("whenever")) {
            shift();
            shift();
            p.conditions.push_back(condition(true));
        }
        if (peekComma("with")) {
            shift();
            shift();
            expectWord("weight");
            auto w = operand();
            if (!w) fail({"variable", "number"});
            p.weight = *w;
            if (is("at")) {
                shift();
                expectWord("level");
                p.level = integer();
            }
        }
        return p;
    }

    std::vector<Token> toks_;
    std::size_t        pos_ = 0;
    std::size_t        index_;
};

}  // namespace

Proposition parseSentence(std::string_view sentence, std::size_t index) {
    auto p = SentenceParser(sentence, index).parse();
    // Trim surrounding blanks for the stored text.
    auto b = sentence.find_first_not_of(" \t\r\n");
    auto e = sentence.find_last_not_of(" \t\r\n");
    p.text = b == std::string_view::npos ? std::string() : std::string(sentence.substr(b, e - b + 1));
    return p;
}

std::vector<SentenceSpan> splitSentences(std::string_view text) {
    std::vector<SentenceSpan> out;
    std::string               current;
    std::size_t               start = 0;
    bool                      lineStart = true;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (lineStart && c == '%' && current.find_first_not_of(" \t\r\n") == std::string::npos) {
            while (i < text.size() && text[i] != '\n') ++i;
            continue;
        }
        if (c == '\n') lineStart = true;
        else if (!std::isspace(static_cast<unsigned char>(c))) lineStart = false;
        if (current.empty()) {
            if (std::isspace(static_cast<unsigned char>(c))) continue;
            start = i;
        }
        current += c;
        if (c == '.' && (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])))) {
            out.push_back({std::move(current), start});
            current.clear();
        }
    }
    if (current.find_first_not_of(" \t\r\n") != std::string::npos) out.push_back({std::move(current), start});
    return out;
}

Document parseCnl(std::string_view text, const ParseOptions& opts) {
    Document doc;
    auto     sentences = splitSentences(text);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        doc.propositions.push_back(parseSentence(sentences[i].text, i));
    }
    if (opts.resolve) {
        resolve(doc, opts.ambient);
    }
    else {
        for (const auto& p : doc.propositions) {
            if (const auto* d = std::get_if<Definition>(&p.payload)) doc.symbols.insert(d->entity);
        }
    }
    return doc;
}

SyntaxVerdict checkSyntax(std::string_view sentence, const SymbolTable* ambient) {
    SyntaxVerdict v;
    try {
        auto spans = splitSentences(sentence);
        if (spans.size() != 1) {
            v.reason = spans.empty() ? "empty input" : "expected exactly one sentence, found " + std::to_string(spans.size());
            return v;
        }
        ParseOptions opts;
        opts.ambient = ambient;
        opts.resolve = ambient != nullptr;
        auto doc = parseCnl(sentence, opts);
        v.accepted = true;
        v.category = doc.propositions.front().category;
    }
    catch (const CnlError& e) {
        v.reason = "column " + std::to_string(e.position()) + ": " + e.message();
    }
    return v;
}

Category categorize(const Proposition& p) { return p.category; }

}  // namespace cnlasp::cnl
