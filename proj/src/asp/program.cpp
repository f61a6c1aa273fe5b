#include <cnlasp/asp.h>

#include <algorithm>
#include <set>
#include <sstream>

namespace cnlasp::asp {

bool Atom::isGround() const {
    return std::all_of(args.begin(), args.end(), [](const Term& t) { return t.isGround(); });
}

std::string_view toString(CmpOp op) {
    switch (op) {
        case CmpOp::Eq: return "=";
        case CmpOp::Ne: return "!=";
        case CmpOp::Lt: return "<";
        case CmpOp::Le: return "<=";
        case CmpOp::Gt: return ">";
        case CmpOp::Ge: return ">=";
    }
    return "?";
}

CmpOp negate(CmpOp op) {
    switch (op) {
        case CmpOp::Eq: return CmpOp::Ne;
        case CmpOp::Ne: return CmpOp::Eq;
        case CmpOp::Lt: return CmpOp::Ge;
        case CmpOp::Le: return CmpOp::Gt;
        case CmpOp::Gt: return CmpOp::Le;
        case CmpOp::Ge: return CmpOp::Lt;
    }
    return op;
}

// Integers precede symbolic constants; symbols compare lexicographically.
bool evaluate(CmpOp op, const Term& lhs, const Term& rhs) {
    auto c = lhs <=> rhs;
    switch (op) {
        case CmpOp::Eq: return c == 0;
        case CmpOp::Ne: return c != 0;
        case CmpOp::Lt: return c < 0;
        case CmpOp::Le: return c <= 0;
        case CmpOp::Gt: return c > 0;
        case CmpOp::Ge: return c >= 0;
    }
    return false;
}

Rule Rule::fact(Atom a) {
    Rule r;
    r.head = Disjunction{{std::move(a)}};
    return r;
}

Rule Rule::constraint(std::vector<BodyItem> body) {
    Rule r;
    r.head = Disjunction{};
    r.body = std::move(body);
    return r;
}

bool Rule::isConstraint() const {
    const auto* d = std::get_if<Disjunction>(&head);
    return d && d->atoms.empty();
}

bool Rule::isFact() const {
    const auto* d = std::get_if<Disjunction>(&head);
    return d && d->atoms.size() == 1 && body.empty() && !weak;
}

std::string toString(const Term& t) {
    return t.kind == Term::Kind::Integer ? std::to_string(t.value) : t.text;
}

std::string toString(const Atom& a) {
    std::string out = a.predicate;
    if (!a.args.empty()) {
        out += '(';
        for (std::size_t i = 0; i < a.args.size(); ++i) {
            if (i) out += ',';
            out += toString(a.args[i]);
        }
        out += ')';
    }
    return out;
}

std::string toString(const Literal& l) { return (l.negated ? "not " : "") + toString(l.atom); }

std::string toString(const Comparison& c) {
    std::string out = toString(c.left);
    out += ' ';
    out += toString(c.op);
    out += ' ';
    out += toString(c.right);
    return out;
}

std::string toString(const BodyItem& b) {
    return std::visit([](const auto& x) { return toString(x); }, b);
}

namespace {
template <typename Range, typename Fn>
void join(std::string& out, const Range& r, std::string_view sep, Fn fn) {
    bool first = true;
    for (const auto& x : r) {
        if (!first) out += sep;
        out += fn(x);
        first = false;
    }
}

std::string bodyText(const std::vector<BodyItem>& body) {
    std::string out;
    join(out, body, ", ", [](const BodyItem& b) { return toString(b); });
    return out;
}
}  // namespace

std::string toString(const Rule& r) {
    std::string out;
    if (r.weak) {
        out = ":~ " + bodyText(r.body) + ". [" + toString(r.weak->weight) + "@" +
              std::to_string(r.weak->level);
        for (const auto& t : r.weak->terms) out += ", " + toString(t);
        out += "]";
        return out;
    }
    if (const auto* c = std::get_if<ChoiceHead>(&r.head)) {
        if (c->lower) out += std::to_string(*c->lower) + " <= ";
        out += '{';
        join(out, c->elements, "; ", [](const ChoiceElement& e) {
            std::string s = toString(e.atom);
            if (!e.condition.empty()) {
                s += " : ";
                join(s, e.condition, ", ", [](const Literal& l) { return toString(l); });
            }
            return s;
        });
        out += '}';
        if (c->upper) out += " <= " + std::to_string(*c->upper);
    }
    else {
        const auto& d = std::get<Disjunction>(r.head);
        join(out, d.atoms, " | ", [](const Atom& a) { return toString(a); });
    }
    if (!r.body.empty()) {
        out += out.empty() ? ":- " : " :- ";
        out += bodyText(r.body);
    }
    else if (out.empty()) {
        out = ":-";
    }
    out += '.';
    return out;
}

std::string printProgram(const Program& p) {
    std::string out;
    for (const auto& r : p.rules) {
        out += toString(r);
        out += '\n';
    }
    return out;
}

std::vector<Term> constants(const Program& p) {
    std::set<Term> seen;
    auto addTerm = [&](const Term& t) {
        if (t.isGround()) seen.insert(t);
    };
    auto addAtom = [&](const Atom& a) {
        for (const auto& t : a.args) addTerm(t);
    };
    for (const auto& r : p.rules) {
        if (const auto* d = std::get_if<Disjunction>(&r.head)) {
            for (const auto& a : d->atoms) addAtom(a);
        }
        else {
            for (const auto& e : std::get<ChoiceHead>(r.head).elements) {
                addAtom(e.atom);
                for (const auto& l : e.condition) addAtom(l.atom);
            }
        }
        for (const auto& b : r.body) {
            if (const auto* l = std::get_if<Literal>(&b)) addAtom(l->atom);
            else {
                addTerm(std::get<Comparison>(b).left);
                addTerm(std::get<Comparison>(b).right);
            }
        }
        if (r.weak) {
            addTerm(r.weak->weight);
            for (const auto& t : r.weak->terms) addTerm(t);
        }
    }
    return {seen.begin(), seen.end()};
}

}  // namespace cnlasp::asp
