#include <cnlasp/codegen.h>

#include <algorithm>

namespace cnlasp::codegen {

using cnl::Condition;
using cnl::RefCondition;

CompileError::CompileError(Kind kind, std::size_t proposition, std::string detail, std::string message)
    : std::runtime_error(std::move(message)), kind_(kind), proposition_(proposition), detail_(std::move(detail)) {}

std::string_view toString(CompileError::Kind k) {
    return k == CompileError::Kind::UnboundVariable ? "UnboundVariable" : "ArityMismatch";
}

asp::Atom atomFor(const cnl::EntityRef& ref, const cnl::SymbolTable& symbols, std::size_t proposition) {
    const auto* def = symbols.find(ref.entity);
    if (!def) {
        throw CompileError(CompileError::Kind::ArityMismatch, proposition, ref.entity,
                           "no definition for entity '" + ref.entity + "'");
    }
    std::vector<std::optional<asp::Term>> slots(def->arity());
    for (const auto& b : ref.bindings) {
        auto pos = b.attribute.empty() ? std::optional<std::size_t>(0) : def->position(b.attribute);
        if (!pos || *pos >= slots.size() || slots[*pos]) {
            throw CompileError(CompileError::Kind::ArityMismatch, proposition, ref.entity,
                               "binding '" + b.attribute + "' does not fit entity '" + ref.entity + "'");
        }
        slots[*pos] = b.value;
    }
    asp::Atom a{ref.entity, {}};
    for (auto& s : slots) a.args.push_back(s ? std::move(*s) : asp::Term::anonymous());
    return a;
}

namespace {

class SentenceCompiler {
public:
    SentenceCompiler(const cnl::Proposition& p, const cnl::SymbolTable& symbols) : p_(p), symbols_(symbols) {}

    std::vector<asp::Rule> run() {
        std::vector<asp::Rule> out = std::visit([&](const auto& x) { return emit(x); }, p_.payload);
        for (const auto& r : out) {
            auto v = asp::validateSafety(r);
            if (!v.empty()) {
                throw CompileError(CompileError::Kind::UnboundVariable, p_.sentence, v.front().variable,
                                   "variable '" + v.front().variable + "' is not bound by a positive condition (" +
                                       v.front().location + ")");
            }
        }
        return out;
    }

private:
    asp::Atom atom(const cnl::EntityRef& r) const { return atomFor(r, symbols_, p_.sentence); }

    asp::BodyItem item(const Condition& c) const {
        if (const auto* r = std::get_if<RefCondition>(&c)) return asp::Literal{atom(r->ref), r->negated};
        return std::get<asp::Comparison>(c);
    }

    std::vector<asp::BodyItem> body(const std::vector<Condition>& conds) const {
        std::vector<asp::BodyItem> out;
        for (const auto& c : conds) out.push_back(item(c));
        return out;
    }

    std::vector<asp::Rule> emit(const cnl::Definition&) const { return {}; }

    std::vector<asp::Rule> emit(const cnl::DerivedDefinition& d) const {
        asp::Rule r;
        r.head = asp::Disjunction{{atom(d.head)}};
        r.body = body(d.conditions);
        return {r};
    }

    std::vector<asp::Rule> emit(const cnl::Constraint& c) const {
        asp::Rule r;
        r.head = asp::Disjunction{};
        if (p_.category == cnl::Category::NegativeConstraint) {
            std::vector<Condition> all{c.assertion};
            all.insert(all.end(), c.conditions.begin(), c.conditions.end());
            std::stable_partition(all.begin(), all.end(),
                                  [](const Condition& x) { return std::holds_alternative<asp::Comparison>(x); });
            r.body = body(all);
        }
        else {
            r.body = body(c.conditions);
            auto last = item(c.assertion);
            if (auto* l = std::get_if<asp::Literal>(&last)) l->negated = !l->negated;
            else {
                auto& cmp = std::get<asp::Comparison>(last);
                cmp.op = asp::negate(cmp.op);
            }
            r.body.push_back(std::move(last));
        }
        return {r};
    }

    std::vector<asp::Rule> emit(const cnl::Choice& c) const {
        asp::Rule r;
        r.body = body(c.conditions);
        if (c.bounded) {
            asp::ChoiceHead h;
            asp::ChoiceElement e{atom(c.alternatives.front()), {}};
            for (const auto& ec : c.element_conditions) e.condition.push_back(asp::Literal{atom(ec.ref), ec.negated});
            h.elements.push_back(std::move(e));
            h.lower = c.lower;
            h.upper = c.upper;
            r.head = std::move(h);
        }
        else if (c.alternatives.size() == 1) {
            r.head = asp::ChoiceHead{{asp::ChoiceElement{atom(c.alternatives.front()), {}}}, std::nullopt, std::nullopt};
        }
        else {
            asp::Disjunction d;
            for (const auto& a : c.alternatives) d.atoms.push_back(atom(a));
            r.head = std::move(d);
        }
        return {r};
    }

    std::vector<asp::Rule> emit(const cnl::Preference& pref) const {
        asp::Rule r;
        r.head = asp::Disjunction{};
        r.body.push_back(item(pref.assertion));
        for (const auto& c : pref.conditions) r.body.push_back(item(c));

        asp::WeakSpec w{pref.weight, pref.level, {}};
        auto note = [&](const asp::Term& t) {
            if (t.isVariable() && !t.isAnonymous() && std::find(w.terms.begin(), w.terms.end(), t) == w.terms.end())
                w.terms.push_back(t);
        };
        for (const auto& b : r.body) {
            if (const auto* l = std::get_if<asp::Literal>(&b)) {
                for (const auto& t : l->atom.args) note(t);
            }
            else {
                note(std::get<asp::Comparison>(b).left);
                note(std::get<asp::Comparison>(b).right);
            }
        }
        r.weak = std::move(w);
        return {r};
    }

    const cnl::Proposition&  p_;
    const cnl::SymbolTable&  symbols_;
};

}  // namespace

std::vector<asp::Rule> compileSentence(const cnl::Proposition& p, const cnl::SymbolTable& symbols) {
    return SentenceCompiler(p, symbols).run();
}

asp::Program compile(const cnl::Document& doc) {
    asp::Program out;
    for (const auto& p : doc.propositions) {
        auto rules = compileSentence(p, doc.symbols);
        out.rules.insert(out.rules.end(), rules.begin(), rules.end());
    }
    return out;
}

}  // namespace cnlasp::codegen
