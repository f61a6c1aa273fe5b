#include <cnlasp/cnl.h>

#include <algorithm>

namespace cnlasp::cnl {

namespace {
struct CategoryName {
    Category         category;
    std::string_view id;
    std::string_view label;
};

constexpr CategoryName kNames[] = {
    {Category::DefinitionConstCompound, "definition-const-compound", "Def. Const/Comp."},
    {Category::DefinitionWhen, "definition-when", "Def. 'When'"},
    {Category::DefinitionWhenever, "definition-whenever", "Def. 'Whenever'"},
    {Category::NegativeConstraint, "negative-constraint", "Neg. Constraint"},
    {Category::PositiveConstraint, "positive-constraint", "Pos. Constraint"},
    {Category::QuantifiedChoice, "quantified-choice", "Quant. Choice"},
    {Category::WeakConstraint, "weak-constraint", "Weak Constraint"},
};
}  // namespace

std::string_view toString(Category c) {
    for (const auto& n : kNames)
        if (n.category == c) return n.id;
    return "unknown";
}

std::string_view tableLabel(Category c) {
    for (const auto& n : kNames)
        if (n.category == c) return n.label;
    return "unknown";
}

std::optional<Category> categoryFromString(std::string_view s) {
    for (const auto& n : kNames)
        if (n.id == s) return n.category;
    return std::nullopt;
}

std::optional<std::size_t> EntityDef::position(std::string_view attr) const {
    if (auto it = std::find(key_attrs.begin(), key_attrs.end(), attr); it != key_attrs.end())
        return static_cast<std::size_t>(it - key_attrs.begin());
    if (auto it = std::find(value_attrs.begin(), value_attrs.end(), attr); it != value_attrs.end())
        return key_attrs.size() + static_cast<std::size_t>(it - value_attrs.begin());
    return std::nullopt;
}

const EntityDef* SymbolTable::find(std::string_view name) const {
    auto it = defs_.find(name);
    return it == defs_.end() ? nullptr : &it->second;
}

void SymbolTable::merge(const SymbolTable& other) {
    for (const auto& [name, def] : other.defs_) defs_.try_emplace(name, def);
}

CnlError::CnlError(Kind kind, std::size_t sentence, std::size_t position, std::string message,
                   std::vector<std::string> expected, std::string name)
    : std::runtime_error("sentence " + std::to_string(sentence + 1) + ", column " + std::to_string(position) + ": " +
                         message)
    , kind_(kind)
    , sentence_(sentence)
    , position_(position)
    , message_(std::move(message))
    , expected_(std::move(expected))
    , name_(std::move(name)) {}

std::string_view toString(CnlError::Kind k) {
    switch (k) {
        case CnlError::Kind::Syntax: return "SyntaxError";
        case CnlError::Kind::UnknownEntity: return "UnknownEntity";
        case CnlError::Kind::UnknownAttribute: return "UnknownAttribute";
        case CnlError::Kind::DuplicateBinding: return "DuplicateBinding";
        case CnlError::Kind::Redefinition: return "Redefinition";
    }
    return "Error";
}

namespace {

class Resolver {
public:
    Resolver(Document& doc, const SymbolTable* ambient) : doc_(doc), ambient_(ambient) {}

    void run() {
        for (const auto& p : doc_.propositions) {
            if (const auto* d = std::get_if<Definition>(&p.payload)) define(d->entity, p.sentence);
        }
        for (const auto& p : doc_.propositions) {
            if (const auto* d = std::get_if<DerivedDefinition>(&p.payload)) introduce(d->head, p.sentence);
            else if (const auto* c = std::get_if<Choice>(&p.payload)) {
                for (const auto& a : c->alternatives) introduce(a, p.sentence);
            }
        }
        for (const auto& p : doc_.propositions) check(p);
    }

private:
    const EntityDef* lookup(std::string_view name) const {
        if (const auto* d = doc_.symbols.find(name)) return d;
        return ambient_ ? ambient_->find(name) : nullptr;
    }

    void define(const EntityDef& def, std::size_t sentence) {
        if (const auto* prev = doc_.symbols.find(def.name); prev && *prev != def) {
            throw CnlError(CnlError::Kind::Redefinition, sentence, 1,
                           "entity '" + def.name + "' is defined twice with different attributes", {}, def.name);
        }
        doc_.symbols.insert(def);
    }

    void introduce(const EntityRef& ref, std::size_t sentence) {
        if (lookup(ref.entity)) return;
        EntityDef d;
        d.name = ref.entity;
        d.implicit = true;
        for (const auto& b : ref.bindings) {
            std::string attr = b.attribute.empty() ? "id" : b.attribute;
            if (std::find(d.key_attrs.begin(), d.key_attrs.end(), attr) != d.key_attrs.end()) {
                throw CnlError(CnlError::Kind::DuplicateBinding, sentence, 1,
                               "attribute '" + attr + "' of '" + ref.entity + "' is bound twice", {}, attr);
            }
            d.key_attrs.push_back(std::move(attr));
        }
        if (d.key_attrs.empty()) d.key_attrs.emplace_back("id");
        doc_.symbols.insert(std::move(d));
    }

    void checkRef(const EntityRef& ref, std::size_t sentence) const {
        const auto* def = lookup(ref.entity);
        if (!def) {
            throw CnlError(CnlError::Kind::UnknownEntity, sentence, 1, "unknown entity '" + ref.entity + "'", {},
                           ref.entity);
        }
        std::vector<std::size_t> seen;
        for (const auto& b : ref.bindings) {
            std::optional<std::size_t> pos = b.attribute.empty() ? std::optional<std::size_t>(0) : def->position(b.attribute);
            if (!pos) {
                throw CnlError(CnlError::Kind::UnknownAttribute, sentence, 1,
                               "entity '" + ref.entity + "' has no attribute '" + b.attribute + "'", {}, b.attribute);
            }
            if (std::find(seen.begin(), seen.end(), *pos) != seen.end()) {
                throw CnlError(CnlError::Kind::DuplicateBinding, sentence, 1,
                               "an attribute of '" + ref.entity + "' is bound twice", {}, ref.entity);
            }
            seen.push_back(*pos);
        }
    }

    void checkConditions(const std::vector<Condition>& conds, std::size_t sentence) const {
        for (const auto& c : conds) {
            if (const auto* r = std::get_if<RefCondition>(&c)) checkRef(r->ref, sentence);
        }
    }

    void check(const Proposition& p) const {
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, DerivedDefinition>) {
                    checkRef(x.head, p.sentence);
                    checkConditions(x.conditions, p.sentence);
                }
                else if constexpr (std::is_same_v<T, Constraint> || std::is_same_v<T, Preference>) {
                    checkConditions({x.assertion}, p.sentence);
                    checkConditions(x.conditions, p.sentence);
                }
                else if constexpr (std::is_same_v<T, Choice>) {
                    checkConditions(x.conditions, p.sentence);
                    for (const auto& a : x.alternatives) checkRef(a, p.sentence);
                    for (const auto& e : x.element_conditions) checkRef(e.ref, p.sentence);
                }
            },
            p.payload);
    }

    Document&          doc_;
    const SymbolTable* ambient_;
};

}  // namespace

void resolve(Document& doc, const SymbolTable* ambient) { Resolver(doc, ambient).run(); }

}  // namespace cnlasp::cnl
