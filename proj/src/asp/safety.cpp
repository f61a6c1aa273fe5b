#include <cnlasp/asp.h>

#include <set>

namespace cnlasp::asp {

namespace {
void collect(const Term& t, std::set<std::string>& out) {
    if (t.isVariable() && !t.isAnonymous()) out.insert(t.text);
}
void collect(const Atom& a, std::set<std::string>& out) {
    for (const auto& t : a.args) collect(t, out);
}
bool hasAnonymous(const Atom& a) {
    for (const auto& t : a.args)
        if (t.isAnonymous()) return true;
    return false;
}
}  // namespace

std::vector<SafetyViolation> validateSafety(const Rule& r) {
    std::set<std::string> bound;
    for (const auto& b : r.body) {
        if (const auto* l = std::get_if<Literal>(&b); l && !l->negated) collect(l->atom, bound);
    }

    std::vector<SafetyViolation>                   out;
    std::set<std::pair<std::string, std::string>> reported;
    auto check = [&](const std::set<std::string>& vars, const std::set<std::string>& ok, const char* where) {
        for (const auto& v : vars) {
            if (!ok.contains(v) && reported.emplace(v, where).second) out.push_back({v, where});
        }
    };
    auto anonymous = [&](const Atom& a, const char* where) {
        if (hasAnonymous(a) && reported.emplace("_", where).second) out.push_back({"_", where});
    };

    if (const auto* d = std::get_if<Disjunction>(&r.head)) {
        std::set<std::string> vars;
        for (const auto& a : d->atoms) {
            collect(a, vars);
            anonymous(a, "head");
        }
        check(vars, bound, "head");
    }
    else {
        for (const auto& e : std::get<ChoiceHead>(r.head).elements) {
            std::set<std::string> local = bound;
            for (const auto& l : e.condition)
                if (!l.negated) collect(l.atom, local);
            std::set<std::string> vars;
            collect(e.atom, vars);
            anonymous(e.atom, "choice element");
            for (const auto& l : e.condition) {
                if (l.negated) {
                    collect(l.atom, vars);
                    anonymous(l.atom, "choice element");
                }
            }
            check(vars, local, "choice element");
        }
    }

    std::set<std::string> negVars;
    std::set<std::string> cmpVars;
    for (const auto& b : r.body) {
        if (const auto* l = std::get_if<Literal>(&b)) {
            if (l->negated) {
                collect(l->atom, negVars);
                anonymous(l->atom, "negative literal");
            }
        }
        else {
            const auto& c = std::get<Comparison>(b);
            collect(c.left, cmpVars);
            collect(c.right, cmpVars);
            if ((c.left.isAnonymous() || c.right.isAnonymous()) && reported.emplace("_", "comparison").second)
                out.push_back({"_", "comparison"});
        }
    }
    check(negVars, bound, "negative literal");
    check(cmpVars, bound, "comparison");

    if (r.weak) {
        std::set<std::string> vars;
        collect(r.weak->weight, vars);
        for (const auto& t : r.weak->terms) collect(t, vars);
        check(vars, bound, "weak terms");
    }
    return out;
}

}  // namespace cnlasp::asp
