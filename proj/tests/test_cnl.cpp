#include <cnlasp/cnl.h>

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

using namespace cnlasp;
using namespace cnlasp::cnl;

namespace {

const char* const kNode = "A node is identified by an id.";
const char* const kEdge = "A edge is identified by a firstnode, and by a secondnode.";
const char* const kColor = "A color is identified by an id.";
const char* const kChoice =
    "Whenever there is a node with id X then we can have a col with node X, and with color equal to blue, or a col "
    "with node X, and with color equal to red, or a col with node X, and with color equal to green.";
const char* const kProhibit =
    "It is prohibited that C1 is equal to C2, whenever there is a col with node X, and with color C1, whenever there "
    "is a col with node Y, and with color C2, whenever there is an edge with firstnode X, and with secondnode Y.";

std::string coloringDocument() {
    return std::string(kNode) + "\n" + kEdge + "\n" + kColor + "\n" + kChoice + "\n" + kProhibit + "\n";
}

std::vector<std::string> words(const std::string& s) {
    std::istringstream       in(s);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

std::string join(const std::vector<std::string>& ws) {
    std::string out;
    for (const auto& w : ws) out += (out.empty() ? "" : " ") + w;
    return out;
}

}  // namespace

TEST_CASE("definition sentences", "[cnl]") {
    auto doc = parseCnl(kNode);
    REQUIRE(doc.propositions.size() == 1);
    const auto& p = doc.propositions[0];
    CHECK(p.category == Category::DefinitionConstCompound);
    const auto& def = std::get<Definition>(p.payload).entity;
    CHECK(def.name == "node");
    CHECK(def.key_attrs == std::vector<std::string>{"id"});
    CHECK(def.value_attrs.empty());

    auto edge = parseCnl(kEdge);
    CHECK(std::get<Definition>(edge.propositions[0].payload).entity.key_attrs ==
          std::vector<std::string>{"firstnode", "secondnode"});

    auto compound = parseCnl("A movie is identified by an id, and has a title, and has a release year.");
    const auto& m = std::get<Definition>(compound.propositions[0].payload).entity;
    CHECK(m.key_attrs == std::vector<std::string>{"id"});
    CHECK(m.value_attrs == std::vector<std::string>{"title", "release year"});
    CHECK(m.position("release year") == 2);
}

TEST_CASE("prohibition with one comparison and three conditions", "[cnl]") {
    auto doc = parseCnl(coloringDocument());
    REQUIRE(doc.propositions.size() == 5);
    const auto& p = doc.propositions[4];
    CHECK(p.category == Category::NegativeConstraint);
    const auto& c = std::get<Constraint>(p.payload);
    REQUIRE(std::holds_alternative<asp::Comparison>(c.assertion));
    CHECK(std::get<asp::Comparison>(c.assertion).op == asp::CmpOp::Eq);
    REQUIRE(c.conditions.size() == 3);
    for (const auto& cond : c.conditions) CHECK(std::holds_alternative<RefCondition>(cond));
    CHECK(std::get<RefCondition>(c.conditions[2]).ref.entity == "edge");

    // col is introduced by its use in the choice head, attributes in binding order.
    const auto* col = doc.symbols.find("col");
    REQUIRE(col);
    CHECK(col->implicit);
    CHECK(col->key_attrs == std::vector<std::string>{"node", "color"});
}

TEST_CASE("empty text gives an empty document", "[cnl]") {
    auto doc = parseCnl("");
    CHECK(doc.propositions.empty());
    CHECK(doc.symbols.size() == 0);
    CHECK(parseCnl("  \n% only a comment\n").propositions.empty());
}

TEST_CASE("check_syntax verdicts", "[cnl][syntax]") {
    CHECK(checkSyntax(kChoice).accepted);
    CHECK(checkSyntax(kChoice).category == Category::QuantifiedChoice);

    auto truncated = checkSyntax("Whenever there is a");
    CHECK_FALSE(truncated.accepted);
    CHECK_FALSE(truncated.reason.empty());

    auto dashed = checkSyntax("A Dominating-Set is identified by an id.");
    CHECK_FALSE(dashed.accepted);
    CHECK_FALSE(checkSyntax("A dominating-set is identified by an id.").accepted);
    CHECK(checkSyntax("A dominating_set is identified by an id.").accepted);

    CHECK_FALSE(checkSyntax("Whenever There is a node with id X then we can have a col with node X.").accepted);
    CHECK(checkSyntax("Whenever there is a node with id X then we can have a col with node X.").accepted);

    auto atMost = checkSyntax("It is prohibited that X is at most or equal to Y, whenever there is a pair with first X, "
                              "and with second Y.");
    CHECK_FALSE(atMost.accepted);
    CHECK(atMost.reason.find("less than or equal to") != std::string::npos);
    CHECK(checkSyntax("It is prohibited that X is less than or equal to Y, whenever there is a pair with first X, "
                      "and with second Y.")
              .accepted);

    CHECK_FALSE(checkSyntax(std::string(kNode) + " " + kColor).accepted);
}

TEST_CASE("the remaining categories parse", "[cnl]") {
    struct Case {
        const char* text;
        Category    category;
    };
    const Case cases[] = {
        {"A reachable X holds when there is an edge with firstnode X, and with secondnode Y, and there is a node with "
         "id Y.",
         Category::DefinitionWhen},
        {"Whenever there is a node with id X, whenever there is not a colored with node X, then we must have a "
         "uncolored with node X.",
         Category::DefinitionWhenever},
        {"It is required that there is a col with node X, whenever there is a node with id X.",
         Category::PositiveConstraint},
        {"Whenever there is a node with id X then we can have exactly 1 assign with node X, and with color C such "
         "that there is a color with id C.",
         Category::QuantifiedChoice},
        {"Whenever there is a node with id X then we can have between 1 and 2 assign with node X, and with color C "
         "such that there is a color with id C, and there is not a banned with node X, and with color C.",
         Category::QuantifiedChoice},
        {"It is preferred as little as possible that there is a in with first X, and with second Y, whenever there is "
         "a cost with first X, and with second Y, and with amount W, with weight W at level 2.",
         Category::WeakConstraint},
    };
    for (const auto& c : cases) {
        INFO(c.text);
        auto v = checkSyntax(c.text);
        INFO(v.reason);
        REQUIRE(v.accepted);
        CHECK(v.category == c.category);
        CHECK(categorize(parseSentence(c.text)) == c.category);
    }

    auto pref = std::get<Preference>(parseSentence(cases[5].text).payload);
    CHECK(pref.weight == asp::Term::variable("W"));
    CHECK(pref.level == 2);
    auto bounded = std::get<Choice>(parseSentence(cases[4].text).payload);
    CHECK(bounded.bounded);
    CHECK(bounded.lower == 1);
    CHECK(bounded.upper == 2);
    CHECK(bounded.element_conditions.size() == 2);
    CHECK(bounded.element_conditions[1].negated);
}

TEST_CASE("categorize the coloring sentences", "[cnl]") {
    CHECK(categorize(parseSentence(kProhibit)) == Category::NegativeConstraint);
    CHECK(categorize(parseSentence(kChoice)) == Category::QuantifiedChoice);
    CHECK(categorize(parseSentence(kColor)) == Category::DefinitionConstCompound);
    for (auto c : kAllCategories) CHECK(categoryFromString(toString(c)) == c);
}

TEST_CASE("resolution errors", "[cnl]") {
    auto kindOf = [](const std::string& text) {
        try {
            parseCnl(text);
        }
        catch (const CnlError& e) {
            return std::optional<CnlError::Kind>(e.kind());
        }
        return std::optional<CnlError::Kind>();
    };
    CHECK(kindOf("It is prohibited that there is a ghost with id X.") == CnlError::Kind::UnknownEntity);
    CHECK(kindOf(std::string(kNode) + " It is prohibited that there is a node with weight X.") ==
          CnlError::Kind::UnknownAttribute);
    CHECK(kindOf(std::string(kNode) + " It is prohibited that there is a node with id X, and with id Y.") ==
          CnlError::Kind::DuplicateBinding);
    CHECK(kindOf(std::string(kNode) + " A node is identified by a name.") == CnlError::Kind::Redefinition);
    CHECK(kindOf(std::string(kNode) + " " + kNode) == std::nullopt);

    try {
        parseCnl(std::string(kNode) + "\nIt is prohibited that there is a ghost with id X.");
        FAIL("expected UnknownEntity");
    }
    catch (const CnlError& e) {
        CHECK(e.sentence() == 1);
        CHECK(e.name() == "ghost");
    }
}

TEST_CASE("syntax errors carry sentence index and position", "[cnl]") {
    try {
        parseCnl(std::string(kNode) + " A color is identified by.");
        FAIL("expected SyntaxError");
    }
    catch (const CnlError& e) {
        CHECK(e.kind() == CnlError::Kind::Syntax);
        CHECK(e.sentence() == 1);
        CHECK(e.position() == 25);
        CHECK(e.expected() == std::vector<std::string>{"a", "an"});
    }
}

TEST_CASE("check_syntax agrees with parse_cnl under an ambient table", "[cnl][property]") {
    auto ambient = parseCnl(coloringDocument()).symbols;
    std::vector<std::string> corpus = {kNode, kEdge, kColor, kChoice, kProhibit,
                                       "It is required that there is a col with node X, whenever there is a node "
                                       "with id X."};
    std::mt19937 rng(7);
    int          accepted = 0;
    int          rejected = 0;
    for (int round = 0; round < 600; ++round) {
        auto ws = words(corpus[rng() % corpus.size()]);
        switch (rng() % 5) {
            case 0: ws.erase(ws.begin() + static_cast<long>(rng() % ws.size())); break;
            case 1: std::swap(ws[rng() % ws.size()], ws[rng() % ws.size()]); break;
            case 2: {
                auto& w = ws[rng() % ws.size()];
                w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
                break;
            }
            case 3: ws.resize(1 + rng() % ws.size()); break;
            default: break;
        }
        auto sentence = join(ws);
        auto verdict = checkSyntax(sentence, &ambient);
        bool parsed = true;
        try {
            ParseOptions opts;
            opts.ambient = &ambient;
            auto doc = parseCnl(sentence, opts);
            parsed = doc.propositions.size() == 1;
        }
        catch (const CnlError&) {
            parsed = false;
        }
        INFO(sentence);
        CHECK(verdict.accepted == parsed);
        (verdict.accepted ? accepted : rejected)++;
    }
    CHECK(accepted > 0);
    CHECK(rejected > 0);
}
