#include <cnlasp/dataset.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <regex>
#include <set>
#include <sstream>

namespace cnlasp::dataset {

using Kind = Placeholder::Kind;

std::string_view toString(Kind k) {
    switch (k) {
        case Kind::Num: return "num";
        case Kind::Verb: return "verb";
        case Kind::Noun: return "noun";
        case Kind::Var: return "var";
        case Kind::Color: return "color";
        case Kind::Pid: return "PID";
        case Kind::NumRange: return "num_range";
        case Kind::NumChoice: return "num_choice";
    }
    return "?";
}

namespace {

const std::regex& placeholderPattern() {
    static const std::regex re(
        R"(num_range\s*\(\s*(\d+)\s+to\s+(\d+)\s*\))"
        R"(|num_choice\s*\(\s*(\d+)\s*(?:,\s*(or|and)\s*)?\))"
        R"(|\b(noun|Noun|verb|Verb|var|num|color|Color|PID)_(\d+)\b)");
    return re;
}

std::size_t occurrences(std::string_view text, std::string_view word) {
    std::size_t n = 0;
    for (auto p = text.find(word); p != std::string_view::npos; p = text.find(word, p + 1)) ++n;
    return n;
}

std::string lowerFirst(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
    return s;
}

std::string upperFirst(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

// Uniform integer in [0, n).
std::uint64_t below(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t       x;
    do x = rng();
    while (x >= limit);
    return x % n;
}

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> out;
    std::size_t              i = 0;
    auto word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '-'; };
    while (i < s.size()) {
        if (std::isspace(static_cast<unsigned char>(s[i]))) {
            ++i;
            continue;
        }
        std::size_t b = i;
        if (word(s[i])) {
            while (i < s.size() && word(s[i])) ++i;
        }
        else {
            ++i;
        }
        out.emplace_back(s.substr(b, i - b));
    }
    return out;
}

std::string joinTokens(const std::vector<std::string>& toks, std::size_t b, std::size_t e) {
    std::string out;
    for (std::size_t i = b; i < e; ++i) {
        bool punct = toks[i].size() == 1 && !std::isalnum(static_cast<unsigned char>(toks[i][0]));
        if (i > b && !punct) out += ' ';
        out += toks[i];
    }
    return out;
}

bool isNumber(const std::string& t) {
    return !t.empty() && std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

bool isWord(const std::string& t) { return !t.empty() && std::isalpha(static_cast<unsigned char>(t[0])); }

bool isVariable(const std::string& t) {
    return !t.empty() && std::isupper(static_cast<unsigned char>(t[0])) &&
           std::all_of(t.begin(), t.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

bool sameLiteral(const std::string& a, const std::string& b) {
    auto x = lower(a);
    auto y = lower(b);
    if ((x == "a" || x == "an") && (y == "a" || y == "an")) return true;
    return x == y;
}

}  // namespace

std::vector<Placeholder> placeholders(std::string_view text) {
    std::vector<Placeholder> out;
    std::string              s(text);
    std::size_t              ranges = 0;
    std::size_t              choices = 0;
    for (auto it = std::sregex_iterator(s.begin(), s.end(), placeholderPattern()); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        Placeholder p;
        p.begin = static_cast<std::size_t>(m.position(0));
        p.end = p.begin + static_cast<std::size_t>(m.length(0));
        if (m[1].matched) {
            p.kind = Kind::NumRange;
            p.lo = std::stoll(m[1].str());
            p.hi = std::stoll(m[2].str());
            if (p.lo > p.hi) throw DatasetError("empty range in '" + m.str(0) + "'");
            ++ranges;
        }
        else if (m[3].matched) {
            p.kind = Kind::NumChoice;
            p.count = std::stoi(m[3].str());
            p.connector = m[4].matched ? m[4].str() : "";
            if (p.count < 1 || p.count > 10) throw DatasetError("num_choice count must lie in 1..10");
            ++choices;
        }
        else {
            auto name = m[5].str();
            p.capitalized = std::isupper(static_cast<unsigned char>(name[0])) && name != "PID";
            auto base = name == "PID" ? name : lower(name);
            p.kind = base == "noun"    ? Kind::Noun
                     : base == "verb"  ? Kind::Verb
                     : base == "var"   ? Kind::Var
                     : base == "num"   ? Kind::Num
                     : base == "color" ? Kind::Color
                                       : Kind::Pid;
            p.index = std::stoi(m[6].str());
            if (p.index < 1) throw DatasetError("placeholder index must be positive in '" + name + "'");
        }
        out.push_back(std::move(p));
    }
    if (occurrences(text, "num_range") != ranges || occurrences(text, "num_choice") != choices)
        throw DatasetError("malformed numeric placeholder in '" + s + "'");
    return out;
}

void validate(const TemplatePair& t) {
    auto c = placeholders(t.cnl);
    auto n = placeholders(t.nl);
    auto keys = [](const std::vector<Placeholder>& ps) {
        std::set<std::pair<Kind, int>> out;
        for (const auto& p : ps)
            if (p.kind != Kind::NumRange && p.kind != Kind::NumChoice) out.emplace(p.kind, p.index);
        return out;
    };
    auto params = [](const std::vector<Placeholder>& ps) {
        std::vector<std::tuple<Kind, std::int64_t, std::int64_t, int, std::string>> out;
        for (const auto& p : ps)
            if (p.kind == Kind::NumRange || p.kind == Kind::NumChoice)
                out.emplace_back(p.kind, p.lo, p.hi, p.count, p.connector);
        return out;
    };
    if (keys(c) != keys(n) || params(c) != params(n)) {
        throw PlaceholderMismatch("template " + (t.id.empty() ? std::string("pair") : t.id) +
                                  ": CNL and NL sides carry different placeholders");
    }
}

std::vector<TemplatePair> parseTemplates(std::string_view text, const std::string& idPrefix) {
    std::vector<TemplatePair>    out;
    std::optional<cnl::Category> category;
    std::optional<std::string>   pendingCnl;
    std::istringstream           in{std::string(text)};
    std::size_t                  lineNo = 0;
    auto fail = [&](const std::string& why) {
        throw DatasetError("template line " + std::to_string(lineNo) + ": " + why);
    };
    for (std::string line; std::getline(in, line);) {
        ++lineNo;
        auto l = trim(line);
        if (l.empty() || l[0] == '#') continue;
        if (l.front() == '[' && l.back() == ']') {
            if (pendingCnl) fail("CNL line without NL line");
            category = cnl::categoryFromString(l.substr(1, l.size() - 2));
            if (!category) fail("unknown category '" + l + "'");
            continue;
        }
        if (l.rfind("CNL:", 0) == 0) {
            if (pendingCnl) fail("two CNL lines in a row");
            if (!category) fail("pair before any [category] header");
            pendingCnl = trim(l.substr(4));
        }
        else if (l.rfind("NL:", 0) == 0) {
            if (!pendingCnl) fail("NL line without CNL line");
            TemplatePair t{idPrefix + std::to_string(out.size() + 1), *category, std::move(*pendingCnl), trim(l.substr(3))};
            pendingCnl.reset();
            validate(t);
            out.push_back(std::move(t));
        }
        else {
            fail("expected '[category]', 'CNL:' or 'NL:'");
        }
    }
    if (pendingCnl) fail("CNL line without NL line");
    return out;
}

std::vector<TemplatePair> loadTemplates(const std::filesystem::path& dirOrFile) {
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(dirOrFile)) {
        for (const auto& e : std::filesystem::directory_iterator(dirOrFile))
            if (e.path().extension() == ".txt") files.push_back(e.path());
        std::sort(files.begin(), files.end());
    }
    else {
        files.push_back(dirOrFile);
    }
    std::vector<TemplatePair> out;
    for (const auto& f : files) {
        std::ifstream in(f);
        if (!in) throw DatasetError("cannot read " + f.string());
        std::stringstream ss;
        ss << in.rdbuf();
        auto part = parseTemplates(ss.str(), f.stem().string() + "#");
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

BagOfWords BagOfWords::load(const std::filesystem::path& dir) {
    auto read = [&](const char* name) {
        std::ifstream in(dir / name);
        if (!in) throw DatasetError("cannot read " + (dir / name).string());
        std::vector<std::string> out;
        for (std::string line; std::getline(in, line);) {
            auto l = trim(line);
            if (!l.empty() && l[0] != '#') out.push_back(l);
        }
        return out;
    };
    return BagOfWords{read("pids.txt"), read("nouns.txt"), read("verbs.txt"), read("colors.txt")};
}

std::vector<std::string> checkBagOfWords(const BagOfWords& bow) {
    std::vector<std::string> out;
    auto check = [&](const char* name, const std::vector<std::string>& words) {
        if (words.empty()) out.push_back(std::string(name) + " is empty");
        std::set<std::string> seen;
        for (const auto& w : words)
            if (!seen.insert(w).second) out.push_back(std::string(name) + " repeats '" + w + "'");
    };
    check("pids", bow.pids);
    check("nouns", bow.nouns);
    check("verbs", bow.verbs);
    check("colors", bow.colors);
    return out;
}

std::string renderChoice(const std::vector<std::int64_t>& values, const std::string& connector) {
    std::string out;
    if (values.size() == 1) return std::to_string(values[0]);
    if (values.size() == 2) {
        return std::to_string(values[0]) + " " + (connector.empty() ? "or" : connector) + " " + std::to_string(values[1]);
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        if (i + 1 == values.size()) out += (connector.empty() ? "and" : connector) + " ";
        out += std::to_string(values[i]);
    }
    return out;
}

std::string render(std::string_view text, const SlotAssignment& slots) {
    std::string out;
    std::size_t at = 0;
    std::size_t r = 0;
    std::size_t c = 0;
    for (const auto& p : placeholders(text)) {
        out.append(text.substr(at, p.begin - at));
        at = p.end;
        if (p.kind == Kind::NumRange) {
            if (r >= slots.ranges.size()) throw DatasetError("missing value for num_range");
            out += slots.ranges[r++];
        }
        else if (p.kind == Kind::NumChoice) {
            if (c >= slots.choices.size()) throw DatasetError("missing value for num_choice");
            out += slots.choices[c++];
        }
        else {
            auto it = slots.values.find({p.kind, p.index});
            if (it == slots.values.end())
                throw DatasetError("missing value for " + std::string(toString(p.kind)) + "_" + std::to_string(p.index));
            out += p.capitalized ? upperFirst(it->second) : it->second;
        }
    }
    out.append(text.substr(at));
    return out;
}

SlotAssignment drawSlots(const TemplatePair& t, const BagOfWords& bow, std::uint64_t seed) {
    validate(t);
    std::mt19937_64 rng(seed);
    auto            cnlSide = placeholders(t.cnl);
    auto            nlSide = placeholders(t.nl);

    std::set<std::pair<Kind, int>> keys;
    for (const auto& p : cnlSide)
        if (p.kind != Kind::NumRange && p.kind != Kind::NumChoice) keys.emplace(p.kind, p.index);

    // Letters already used literally are not handed out as variables.
    std::set<std::string> literal;
    for (const auto* side : {&t.cnl, &t.nl})
        for (const auto& tok : tokenize(*side)) literal.insert(tok);

    SlotAssignment                                 out;
    std::map<Kind, std::set<std::string>>          used;
    std::vector<int>                               nums;
    for (const auto& [kind, index] : keys)
        if (kind == Kind::Num) nums.push_back(index);

    auto pool = [&](Kind k) -> const std::vector<std::string>& {
        switch (k) {
            case Kind::Verb: return bow.verbs;
            case Kind::Noun: return bow.nouns;
            case Kind::Color: return bow.colors;
            default: return bow.pids;
        }
    };

    for (const auto& [kind, index] : keys) {
        std::string value;
        if (kind == Kind::Num) {
            auto rank = std::find(nums.begin(), nums.end(), index) - nums.begin();
            value = std::to_string(rank + 1);
        }
        else if (kind == Kind::Var) {
            std::vector<std::string> free;
            for (char ch = 'A'; ch <= 'Z'; ++ch) {
                std::string v(1, ch);
                if (!used[kind].contains(v) && !literal.contains(v)) free.push_back(v);
            }
            if (free.empty()) throw DatasetError("ran out of variable letters");
            value = free[below(rng, free.size())];
        }
        else {
            const auto& words = pool(kind);
            if (words.empty()) throw EmptyBagCategory("no words for " + std::string(toString(kind)) + " placeholders");
            std::vector<const std::string*> free;
            for (const auto& w : words)
                if (!used[kind].contains(w)) free.push_back(&w);
            if (free.empty()) throw EmptyBagCategory("not enough distinct words for " + std::string(toString(kind)));
            value = *free[below(rng, free.size())];
        }
        used[kind].insert(value);
        out.values[{kind, index}] = value;
    }

    for (const auto& p : cnlSide) {
        if (p.kind == Kind::NumRange) {
            auto span = static_cast<std::uint64_t>(p.hi - p.lo + 1);
            out.ranges.push_back(std::to_string(p.lo + static_cast<std::int64_t>(below(rng, span))));
        }
        else if (p.kind == Kind::NumChoice) {
            std::vector<std::int64_t> all{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
            std::vector<std::int64_t> picked;
            for (int i = 0; i < p.count; ++i) {
                auto j = below(rng, all.size());
                picked.push_back(all[j]);
                all.erase(all.begin() + static_cast<long>(j));
            }
            std::sort(picked.begin(), picked.end());
            out.choices.push_back(renderChoice(picked, p.connector));
        }
    }
    (void)nlSide;
    return out;
}

DatasetRecord instantiateWith(const TemplatePair& t, const SlotAssignment& slots, std::string id) {
    validate(t);
    DatasetRecord r;
    r.id = std::move(id);
    r.nl = render(t.nl, slots);
    r.cnl = render(t.cnl, slots);
    r.category = t.category;
    r.origin = Origin::Generated;
    return r;
}

DatasetRecord instantiate(const TemplatePair& t, const BagOfWords& bow, std::uint64_t seed, std::string id) {
    return instantiateWith(t, drawSlots(t, bow, seed), std::move(id));
}

namespace {

struct Item {
    std::optional<Placeholder> slot;
    std::string                literal;
};

class Matcher {
public:
    Matcher(std::vector<Item> items, std::vector<std::string> toks) : items_(std::move(items)), toks_(std::move(toks)) {}

    std::optional<SlotAssignment> run() {
        if (match(0, 0)) return out_;
        return std::nullopt;
    }

private:
    bool bind(const Placeholder& p, std::string value, std::size_t i, std::size_t next) {
        if (p.capitalized) value = lowerFirst(value);
        auto key = std::make_pair(p.kind, p.index);
        auto it = out_.values.find(key);
        if (it != out_.values.end()) return it->second == value && match(i + 1, next);
        out_.values[key] = value;
        if (match(i + 1, next)) return true;
        out_.values.erase(key);
        return false;
    }

    bool match(std::size_t i, std::size_t j) {
        if (i == items_.size()) return j == toks_.size();
        const auto& item = items_[i];
        if (!item.slot) return j < toks_.size() && sameLiteral(item.literal, toks_[j]) && match(i + 1, j + 1);
        const auto& p = *item.slot;
        if (j >= toks_.size()) return false;
        const auto& t = toks_[j];
        switch (p.kind) {
            case Kind::Num:
                return isNumber(t) && bind(p, t, i, j + 1);
            case Kind::Var:
                return isVariable(t) && bind(p, t, i, j + 1);
            case Kind::Noun:
            case Kind::Verb:
            case Kind::Color:
                if (!isWord(t)) return false;
                if (p.capitalized != static_cast<bool>(std::isupper(static_cast<unsigned char>(t[0])))) return false;
                return bind(p, t, i, j + 1);
            case Kind::Pid:
                for (std::size_t e = j + 1; e <= toks_.size() && isWord(toks_[e - 1]); ++e) {
                    if (bind(p, joinTokens(toks_, j, e), i, e)) return true;
                }
                return false;
            case Kind::NumRange:
                if (!isNumber(t)) return false;
                out_.ranges.push_back(t);
                if (match(i + 1, j + 1)) return true;
                out_.ranges.pop_back();
                return false;
            case Kind::NumChoice: {
                // number { [","] ["or"|"and"] number }, shortest first
                std::size_t e = j;
                std::size_t numbers = 0;
                while (e < toks_.size() && isNumber(toks_[e])) {
                    ++e;
                    ++numbers;
                    out_.choices.push_back(joinTokens(toks_, j, e));
                    if (match(i + 1, e)) return true;
                    out_.choices.pop_back();
                    std::size_t k = e;
                    if (k < toks_.size() && toks_[k] == ",") ++k;
                    if (k < toks_.size() && (toks_[k] == "or" || toks_[k] == "and")) ++k;
                    if (k == e || numbers >= 10) break;
                    e = k;
                }
                return false;
            }
        }
        return false;
    }

    std::vector<Item>        items_;
    std::vector<std::string> toks_;
    SlotAssignment           out_;
};

}  // namespace

std::optional<SlotAssignment> matchTemplate(std::string_view text, std::string_view sentence) {
    std::vector<Item> items;
    std::size_t       at = 0;
    for (const auto& p : placeholders(text)) {
        for (auto& tok : tokenize(text.substr(at, p.begin - at))) items.push_back({std::nullopt, std::move(tok)});
        items.push_back({p, {}});
        at = p.end;
    }
    for (auto& tok : tokenize(text.substr(at))) items.push_back({std::nullopt, std::move(tok)});
    return Matcher(std::move(items), tokenize(sentence)).run();
}

}  // namespace cnlasp::dataset
