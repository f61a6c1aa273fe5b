#include <cnlasp/dataset.h>

#include <sstream>

namespace cnlasp::dataset {

using nlohmann::json;

std::string_view toString(Origin o) {
    switch (o) {
        case Origin::Source: return "source";
        case Origin::Generated: return "generated";
        case Origin::Rephrased: return "rephrased";
    }
    return "?";
}

std::optional<Origin> originFromString(std::string_view s) {
    for (auto o : {Origin::Source, Origin::Generated, Origin::Rephrased})
        if (toString(o) == s) return o;
    return std::nullopt;
}

json toJson(const DatasetRecord& r) {
    json j;
    j["id"] = r.id;
    j["nl"] = r.nl;
    j["cnl"] = r.cnl;
    j["category"] = std::string(cnl::toString(r.category));
    j["origin"] = std::string(toString(r.origin));
    j["parent_id"] = r.parent_id ? json(*r.parent_id) : json(nullptr);
    return j;
}

DatasetRecord recordFromJson(const json& j) {
    DatasetRecord r;
    try {
        r.id = j.at("id").get<std::string>();
        r.nl = j.at("nl").get<std::string>();
        r.cnl = j.at("cnl").get<std::string>();
        auto c = cnl::categoryFromString(j.at("category").get<std::string>());
        auto o = originFromString(j.at("origin").get<std::string>());
        if (!c || !o) throw DatasetError("record " + r.id + ": unknown category or origin");
        r.category = *c;
        r.origin = *o;
        if (j.contains("parent_id") && !j["parent_id"].is_null()) r.parent_id = j["parent_id"].get<std::string>();
    }
    catch (const json::exception& e) {
        throw DatasetError(std::string("malformed record: ") + e.what());
    }
    return r;
}

std::string toJsonl(const std::vector<DatasetRecord>& records) {
    std::string out;
    for (const auto& r : records) out += toJson(r).dump() + "\n";
    return out;
}

std::vector<DatasetRecord> parseJsonl(std::string_view text) {
    std::vector<DatasetRecord> out;
    std::istringstream         in{std::string(text)};
    std::size_t                n = 0;
    for (std::string line; std::getline(in, line);) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        }
        catch (const json::exception& e) {
            throw DatasetError("line " + std::to_string(n) + ": " + e.what());
        }
        out.push_back(recordFromJson(j));
    }
    return out;
}

DatasetManifest manifestOf(const std::vector<DatasetRecord>& records, std::optional<std::int64_t> k) {
    DatasetManifest m;
    m.rephrase_factor = k;
    for (auto c : cnl::kAllCategories) m.rows[c];
    for (const auto& r : records) {
        auto& row = m.rows[r.category];
        switch (r.origin) {
            case Origin::Source: ++row.source; break;
            case Origin::Generated: ++row.generated; break;
            case Origin::Rephrased: ++row.rephrased; break;
        }
    }
    for (auto& [c, row] : m.rows) {
        row.total = row.source + row.generated + row.rephrased;
        m.grand.source += row.source;
        m.grand.generated += row.generated;
        m.grand.rephrased += row.rephrased;
        m.grand.total += row.total;
    }
    return m;
}

namespace {
json countsJson(const CategoryCounts& c) {
    return json{{"source", c.source}, {"generated", c.generated}, {"rephrased", c.rephrased}, {"total", c.total}};
}
CategoryCounts countsFrom(const json& j) {
    return CategoryCounts{j.at("source").get<std::int64_t>(), j.at("generated").get<std::int64_t>(),
                          j.at("rephrased").get<std::int64_t>(), j.at("total").get<std::int64_t>()};
}
}  // namespace

json toJson(const DatasetManifest& m) {
    json rows = json::object();
    for (const auto& [c, row] : m.rows) rows[std::string(cnl::toString(c))] = countsJson(row);
    json j{{"rows", rows}, {"grand", countsJson(m.grand)}};
    j["rephrase_factor"] = m.rephrase_factor ? json(*m.rephrase_factor) : json(nullptr);
    return j;
}

DatasetManifest manifestFromJson(const json& j) {
    DatasetManifest m;
    try {
        for (const auto& [name, row] : j.at("rows").items()) {
            auto c = cnl::categoryFromString(name);
            if (!c) throw DatasetError("unknown category '" + name + "' in manifest");
            m.rows[*c] = countsFrom(row);
        }
        m.grand = countsFrom(j.at("grand"));
        if (j.contains("rephrase_factor") && !j["rephrase_factor"].is_null())
            m.rephrase_factor = j["rephrase_factor"].get<std::int64_t>();
    }
    catch (const json::exception& e) {
        throw DatasetError(std::string("malformed manifest: ") + e.what());
    }
    return m;
}

std::vector<Violation> auditManifest(const DatasetManifest& m) {
    std::vector<Violation> out;
    auto expect = [&](const std::string& where, const char* identity, std::int64_t expected, std::int64_t actual) {
        if (expected != actual) out.push_back({where, identity, expected, actual});
    };
    auto row = [&](const std::string& where, const CategoryCounts& c) {
        expect(where, "total = source + generated + rephrased", c.source + c.generated + c.rephrased, c.total);
        if (m.rephrase_factor) {
            expect(where, "rephrased = k * (source + generated)", *m.rephrase_factor * (c.source + c.generated),
                   c.rephrased);
        }
    };
    CategoryCounts sum;
    for (const auto& [c, counts] : m.rows) {
        row(std::string(cnl::toString(c)), counts);
        sum.source += counts.source;
        sum.generated += counts.generated;
        sum.rephrased += counts.rephrased;
        sum.total += counts.total;
    }
    row("grand", m.grand);
    expect("grand", "grand source = sum of source column", sum.source, m.grand.source);
    expect("grand", "grand generated = sum of generated column", sum.generated, m.grand.generated);
    expect("grand", "grand rephrased = sum of rephrased column", sum.rephrased, m.grand.rephrased);
    expect("grand", "grand total = sum of total column", sum.total, m.grand.total);
    return out;
}

}  // namespace cnlasp::dataset
