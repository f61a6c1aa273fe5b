#include <cnlasp/metrics.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace cnlasp::metrics {

void MetricConfig::validate() const {
    if (bleu_max_n < 1) throw MetricError("bleu_max_n must be at least 1");
    if (!(meteor_alpha > 0 && meteor_alpha < 1)) throw MetricError("meteor_alpha must lie in (0,1)");
    if (!(meteor_beta > 0)) throw MetricError("meteor_beta must be positive");
    if (!(meteor_gamma >= 0 && meteor_gamma <= 1)) throw MetricError("meteor_gamma must lie in [0,1]");
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    auto word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; };
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        std::string tok;
        if (word(c)) {
            while (i < text.size() && word(text[i]))
                tok += static_cast<char>(std::tolower(static_cast<unsigned char>(text[i++])));
        }
        else {
            tok = std::string(1, c);
            ++i;
        }
        out.push_back(std::move(tok));
    }
    return out;
}

namespace {

using Tokens = std::vector<std::string>;

void requirePairs(const std::vector<EvalPair>& pairs) {
    if (pairs.empty()) throw EmptyCorpus("empty corpus");
    for (const auto& p : pairs)
        if (p.references.empty()) throw MetricError("pair without reference");
}

std::map<std::vector<std::string>, std::size_t> ngrams(const Tokens& t, std::size_t n) {
    std::map<std::vector<std::string>, std::size_t> out;
    for (std::size_t i = 0; i + n <= t.size(); ++i) ++out[Tokens(t.begin() + static_cast<long>(i), t.begin() + static_cast<long>(i + n))];
    return out;
}

}  // namespace

std::vector<double> corpusBleu(const std::vector<EvalPair>& pairs, const MetricConfig& cfg) {
    cfg.validate();
    requirePairs(pairs);
    const auto               N = static_cast<std::size_t>(cfg.bleu_max_n);
    std::vector<std::size_t> matched(N + 1, 0);
    std::vector<std::size_t> possible(N + 1, 0);
    std::size_t              hypLen = 0;
    std::size_t              refLen = 0;
    for (const auto& p : pairs) {
        auto hyp = tokenize(p.hypothesis);
        if (hyp.empty()) throw MetricError("empty hypothesis");
        std::vector<Tokens> refs;
        for (const auto& r : p.references) refs.push_back(tokenize(r));
        hypLen += hyp.size();
        // closest reference length, shorter on ties
        std::size_t best = refs[0].size();
        for (const auto& r : refs) {
            auto d = [&](std::size_t len) { return len > hyp.size() ? len - hyp.size() : hyp.size() - len; };
            if (d(r.size()) < d(best) || (d(r.size()) == d(best) && r.size() < best)) best = r.size();
        }
        refLen += best;
        for (std::size_t n = 1; n <= N; ++n) {
            auto h = ngrams(hyp, n);
            std::map<Tokens, std::size_t> cap;
            for (const auto& r : refs)
                for (const auto& [g, c] : ngrams(r, n)) cap[g] = std::max(cap[g], c);
            for (const auto& [g, c] : h) {
                possible[n] += c;
                auto it = cap.find(g);
                if (it != cap.end()) matched[n] += std::min(c, it->second);
            }
        }
    }
    const double bp =
        hypLen > refLen ? 1.0 : std::exp(1.0 - static_cast<double>(refLen) / static_cast<double>(hypLen));
    std::vector<double> out;
    double              logSum = 0;
    bool                zero = false;
    for (std::size_t n = 1; n <= N; ++n) {
        double m = static_cast<double>(matched[n]);
        double l = static_cast<double>(possible[n]);
        if (cfg.bleu_smoothing && n >= 2) {
            m += 1;
            l += 1;
        }
        if (m == 0 || l == 0) zero = true;
        else logSum += std::log(m / l);
        out.push_back(zero ? 0.0 : bp * std::exp(logSum / static_cast<double>(n)));
    }
    return out;
}

MeteorStats meteor(const Tokens& hyp, const Tokens& ref, const MetricConfig& cfg) {
    cfg.validate();
    MeteorStats s;
    s.hyp_len = hyp.size();
    s.ref_len = ref.size();
    // Left to right; a token that can extend the previous chunk does so,
    // otherwise it takes the earliest unused occurrence.
    std::vector<char> used(ref.size(), 0);
    std::vector<long> align(hyp.size(), -1);
    for (std::size_t i = 0; i < hyp.size(); ++i) {
        long pick = -1;
        if (i > 0 && align[i - 1] >= 0) {
            auto next = static_cast<std::size_t>(align[i - 1] + 1);
            if (next < ref.size() && !used[next] && ref[next] == hyp[i]) pick = static_cast<long>(next);
        }
        for (std::size_t j = 0; pick < 0 && j < ref.size(); ++j)
            if (!used[j] && ref[j] == hyp[i]) pick = static_cast<long>(j);
        if (pick >= 0) {
            used[static_cast<std::size_t>(pick)] = 1;
            align[i] = pick;
            ++s.matches;
            if (i == 0 || align[i - 1] < 0 || align[i - 1] + 1 != pick) ++s.chunks;
        }
    }
    if (s.matches == 0) return s;
    const double m = static_cast<double>(s.matches);
    const double p = m / static_cast<double>(hyp.size());
    const double r = m / static_cast<double>(ref.size());
    const double fmean = p * r / (cfg.meteor_alpha * p + (1 - cfg.meteor_alpha) * r);
    const double penalty = cfg.meteor_gamma * std::pow(static_cast<double>(s.chunks) / m, cfg.meteor_beta);
    s.score = (1 - penalty) * fmean;
    return s;
}

double corpusMeteor(const std::vector<EvalPair>& pairs, const MetricConfig& cfg) {
    requirePairs(pairs);
    // Summed in a fixed order so that permuting the corpus cannot change the
    // rounding.
    std::vector<double> scores;
    for (const auto& p : pairs) {
        auto   hyp = tokenize(p.hypothesis);
        double best = 0;
        for (const auto& r : p.references) best = std::max(best, meteor(hyp, tokenize(r), cfg).score);
        scores.push_back(best);
    }
    std::sort(scores.begin(), scores.end());
    double sum = 0;
    for (auto x : scores) sum += x;
    return sum / static_cast<double>(scores.size());
}

SyntaxReport syntacticAccuracy(const std::vector<std::string>& cnlSentences) {
    if (cnlSentences.empty()) throw EmptyCorpus("no sentences");
    SyntaxReport r;
    r.total = cnlSentences.size();
    for (const auto& s : cnlSentences) {
        r.verdicts.push_back(cnl::checkSyntax(s));
        if (r.verdicts.back().accepted) ++r.accepted;
    }
    r.accuracy = static_cast<double>(r.accepted) / static_cast<double>(r.total);
    return r;
}

Prf tokenPrf(const std::vector<EvalPair>& pairs) {
    requirePairs(pairs);
    std::vector<double> ps;
    std::vector<double> rs;
    std::size_t         exact = 0;
    auto trim = [](const std::string& s) {
        auto b = s.find_first_not_of(" \t\r\n");
        return b == std::string::npos ? std::string() : s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
    };
    for (const auto& pair : pairs) {
        auto        hyp = tokenize(pair.hypothesis);
        const auto& refText = pair.references.front();
        auto        ref = tokenize(refText);
        std::map<std::string, std::size_t> h;
        std::map<std::string, std::size_t> r;
        for (const auto& t : hyp) ++h[t];
        for (const auto& t : ref) ++r[t];
        std::size_t overlap = 0;
        for (const auto& [t, c] : h)
            if (auto it = r.find(t); it != r.end()) overlap += std::min(c, it->second);
        ps.push_back(hyp.empty() ? 0.0 : static_cast<double>(overlap) / static_cast<double>(hyp.size()));
        rs.push_back(ref.empty() ? 0.0 : static_cast<double>(overlap) / static_cast<double>(ref.size()));
        if (std::any_of(pair.references.begin(), pair.references.end(),
                        [&](const std::string& x) { return trim(x) == trim(pair.hypothesis); }))
            ++exact;
    }
    auto mean = [](std::vector<double> xs) {
        std::sort(xs.begin(), xs.end());
        double s = 0;
        for (auto x : xs) s += x;
        return s / static_cast<double>(xs.size());
    };
    Prf out;
    out.precision = mean(ps);
    out.recall = mean(rs);
    if (out.precision > 0 && out.recall > 0)
        out.f1 = 2 * out.precision * out.recall / (out.precision + out.recall);
    out.exact_match_accuracy = static_cast<double>(exact) / static_cast<double>(pairs.size());
    return out;
}

EvalReport evaluate(const std::vector<EvalPair>& pairs, const MetricConfig& cfg, bool cnlSyntax) {
    EvalReport r;
    r.config = cfg;
    r.bleu = corpusBleu(pairs, cfg);
    r.meteor = corpusMeteor(pairs, cfg);
    r.prf = tokenPrf(pairs);
    if (cnlSyntax) {
        std::vector<std::string> hyps;
        for (const auto& p : pairs) hyps.push_back(p.hypothesis);
        r.syntax = syntacticAccuracy(hyps);
    }
    return r;
}

nlohmann::json toJson(const EvalReport& r) {
    nlohmann::json j;
    for (std::size_t k = 0; k < r.bleu.size(); ++k) j["bleu_" + std::to_string(k + 1)] = r.bleu[k];
    j["meteor"] = r.meteor;
    j["precision"] = r.prf.precision;
    j["recall"] = r.prf.recall;
    j["f1"] = r.prf.f1;
    j["exact_match_accuracy"] = r.prf.exact_match_accuracy;
    if (r.syntax) {
        j["syntactic_accuracy"] = r.syntax->accuracy;
        j["counts"] = {{"total", r.syntax->total}, {"syntactically_correct", r.syntax->accepted}};
    }
    j["config"] = {{"tokenization", kTokenization},
                   {"bleu_max_n", r.config.bleu_max_n},
                   {"bleu_smoothing", r.config.bleu_smoothing ? "add-one" : "none"},
                   {"meteor_stage", "exact"},
                   {"meteor_alpha", r.config.meteor_alpha},
                   {"meteor_beta", r.config.meteor_beta},
                   {"meteor_gamma", r.config.meteor_gamma}};
    return j;
}

std::string table(const EvalReport& r) {
    std::ostringstream out;
    char               buf[64];
    auto row = [&](const std::string& name, double v) {
        std::snprintf(buf, sizeof buf, "%-22s %8.4f\n", name.c_str(), v);
        out << buf;
    };
    out << "metric                    value\n";
    for (std::size_t k = 0; k < r.bleu.size(); ++k) row("BLEU-" + std::to_string(k + 1), r.bleu[k]);
    row("METEOR", r.meteor);
    if (r.syntax) row("Syntactic Accuracy", r.syntax->accuracy);
    row("Precision", r.prf.precision);
    row("Recall", r.prf.recall);
    row("F1", r.prf.f1);
    row("Accuracy (exact)", r.prf.exact_match_accuracy);
    return out.str();
}

}  // namespace cnlasp::metrics
