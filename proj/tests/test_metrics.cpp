#include <cnlasp/metrics.h>

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

using namespace cnlasp;
using namespace cnlasp::metrics;
using Catch::Approx;

namespace {

std::vector<EvalPair> single(const std::string& hyp, const std::string& ref) { return {{hyp, {ref}}}; }

const char* const kGood = "It is prohibited that there is a node with id X, whenever there is not a reached with node X.";
const char* const kBad = "It is prohibited that there node X.";

std::vector<std::string> corpus(std::size_t total, std::size_t bad) {
    std::vector<std::string> out(total, kGood);
    for (std::size_t i = 0; i < bad; ++i) out[i * (total / bad)] = kBad;
    return out;
}

}  // namespace

TEST_CASE("tokenization splits punctuation and lowercases", "[metrics]") {
    CHECK(tokenize("A node, X.") == std::vector<std::string>{"a", "node", ",", "x", "."});
    CHECK(tokenize("  ").empty());
    CHECK(tokenize("can't stop") == std::vector<std::string>{"can't", "stop"});
}

TEST_CASE("BLEU on a self-referenced corpus is one", "[metrics][bleu]") {
    std::vector<EvalPair> pairs{{"A node is identified by an id.", {"A node is identified by an id."}},
                                {"Every node X must be reached.", {"Every node X must be reached."}}};
    auto b = corpusBleu(pairs);
    REQUIRE(b.size() == 4);
    for (auto x : b) CHECK(x == 1.0);
}

TEST_CASE("BLEU hand-computed values", "[metrics][bleu]") {
    // 5/6 unigrams, 3/5 bigrams, 1/4 trigrams, 0/3 four-grams, equal lengths.
    auto b = corpusBleu(single("the cat sat on the mat", "the cat is on the mat"));
    CHECK(b[0] == Approx(5.0 / 6).epsilon(1e-12));
    CHECK(b[1] == Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(b[2] == Approx(0.5).epsilon(1e-12));
    CHECK(b[3] == 0.0);

    MetricConfig smooth;
    smooth.bleu_smoothing = true;
    auto s = corpusBleu(single("the cat sat on the mat", "the cat is on the mat"), smooth);
    CHECK(s[0] == Approx(5.0 / 6).epsilon(1e-12));
    CHECK(s[3] == Approx(std::pow(1.0 / 18, 0.25)).epsilon(1e-12));

    // Short hypothesis: BP = exp(1 - 3/2).
    auto bp = corpusBleu(single("the cat", "the cat sat"));
    CHECK(bp[0] == Approx(std::exp(-0.5)).epsilon(1e-12));

    // Clipping: one "the" of four counts; the hypothesis is longer than the
    // reference so no brevity penalty applies.
    auto clip = corpusBleu(single("the the the the", "the cat"));
    CHECK(clip[0] == Approx(0.25).epsilon(1e-12));

    auto none = corpusBleu(single("alpha beta", "gamma delta"));
    for (auto x : none) CHECK(x == 0.0);
}

TEST_CASE("BLEU uses the closest reference length", "[metrics][bleu]") {
    std::vector<EvalPair> pairs{{"a b c", {"a b c d e f g", "a b c d"}}};
    auto b = corpusBleu(pairs, {1});
    CHECK(b[0] == Approx(std::exp(1.0 - 4.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("METEOR hand-computed values", "[metrics][meteor]") {
    auto same = meteor(tokenize("a b c"), tokenize("a b c"));
    CHECK(same.matches == 3);
    CHECK(same.chunks == 1);
    CHECK(same.score == Approx(1 - 0.5 / 27).margin(1e-12));
    CHECK(corpusMeteor(single("a b c", "a b c")) == Approx(0.98148).margin(1e-5));

    auto rev = meteor(tokenize("b a"), tokenize("a b"));
    CHECK(rev.matches == 2);
    CHECK(rev.chunks == 2);
    CHECK(rev.score == Approx(0.5).margin(1e-12));

    CHECK(meteor(tokenize("x y"), tokenize("a b")).score == 0.0);

    // P = 1/2, R = 1: Fmean = 0.5 / (0.9*0.5 + 0.1) ; one chunk of one match.
    auto half = meteor(tokenize("a z"), tokenize("a"));
    CHECK(half.score == Approx((1 - 0.5) * (0.5 / 0.55)).margin(1e-12));
}

TEST_CASE("METEOR without penalty is the harmonic mean", "[metrics][meteor][property]") {
    MetricConfig cfg;
    cfg.meteor_gamma = 0;
    std::mt19937_64 rng(17);
    for (int i = 0; i < 300; ++i) {
        std::vector<std::string> h;
        std::vector<std::string> r;
        for (auto n = rng() % 6 + 1; n > 0; --n) h.push_back(std::string(1, static_cast<char>('a' + rng() % 4)));
        for (auto n = rng() % 6 + 1; n > 0; --n) r.push_back(std::string(1, static_cast<char>('a' + rng() % 4)));
        auto s = meteor(h, r, cfg);
        if (s.matches == 0) {
            CHECK(s.score == 0.0);
            continue;
        }
        double p = static_cast<double>(s.matches) / static_cast<double>(h.size());
        double rc = static_cast<double>(s.matches) / static_cast<double>(r.size());
        CHECK(s.score == p * rc / (cfg.meteor_alpha * p + (1 - cfg.meteor_alpha) * rc));
    }
}

TEST_CASE("syntactic accuracy", "[metrics][sa]") {
    auto r = syntacticAccuracy(corpus(393, 4));
    CHECK(r.accepted == 389);
    CHECK(r.accuracy == Approx(0.98982).margin(1e-5));
    for (std::size_t i = 0; i < r.verdicts.size(); ++i)
        CHECK(r.verdicts[i].accepted == cnl::checkSyntax(corpus(393, 4)[i]).accepted);

    auto split = syntacticAccuracy(corpus(1362, 93));
    CHECK(split.total - split.accepted == 93);
    CHECK(split.accuracy * 100 == Approx(93.17).margin(0.01));

    CHECK(syntacticAccuracy({kGood}).accuracy == 1.0);
    CHECK_THROWS_AS(syntacticAccuracy({}), EmptyCorpus);
}

TEST_CASE("token precision and recall", "[metrics][prf]") {
    auto p = tokenPrf(single("a b c", "a b d"));
    CHECK(p.precision == Approx(2.0 / 3));
    CHECK(p.recall == Approx(2.0 / 3));
    CHECK(p.f1 == Approx(2.0 / 3));
    CHECK(p.exact_match_accuracy == 0.0);

    auto same = tokenPrf(single("a b", "a b"));
    CHECK(same.precision == 1.0);
    CHECK(same.f1 == 1.0);
    CHECK(same.exact_match_accuracy == 1.0);

    // Near paraphrases: tokens overlap well, strings almost never match.
    std::vector<EvalPair> para{{"every node X must be reached .", {"each node X must be reached ."}},
                               {"no edge may go from X to X .", {"no edge can go from X to X ."}},
                               {"a node is identified by an id .", {"a node is identified by an id ."}}};
    auto q = tokenPrf(para);
    CHECK(q.exact_match_accuracy < q.f1 / 2);
    CHECK(q.f1 > 0.9);
}

TEST_CASE("scores are permutation invariant and bounded", "[metrics][property]") {
    std::mt19937_64                 rng(4);
    const std::vector<std::string> words{"a", "node", "edge", "x", "is", "the", "."};
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<EvalPair> pairs;
        for (int i = 0; i < 6; ++i) {
            std::string h;
            std::string r;
            for (auto n = rng() % 7 + 1; n > 0; --n) h += words[rng() % words.size()] + " ";
            for (auto n = rng() % 7 + 1; n > 0; --n) r += words[rng() % words.size()] + " ";
            pairs.push_back({h, {r}});
        }
        auto a = evaluate(pairs);
        std::shuffle(pairs.begin(), pairs.end(), rng);
        auto b = evaluate(pairs);
        CHECK(a.bleu == b.bleu);
        CHECK(a.meteor == b.meteor);
        CHECK(a.prf.precision == b.prf.precision);
        CHECK(a.prf.f1 == b.prf.f1);
        for (auto x : a.bleu) CHECK((x >= 0 && x <= 1));
        CHECK((a.meteor >= 0 && a.meteor <= 1));
        CHECK((a.prf.f1 >= 0 && a.prf.f1 <= 1));
    }
}

TEST_CASE("BLEU-k can grow with k", "[metrics]") {
    // Clipping limits the repeated unigram but not the two distinct bigrams:
    // p1 = 2/3, p2 = 2/2.
    auto one = corpusBleu(single("a b a", "b a b"), {2});
    CHECK(one[0] == Approx(2.0 / 3));
    CHECK(one[1] == Approx(std::sqrt(2.0 / 3)));

    // Corpus-level counts: the pair without matches lowers p1 more than p2.
    std::vector<EvalPair> pairs{{"z w", {"y v"}}, {"a b c", {"a b c"}}};
    auto b = corpusBleu(pairs, {2});
    CHECK(b[0] == Approx(3.0 / 5));
    CHECK(b[1] > b[0]);
}

TEST_CASE("BLEU-k never exceeds the brevity penalty", "[metrics][property]") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 500; ++trial) {
        std::string h;
        std::string r;
        auto        lh = rng() % 8 + 1;
        auto        lr = rng() % 8 + 1;
        for (auto n = lh; n > 0; --n) h += std::string(1, static_cast<char>('a' + rng() % 3)) + " ";
        for (auto n = lr; n > 0; --n) r += std::string(1, static_cast<char>('a' + rng() % 3)) + " ";
        double bp = lh > lr ? 1.0 : std::exp(1.0 - static_cast<double>(lr) / static_cast<double>(lh));
        for (auto x : corpusBleu(single(h, r))) CHECK((x >= 0 && x <= bp + 1e-12));
    }
}

TEST_CASE("metric errors", "[metrics]") {
    CHECK_THROWS_AS(corpusBleu({}), EmptyCorpus);
    CHECK_THROWS_AS(corpusMeteor({}), EmptyCorpus);
    CHECK_THROWS_AS(tokenPrf({}), EmptyCorpus);
    CHECK_THROWS_AS(corpusBleu(single("", "a")), MetricError);
    MetricConfig bad;
    bad.meteor_alpha = 1.0;
    CHECK_THROWS_AS(corpusMeteor(single("a", "a"), bad), MetricError);
}

TEST_CASE("report serialization", "[metrics]") {
    auto r = evaluate(single(kGood, kGood), {}, true);
    auto j = toJson(r);
    CHECK(j["bleu_4"] == 1.0);
    CHECK(j["syntactic_accuracy"] == 1.0);
    CHECK(j["counts"]["total"] == 1);
    CHECK(j["config"]["meteor_stage"] == "exact");
    CHECK(j["config"]["tokenization"] == std::string(kTokenization));
    CHECK(table(r).find("Syntactic Accuracy") != std::string::npos);
}
