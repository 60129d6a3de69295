#include <cmath>
#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "synth.hpp"
#include "threadrank/embeddings.hpp"

using namespace threadrank;

namespace {

/// a, b, c with cos(a, b) = 0.5 and c orthogonal to both; idf 1 for all three.
struct Geometry {
    EmbeddingStore store{3};
    IdfMap idf;

    Geometry()
    {
        store.set_word("alpha", {1.0, 0.0, 0.0});
        store.set_word("beta", {0.5, std::sqrt(3.0) / 2.0, 0.0});
        store.set_word("gamma", {0.0, 0.0, 1.0});
        // N = 10 with each word in one document gives log10(10) = 1.
        std::vector<WordSet> docs(10);
        docs[0] = {"alpha"};
        docs[1] = {"beta"};
        docs[2] = {"gamma"};
        idf = IdfMap::from_documents(docs);
    }
};

double norm(Vector const &v)
{
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

TEST(WordVectors, ParsesHeaderAndRows)
{
    auto const store = EmbeddingStore::parse_word_vectors("2 3\ncat 0.1 0.2 0.3\ndog -1 0 1\n");
    EXPECT_EQ(store.dim(), 3U);
    EXPECT_EQ(store.word_count(), 2U);
    auto const dog = store.word("dog");
    ASSERT_TRUE(dog);
    EXPECT_EQ((*dog)[0], -1.0);
    EXPECT_FALSE(store.word("cow"));
}

TEST(WordVectors, RejectsWrongWidthAndMissingHeader)
{
    EXPECT_THROW((void)EmbeddingStore::parse_word_vectors("1 3\ncat 0.1 0.2\n"), DataError);
    EXPECT_THROW((void)EmbeddingStore::parse_word_vectors(""), DataError);
    EXPECT_THROW((void)EmbeddingStore::parse_word_vectors("cat 0.1 0.2 0.3\n"), DataError);
    EXPECT_THROW((void)EmbeddingStore::parse_word_vectors("1 3\ncat 0.1 zero 0.3\n"), DataError);
}

TEST(WordVectors, DuplicateKeepsLast)
{
    auto const store = EmbeddingStore::parse_word_vectors("2 2\ncat 1 0\ncat 0 1\n");
    EXPECT_EQ(store.word_count(), 1U);
    EXPECT_EQ((*store.word("cat"))[1], 1.0);
}

TEST(WordVectors, SaveLoadRoundTripsBitExactly)
{
    std::mt19937_64 rng(31);
    std::normal_distribution<double> gauss;
    EmbeddingStore store(7);
    for (auto const &w : synth::words(0, 50)) {
        Vector v(7);
        for (auto &x : v) x = gauss(rng);
        store.set_word(w, v);
    }
    store.set_sentence(42, Vector(7, 0.125));
    auto const dir = synth::fresh_dir("embeddings-roundtrip");
    store.save_words(dir / "w.vec");
    store.save_sentences(dir / "s.vec");
    auto loaded = EmbeddingStore::load_word_vectors(dir / "w.vec");
    loaded.load_sentence_vectors(dir / "s.vec");
    EXPECT_EQ(loaded.serialize_words(), store.serialize_words());
    for (auto const &w : synth::words(0, 50)) {
        auto const a = store.word(w);
        auto const b = loaded.word(w);
        ASSERT_TRUE(b);
        for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ((*a)[i], (*b)[i]);
    }
    EXPECT_EQ((*loaded.sentence(42))[3], 0.125);
}

TEST(SentenceVectors, DimMustMatch)
{
    EmbeddingStore store(3);
    EXPECT_THROW(store.parse_sentence_vectors("1 2\n5 0.1 0.2\n"), DataError);
    EXPECT_THROW(store.parse_sentence_vectors("1 3\nnotanid 0.1 0.2 0.3\n"), DataError);
    store.parse_sentence_vectors("1 3\n5 0.1 0.2 0.3\n");
    EXPECT_TRUE(store.sentence(5));
}

TEST(FallbackEmbed, DeterministicUnitAndDistinct)
{
    auto const a = fallback_embed("array", 42);
    EXPECT_EQ(a, fallback_embed("array", 42));
    EXPECT_EQ(a.size(), 100U);
    EXPECT_NEAR(norm(a), 1.0, 1e-9);
    EXPECT_NE(a, fallback_embed("arrays", 42));
    EXPECT_NE(a, fallback_embed("array", 43));
    for (auto const &w : synth::words(0, 200)) EXPECT_NEAR(norm(fallback_embed(w, 7, 16)), 1.0, 1e-9);
}

TEST(Cosine, Examples)
{
    Vector const v{0.3, -1.2, 4.0};
    EXPECT_NEAR(cosine(v, v), 1.0, 1e-15);
    EXPECT_EQ(cosine(Vector{1, 0}, Vector{0, 1}), 0.0);
    EXPECT_NEAR(cosine(Vector{1, 0}, Vector{1, 1}), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_EQ(cosine(Vector{0, 0}, Vector{1, 1}), 0.0);
    EXPECT_THROW((void)cosine(Vector{1, 0}, Vector{1, 0, 0}), std::invalid_argument);
}

TEST(IdfMap, Log10AndUnknownDefault)
{
    std::vector<WordSet> docs(100);
    for (int i = 0; i < 10; ++i) docs[static_cast<std::size_t>(i)].insert("common");
    docs[0].insert("rare");
    auto const idf = IdfMap::from_documents(docs);
    EXPECT_DOUBLE_EQ(idf.idf("common"), 1.0);
    EXPECT_DOUBLE_EQ(idf.idf("rare"), 2.0);
    EXPECT_DOUBLE_EQ(idf.idf("neverseen"), 2.0);
    EXPECT_EQ(idf.df("common"), 10U);
    EXPECT_FALSE(idf.df("neverseen"));
    EXPECT_EQ(IdfMap{}.idf("x"), 0.0);
}

TEST(IdfMap, MatchesIndependentRecountAndRoundTrips)
{
    std::mt19937_64 rng(32);
    auto const vocab = synth::words(0, 30);
    std::vector<WordSet> docs;
    for (int d = 0; d < 60; ++d) {
        WordSet doc;
        for (int i = 0; i < 6; ++i) doc.insert(vocab[std::uniform_int_distribution<std::size_t>(0, 29)(rng)]);
        docs.push_back(doc);
    }
    auto const idf = IdfMap::from_documents(docs);
    for (auto const &w : idf.vocabulary()) {
        std::uint32_t count = 0;
        for (auto const &d : docs) count += d.count(w) ? 1 : 0;
        EXPECT_EQ(*idf.df(w), count);
        EXPECT_GE(count, 1U);
    }
    auto const dir = synth::fresh_dir("idf-roundtrip");
    idf.save(dir / "idf.tsv");
    EXPECT_EQ(IdfMap::load(dir / "idf.tsv").serialize(), idf.serialize());
}

TEST(EmbeddingConfig, JsonRoundTrip)
{
    EmbeddingConfig c;
    c.word_model = ModelKind::skipgram_words;
    c.sentence_model = ModelKind::mean_of_words;
    c.seed = 7;
    EXPECT_EQ(EmbeddingConfig::from_json(c.to_json()), c);
    EXPECT_THROW((void)EmbeddingConfig::from_json(nlohmann::json::object()), DataError);
    EXPECT_THROW((void)parse_model_kind("cnn"), DataError);
}

TEST(SentenceSimilarity, IdenticalTitleMissingIdAndOracle)
{
    WordSet const title{"convert", "radians", "degrees"};
    auto const store0 = EmbeddingStore::fallback({"convert", "radians", "degrees", "angle"}, 42);
    auto const idf = IdfMap::from_documents({title, {"angle"}, {"other"}});
    auto store = store0;
    store.set_sentence(1, embed_sentence(title, store, idf));
    store.set_sentence(2, embed_sentence({"angle", "degrees"}, store, idf));

    auto const query = embed_sentence(title, store, idf);
    EXPECT_NEAR(sentence_similarity(query, 1, store), 1.0, 1e-12);
    EXPECT_EQ(sentence_similarity(query, 99, store), 0.0);

    // Independent cosine over the same vectors.
    auto const s2 = store.sentence(2);
    double dot = 0, nq = 0, ns = 0;
    for (std::size_t i = 0; i < query.size(); ++i) {
        dot += query[i] * (*s2)[i];
        nq += query[i] * query[i];
        ns += (*s2)[i] * (*s2)[i];
    }
    EXPECT_NEAR(sentence_similarity(query, 2, store), dot / std::sqrt(nq * ns), 1e-12);
}

TEST(EmbedSentence, WeightedMeanAndEmpty)
{
    Geometry g;
    auto const v = embed_sentence({"alpha", "gamma"}, g.store, g.idf);
    EXPECT_NEAR(v[0], 0.5, 1e-15);
    EXPECT_NEAR(v[2], 0.5, 1e-15);
    auto const none = embed_sentence({"unknownword"}, g.store, g.idf);
    EXPECT_EQ(none, Vector(3, 0.0));
}

TEST(Asym, SubsetGivesOne)
{
    Geometry g;
    EXPECT_EQ(asym({"alpha", "beta"}, {"alpha", "beta", "gamma"}, g.store, g.idf), 1.0);
    EXPECT_EQ(asym_score({"alpha", "beta"}, {"alpha", "beta"}, g.store, g.idf), 1.0);
}

TEST(Asym, NoEmbeddedWordsGivesZero)
{
    Geometry g;
    EXPECT_EQ(asym({"unknownword", "another"}, {"alpha"}, g.store, g.idf), 0.0);
    EXPECT_EQ(asym({}, {"alpha"}, g.store, g.idf), 0.0);
    EXPECT_EQ(asym_score({"unknownword"}, {"alpha"}, g.store, g.idf), 0.0);
}

TEST(Asym, HandComputedExample)
{
    Geometry g;
    EXPECT_NEAR(asym({"alpha", "beta"}, {"alpha"}, g.store, g.idf), 0.75, 1e-12);
    EXPECT_NEAR(asym({"alpha", "beta"}, {"alpha", "gamma"}, g.store, g.idf), 0.75, 1e-12);
    EXPECT_NEAR(asym({"alpha", "gamma"}, {"alpha", "beta"}, g.store, g.idf), 0.5, 1e-12);
    // Harmonic mean of 0.75 and 0.5.
    EXPECT_NEAR(asym_score({"alpha", "beta"}, {"alpha", "gamma"}, g.store, g.idf), 0.6, 1e-12);
}

TEST(Asym, OneDirectionZeroGivesZero)
{
    Geometry g;
    EXPECT_EQ(asym_score({"gamma"}, {"alpha"}, g.store, g.idf), 0.0);
}

TEST(Asym, NegativeCosinesClampedUnlessDisabled)
{
    EmbeddingStore store(2);
    store.set_word("up", {0.0, 1.0});
    store.set_word("down", {0.0, -1.0});
    store.set_word("left", {-1.0, 0.0});
    auto const idf = IdfMap::from_documents({{"up"}, {"down"}, {"left"}, {}});
    EXPECT_EQ(asym({"up"}, {"down"}, store, idf), 0.0);
    EXPECT_NEAR(asym({"up"}, {"down"}, store, idf, SimilarityOptions{false}), -1.0, 1e-12);
    EXPECT_NEAR(asym({"up", "left"}, {"down", "left"}, store, idf, SimilarityOptions{false}), 0.5, 1e-12);
}

TEST(Asym, BoundedAndSymmetricOnRandomBags)
{
    std::mt19937_64 rng(33);
    auto const vocab = synth::words(0, 25);
    auto const store = EmbeddingStore::fallback(WordSet(vocab.begin(), vocab.end()), 42, 16);
    std::vector<WordSet> docs(40);
    for (auto &d : docs) {
        for (int i = 0; i < 5; ++i) d.insert(vocab[std::uniform_int_distribution<std::size_t>(0, 24)(rng)]);
    }
    auto const idf = IdfMap::from_documents(docs);
    for (int round = 0; round < 300; ++round) {
        WordSet q, t;
        for (int i = 0; i < 6; ++i) q.insert(vocab[std::uniform_int_distribution<std::size_t>(0, 24)(rng)]);
        for (int i = 0; i < 9; ++i) t.insert(vocab[std::uniform_int_distribution<std::size_t>(0, 24)(rng)]);
        double const a = asym(q, t, store, idf);
        EXPECT_GE(a, 0.0);
        EXPECT_LE(a, 1.0);
        EXPECT_EQ(asym_score(q, t, store, idf), asym_score(t, q, store, idf));
    }
}
