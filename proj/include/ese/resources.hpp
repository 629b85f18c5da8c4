#ifndef ESE_RESOURCES_HPP
#define ESE_RESOURCES_HPP

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ese/corpus.hpp"
#include "ese/text.hpp"

namespace ese {

struct EmbeddingTable {
    int dimension = 0;
    std::unordered_map<std::string, std::vector<double>> vectors;

    // nullptr when the token is unknown (never a zero vector).
    const std::vector<double>* lookup(const std::string& norm) const {
        auto it = vectors.find(norm);
        return it == vectors.end() ? nullptr : &it->second;
    }
};

// Text format, one entry per line: `token v1 v2 ... vd`. The first line
// fixes the dimension; any line disagreeing fails with its line number.
EmbeddingTable load_embeddings(const std::string& path);

// Standard cosine similarity; a zero vector compares as 0.
double cosine(std::span<const double> u, std::span<const double> v);

// Mean vector of in-vocabulary content tokens (stopwords and punctuation
// excluded); nullopt when no token is in vocabulary.
std::optional<std::vector<double>> embed_tokens(std::span<const Token> tokens,
                                                const EmbeddingTable& table);

inline std::optional<std::vector<double>> sentence_embedding(const Sentence& s,
                                                             const EmbeddingTable& t) {
    return embed_tokens(s.tokens, t);
}

struct SentimentLexicon {
    std::unordered_map<std::string, double> scores;  // token -> [-1, 1]
    std::unordered_set<std::string> negators = default_negators();
    std::unordered_set<std::string> intensifiers = default_intensifiers();
};

// TSV `token \t score`, scores within [-1, 1].
SentimentLexicon load_sentiment_lexicon(const std::string& path);

enum class Polarity { POS, NEG, NEU };

// Sum of token polarities with negation flips: a negator within the three
// tokens before a polar token flips its sign. Total > 0.05 is POS,
// < -0.05 is NEG, NEU otherwise.
Polarity sentiment(std::span<const Token> tokens, const SentimentLexicon& lexicon);

inline Polarity sentiment(const Sentence& s, const SentimentLexicon& lex) {
    return sentiment(std::span<const Token>(s.tokens), lex);
}

class TripleStore {
public:
    // Returns false when the triple was already present.
    bool add(const std::string& head, const std::string& relation, const std::string& tail);

    bool linked(const std::string& a, const std::string& b) const;
    const std::unordered_set<std::string>* neighbors(const std::string& token) const;
    std::size_t size() const { return n_triples_; }

private:
    std::unordered_set<std::string> keys_;  // head\trel\ttail, for dedup
    std::unordered_map<std::string, std::unordered_set<std::string>> adj_;
    std::size_t n_triples_ = 0;
};

// TSV `head \t relation \t tail`; entries are token-normalized on load and
// duplicates collapse into one triple.
TripleStore load_triples(const std::string& path);

// Fraction of the sentence's token positions whose token is linked by some
// triple to any token of the question or its options. A token type that
// matches counts once even when it repeats.
double triple_match_ratio(const Question& question, const Sentence& sentence,
                          const TripleStore& store);

enum class EntityTag { PERSON, TIME, NUMBER, LOCATION, NONE };

struct Gazetteer {
    std::unordered_set<std::string> places;  // norm-cased
};

// One location name per line; matching is per-token on the norm field.
Gazetteer load_gazetteer(const std::string& path);

// Rule-based tagger. TIME: years 1000-2999, month/weekday names, clock
// patterns, today/yesterday/tomorrow. NUMBER: numeric tokens. PERSON:
// capitalized non-initial tokens outside the function-word list, or tokens
// preceded by an honorific. LOCATION: gazetteer hits.
std::vector<EntityTag> tag_entities(std::span<const Token> tokens,
                                    const Gazetteer* gazetteer = nullptr);

enum class NliLabel { ENTAIL, CONTRADICT, NEUTRAL };

struct NliVerdict {
    NliLabel label = NliLabel::NEUTRAL;
    double confidence = 0.0;  // in [0, 1]
};

class NliProvider {
public:
    virtual ~NliProvider() = default;
    virtual NliVerdict infer(const std::string& premise, const std::string& hypothesis) = 0;
};

// Token-overlap heuristic: ENTAIL when >= 70% of the hypothesis content
// tokens appear in the premise; CONTRADICT when the overlap holds but
// exactly one side carries a negator; NEUTRAL otherwise. Confidence is the
// overlap fraction.
class HeuristicNli : public NliProvider {
public:
    NliVerdict infer(const std::string& premise, const std::string& hypothesis) override;
};

// External provider over the line protocol: request
// {"premise": str, "hypothesis": str}, response
// {"verdict": "entail|contradict|neutral", "confidence": float}.
// Any failure yields NEUTRAL with confidence 0 and a logged warning.
class ProcessNli : public NliProvider {
public:
    explicit ProcessNli(const std::string& command, double timeout_seconds = 5.0);
    ~ProcessNli() override;
    NliVerdict infer(const std::string& premise, const std::string& hypothesis) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

NliVerdict nli(const Sentence& premise, const std::string& hypothesis, NliProvider& provider);

// Everything the labeling functions and featurizer may consult. All fields
// optional except the NLI provider, which defaults to the heuristic.
struct Resources {
    std::optional<EmbeddingTable> word_embeddings;
    std::optional<EmbeddingTable> paraphrase_embeddings;
    std::optional<SentimentLexicon> sentiment_lexicon;
    std::optional<TripleStore> triples;
    std::optional<Gazetteer> gazetteer;
    std::shared_ptr<NliProvider> nli_provider = std::make_shared<HeuristicNli>();
};

}  // namespace ese

#endif
