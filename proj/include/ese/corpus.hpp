#ifndef ESE_CORPUS_HPP
#define ESE_CORPUS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ese {

struct Token {
    std::string surface;
    std::string norm;  // lowercase of surface

    bool operator==(const Token&) const = default;
};

Token make_token(std::string_view surface);

struct Sentence {
    int index = 0;  // 0-based position in the document
    std::vector<Token> tokens;
    std::string text;

    bool operator==(const Sentence&) const = default;
};

struct Option {
    std::string text;
    std::vector<Token> tokens;

    bool operator==(const Option&) const = default;
};

struct Question {
    std::string id;
    std::string text;
    std::vector<Token> tokens;
    std::vector<Option> options;
    std::vector<int> correct;  // sorted, non-empty, subset of option indices
    std::optional<std::vector<int>> gold_evidence;  // sorted sentence indices

    bool operator==(const Question&) const = default;
};

struct Document {
    std::string id;
    std::vector<Sentence> sentences;  // indices 0..N-1 contiguous
    std::vector<Question> questions;

    bool operator==(const Document&) const = default;
};

struct Corpus {
    std::vector<Document> documents;
    std::string split;  // train/dev/test tag

    bool operator==(const Corpus&) const = default;

    // True when any question carries more than one correct option.
    bool multi_answer() const;
};

// Whitespace split with leading/trailing punctuation peeled into separate
// tokens. Internal punctuation (apostrophes, hyphens) stays attached.
// Deterministic; empty input gives an empty list.
std::vector<Token> tokenize(std::string_view text);

// Sentence splitter for raw passages. Splits after . ! ? followed by
// whitespace and a capital letter or quote, with a small abbreviation
// guard (Mr., Dr., e.g., i.e., U.S., ...). An approximation: guarded
// abbreviations never end a sentence here even when they genuinely do.
std::vector<std::string> split_sentences(std::string_view text);

// Dataset JSONL, one document per line:
// {"id": str, "sentences": [str] | "passage": str,
//  "questions": [{"id", "text", "options", "correct", "gold_evidence"?}]}
// Unknown keys and violated invariants raise ValidationError with the line.
Corpus load_dataset(const std::string& path, const std::string& format = "jsonl",
                    const std::string& split = "");

void save_dataset(const Corpus& corpus, const std::string& path);

struct SynthConfig {
    int n_docs = 10;
    int n_sents = 10;
    int n_questions = 2;
    int n_options = 4;
    int evidence_per_question = 2;
    int vocab_size = 300;
    double distractor_noise = 0.3;
    std::string split = "train";
};

// Planted-evidence corpus generator. Each question gets a keyword and a
// correct option of three vocabulary tokens; the planted evidence sentences
// jointly contain all three plus the keyword, adjacent with probability 0.7.
// Non-evidence sentences pick up wrong-option tokens with probability
// distractor_noise. Deterministic given (config, seed).
Corpus generate_synthetic(const SynthConfig& config, std::uint64_t seed);

}  // namespace ese

#endif
