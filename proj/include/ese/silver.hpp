#ifndef ESE_SILVER_HPP
#define ESE_SILVER_HPP

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ese/corpus.hpp"

namespace ese {

struct SilverConfig {
    int max_sentences = 3;  // L
    double answer_weight = 1.0;
    double question_weight = 0.1;
    bool stopword_filter = true;
    bool case_sensitive = false;  // match surface forms instead of norms
    int exact_threshold = 25;  // exact search up to this many sentences
    std::optional<int> token_budget;  // optional cap on total selected tokens
};

// Per-word coverage weight: answer_weight for words of any correct option,
// question_weight for words only in the question, 0 otherwise. Stopwords
// and punctuation weigh 0 when filtering is on.
struct WordWeights {
    std::unordered_map<std::string, double> weights;

    double of(const std::string& norm) const {
        auto it = weights.find(norm);
        return it == weights.end() ? 0.0 : it->second;
    }
};

WordWeights word_weights(const Question& question, const Document& document,
                         const SilverConfig& config);

struct SilverLabels {
    std::string question_id;
    std::vector<int> selected;  // sorted sentence indices, non-empty, <= L
    double objective = 0.0;
    std::vector<double> target;  // Y over sentences; sums to 1, uniform on selected
    bool exact = true;
};

// Maximum-coverage selection of at most L sentences: maximize the summed
// weight of covered word types. Exact branch-and-bound up to
// exact_threshold sentences, greedy marginal gain above it (flagged).
// Ties break toward fewer sentences, then the lexicographically smallest
// index set.
SilverLabels solve_max_coverage(const Document& document, const Question& question,
                                const WordWeights& weights, const SilverConfig& config);

// Exhaustive oracle with identical tie-breaking. Refuses instances with
// more than 10^6 candidate subsets.
SilverLabels brute_force_coverage(const Document& document, const Question& question,
                                  const WordWeights& weights, const SilverConfig& config);

}  // namespace ese

#endif
