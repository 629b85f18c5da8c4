#ifndef ESE_READER_HPP
#define ESE_READER_HPP

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ese/corpus.hpp"

namespace ese {

struct ReaderScore {
    std::vector<double> option_scores;
    std::vector<int> predicted;  // sorted option indices
};

// Multiple-choice reader over a visible subset of document sentences.
// Implementations must be deterministic.
class Reader {
public:
    virtual ~Reader() = default;
    virtual ReaderScore read(const Document& doc, std::span<const int> subset,
                             const Question& question, bool multi_answer) const = 0;
};

// Built-in reader: each option scores max over visible sentences of
// (option content-token recall + 0.1 * question content-token recall).
// Single-answer mode predicts the argmax, ties toward the lowest index;
// multi-answer mode predicts every option scoring >= 0.5 * max.
class LexicalReader : public Reader {
public:
    ReaderScore read(const Document& doc, std::span<const int> subset,
                     const Question& question, bool multi_answer) const override;
};

// External reader over the line protocol: request
// {"sentences": [str], "question": str, "options": [str]}, response
// {"scores": [float]}. Failures score every option 0 and log once.
class ProcessReader : public Reader {
public:
    explicit ProcessReader(const std::string& command, double timeout_seconds = 5.0);
    ~ProcessReader() override;
    ReaderScore read(const Document& doc, std::span<const int> subset,
                     const Question& question, bool multi_answer) const override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

std::vector<int> predict_from_scores(const std::vector<double>& scores, bool multi_answer);

// Reward signal: enumerate every sentence subset of size 1..max_subset whose
// index span stays below `window`; whenever the reader run on the subset
// predicts exactly the correct option set, every member earns 1/|subset|.
std::vector<double> compute_rewards(const Document& doc, const Question& question,
                                    const Reader& reader, int window, int max_subset,
                                    bool multi_answer);

}  // namespace ese

#endif
