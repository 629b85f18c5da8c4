#ifndef ESE_LABELING_HPP
#define ESE_LABELING_HPP

#include <string>
#include <vector>

#include "ese/corpus.hpp"
#include "ese/resources.hpp"

namespace ese {

enum class Vote { FAVOR, AGAINST, ABSTAIN };

struct LFVote {
    int lf_id = 0;        // 1-based, stable across runs
    Vote vote = Vote::ABSTAIN;
    double strength = 0.0;  // log-space factor weight; 0 for ABSTAIN
};

// One vote per registered labeling function, ordered by id.
using LFProfile = std::vector<LFVote>;

constexpr int kNumLabelingFunctions = 11;

struct LfConfig {
    double min_length_ratio = 0.5;
    double max_length_ratio = 3.0;
    int min_tokens = 5;
    int max_tokens = 40;
    double paraphrase_cos_threshold = 0.4;
    double word_cos_threshold = 0.3;
    double triple_ratio_threshold = 0.2;
    double rule_strength = 0.5;    // prior factor weight for rule LFs
    double reward_cap = 2.0;       // reward LF strength = min(cap, reward)
    // Optional per-LF strength overrides (11 entries, 1-based ids in
    // order); an empty vector keeps rule_strength for every rule LF. The
    // reward LF (id 4) keeps its reward-derived strength either way.
    std::vector<double> per_lf_strength;
    std::vector<std::string> document_level_patterns = {
        "main idea", "best title", "mainly tells", "learn from the passage"};

    double strength_for(int lf_id) const {
        if (static_cast<int>(per_lf_strength.size()) >= lf_id && lf_id >= 1)
            return per_lf_strength[static_cast<std::size_t>(lf_id - 1)];
        return rule_strength;
    }
};

struct LfMatrix {
    std::vector<LFProfile> profiles;    // one per sentence
    std::vector<std::string> warnings;  // missing-resource notes, at most one per LF
};

// Runs the full bank for one question over every document sentence:
//  1 question-type entity gate (when -> TIME, who -> PERSON)
//  2 sentence/correct-option length ratio
//  3 sentence length band
//  4 reader reward
//  5 paraphrase-embedding cosine
//  6 word-embedding cosine
//  7 shared entity type
//  8 sentiment agreement
//  9 NLI (entail favors, contradiction goes against)
// 10 knowledge-triple match ratio
// 11 document-level questions prefer the first/last three sentences
// A missing optional resource makes its LF abstain and records a warning.
LfMatrix evaluate_lfs(const Document& document, const Question& question,
                      const Resources& resources, const std::vector<double>& rewards,
                      const LfConfig& config);

char vote_letter(Vote v);

}  // namespace ese

#endif
