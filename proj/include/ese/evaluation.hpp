#ifndef ESE_EVALUATION_HPP
#define ESE_EVALUATION_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ese/corpus.hpp"
#include "ese/extractor.hpp"
#include "ese/reader.hpp"
#include "ese/resources.hpp"
#include "ese/trainer.hpp"

namespace ese {

struct EvidenceEval {
    struct PerQuestion {
        std::string key;
        double precision = 0.0, recall = 0.0, f1 = 0.0;
    };
    std::vector<PerQuestion> per_question;
    double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
    int evaluated = 0;
    int excluded = 0;  // questions lacking gold evidence
};

// Set F1 per question against gold evidence, macro-averaged over questions
// that carry gold. Empty-vs-empty counts as F1 1; an empty side against a
// non-empty one scores 0.
EvidenceEval evidence_f1(
    const std::map<std::string, std::vector<int>>& predicted,
    const std::map<std::string, std::optional<std::vector<int>>>& gold);

struct OptionEval {
    double f1_m = 0.0;     // mean of per-question option F1
    double f1_a = 0.0;     // micro F1 over all (question, option) pairs
    double em0 = 0.0;      // exact set match rate
    double accuracy = 0.0; // == em0; the single-answer reading
    int n_questions = 0;
};

// MultiRC-style option metrics over aligned per-question predicted and
// gold option sets. n_options bounds the index space per question.
OptionEval multirc_metrics(const std::vector<std::vector<int>>& predicted,
                           const std::vector<std::vector<int>>& gold,
                           const std::vector<int>& n_options);

enum class EvalMode { Filter, Annotate, Full, RandomK, GoldFilter };

struct DownstreamConfig {
    int k = 3;
    EvalMode mode = EvalMode::Full;
    std::uint64_t seed = 0;
    bool multi_answer = false;
    int jobs = 1;
    int reward_window = 3;
    int reward_max_subset = 3;
};

// Runs the reader over per-question sentence subsets chosen by the mode:
// Filter = model top-k; Annotate = every sentence, evidence marked (the
// built-in reader ignores marks); Full = every sentence; RandomK = seeded
// uniform sample; GoldFilter = the gold evidence set. Returns option
// metrics against the correct sets.
OptionEval downstream_eval(const Corpus& corpus, const ScorerModel* model,
                           const Resources& resources, const Reader& reader,
                           const DownstreamConfig& config);

struct EvalArmResult {
    std::string arm;
    int k = 0;
    std::optional<OptionEval> options;
    std::optional<EvidenceEval> evidence;
};

// JSON report with a config echo, per-arm metrics, the seed, and a
// timestamp. Key order is stable; reruns differ only in the timestamp.
void write_report(const std::vector<EvalArmResult>& arms, const nlohmann::json& config_echo,
                  std::uint64_t seed, const std::string& path);

nlohmann::json report_json(const std::vector<EvalArmResult>& arms,
                           const nlohmann::json& config_echo, std::uint64_t seed,
                           const std::string& timestamp);

}  // namespace ese

#endif
