#ifndef ESE_TRAINER_HPP
#define ESE_TRAINER_HPP

#include <cstdint>
#include <vector>

#include "ese/corpus.hpp"
#include "ese/dpl.hpp"
#include "ese/extractor.hpp"
#include "ese/labeling.hpp"
#include "ese/reader.hpp"
#include "ese/resources.hpp"
#include "ese/silver.hpp"

namespace ese {

struct EmConfig {
    int em_rounds = 3;
    InferenceConfig inference;   // defaults: 5 iterations, 0.5 damping
    TrainConfig extractor;       // defaults: 200 epochs, lr 0.5, l2 1e-4
    DplWeights factors;
    LfConfig lf;
    SilverConfig silver;
    int reward_window = 3;
    int reward_max_subset = 3;
    bool learn_factor_weights = false;
    double factor_learning_rate = 0.1;
    bool multi_answer = false;
    int jobs = 1;
    std::uint64_t seed = 0;
};

// Silver labels for every question, [document][question].
using SilverSet = std::vector<std::vector<SilverLabels>>;

SilverSet compute_silver(const Corpus& corpus, const SilverConfig& config, int jobs = 1);

// Shared per-question precomputation: rewards, features, LF profiles.
struct DocumentContext {
    std::vector<std::vector<double>> rewards;       // per question
    std::vector<std::vector<FeatureVector>> features;
    std::vector<LfMatrix> lfs;
};

std::vector<DocumentContext> precompute_contexts(const Corpus& corpus,
                                                 const Resources& resources,
                                                 const Reader& reader, const EmConfig& config,
                                                 bool with_lfs);

struct EmHistory {
    std::vector<double> mean_kl;          // extractor loss per round
    std::vector<double> marginal_change;  // mean |delta marginal| per round
};

struct EmResult {
    ScorerModel model;
    EmHistory history;
    DplWeights final_factors;  // differs from config when weight learning is on
};

// Variational-EM coupling of the factor-graph supervision module and the
// softmax extractor. Round 0 infers marginals without prediction factors
// and fits a fresh extractor to the posterior targets; later rounds add
// the current extractor's distributions as prediction unaries, re-infer,
// and re-fit from scratch. Pass silver_override to substitute the
// distant-supervision labels (the corpus-computed ILP labels otherwise).
EmResult run_em(const Corpus& corpus, const Resources& resources, const Reader& reader,
                const EmConfig& config, const SilverSet* silver_override = nullptr);

// ESE_DS arm: fit directly to the silver target distributions.
ScorerModel train_on_silver(const Corpus& corpus, const Resources& resources,
                            const Reader& reader, const EmConfig& config,
                            const SilverSet* silver_override = nullptr,
                            TrainReport* report = nullptr);

// ESE_gt arm: fit to uniform distributions over gold evidence. Every
// training question must carry gold_evidence.
ScorerModel train_supervised(const Corpus& corpus, const Resources& resources,
                             const Reader& reader, const EmConfig& config,
                             TrainReport* report = nullptr);

}  // namespace ese

#endif
