#ifndef ESE_EXTRACTOR_HPP
#define ESE_EXTRACTOR_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ese/corpus.hpp"
#include "ese/resources.hpp"

namespace ese {

constexpr int kFeatureCount = 11;

// Fixed feature order; the model file records these names and refuses to
// load under a different schema.
const std::array<std::string, kFeatureCount>& feature_names();

using FeatureVector = std::array<double, kFeatureCount>;

// Per-sentence surface features for one question: option/question token
// recalls, position, length, embedding cosines, entity/sentiment agreement,
// reader reward, first-or-last-three flag. Absent resources contribute 0.
std::vector<FeatureVector> featurize(const Document& document, const Question& question,
                                     const Resources& resources,
                                     const std::vector<double>& rewards);

struct ScorerModel {
    std::vector<double> weights = std::vector<double>(kFeatureCount, 0.0);
    double bias = 0.0;

    bool operator==(const ScorerModel&) const = default;
};

constexpr int kModelSchemaVersion = 1;

// Softmax over w·phi + b with max subtraction; sums to 1.
std::vector<double> score(const ScorerModel& model,
                          const std::vector<FeatureVector>& features);

// KL(Y || P) = sum Y_i ln(Y_i / P_i), with 0 ln 0 = 0 and P floored at
// 1e-12. Both arguments must be distributions of equal length.
double kl_loss(std::span<const double> target, std::span<const double> predicted);

struct TrainInstance {
    std::vector<FeatureVector> features;  // one per sentence
    std::vector<double> target;           // distribution over sentences
};

struct TrainConfig {
    int epochs = 200;
    double learning_rate = 0.5;
    double l2 = 1e-4;
    int batch_size = 0;  // 0 = full batch (deterministic default)
    std::uint64_t seed = 0;  // mini-batch shuffling only
};

struct TrainReport {
    std::vector<double> epoch_loss;  // mean KL per epoch
    double final_loss = 0.0;
    int epochs = 0;
};

// Gradient descent on mean KL + l2 * |w|^2. The analytic gradient is
// sum_i (P_i - Y_i) phi_i per question. Aborts on a non-finite loss.
TrainReport train(ScorerModel& model, const std::vector<TrainInstance>& instances,
                  const TrainConfig& config);

// Top-k sentence indices by score, ties toward the lower index.
std::vector<int> extract_top_k(const ScorerModel& model,
                               const std::vector<FeatureVector>& features, int k);

// JSON persistence; loading verifies schema version and feature names.
void save_model(const ScorerModel& model, const std::string& path);
ScorerModel load_model(const std::string& path);

}  // namespace ese

#endif
