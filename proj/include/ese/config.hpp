#ifndef ESE_CONFIG_HPP
#define ESE_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>

#include "ese/resources.hpp"
#include "ese/trainer.hpp"

#include <json.hpp>

namespace ese {

// Every pipeline knob, file-loadable and mirrored by CLI flags
// (precedence: flags > file > defaults). Unknown keys are rejected.
struct PipelineConfig {
    std::uint64_t seed = 0;
    int jobs = 0;  // 0 = all cores
    bool multi_answer = false;

    SilverConfig silver;
    int top_k = 3;

    DplWeights factors;
    LfConfig lf;
    InferenceConfig inference;
    TrainConfig train;
    int em_rounds = 3;
    bool learn_factor_weights = false;
    double factor_learning_rate = 0.1;
    int reward_window = 3;
    int reward_max_subset = 3;

    std::string resource_dir;  // ESE_RESOURCE_DIR overrides
    std::string word_embeddings;
    std::string paraphrase_embeddings;
    std::string sentiment_lexicon;
    std::string triples;
    std::string gazetteer;
    std::string nli_command;
    std::string reader_command;
    double provider_timeout = 5.0;
};

// `key = value` lines; # starts a comment. Unknown keys raise
// ValidationError naming the key.
void apply_config_file(PipelineConfig& config, const std::string& path);
void apply_config_entry(PipelineConfig& config, const std::string& key,
                        const std::string& value);

// Loads whichever resource files the config names, resolving relative
// paths against resource_dir (or $ESE_RESOURCE_DIR when set).
Resources load_resources(const PipelineConfig& config);

EmConfig to_em_config(const PipelineConfig& config);

// Config echo for reports; stable key set.
nlohmann::json config_echo(const PipelineConfig& config);

}  // namespace ese

#endif
