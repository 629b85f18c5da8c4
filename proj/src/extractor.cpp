#include "ese/extractor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "ese/errors.hpp"
#include "ese/rng.hpp"
#include "ese/text.hpp"

namespace ese {

const std::array<std::string, kFeatureCount>& feature_names() {
    static const std::array<std::string, kFeatureCount> names = {
        "opt_recall",      "q_recall",   "max_opt_recall", "position",
        "length",          "word_cos",   "para_cos",       "shared_entity",
        "sentiment_match", "reward",     "first_last3",
    };
    return names;
}

namespace {

std::unordered_set<std::string> content_norms(std::span<const Token> tokens) {
    std::unordered_set<std::string> out;
    for (const auto& t : tokens)
        if (is_content_token(t.norm)) out.insert(t.norm);
    return out;
}

double recall(const std::unordered_set<std::string>& want,
              const std::unordered_set<std::string>& have) {
    if (want.empty()) return 0.0;
    int hit = 0;
    for (const auto& w : want)
        if (have.count(w)) ++hit;
    return static_cast<double>(hit) / static_cast<double>(want.size());
}

bool shares_entity(const std::vector<EntityTag>& a, const std::vector<EntityTag>& b) {
    for (EntityTag t : {EntityTag::PERSON, EntityTag::TIME, EntityTag::NUMBER,
                        EntityTag::LOCATION}) {
        bool in_a = std::find(a.begin(), a.end(), t) != a.end();
        if (in_a && std::find(b.begin(), b.end(), t) != b.end()) return true;
    }
    return false;
}

}  // namespace

std::vector<FeatureVector> featurize(const Document& document, const Question& question,
                                     const Resources& resources,
                                     const std::vector<double>& rewards) {
    const int n = static_cast<int>(document.sentences.size());
    const Gazetteer* gaz = resources.gazetteer ? &*resources.gazetteer : nullptr;

    auto q_norms = content_norms(question.tokens);
    std::unordered_set<std::string> union_norms;
    std::vector<std::unordered_set<std::string>> option_norms;
    for (const auto& opt : question.options) {
        auto norms = content_norms(opt.tokens);
        union_norms.insert(norms.begin(), norms.end());
        option_norms.push_back(std::move(norms));
    }

    auto q_tags = tag_entities(question.tokens, gaz);
    std::optional<std::vector<double>> q_word, q_para;
    if (resources.word_embeddings)
        q_word = embed_tokens(question.tokens, *resources.word_embeddings);
    if (resources.paraphrase_embeddings)
        q_para = embed_tokens(question.tokens, *resources.paraphrase_embeddings);
    Polarity q_pol = Polarity::NEU;
    if (resources.sentiment_lexicon)
        q_pol = sentiment(std::span<const Token>(question.tokens), *resources.sentiment_lexicon);

    bool have_rewards = static_cast<int>(rewards.size()) == n;

    std::vector<FeatureVector> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const Sentence& sent = document.sentences[static_cast<std::size_t>(i)];
        auto sent_norms = content_norms(sent.tokens);
        FeatureVector f{};
        f[0] = recall(union_norms, sent_norms);
        f[1] = recall(q_norms, sent_norms);
        double max_opt = 0.0;
        for (const auto& norms : option_norms) max_opt = std::max(max_opt, recall(norms, sent_norms));
        f[2] = max_opt;
        f[3] = static_cast<double>(i) / static_cast<double>(n);
        f[4] = static_cast<double>(sent.tokens.size()) / 40.0;
        if (q_word) {
            auto emb = sentence_embedding(sent, *resources.word_embeddings);
            if (emb) f[5] = cosine(*q_word, *emb);
        }
        if (q_para) {
            auto emb = sentence_embedding(sent, *resources.paraphrase_embeddings);
            if (emb) f[6] = cosine(*q_para, *emb);
        }
        f[7] = shares_entity(q_tags, tag_entities(sent.tokens, gaz)) ? 1.0 : 0.0;
        if (resources.sentiment_lexicon)
            f[8] = sentiment(sent, *resources.sentiment_lexicon) == q_pol ? 1.0 : 0.0;
        f[9] = have_rewards ? rewards[static_cast<std::size_t>(i)] : 0.0;
        f[10] = (i < 3 || i >= n - 3) ? 1.0 : 0.0;
        out.push_back(f);
    }
    return out;
}

std::vector<double> score(const ScorerModel& model,
                          const std::vector<FeatureVector>& features) {
    if (features.empty()) throw ValidationError("score: no sentences");
    std::vector<double> logits;
    logits.reserve(features.size());
    for (const auto& f : features) {
        double z = model.bias;
        for (int d = 0; d < kFeatureCount; ++d)
            z += model.weights[static_cast<std::size_t>(d)] * f[static_cast<std::size_t>(d)];
        logits.push_back(z);
    }
    double mx = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (auto& z : logits) {
        z = std::exp(z - mx);
        total += z;
    }
    for (auto& z : logits) z /= total;
    return logits;
}

double kl_loss(std::span<const double> target, std::span<const double> predicted) {
    if (target.size() != predicted.size())
        throw ValidationError("kl_loss: dimension mismatch (" + std::to_string(target.size()) +
                              " vs " + std::to_string(predicted.size()) + ")");
    double sum_t = std::accumulate(target.begin(), target.end(), 0.0);
    double sum_p = std::accumulate(predicted.begin(), predicted.end(), 0.0);
    if (std::fabs(sum_t - 1.0) > 1e-6 || std::fabs(sum_p - 1.0) > 1e-6)
        throw ValidationError("kl_loss: inputs must sum to 1");
    double loss = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (target[i] <= 0.0) continue;
        double p = std::max(predicted[i], 1e-12);
        loss += target[i] * std::log(target[i] / p);
    }
    return loss;
}

TrainReport train(ScorerModel& model, const std::vector<TrainInstance>& instances,
                  const TrainConfig& config) {
    if (config.learning_rate < 0.0)
        throw ValidationError("train: learning_rate must be >= 0");
    if (config.epochs < 0) throw ValidationError("train: epochs must be >= 0");
    if (static_cast<int>(model.weights.size()) != kFeatureCount)
        throw ValidationError("train: model has wrong weight dimension");

    TrainReport report;
    if (instances.empty()) throw ValidationError("train: no training instances");

    std::vector<std::size_t> order(instances.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(config.seed);
    const std::size_t batch =
        config.batch_size > 0 ? static_cast<std::size_t>(config.batch_size) : instances.size();

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.batch_size > 0) rng.shuffle(order);
        double epoch_kl = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            std::size_t stop = std::min(order.size(), start + batch);
            std::vector<double> grad(kFeatureCount, 0.0);
            for (std::size_t k = start; k < stop; ++k) {
                const auto& inst = instances[order[k]];
                auto p = score(model, inst.features);
                epoch_kl += kl_loss(inst.target, p);
                for (std::size_t i = 0; i < p.size(); ++i) {
                    double delta = p[i] - inst.target[i];
                    for (int d = 0; d < kFeatureCount; ++d)
                        grad[static_cast<std::size_t>(d)] +=
                            delta * inst.features[i][static_cast<std::size_t>(d)];
                }
            }
            double scale = 1.0 / static_cast<double>(stop - start);
            for (int d = 0; d < kFeatureCount; ++d) {
                double g = grad[static_cast<std::size_t>(d)] * scale +
                           2.0 * config.l2 * model.weights[static_cast<std::size_t>(d)];
                model.weights[static_cast<std::size_t>(d)] -= config.learning_rate * g;
            }
        }
        double mean_kl = epoch_kl / static_cast<double>(instances.size());
        if (!std::isfinite(mean_kl))
            throw std::runtime_error("train: loss diverged (non-finite) at epoch " +
                                     std::to_string(epoch));
        report.epoch_loss.push_back(mean_kl);
    }
    report.epochs = config.epochs;
    if (!report.epoch_loss.empty()) report.final_loss = report.epoch_loss.back();
    return report;
}

std::vector<int> extract_top_k(const ScorerModel& model,
                               const std::vector<FeatureVector>& features, int k) {
    if (k < 1) throw ValidationError("extract_top_k: k must be >= 1");
    auto p = score(model, features);
    std::vector<int> order(p.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&p](int a, int b) {
        return p[static_cast<std::size_t>(a)] > p[static_cast<std::size_t>(b)];
    });
    if (static_cast<std::size_t>(k) < order.size()) order.resize(static_cast<std::size_t>(k));
    return order;
}

void save_model(const ScorerModel& model, const std::string& path) {
    nlohmann::json j;
    j["schema_version"] = kModelSchemaVersion;
    j["features"] = feature_names();
    j["weights"] = model.weights;
    j["bias"] = model.bias;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed for " + path);
}

ScorerModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": model parse error: " + e.what());
    }
    try {
        if (j.at("schema_version").get<int>() != kModelSchemaVersion)
            throw ValidationError(path + ": model schema version mismatch");
        auto names = j.at("features").get<std::vector<std::string>>();
        const auto& expected = feature_names();
        if (names.size() != expected.size() ||
            !std::equal(names.begin(), names.end(), expected.begin()))
            throw ValidationError(path + ": model feature schema mismatch");
        ScorerModel model;
        model.weights = j.at("weights").get<std::vector<double>>();
        model.bias = j.at("bias").get<double>();
        if (static_cast<int>(model.weights.size()) != kFeatureCount)
            throw ValidationError(path + ": model weight dimension mismatch");
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": bad model file: " + e.what());
    }
}

}  // namespace ese
