#include "ese/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <set>

#include "ese/errors.hpp"
#include "ese/parallel.hpp"
#include "ese/rng.hpp"

namespace ese {

EvidenceEval evidence_f1(
    const std::map<std::string, std::vector<int>>& predicted,
    const std::map<std::string, std::optional<std::vector<int>>>& gold) {
    EvidenceEval out;
    double sum_p = 0.0, sum_r = 0.0, sum_f = 0.0;
    for (const auto& [key, gold_set] : gold) {
        if (!gold_set) {
            ++out.excluded;
            continue;
        }
        std::vector<int> pred;
        auto it = predicted.find(key);
        if (it != predicted.end()) pred = it->second;
        std::set<int> p(pred.begin(), pred.end());
        std::set<int> g(gold_set->begin(), gold_set->end());

        EvidenceEval::PerQuestion pq;
        pq.key = key;
        if (p.empty() && g.empty()) {
            pq.precision = pq.recall = pq.f1 = 1.0;
        } else {
            int inter = 0;
            for (int x : p)
                if (g.count(x)) ++inter;
            pq.precision = p.empty() ? 0.0 : static_cast<double>(inter) / p.size();
            pq.recall = g.empty() ? 0.0 : static_cast<double>(inter) / g.size();
            pq.f1 = (pq.precision + pq.recall) > 0.0
                        ? 2.0 * pq.precision * pq.recall / (pq.precision + pq.recall)
                        : 0.0;
        }
        sum_p += pq.precision;
        sum_r += pq.recall;
        sum_f += pq.f1;
        out.per_question.push_back(std::move(pq));
        ++out.evaluated;
    }
    if (out.evaluated > 0) {
        out.macro_precision = sum_p / out.evaluated;
        out.macro_recall = sum_r / out.evaluated;
        out.macro_f1 = sum_f / out.evaluated;
    }
    return out;
}

OptionEval multirc_metrics(const std::vector<std::vector<int>>& predicted,
                           const std::vector<std::vector<int>>& gold,
                           const std::vector<int>& n_options) {
    if (predicted.size() != gold.size() || predicted.size() != n_options.size())
        throw ValidationError("multirc_metrics: misaligned inputs");

    OptionEval out;
    out.n_questions = static_cast<int>(predicted.size());
    if (out.n_questions == 0) return out;

    long tp = 0, fp = 0, fn = 0;
    double f1_sum = 0.0;
    int exact = 0;
    for (std::size_t q = 0; q < predicted.size(); ++q) {
        int limit = n_options[q];
        auto in_range = [limit](int idx) { return idx >= 0 && idx < limit; };
        for (int idx : predicted[q])
            if (!in_range(idx))
                throw ValidationError("multirc_metrics: predicted option index " +
                                      std::to_string(idx) + " outside the option space");
        for (int idx : gold[q])
            if (!in_range(idx))
                throw ValidationError("multirc_metrics: gold option index " +
                                      std::to_string(idx) + " outside the option space");
        std::set<int> p(predicted[q].begin(), predicted[q].end());
        std::set<int> g(gold[q].begin(), gold[q].end());
        long qtp = 0, qfp = 0, qfn = 0;
        for (int idx : p) (g.count(idx) ? qtp : qfp) += 1;
        for (int idx : g)
            if (!p.count(idx)) ++qfn;
        tp += qtp;
        fp += qfp;
        fn += qfn;
        double denom = static_cast<double>(2 * qtp + qfp + qfn);
        f1_sum += denom > 0.0 ? 2.0 * qtp / denom : (p.empty() && g.empty() ? 1.0 : 0.0);
        if (p == g) ++exact;
    }
    double micro_denom = static_cast<double>(2 * tp + fp + fn);
    out.f1_a = micro_denom > 0.0 ? 2.0 * tp / micro_denom : 1.0;
    out.f1_m = f1_sum / out.n_questions;
    out.em0 = static_cast<double>(exact) / out.n_questions;
    out.accuracy = out.em0;
    return out;
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, int doc, int question) {
    std::uint64_t h = seed;
    h ^= 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(doc) * 0xBF58476D1CE4E5B9ULL;
    h ^= 0x94D049BB133111EBULL + static_cast<std::uint64_t>(question) * 0xD6E8FEB86659FD93ULL;
    return h;
}

}  // namespace

OptionEval downstream_eval(const Corpus& corpus, const ScorerModel* model,
                           const Resources& resources, const Reader& reader,
                           const DownstreamConfig& config) {
    if (config.k < 1) throw ValidationError("downstream_eval: k must be >= 1");
    if ((config.mode == EvalMode::Filter || config.mode == EvalMode::Annotate) && !model)
        throw ValidationError("downstream_eval: this mode requires a trained model");

    struct Slot {
        std::vector<int> predicted;
        std::vector<int> gold;
        int n_options = 0;
    };
    std::vector<std::vector<Slot>> slots(corpus.documents.size());

    parallel_for(static_cast<int>(corpus.documents.size()), config.jobs, [&](int d) {
        const Document& doc = corpus.documents[static_cast<std::size_t>(d)];
        auto& doc_slots = slots[static_cast<std::size_t>(d)];
        doc_slots.resize(doc.questions.size());
        int n = static_cast<int>(doc.sentences.size());

        std::vector<int> all(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;

        for (std::size_t qi = 0; qi < doc.questions.size(); ++qi) {
            const Question& q = doc.questions[qi];
            std::vector<int> subset;
            switch (config.mode) {
                case EvalMode::Full:
                case EvalMode::Annotate:
                    subset = all;
                    break;
                case EvalMode::RandomK: {
                    Rng rng(mix_seed(config.seed, d, static_cast<int>(qi)));
                    subset = rng.sample_distinct(n, std::min(config.k, n));
                    std::sort(subset.begin(), subset.end());
                    break;
                }
                case EvalMode::GoldFilter: {
                    if (!q.gold_evidence || q.gold_evidence->empty())
                        throw ValidationError(
                            "downstream_eval: gold arm requires gold evidence on question \"" +
                            q.id + "\"");
                    subset = *q.gold_evidence;
                    break;
                }
                case EvalMode::Filter: {
                    auto rewards = compute_rewards(doc, q, reader, config.reward_window,
                                                   config.reward_max_subset, config.multi_answer);
                    auto features = featurize(doc, q, resources, rewards);
                    subset = extract_top_k(*model, features, std::min(config.k, n));
                    std::sort(subset.begin(), subset.end());
                    break;
                }
            }
            auto score = reader.read(doc, subset, q, config.multi_answer);
            doc_slots[qi].predicted = score.predicted;
            doc_slots[qi].gold = q.correct;
            doc_slots[qi].n_options = static_cast<int>(q.options.size());
        }
    });

    std::vector<std::vector<int>> predicted, gold;
    std::vector<int> n_options;
    for (const auto& doc_slots : slots) {
        for (const auto& slot : doc_slots) {
            predicted.push_back(slot.predicted);
            gold.push_back(slot.gold);
            n_options.push_back(slot.n_options);
        }
    }
    return multirc_metrics(predicted, gold, n_options);
}

nlohmann::json report_json(const std::vector<EvalArmResult>& arms,
                           const nlohmann::json& config_echo, std::uint64_t seed,
                           const std::string& timestamp) {
    nlohmann::json j;
    auto arms_json = nlohmann::json::array();
    for (const auto& arm : arms) {
        nlohmann::json a;
        a["arm"] = arm.arm;
        a["k"] = arm.k;
        if (arm.options) {
            a["options"] = {
                {"f1_m", arm.options->f1_m},     {"f1_a", arm.options->f1_a},
                {"em0", arm.options->em0},       {"accuracy", arm.options->accuracy},
                {"n_questions", arm.options->n_questions},
            };
        } else {
            a["options"] = nullptr;
        }
        if (arm.evidence) {
            a["evidence"] = {
                {"macro_precision", arm.evidence->macro_precision},
                {"macro_recall", arm.evidence->macro_recall},
                {"macro_f1", arm.evidence->macro_f1},
                {"evaluated", arm.evidence->evaluated},
                {"excluded", arm.evidence->excluded},
            };
        } else {
            a["evidence"] = nullptr;
        }
        arms_json.push_back(std::move(a));
    }
    j["arms"] = arms_json;
    j["config"] = config_echo;
    j["seed"] = seed;
    j["timestamp"] = timestamp;
    return j;
}

void write_report(const std::vector<EvalArmResult>& arms, const nlohmann::json& config_echo,
                  std::uint64_t seed, const std::string& path) {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);

    auto j = report_json(arms, config_echo, seed, buf);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace ese
