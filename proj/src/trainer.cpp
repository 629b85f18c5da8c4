#include "ese/trainer.hpp"

#include <cmath>

#include "ese/errors.hpp"
#include "ese/parallel.hpp"

namespace ese {

SilverSet compute_silver(const Corpus& corpus, const SilverConfig& config, int jobs) {
    SilverSet out(corpus.documents.size());
    parallel_for(static_cast<int>(corpus.documents.size()), jobs, [&](int d) {
        const Document& doc = corpus.documents[static_cast<std::size_t>(d)];
        auto& slot = out[static_cast<std::size_t>(d)];
        slot.reserve(doc.questions.size());
        for (const auto& q : doc.questions) {
            auto weights = word_weights(q, doc, config);
            slot.push_back(solve_max_coverage(doc, q, weights, config));
        }
    });
    return out;
}

std::vector<DocumentContext> precompute_contexts(const Corpus& corpus,
                                                 const Resources& resources,
                                                 const Reader& reader, const EmConfig& config,
                                                 bool with_lfs) {
    std::vector<DocumentContext> out(corpus.documents.size());
    parallel_for(static_cast<int>(corpus.documents.size()), config.jobs, [&](int d) {
        const Document& doc = corpus.documents[static_cast<std::size_t>(d)];
        DocumentContext ctx;
        for (const auto& q : doc.questions) {
            auto rewards = compute_rewards(doc, q, reader, config.reward_window,
                                           config.reward_max_subset, config.multi_answer);
            ctx.features.push_back(featurize(doc, q, resources, rewards));
            if (with_lfs) ctx.lfs.push_back(evaluate_lfs(doc, q, resources, rewards, config.lf));
            ctx.rewards.push_back(std::move(rewards));
        }
        out[static_cast<std::size_t>(d)] = std::move(ctx);
    });
    return out;
}

namespace {

ScorerModel fit_extractor(const std::vector<DocumentContext>& contexts,
                          const std::vector<std::vector<std::vector<double>>>& targets,
                          const EmConfig& config, double* mean_kl_out,
                          TrainReport* report_out = nullptr) {
    std::vector<TrainInstance> instances;
    for (std::size_t d = 0; d < contexts.size(); ++d) {
        for (std::size_t qi = 0; qi < contexts[d].features.size(); ++qi) {
            TrainInstance inst;
            inst.features = contexts[d].features[qi];
            inst.target = targets[d][qi];
            instances.push_back(std::move(inst));
        }
    }
    ScorerModel model;  // fresh zero initialization each fit
    auto report = train(model, instances, config.extractor);
    if (mean_kl_out) *mean_kl_out = report.final_loss;
    if (report_out) *report_out = std::move(report);
    return model;
}

// Expected firing counts of the structural factor templates under the BP
// marginals, using mean-field pair approximations. Used by the optional
// factor-weight M-step.
struct FactorStats {
    double adjacent_agree = 0.0;
    double window_both = 0.0;
    double xq_both = 0.0;
    double silver_match = 0.0;
    int n_adjacent = 0, n_window = 0, n_xq = 0, n_silver = 0;
};

FactorStats factor_stats(const FactorGraph& graph, const Marginals& marginals) {
    FactorStats st;
    for (const auto& f : graph.factors) {
        switch (f.kind) {
            case FactorKind::PAIR_ADJACENT: {
                double a = marginals.p1[static_cast<std::size_t>(f.scope[0])];
                double b = marginals.p1[static_cast<std::size_t>(f.scope[1])];
                st.adjacent_agree += a * b + (1 - a) * (1 - b);
                ++st.n_adjacent;
                break;
            }
            case FactorKind::PAIR_WINDOW: {
                st.window_both += marginals.p1[static_cast<std::size_t>(f.scope[0])] *
                                  marginals.p1[static_cast<std::size_t>(f.scope[1])];
                ++st.n_window;
                break;
            }
            case FactorKind::PAIR_XQUESTION: {
                st.xq_both += marginals.p1[static_cast<std::size_t>(f.scope[0])] *
                              marginals.p1[static_cast<std::size_t>(f.scope[1])];
                ++st.n_xq;
                break;
            }
            case FactorKind::UNARY_SILVER: {
                double p = marginals.p1[static_cast<std::size_t>(f.scope[0])];
                st.silver_match += f.log_table[1] > 0.0 ? p : 1.0 - p;
                ++st.n_silver;
                break;
            }
            default: break;
        }
    }
    return st;
}

}  // namespace

EmResult run_em(const Corpus& corpus, const Resources& resources, const Reader& reader,
                const EmConfig& config, const SilverSet* silver_override) {
    if (config.em_rounds < 1) throw ValidationError("run_em: em_rounds must be >= 1");
    bool any_question = false;
    for (const auto& doc : corpus.documents) any_question |= !doc.questions.empty();
    if (!any_question) throw ValidationError("run_em: corpus has no questions");

    SilverSet silver;
    const SilverSet* silver_ptr = silver_override;
    if (!silver_ptr) {
        silver = compute_silver(corpus, config.silver, config.jobs);
        silver_ptr = &silver;
    }

    auto contexts = precompute_contexts(corpus, resources, reader, config, true);

    EmResult result;
    result.final_factors = config.factors;

    const int n_docs = static_cast<int>(corpus.documents.size());
    std::vector<std::vector<double>> prev_marginals(static_cast<std::size_t>(n_docs));
    std::vector<std::vector<std::vector<double>>> targets(
        static_cast<std::size_t>(n_docs));

    for (int round = 0; round < config.em_rounds; ++round) {
        // E-step: infer marginals per document, with prediction factors
        // from the current extractor after round 0.
        std::vector<double> doc_change(static_cast<std::size_t>(n_docs), 0.0);
        std::vector<int> doc_vars(static_cast<std::size_t>(n_docs), 0);
        std::vector<FactorStats> doc_stats(static_cast<std::size_t>(n_docs));
        std::vector<FactorStats> doc_stats_sup(static_cast<std::size_t>(n_docs));

        parallel_for(n_docs, config.jobs, [&](int d) {
            const Document& doc = corpus.documents[static_cast<std::size_t>(d)];
            if (doc.questions.empty()) {
                targets[static_cast<std::size_t>(d)] = {};
                return;
            }
            std::vector<std::vector<double>> preds;
            const std::vector<std::vector<double>>* preds_ptr = nullptr;
            if (round > 0) {
                for (const auto& feats : contexts[static_cast<std::size_t>(d)].features)
                    preds.push_back(score(result.model, feats));
                preds_ptr = &preds;
            }
            auto graph = build_graph(doc, contexts[static_cast<std::size_t>(d)].lfs,
                                     (*silver_ptr)[static_cast<std::size_t>(d)], preds_ptr,
                                     result.final_factors);
            auto marginals = run_inference(graph, config.inference);
            if (config.learn_factor_weights && round > 0) {
                doc_stats[static_cast<std::size_t>(d)] = factor_stats(graph, marginals);
                auto sup_graph = build_graph(doc, contexts[static_cast<std::size_t>(d)].lfs,
                                             (*silver_ptr)[static_cast<std::size_t>(d)],
                                             nullptr, result.final_factors);
                doc_stats_sup[static_cast<std::size_t>(d)] =
                    factor_stats(sup_graph, run_inference(sup_graph, config.inference));
            }

            auto& prev = prev_marginals[static_cast<std::size_t>(d)];
            double change = 0.0;
            for (std::size_t v = 0; v < marginals.p1.size(); ++v) {
                double before = prev.empty() ? 0.5 : prev[v];
                change += std::fabs(marginals.p1[v] - before);
            }
            doc_change[static_cast<std::size_t>(d)] = change;
            doc_vars[static_cast<std::size_t>(d)] = static_cast<int>(marginals.p1.size());
            prev = marginals.p1;

            auto& tgt = targets[static_cast<std::size_t>(d)];
            tgt.clear();
            for (int qi = 0; qi < static_cast<int>(doc.questions.size()); ++qi)
                tgt.push_back(posterior_targets(marginals, graph, qi));
        });

        double total_change = 0.0;
        int total_vars = 0;
        for (int d = 0; d < n_docs; ++d) {
            total_change += doc_change[static_cast<std::size_t>(d)];
            total_vars += doc_vars[static_cast<std::size_t>(d)];
        }
        result.history.marginal_change.push_back(
            total_vars > 0 ? total_change / total_vars : 0.0);

        // Optional M-step over the structural factor weights: one moment-
        // matching gradient step pulling the supervision-only distribution
        // toward the joint posterior (no-op in round 0, where they agree).
        if (config.learn_factor_weights && round > 0) {
            FactorStats q{}, sup{};
            for (int d = 0; d < n_docs; ++d) {
                const auto& a = doc_stats[static_cast<std::size_t>(d)];
                const auto& b = doc_stats_sup[static_cast<std::size_t>(d)];
                q.adjacent_agree += a.adjacent_agree; q.window_both += a.window_both;
                q.xq_both += a.xq_both; q.silver_match += a.silver_match;
                q.n_adjacent += a.n_adjacent; q.n_window += a.n_window;
                q.n_xq += a.n_xq; q.n_silver += a.n_silver;
                sup.adjacent_agree += b.adjacent_agree; sup.window_both += b.window_both;
                sup.xq_both += b.xq_both; sup.silver_match += b.silver_match;
            }
            auto step = [&](double w, double e_q, double e_sup, int count, bool penalty) {
                if (count == 0) return w;
                double grad = (e_q - e_sup) / count;
                if (penalty) grad = -grad;
                return std::max(0.0, w + config.factor_learning_rate * grad);
            };
            auto& fw = result.final_factors;
            fw.w_adj = step(fw.w_adj, q.adjacent_agree, sup.adjacent_agree, q.n_adjacent, false);
            fw.w_win = step(fw.w_win, q.window_both, sup.window_both, q.n_window, true);
            fw.w_xq = step(fw.w_xq, q.xq_both, sup.xq_both, q.n_xq, true);
            fw.w_ds = step(fw.w_ds, q.silver_match, sup.silver_match, q.n_silver, false);
        }

        // M-step: fresh extractor fit against the posterior targets.
        double mean_kl = 0.0;
        result.model = fit_extractor(contexts, targets, config, &mean_kl);
        result.history.mean_kl.push_back(mean_kl);
    }
    return result;
}

ScorerModel train_on_silver(const Corpus& corpus, const Resources& resources,
                            const Reader& reader, const EmConfig& config,
                            const SilverSet* silver_override, TrainReport* report) {
    SilverSet silver;
    const SilverSet* silver_ptr = silver_override;
    if (!silver_ptr) {
        silver = compute_silver(corpus, config.silver, config.jobs);
        silver_ptr = &silver;
    }
    auto contexts = precompute_contexts(corpus, resources, reader, config, false);
    std::vector<std::vector<std::vector<double>>> targets(corpus.documents.size());
    for (std::size_t d = 0; d < corpus.documents.size(); ++d)
        for (const auto& labels : (*silver_ptr)[d]) targets[d].push_back(labels.target);
    return fit_extractor(contexts, targets, config, nullptr, report);
}

ScorerModel train_supervised(const Corpus& corpus, const Resources& resources,
                             const Reader& reader, const EmConfig& config,
                             TrainReport* report) {
    std::vector<std::vector<std::vector<double>>> targets(corpus.documents.size());
    for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
        const Document& doc = corpus.documents[d];
        for (const auto& q : doc.questions) {
            if (!q.gold_evidence || q.gold_evidence->empty())
                throw ValidationError("train_supervised: question \"" + q.id +
                                      "\" of document \"" + doc.id +
                                      "\" has no gold evidence");
            std::vector<double> target(doc.sentences.size(), 0.0);
            double share = 1.0 / static_cast<double>(q.gold_evidence->size());
            for (int idx : *q.gold_evidence) target[static_cast<std::size_t>(idx)] = share;
            targets[d].push_back(std::move(target));
        }
    }
    auto contexts = precompute_contexts(corpus, resources, reader, config, false);
    return fit_extractor(contexts, targets, config, nullptr, report);
}

}  // namespace ese
