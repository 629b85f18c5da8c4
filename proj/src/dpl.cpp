#include "ese/dpl.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include "ese/errors.hpp"

namespace ese {

namespace {

double log_sum_exp(double a, double b) {
    double m = std::max(a, b);
    if (m == -std::numeric_limits<double>::infinity()) return m;
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

constexpr double kPredFloor = 1e-6;

}  // namespace

void FactorGraph::add_factor(Factor f) {
    int id = static_cast<int>(factors.size());
    for (int v : f.scope) var_factors.at(static_cast<std::size_t>(v)).push_back(id);
    factors.push_back(std::move(f));
}

FactorGraph build_graph(const Document& document,
                        const std::vector<LfMatrix>& lf_per_question,
                        const std::vector<SilverLabels>& silver_per_question,
                        const std::vector<std::vector<double>>* pred_per_question,
                        const DplWeights& weights) {
    FactorGraph g;
    g.n_sentences = static_cast<int>(document.sentences.size());
    g.n_questions = static_cast<int>(document.questions.size());
    g.var_factors.assign(static_cast<std::size_t>(g.n_vars()), {});

    auto check_size = [&](std::size_t got, const char* what) {
        if (got != static_cast<std::size_t>(g.n_questions))
            throw ValidationError(std::string("build_graph: ") + what +
                                  " does not cover every question of document " + document.id);
    };
    if (weights.use_lf) check_size(lf_per_question.size(), "LF input");
    if (weights.use_silver) check_size(silver_per_question.size(), "silver input");
    if (pred_per_question) check_size(pred_per_question->size(), "prediction input");

    for (int j = 0; j < g.n_questions; ++j) {
        // Unary LF factors.
        if (weights.use_lf) {
            const auto& matrix = lf_per_question[static_cast<std::size_t>(j)];
            for (int i = 0; i < g.n_sentences; ++i) {
                for (const auto& vote : matrix.profiles.at(static_cast<std::size_t>(i))) {
                    if (vote.vote == Vote::ABSTAIN) continue;
                    Factor f;
                    f.kind = FactorKind::UNARY_LF;
                    f.scope = {g.var(i, j)};
                    if (vote.vote == Vote::FAVOR) f.log_table = {0.0, vote.strength};
                    else f.log_table = {vote.strength, 0.0};
                    g.add_factor(std::move(f));
                }
            }
        }
        // Distant-supervision unaries.
        if (weights.use_silver) {
            const auto& silver = silver_per_question[static_cast<std::size_t>(j)];
            std::vector<char> chosen(static_cast<std::size_t>(g.n_sentences), 0);
            for (int s : silver.selected) chosen.at(static_cast<std::size_t>(s)) = 1;
            for (int i = 0; i < g.n_sentences; ++i) {
                Factor f;
                f.kind = FactorKind::UNARY_SILVER;
                f.scope = {g.var(i, j)};
                if (chosen[static_cast<std::size_t>(i)]) f.log_table = {0.0, weights.w_ds};
                else f.log_table = {weights.w_ds, 0.0};
                g.add_factor(std::move(f));
            }
        }
        // Prediction-module unaries (E-step rounds only).
        if (pred_per_question) {
            const auto& p = (*pred_per_question)[static_cast<std::size_t>(j)];
            if (static_cast<int>(p.size()) != g.n_sentences)
                throw ValidationError("build_graph: prediction distribution length mismatch");
            for (int i = 0; i < g.n_sentences; ++i) {
                double pi = std::clamp(p[static_cast<std::size_t>(i)], kPredFloor, 1.0 - kPredFloor);
                Factor f;
                f.kind = FactorKind::UNARY_PRED;
                f.scope = {g.var(i, j)};
                f.log_table = {std::log(1.0 - pi), std::log(pi)};
                g.add_factor(std::move(f));
            }
        }
        // Adjacent sentences prefer the same label.
        if (weights.use_adjacency) {
            for (int i = 0; i + 1 < g.n_sentences; ++i) {
                Factor f;
                f.kind = FactorKind::PAIR_ADJACENT;
                f.scope = {g.var(i, j), g.var(i + 1, j)};
                f.log_table = {weights.w_adj, 0.0, 0.0, weights.w_adj};
                g.add_factor(std::move(f));
            }
        }
        // Far-apart pairs are penalized when both selected.
        if (weights.use_window) {
            for (int i = 0; i < g.n_sentences; ++i) {
                for (int k = i + weights.window_distance; k < g.n_sentences; ++k) {
                    Factor f;
                    f.kind = FactorKind::PAIR_WINDOW;
                    f.scope = {g.var(i, j), g.var(k, j)};
                    f.log_table = {0.0, 0.0, 0.0, -weights.w_win};
                    g.add_factor(std::move(f));
                }
            }
        }
    }
    // A sentence serving several questions is penalized pairwise.
    if (weights.use_cross_question) {
        for (int i = 0; i < g.n_sentences; ++i) {
            for (int j = 0; j < g.n_questions; ++j) {
                for (int j2 = j + 1; j2 < g.n_questions; ++j2) {
                    Factor f;
                    f.kind = FactorKind::PAIR_XQUESTION;
                    f.scope = {g.var(i, j), g.var(i, j2)};
                    f.log_table = {0.0, 0.0, 0.0, -weights.w_xq};
                    g.add_factor(std::move(f));
                }
            }
        }
    }
    return g;
}

namespace {

struct Message {
    double v0 = 0.0, v1 = 0.0;

    void normalize() {
        double z = log_sum_exp(v0, v1);
        v0 -= z;
        v1 -= z;
    }
};

}  // namespace

Marginals run_inference(const FactorGraph& graph, const InferenceConfig& config) {
    if (config.max_iters < 1) throw ValidationError("run_inference: max_iters must be >= 1");
    if (config.damping < 0.0 || config.damping >= 1.0)
        throw ValidationError("run_inference: damping must be in [0, 1)");

    const int n_vars = graph.n_vars();
    const auto& factors = graph.factors;

    // Message storage indexed by (factor, position-in-scope).
    std::vector<std::vector<Message>> to_var(factors.size());
    std::vector<std::vector<Message>> to_factor(factors.size());
    for (std::size_t f = 0; f < factors.size(); ++f) {
        to_var[f].assign(factors[f].scope.size(), {});
        to_factor[f].assign(factors[f].scope.size(), {});
    }

    Marginals result;
    result.p1.assign(static_cast<std::size_t>(n_vars), 0.5);
    result.converged = factors.empty();
    result.iterations = 0;

    std::vector<double> belief0, belief1;
    for (int iter = 1; iter <= config.max_iters; ++iter) {
        double max_change = 0.0;

        // Factor -> variable.
        for (std::size_t f = 0; f < factors.size(); ++f) {
            const auto& factor = factors[f];
            const std::size_t arity = factor.scope.size();
            const std::size_t n_assign = factor.log_table.size();
            for (std::size_t pos = 0; pos < arity; ++pos) {
                double acc0 = -std::numeric_limits<double>::infinity();
                double acc1 = acc0;
                for (std::size_t assign = 0; assign < n_assign; ++assign) {
                    double score = factor.log_table[assign];
                    for (std::size_t other = 0; other < arity; ++other) {
                        if (other == pos) continue;
                        bool val = (assign >> other) & 1u;
                        score += val ? to_factor[f][other].v1 : to_factor[f][other].v0;
                    }
                    if ((assign >> pos) & 1u) acc1 = log_sum_exp(acc1, score);
                    else acc0 = log_sum_exp(acc0, score);
                }
                Message updated{acc0, acc1};
                updated.normalize();
                Message& slot = to_var[f][pos];
                updated.v0 = (1.0 - config.damping) * updated.v0 + config.damping * slot.v0;
                updated.v1 = (1.0 - config.damping) * updated.v1 + config.damping * slot.v1;
                max_change = std::max({max_change, std::fabs(updated.v0 - slot.v0),
                                       std::fabs(updated.v1 - slot.v1)});
                slot = updated;
            }
        }

        // Variable -> factor: belief minus the incoming edge.
        belief0.assign(static_cast<std::size_t>(n_vars), 0.0);
        belief1.assign(static_cast<std::size_t>(n_vars), 0.0);
        for (std::size_t f = 0; f < factors.size(); ++f) {
            for (std::size_t pos = 0; pos < factors[f].scope.size(); ++pos) {
                int v = factors[f].scope[pos];
                belief0[static_cast<std::size_t>(v)] += to_var[f][pos].v0;
                belief1[static_cast<std::size_t>(v)] += to_var[f][pos].v1;
            }
        }
        for (std::size_t f = 0; f < factors.size(); ++f) {
            for (std::size_t pos = 0; pos < factors[f].scope.size(); ++pos) {
                int v = factors[f].scope[pos];
                Message m{belief0[static_cast<std::size_t>(v)] - to_var[f][pos].v0,
                          belief1[static_cast<std::size_t>(v)] - to_var[f][pos].v1};
                m.normalize();
                to_factor[f][pos] = m;
            }
        }

        result.iterations = iter;
        if (max_change < config.tol) {
            result.converged = true;
            break;
        }
        result.converged = false;
    }

    // Final beliefs.
    std::vector<double> b0(static_cast<std::size_t>(n_vars), 0.0);
    std::vector<double> b1(static_cast<std::size_t>(n_vars), 0.0);
    for (std::size_t f = 0; f < factors.size(); ++f) {
        for (std::size_t pos = 0; pos < factors[f].scope.size(); ++pos) {
            int v = factors[f].scope[pos];
            b0[static_cast<std::size_t>(v)] += to_var[f][pos].v0;
            b1[static_cast<std::size_t>(v)] += to_var[f][pos].v1;
        }
    }
    for (int v = 0; v < n_vars; ++v) {
        double d = b1[static_cast<std::size_t>(v)] - b0[static_cast<std::size_t>(v)];
        result.p1[static_cast<std::size_t>(v)] = 1.0 / (1.0 + std::exp(-d));
    }
    return result;
}

Marginals exact_marginals(const FactorGraph& graph) {
    const int n_vars = graph.n_vars();
    if (n_vars > 20) throw ValidationError("exact_marginals: graph too large (> 20 variables)");

    Marginals result;
    result.p1.assign(static_cast<std::size_t>(n_vars), 0.5);
    result.iterations = 0;
    if (graph.factors.empty()) return result;

    const std::uint64_t n_assign = 1ull << n_vars;
    double total = -std::numeric_limits<double>::infinity();
    std::vector<double> on(static_cast<std::size_t>(n_vars),
                           -std::numeric_limits<double>::infinity());
    for (std::uint64_t mask = 0; mask < n_assign; ++mask) {
        double score = 0.0;
        for (const auto& factor : graph.factors) {
            std::size_t idx = 0;
            for (std::size_t pos = 0; pos < factor.scope.size(); ++pos)
                if ((mask >> factor.scope[pos]) & 1ull) idx |= (1u << pos);
            score += factor.log_table[idx];
        }
        total = log_sum_exp(total, score);
        for (int v = 0; v < n_vars; ++v)
            if ((mask >> v) & 1ull)
                on[static_cast<std::size_t>(v)] = log_sum_exp(on[static_cast<std::size_t>(v)], score);
    }
    for (int v = 0; v < n_vars; ++v)
        result.p1[static_cast<std::size_t>(v)] = std::exp(on[static_cast<std::size_t>(v)] - total);
    return result;
}

std::vector<double> posterior_targets(const Marginals& marginals, const FactorGraph& graph,
                                      int question) {
    if (question < 0 || question >= graph.n_questions)
        throw ValidationError("posterior_targets: question index out of range");
    std::vector<double> targets(static_cast<std::size_t>(graph.n_sentences), 0.0);
    double total = 0.0;
    for (int i = 0; i < graph.n_sentences; ++i) {
        double m = marginals.p1.at(static_cast<std::size_t>(graph.var(i, question)));
        targets[static_cast<std::size_t>(i)] = m;
        total += m;
    }
    if (total <= 0.0) {
        double u = 1.0 / static_cast<double>(graph.n_sentences);
        std::fill(targets.begin(), targets.end(), u);
        return targets;
    }
    for (auto& t : targets) t /= total;
    return targets;
}

namespace {

const char* kind_name(FactorKind k) {
    switch (k) {
        case FactorKind::UNARY_LF: return "lf";
        case FactorKind::UNARY_SILVER: return "silver";
        case FactorKind::UNARY_PRED: return "pred";
        case FactorKind::PAIR_ADJACENT: return "adjacent";
        case FactorKind::PAIR_WINDOW: return "window";
        case FactorKind::PAIR_XQUESTION: return "cross-question";
    }
    return "?";
}

}  // namespace

std::string dump_graph(const FactorGraph& graph) {
    std::ostringstream os;
    for (int j = 0; j < graph.n_questions; ++j)
        for (int i = 0; i < graph.n_sentences; ++i)
            os << "var " << graph.var(i, j) << " sentence=" << i << " question=" << j << "\n";
    for (const auto& f : graph.factors) {
        os << "factor " << kind_name(f.kind) << " scope=[";
        for (std::size_t k = 0; k < f.scope.size(); ++k)
            os << (k ? " " : "") << f.scope[k];
        os << "] logpot=[";
        for (std::size_t k = 0; k < f.log_table.size(); ++k)
            os << (k ? " " : "") << f.log_table[k];
        os << "]\n";
    }
    return os.str();
}

}  // namespace ese
