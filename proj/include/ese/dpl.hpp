#ifndef ESE_DPL_HPP
#define ESE_DPL_HPP

#include <string>
#include <vector>

#include "ese/corpus.hpp"
#include "ese/labeling.hpp"
#include "ese/silver.hpp"

namespace ese {

enum class FactorKind {
    UNARY_LF,
    UNARY_SILVER,
    UNARY_PRED,
    PAIR_ADJACENT,
    PAIR_WINDOW,
    PAIR_XQUESTION,
};

// Log-linear factor over binary variables. Table entry for an assignment
// places scope[k]'s value at bit k of the index.
struct Factor {
    FactorKind kind = FactorKind::UNARY_LF;
    std::vector<int> scope;
    std::vector<double> log_table;  // size 2^|scope|
};

// One binary variable per (sentence, question) pair of a document; the
// graph spans the document and all its questions jointly.
struct FactorGraph {
    int n_sentences = 0;
    int n_questions = 0;
    std::vector<Factor> factors;
    std::vector<std::vector<int>> var_factors;  // variable -> incident factor ids

    int n_vars() const { return n_sentences * n_questions; }
    int var(int sentence, int question) const { return question * n_sentences + sentence; }

    void add_factor(Factor f);
};

struct DplWeights {
    double w_ds = 1.0;   // distant-supervision unary
    double w_adj = 0.3;  // adjacent sentences agree
    double w_win = 1.0;  // penalty for co-selected far-apart sentences
    double w_xq = 0.2;   // penalty for a sentence serving two questions
    int window_distance = 8;
    // Ablation switches.
    bool use_lf = true;
    bool use_silver = true;
    bool use_adjacency = true;
    bool use_window = true;
    bool use_cross_question = true;
};

// Assembles the document graph: LF votes and silver selections as unaries,
// prediction-module distributions as unaries when supplied (E-step rounds),
// plus adjacency / window / cross-question pairwise factors.
FactorGraph build_graph(const Document& document,
                        const std::vector<LfMatrix>& lf_per_question,
                        const std::vector<SilverLabels>& silver_per_question,
                        const std::vector<std::vector<double>>* pred_per_question,
                        const DplWeights& weights);

struct InferenceConfig {
    int max_iters = 5;
    double damping = 0.5;  // in [0, 1): new = (1-d)*computed + d*old
    double tol = 1e-4;     // max absolute message change
};

struct Marginals {
    std::vector<double> p1;  // P(Y = 1) per variable
    bool converged = true;
    int iterations = 0;
};

// Loopy sum-product in log space with a flooding schedule. Exact on trees
// when run undamped for enough iterations. Non-convergence returns the
// last iterate with converged = false.
Marginals run_inference(const FactorGraph& graph, const InferenceConfig& config);

// Enumeration oracle; refuses graphs with more than 20 variables.
Marginals exact_marginals(const FactorGraph& graph);

// Per-question renormalization of P(Y=1) into a target distribution over
// sentences; uniform fallback when every marginal is zero.
std::vector<double> posterior_targets(const Marginals& marginals, const FactorGraph& graph,
                                      int question);

// Debug rendering: one variable or factor per line.
std::string dump_graph(const FactorGraph& graph);

}  // namespace ese

#endif
