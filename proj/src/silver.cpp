#include "ese/silver.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "ese/errors.hpp"
#include "ese/text.hpp"

namespace ese {

WordWeights word_weights(const Question& question, const Document& document,
                         const SilverConfig& config) {
    if (question.correct.empty())
        throw ValidationError("word_weights: question \"" + question.id +
                              "\" has no correct option");
    auto key = [&config](const Token& tok) -> const std::string& {
        return config.case_sensitive ? tok.surface : tok.norm;
    };
    std::unordered_set<std::string> answer_words;
    for (int idx : question.correct)
        for (const auto& tok : question.options.at(static_cast<std::size_t>(idx)).tokens)
            answer_words.insert(key(tok));
    std::unordered_set<std::string> question_words;
    for (const auto& tok : question.tokens) question_words.insert(key(tok));

    WordWeights ww;
    for (const auto& sent : document.sentences) {
        for (const auto& tok : sent.tokens) {
            const std::string& word = key(tok);
            if (ww.weights.count(word)) continue;
            double w = 0.0;
            if (config.stopword_filter && !is_content_token(tok.norm)) {
                w = 0.0;
            } else if (answer_words.count(word)) {
                w = config.answer_weight;
            } else if (question_words.count(word)) {
                w = config.question_weight;
            }
            ww.weights[word] = w;
        }
    }
    return ww;
}

namespace {

// Document recast as per-sentence sorted word-id lists over weighted words.
struct CoverageInstance {
    std::vector<double> word_weight;            // by word id
    std::vector<std::vector<int>> sentence_words;  // sorted unique ids
    std::vector<int> sentence_tokens;           // token counts, for the budget
    int n_words = 0;

    double coverage(const std::vector<int>& subset) const {
        // Canonical evaluation: union of word ids, summed in id order, so
        // that every code path produces bit-identical objectives.
        std::vector<char> covered(static_cast<std::size_t>(n_words), 0);
        for (int s : subset)
            for (int w : sentence_words[static_cast<std::size_t>(s)])
                covered[static_cast<std::size_t>(w)] = 1;
        double total = 0.0;
        for (int w = 0; w < n_words; ++w)
            if (covered[static_cast<std::size_t>(w)]) total += word_weight[static_cast<std::size_t>(w)];
        return total;
    }

    int token_total(const std::vector<int>& subset) const {
        int t = 0;
        for (int s : subset) t += sentence_tokens[static_cast<std::size_t>(s)];
        return t;
    }
};

CoverageInstance build_instance(const Document& document, const WordWeights& weights,
                                bool case_sensitive) {
    CoverageInstance inst;
    std::unordered_map<std::string, int> ids;
    for (const auto& sent : document.sentences) {
        std::vector<int> words;
        for (const auto& tok : sent.tokens) {
            const std::string& word = case_sensitive ? tok.surface : tok.norm;
            double w = weights.of(word);
            if (w <= 0.0) continue;
            auto [it, fresh] = ids.try_emplace(word, inst.n_words);
            if (fresh) {
                ++inst.n_words;
                inst.word_weight.push_back(w);
            }
            words.push_back(it->second);
        }
        std::sort(words.begin(), words.end());
        words.erase(std::unique(words.begin(), words.end()), words.end());
        inst.sentence_words.push_back(std::move(words));
        inst.sentence_tokens.push_back(static_cast<int>(sent.tokens.size()));
    }
    return inst;
}

constexpr double kObjEps = 1e-9;

// (objective desc, size asc, lexicographic asc) with tolerant objective ties.
bool better(double obj_a, const std::vector<int>& a, double obj_b, const std::vector<int>& b) {
    if (obj_a > obj_b + kObjEps) return true;
    if (obj_a < obj_b - kObjEps) return false;
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

SilverLabels finish(const Document& document, const Question& question,
                    const CoverageInstance& inst, std::vector<int> selected, bool exact) {
    SilverLabels out;
    out.question_id = question.id;
    std::sort(selected.begin(), selected.end());
    out.objective = inst.coverage(selected);
    out.selected = std::move(selected);
    out.exact = exact;
    out.target.assign(document.sentences.size(), 0.0);
    double share = 1.0 / static_cast<double>(out.selected.size());
    for (int s : out.selected) out.target[static_cast<std::size_t>(s)] = share;
    return out;
}

struct BranchAndBound {
    const CoverageInstance& inst;
    int n, limit;
    std::optional<int> budget;
    std::vector<std::vector<char>> suffix_covers;  // [pos][word]: appears in sentences >= pos
    std::vector<char> covered;
    std::vector<int> current;
    double current_obj = 0.0;
    int current_tokens = 0;
    std::vector<int> best;
    double best_obj = -1.0;
    bool found = false;

    BranchAndBound(const CoverageInstance& instance, int max_sentences, std::optional<int> token_budget)
        : inst(instance), n(static_cast<int>(instance.sentence_words.size())),
          limit(max_sentences), budget(token_budget) {
        suffix_covers.assign(static_cast<std::size_t>(n) + 1,
                             std::vector<char>(static_cast<std::size_t>(inst.n_words), 0));
        for (int pos = n - 1; pos >= 0; --pos) {
            suffix_covers[static_cast<std::size_t>(pos)] = suffix_covers[static_cast<std::size_t>(pos) + 1];
            for (int w : inst.sentence_words[static_cast<std::size_t>(pos)])
                suffix_covers[static_cast<std::size_t>(pos)][static_cast<std::size_t>(w)] = 1;
        }
        covered.assign(static_cast<std::size_t>(inst.n_words), 0);
    }

    double bound(int pos) const {
        double extra = 0.0;
        const auto& reach = suffix_covers[static_cast<std::size_t>(pos)];
        for (int w = 0; w < inst.n_words; ++w)
            if (reach[static_cast<std::size_t>(w)] && !covered[static_cast<std::size_t>(w)])
                extra += inst.word_weight[static_cast<std::size_t>(w)];
        return current_obj + extra;
    }

    void consider_current() {
        if (current.empty()) return;
        double obj = inst.coverage(current);  // canonical value
        if (!found || better(obj, current, best_obj, best)) {
            best = current;
            best_obj = obj;
            found = true;
        }
    }

    void dfs(int pos) {
        if (pos == n) return;
        if (found) {
            double b = bound(pos);
            if (b < best_obj - kObjEps) return;
            if (b <= best_obj + kObjEps &&
                current.size() + 1 > best.size()) return;
        }
        // Include pos.
        if (static_cast<int>(current.size()) < limit) {
            int tokens = inst.sentence_tokens[static_cast<std::size_t>(pos)];
            if (!budget || current_tokens + tokens <= *budget) {
                std::vector<int> newly;
                for (int w : inst.sentence_words[static_cast<std::size_t>(pos)]) {
                    if (!covered[static_cast<std::size_t>(w)]) {
                        covered[static_cast<std::size_t>(w)] = 1;
                        newly.push_back(w);
                        current_obj += inst.word_weight[static_cast<std::size_t>(w)];
                    }
                }
                current.push_back(pos);
                current_tokens += tokens;
                consider_current();
                dfs(pos + 1);
                current_tokens -= tokens;
                current.pop_back();
                for (int w : newly) {
                    covered[static_cast<std::size_t>(w)] = 0;
                    current_obj -= inst.word_weight[static_cast<std::size_t>(w)];
                }
            }
        }
        // Exclude pos.
        dfs(pos + 1);
    }
};

std::vector<int> greedy_cover(const CoverageInstance& inst, int limit,
                              std::optional<int> budget) {
    int n = static_cast<int>(inst.sentence_words.size());
    std::vector<char> covered(static_cast<std::size_t>(inst.n_words), 0);
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    std::vector<int> selected;
    int tokens = 0;
    while (static_cast<int>(selected.size()) < limit) {
        int pick = -1;
        double pick_gain = 0.0;
        for (int s = 0; s < n; ++s) {
            if (taken[static_cast<std::size_t>(s)]) continue;
            if (budget && tokens + inst.sentence_tokens[static_cast<std::size_t>(s)] > *budget)
                continue;
            double gain = 0.0;
            for (int w : inst.sentence_words[static_cast<std::size_t>(s)])
                if (!covered[static_cast<std::size_t>(w)])
                    gain += inst.word_weight[static_cast<std::size_t>(w)];
            if (pick < 0 ? gain > 0.0 : gain > pick_gain + kObjEps) {
                pick = s;
                pick_gain = gain;
            }
        }
        if (pick < 0) break;
        taken[static_cast<std::size_t>(pick)] = 1;
        selected.push_back(pick);
        tokens += inst.sentence_tokens[static_cast<std::size_t>(pick)];
        for (int w : inst.sentence_words[static_cast<std::size_t>(pick)])
            covered[static_cast<std::size_t>(w)] = 1;
    }
    if (selected.empty()) {
        // Zero coverage everywhere: fall back to the first budget-feasible sentence.
        for (int s = 0; s < n; ++s) {
            if (!budget || inst.sentence_tokens[static_cast<std::size_t>(s)] <= *budget) {
                selected.push_back(s);
                break;
            }
        }
        if (selected.empty())
            throw ValidationError("token budget excludes every sentence");
    }
    return selected;
}

double binom_total(int n, int max_k) {
    double total = 0.0;
    double c = 1.0;
    for (int k = 1; k <= std::min(n, max_k); ++k) {
        c = c * (n - k + 1) / k;
        total += c;
        if (total > 1e18) break;
    }
    return total;
}

}  // namespace

SilverLabels solve_max_coverage(const Document& document, const Question& question,
                                const WordWeights& weights, const SilverConfig& config) {
    if (document.sentences.empty())
        throw ValidationError("solve_max_coverage: empty document " + document.id);
    if (config.max_sentences < 1)
        throw ValidationError("solve_max_coverage: L must be >= 1");

    CoverageInstance inst = build_instance(document, weights, config.case_sensitive);
    int n = static_cast<int>(document.sentences.size());

    if (n <= config.exact_threshold) {
        BranchAndBound bb(inst, config.max_sentences, config.token_budget);
        bb.dfs(0);
        if (!bb.found) throw ValidationError("token budget excludes every sentence");
        return finish(document, question, inst, bb.best, true);
    }
    return finish(document, question, inst,
                  greedy_cover(inst, config.max_sentences, config.token_budget), false);
}

SilverLabels brute_force_coverage(const Document& document, const Question& question,
                                  const WordWeights& weights, const SilverConfig& config) {
    if (document.sentences.empty())
        throw ValidationError("brute_force_coverage: empty document " + document.id);
    if (config.max_sentences < 1)
        throw ValidationError("brute_force_coverage: L must be >= 1");
    int n = static_cast<int>(document.sentences.size());
    if (binom_total(n, config.max_sentences) > 1e6)
        throw ValidationError("brute_force_coverage: instance too large");

    CoverageInstance inst = build_instance(document, weights, config.case_sensitive);

    std::vector<int> best;
    double best_obj = 0.0;
    bool found = false;
    std::vector<int> combo;

    // Combinations in lexicographic order, sizes up to L.
    auto consider = [&]() {
        if (config.token_budget && inst.token_total(combo) > *config.token_budget) return;
        double obj = inst.coverage(combo);
        if (!found || better(obj, combo, best_obj, best)) {
            best = combo;
            best_obj = obj;
            found = true;
        }
    };
    for (int k = 1; k <= std::min(n, config.max_sentences); ++k) {
        combo.assign(static_cast<std::size_t>(k), 0);
        for (int i = 0; i < k; ++i) combo[static_cast<std::size_t>(i)] = i;
        for (;;) {
            consider();
            int i = k - 1;
            while (i >= 0 && combo[static_cast<std::size_t>(i)] == n - k + i) --i;
            if (i < 0) break;
            ++combo[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < k; ++j)
                combo[static_cast<std::size_t>(j)] = combo[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    if (!found) throw ValidationError("token budget excludes every sentence");
    return finish(document, question, inst, best, true);
}

}  // namespace ese
