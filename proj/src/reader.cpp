#include "ese/reader.hpp"

#include <algorithm>
#include <iostream>
#include <unordered_set>

#include <json.hpp>

#include "ese/errors.hpp"
#include "ese/subprocess.hpp"
#include "ese/text.hpp"

namespace ese {

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

}  // namespace

std::vector<int> predict_from_scores(const std::vector<double>& scores, bool multi_answer) {
    std::vector<int> predicted;
    if (scores.empty()) return predicted;
    double best = *std::max_element(scores.begin(), scores.end());
    if (multi_answer) {
        for (std::size_t o = 0; o < scores.size(); ++o)
            if (scores[o] >= 0.5 * best) predicted.push_back(static_cast<int>(o));
    } else {
        for (std::size_t o = 0; o < scores.size(); ++o) {
            if (scores[o] == best) {
                predicted.push_back(static_cast<int>(o));
                break;
            }
        }
    }
    return predicted;
}

ReaderScore LexicalReader::read(const Document& doc, std::span<const int> subset,
                                const Question& question, bool multi_answer) const {
    if (subset.empty()) throw ValidationError("reader: sentence subset is empty");

    auto q_norms = content_norms(question.tokens);
    std::vector<std::unordered_set<std::string>> option_norms;
    option_norms.reserve(question.options.size());
    for (const auto& opt : question.options) option_norms.push_back(content_norms(opt.tokens));

    ReaderScore result;
    result.option_scores.assign(question.options.size(), 0.0);
    for (int idx : subset) {
        const auto& sent = doc.sentences.at(static_cast<std::size_t>(idx));
        auto sent_norms = content_norms(sent.tokens);
        double q_part = 0.1 * recall(q_norms, sent_norms);
        for (std::size_t o = 0; o < option_norms.size(); ++o) {
            double s = recall(option_norms[o], sent_norms) + q_part;
            result.option_scores[o] = std::max(result.option_scores[o], s);
        }
    }
    result.predicted = predict_from_scores(result.option_scores, multi_answer);
    return result;
}

struct ProcessReader::Impl {
    mutable LineProcess proc;
    mutable bool warned = false;
    Impl(const std::string& cmd, double timeout) : proc(cmd, timeout) {}
};

ProcessReader::ProcessReader(const std::string& command, double timeout_seconds)
    : impl_(std::make_unique<Impl>(command, timeout_seconds)) {}

ProcessReader::~ProcessReader() = default;

ReaderScore ProcessReader::read(const Document& doc, std::span<const int> subset,
                                const Question& question, bool multi_answer) const {
    if (subset.empty()) throw ValidationError("reader: sentence subset is empty");
    ReaderScore result;
    result.option_scores.assign(question.options.size(), 0.0);

    nlohmann::json req;
    auto sents = nlohmann::json::array();
    for (int idx : subset) sents.push_back(doc.sentences.at(static_cast<std::size_t>(idx)).text);
    req["sentences"] = sents;
    req["question"] = question.text;
    auto opts = nlohmann::json::array();
    for (const auto& o : question.options) opts.push_back(o.text);
    req["options"] = opts;

    auto warn_once = [this](const char* what) {
        if (!impl_->warned) {
            std::cerr << "warning: external reader " << what << "; scoring all options 0\n";
            impl_->warned = true;
        }
    };

    auto resp = impl_->proc.exchange(req.dump());
    if (!resp) {
        warn_once("failed");
    } else {
        try {
            auto j = nlohmann::json::parse(*resp);
            auto scores = j.at("scores").get<std::vector<double>>();
            if (scores.size() != question.options.size())
                throw std::runtime_error("score count mismatch");
            result.option_scores = std::move(scores);
        } catch (const std::exception&) {
            warn_once("sent a malformed response");
        }
    }
    result.predicted = predict_from_scores(result.option_scores, multi_answer);
    return result;
}

std::vector<double> compute_rewards(const Document& doc, const Question& question,
                                    const Reader& reader, int window, int max_subset,
                                    bool multi_answer) {
    if (window < 1) throw ValidationError("compute_rewards: window must be >= 1");
    if (max_subset < 1) throw ValidationError("compute_rewards: max_subset must be >= 1");

    int n = static_cast<int>(doc.sentences.size());
    std::vector<double> rewards(static_cast<std::size_t>(n), 0.0);

    std::vector<int> subset;
    for (int anchor = 0; anchor < n; ++anchor) {
        // Candidates above the anchor within the window span.
        int hi = std::min(n - 1, anchor + window - 1);
        int extra = hi - anchor;
        if (extra > 24)
            throw ValidationError("compute_rewards: window of " + std::to_string(window) +
                                  " enumerates too many subsets");
        for (unsigned mask = 0; mask < (1u << extra); ++mask) {
            int bits = __builtin_popcount(mask);
            if (bits + 1 > max_subset) continue;
            subset.clear();
            subset.push_back(anchor);
            for (int b = 0; b < extra; ++b)
                if (mask & (1u << b)) subset.push_back(anchor + 1 + b);
            auto score = reader.read(doc, subset, question, multi_answer);
            if (score.predicted == question.correct) {
                double credit = 1.0 / static_cast<double>(subset.size());
                for (int idx : subset) rewards[static_cast<std::size_t>(idx)] += credit;
            }
        }
    }
    return rewards;
}

}  // namespace ese
