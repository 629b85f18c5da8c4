#include "ese/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "ese/text.hpp"

namespace ese {

namespace {

bool has_tag(const std::vector<EntityTag>& tags, EntityTag want) {
    return std::find(tags.begin(), tags.end(), want) != tags.end();
}

bool contains_norm(std::span<const Token> tokens, const char* word) {
    for (const auto& t : tokens)
        if (t.norm == word) return true;
    return false;
}

}  // namespace

char vote_letter(Vote v) {
    switch (v) {
        case Vote::FAVOR: return 'F';
        case Vote::AGAINST: return 'A';
        default: return '-';
    }
}

LfMatrix evaluate_lfs(const Document& document, const Question& question,
                      const Resources& resources, const std::vector<double>& rewards,
                      const LfConfig& config) {
    LfMatrix out;
    const int n = static_cast<int>(document.sentences.size());
    const Gazetteer* gaz = resources.gazetteer ? &*resources.gazetteer : nullptr;

    auto warn = [&out](const std::string& msg) { out.warnings.push_back(msg); };

    // Question-level precomputation.
    bool wants_time = contains_norm(question.tokens, "when");
    bool wants_person = contains_norm(question.tokens, "who");
    auto question_tags = tag_entities(question.tokens, gaz);

    std::vector<int> correct_option_lengths;
    for (int idx : question.correct)
        correct_option_lengths.push_back(
            static_cast<int>(question.options.at(static_cast<std::size_t>(idx)).tokens.size()));

    bool have_rewards = static_cast<int>(rewards.size()) == n;
    if (!have_rewards)
        warn("LF4: reader rewards unavailable; abstaining");
    if (!resources.paraphrase_embeddings)
        warn("LF5: paraphrase embeddings not loaded; abstaining");
    if (!resources.word_embeddings)
        warn("LF6: word embeddings not loaded; abstaining");
    if (!resources.sentiment_lexicon)
        warn("LF8: sentiment lexicon not loaded; abstaining");
    if (!resources.triples)
        warn("LF10: knowledge triples not loaded; abstaining");

    std::optional<std::vector<double>> q_para, q_word;
    if (resources.paraphrase_embeddings)
        q_para = embed_tokens(question.tokens, *resources.paraphrase_embeddings);
    if (resources.word_embeddings)
        q_word = embed_tokens(question.tokens, *resources.word_embeddings);

    Polarity q_polarity = Polarity::NEU;
    if (resources.sentiment_lexicon)
        q_polarity = sentiment(std::span<const Token>(question.tokens), *resources.sentiment_lexicon);

    std::string q_lower = to_lower(question.text);
    bool document_level = false;
    for (const auto& pattern : config.document_level_patterns) {
        if (q_lower.find(pattern) != std::string::npos) {
            document_level = true;
            break;
        }
    }

    for (int i = 0; i < n; ++i) {
        const Sentence& sent = document.sentences[static_cast<std::size_t>(i)];
        LFProfile profile;
        profile.reserve(kNumLabelingFunctions);
        auto rule_vote = [&](int id, Vote v) {
            profile.push_back({id, v, v == Vote::ABSTAIN ? 0.0 : config.strength_for(id)});
        };

        auto sentence_tags = tag_entities(sent.tokens, gaz);

        // 1: question-type entity gate.
        {
            Vote v = Vote::ABSTAIN;
            if (wants_time && !has_tag(sentence_tags, EntityTag::TIME)) v = Vote::AGAINST;
            if (wants_person && !has_tag(sentence_tags, EntityTag::PERSON)) v = Vote::AGAINST;
            rule_vote(1, v);
        }

        // 2: length ratio against the correct option(s), inclusive bounds.
        {
            double len = static_cast<double>(sent.tokens.size());
            bool ok = false;
            for (int opt_len : correct_option_lengths) {
                double ratio = len / static_cast<double>(opt_len);
                if (ratio >= config.min_length_ratio && ratio <= config.max_length_ratio) {
                    ok = true;
                    break;
                }
            }
            rule_vote(2, ok ? Vote::FAVOR : Vote::AGAINST);
        }

        // 3: sentence length band.
        {
            int len = static_cast<int>(sent.tokens.size());
            bool ok = len >= config.min_tokens && len <= config.max_tokens;
            rule_vote(3, ok ? Vote::FAVOR : Vote::AGAINST);
        }

        // 4: reader reward, strength scaled by the reward value (the
        // per-LF overrides do not apply here; reward_cap is its knob).
        {
            double r = have_rewards ? rewards[static_cast<std::size_t>(i)] : 0.0;
            if (have_rewards && r > 0.0)
                profile.push_back({4, Vote::FAVOR, std::min(config.reward_cap, r)});
            else
                profile.push_back({4, Vote::ABSTAIN, 0.0});
        }

        // 5: paraphrase-embedding similarity.
        {
            Vote v = Vote::ABSTAIN;
            if (q_para) {
                auto s_emb = sentence_embedding(sent, *resources.paraphrase_embeddings);
                if (s_emb && cosine(*q_para, *s_emb) >= config.paraphrase_cos_threshold)
                    v = Vote::FAVOR;
            }
            rule_vote(5, v);
        }

        // 6: word-embedding similarity.
        {
            Vote v = Vote::ABSTAIN;
            if (q_word) {
                auto s_emb = sentence_embedding(sent, *resources.word_embeddings);
                if (s_emb && cosine(*q_word, *s_emb) >= config.word_cos_threshold)
                    v = Vote::FAVOR;
            }
            rule_vote(6, v);
        }

        // 7: question and sentence share a non-NONE entity type.
        {
            bool shared = false;
            for (EntityTag t : {EntityTag::PERSON, EntityTag::TIME, EntityTag::NUMBER,
                                EntityTag::LOCATION}) {
                if (has_tag(question_tags, t) && has_tag(sentence_tags, t)) {
                    shared = true;
                    break;
                }
            }
            rule_vote(7, shared ? Vote::FAVOR : Vote::ABSTAIN);
        }

        // 8: sentiment agreement.
        {
            Vote v = Vote::ABSTAIN;
            if (resources.sentiment_lexicon &&
                sentiment(sent, *resources.sentiment_lexicon) == q_polarity)
                v = Vote::FAVOR;
            rule_vote(8, v);
        }

        // 9: NLI between sentence (premise) and question (hypothesis).
        {
            Vote v = Vote::ABSTAIN;
            if (resources.nli_provider) {
                auto verdict = resources.nli_provider->infer(sent.text, question.text);
                if (verdict.label == NliLabel::ENTAIL) v = Vote::FAVOR;
                else if (verdict.label == NliLabel::CONTRADICT) v = Vote::AGAINST;
            }
            rule_vote(9, v);
        }

        // 10: knowledge-triple match ratio.
        {
            Vote v = Vote::ABSTAIN;
            if (resources.triples &&
                triple_match_ratio(question, sent, *resources.triples) >
                    config.triple_ratio_threshold)
                v = Vote::FAVOR;
            rule_vote(10, v);
        }

        // 11: document-level questions prefer the first/last three sentences.
        {
            Vote v = Vote::ABSTAIN;
            if (document_level)
                v = (i < 3 || i >= n - 3) ? Vote::FAVOR : Vote::AGAINST;
            rule_vote(11, v);
        }

        out.profiles.push_back(std::move(profile));
    }
    return out;
}

}  // namespace ese
