#include "ese/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "ese/errors.hpp"
#include "ese/rng.hpp"
#include "ese/text.hpp"

namespace ese {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }

void emit_chunk(std::string_view chunk, std::vector<Token>& out) {
    std::size_t lo = 0;
    std::size_t hi = chunk.size();
    while (lo < hi && is_punct(chunk[lo])) ++lo;
    while (hi > lo && is_punct(chunk[hi - 1])) --hi;
    for (std::size_t i = 0; i < lo; ++i) out.push_back(make_token(chunk.substr(i, 1)));
    if (hi > lo) out.push_back(make_token(chunk.substr(lo, hi - lo)));
    for (std::size_t i = hi; i < chunk.size(); ++i)
        out.push_back(make_token(chunk.substr(i, 1)));
}

const std::unordered_set<std::string>& abbreviations() {
    static const std::unordered_set<std::string> abbrevs = {
        "mr.", "mrs.", "ms.", "dr.", "prof.", "st.", "jr.", "sr.",
        "e.g.", "i.e.", "u.s.", "u.k.", "vs.", "no.",
    };
    return abbrevs;
}

bool ends_with_abbreviation(std::string_view text, std::size_t dot_pos) {
    std::size_t start = dot_pos;
    while (start > 0) {
        char c = text[start - 1];
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '.') --start;
        else break;
    }
    std::string token = to_lower(text.substr(start, dot_pos - start + 1));
    return abbreviations().count(token) > 0;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace

Token make_token(std::string_view surface) {
    Token t;
    t.surface = std::string(surface);
    t.norm = to_lower(surface);
    return t;
}

bool Corpus::multi_answer() const {
    for (const auto& doc : documents)
        for (const auto& q : doc.questions)
            if (q.correct.size() > 1) return true;
    return false;
}

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        if (i >= text.size()) break;
        std::size_t j = i;
        while (j < text.size() && !is_space(text[j])) ++j;
        emit_chunk(text.substr(i, j - i), out);
        i = j;
    }
    return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c != '.' && c != '!' && c != '?') continue;
        std::size_t end = i;  // last char of the candidate sentence
        if (end + 1 < text.size() && (text[end + 1] == '"' || text[end + 1] == '\''))
            ++end;
        // Require whitespace then a capital or opening quote.
        std::size_t k = end + 1;
        if (k >= text.size() || !is_space(text[k])) continue;
        while (k < text.size() && is_space(text[k])) ++k;
        if (k >= text.size()) continue;
        if (!is_upper(text[k]) && text[k] != '"' && text[k] != '\'') continue;
        if (c == '.' && ends_with_abbreviation(text, i)) continue;
        std::string piece = trim(text.substr(start, end - start + 1));
        if (!piece.empty()) out.push_back(piece);
        start = k;
        i = end;
    }
    std::string tail = trim(text.substr(start));
    if (!tail.empty()) out.push_back(tail);
    return out;
}

namespace {

using nlohmann::json;

[[noreturn]] void fail_line(const std::string& path, int line, const std::string& msg) {
    std::ostringstream os;
    os << path << ":" << line << ": " << msg;
    throw ValidationError(os.str());
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& path, int line, const std::string& what) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key()))
            fail_line(path, line, "unknown key \"" + it.key() + "\" in " + what);
    }
}

std::vector<int> parse_index_set(const json& arr, int limit, const std::string& path,
                                 int line, const std::string& what) {
    if (!arr.is_array()) fail_line(path, line, what + " must be an array of integers");
    std::vector<int> out;
    for (const auto& v : arr) {
        if (!v.is_number_integer())
            fail_line(path, line, what + " must contain only integers");
        int idx = v.get<int>();
        if (idx < 0 || idx >= limit)
            fail_line(path, line, what + " index " + std::to_string(idx) +
                                      " out of range [0, " + std::to_string(limit) + ")");
        out.push_back(idx);
    }
    std::sort(out.begin(), out.end());
    if (std::adjacent_find(out.begin(), out.end()) != out.end())
        fail_line(path, line, what + " contains duplicate indices");
    return out;
}

Document parse_document(const json& rec, const std::string& path, int line) {
    check_keys(rec, {"id", "sentences", "passage", "questions"}, path, line, "document");
    if (!rec.contains("id") || !rec["id"].is_string())
        fail_line(path, line, "document requires a string \"id\"");
    Document doc;
    doc.id = rec["id"].get<std::string>();

    bool has_sents = rec.contains("sentences");
    bool has_passage = rec.contains("passage");
    if (has_sents == has_passage)
        fail_line(path, line, "document \"" + doc.id +
                                  "\" requires exactly one of \"sentences\" or \"passage\"");

    std::vector<std::string> texts;
    if (has_sents) {
        if (!rec["sentences"].is_array())
            fail_line(path, line, "\"sentences\" must be an array of strings");
        for (const auto& s : rec["sentences"]) {
            if (!s.is_string())
                fail_line(path, line, "\"sentences\" must be an array of strings");
            texts.push_back(s.get<std::string>());
        }
    } else {
        if (!rec["passage"].is_string())
            fail_line(path, line, "\"passage\" must be a string");
        texts = split_sentences(rec["passage"].get<std::string>());
    }
    if (texts.empty())
        fail_line(path, line, "document \"" + doc.id + "\" has no sentences (N >= 1 required)");

    for (std::size_t i = 0; i < texts.size(); ++i) {
        Sentence s;
        s.index = static_cast<int>(i);
        s.text = texts[i];
        s.tokens = tokenize(s.text);
        if (s.tokens.empty())
            fail_line(path, line, "document \"" + doc.id + "\" sentence " +
                                      std::to_string(i) + ": token list is empty");
        doc.sentences.push_back(std::move(s));
    }

    int n_sents = static_cast<int>(doc.sentences.size());
    std::unordered_set<std::string> qids;
    if (rec.contains("questions")) {
        if (!rec["questions"].is_array())
            fail_line(path, line, "\"questions\" must be an array");
        for (const auto& qrec : rec["questions"]) {
            check_keys(qrec, {"id", "text", "options", "correct", "gold_evidence"},
                       path, line, "question");
            Question q;
            if (!qrec.contains("id") || !qrec["id"].is_string())
                fail_line(path, line, "question requires a string \"id\"");
            q.id = qrec["id"].get<std::string>();
            if (!qids.insert(q.id).second)
                fail_line(path, line, "duplicate question id \"" + q.id + "\" in document \"" +
                                          doc.id + "\"");
            if (!qrec.contains("text") || !qrec["text"].is_string())
                fail_line(path, line, "question \"" + q.id + "\" requires a string \"text\"");
            q.text = qrec["text"].get<std::string>();
            q.tokens = tokenize(q.text);
            if (!qrec.contains("options") || !qrec["options"].is_array() ||
                qrec["options"].empty())
                fail_line(path, line,
                          "question \"" + q.id + "\" requires a non-empty \"options\" array");
            for (const auto& o : qrec["options"]) {
                if (!o.is_string())
                    fail_line(path, line, "options of question \"" + q.id + "\" must be strings");
                Option opt;
                opt.text = o.get<std::string>();
                opt.tokens = tokenize(opt.text);
                if (opt.tokens.empty())
                    fail_line(path, line, "question \"" + q.id + "\" has an empty option");
                q.options.push_back(std::move(opt));
            }
            if (!qrec.contains("correct"))
                fail_line(path, line, "question \"" + q.id + "\" requires \"correct\"");
            q.correct = parse_index_set(qrec["correct"], static_cast<int>(q.options.size()),
                                        path, line, "\"correct\" of question \"" + q.id + "\"");
            if (q.correct.empty())
                fail_line(path, line, "question \"" + q.id + "\": correct set is empty");
            if (qrec.contains("gold_evidence")) {
                q.gold_evidence =
                    parse_index_set(qrec["gold_evidence"], n_sents, path, line,
                                    "\"gold_evidence\" of question \"" + q.id + "\"");
            }
            doc.questions.push_back(std::move(q));
        }
    }
    return doc;
}

}  // namespace

Corpus load_dataset(const std::string& path, const std::string& format,
                    const std::string& split) {
    if (format != "jsonl")
        throw ValidationError("unsupported dataset format \"" + format + "\"");
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open dataset file " + path);

    Corpus corpus;
    corpus.split = split;
    std::unordered_set<std::string> doc_ids;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            fail_line(path, lineno, std::string("parse error: ") + e.what());
        }
        if (!rec.is_object()) fail_line(path, lineno, "record is not a JSON object");
        Document doc = parse_document(rec, path, lineno);
        if (!doc_ids.insert(doc.id).second)
            fail_line(path, lineno, "duplicate document id \"" + doc.id + "\"");
        corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

void save_dataset(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (const auto& doc : corpus.documents) {
        json rec;
        rec["id"] = doc.id;
        json sents = json::array();
        for (const auto& s : doc.sentences) sents.push_back(s.text);
        rec["sentences"] = sents;
        json questions = json::array();
        for (const auto& q : doc.questions) {
            json qrec;
            qrec["id"] = q.id;
            qrec["text"] = q.text;
            json opts = json::array();
            for (const auto& o : q.options) opts.push_back(o.text);
            qrec["options"] = opts;
            qrec["correct"] = q.correct;
            if (q.gold_evidence) qrec["gold_evidence"] = *q.gold_evidence;
            questions.push_back(std::move(qrec));
        }
        rec["questions"] = questions;
        out << rec.dump() << "\n";
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

namespace {

constexpr int kOptionTokens = 3;

std::string vocab_word(int idx) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "w%03d", idx);
    return buf;
}

// Distinct vocabulary indices not present in `taken`; inserts them.
std::vector<int> draw_fresh(Rng& rng, int vocab_size, int count,
                            std::unordered_set<int>& taken) {
    std::vector<int> out;
    while (static_cast<int>(out.size()) < count) {
        int w = static_cast<int>(rng.below(static_cast<std::uint64_t>(vocab_size)));
        if (taken.insert(w).second) out.push_back(w);
    }
    return out;
}

std::vector<int> pick_evidence_positions(Rng& rng, int n_sents, int m,
                                         std::unordered_set<int>& used) {
    // Positions disjoint from other questions' evidence when space allows.
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::vector<int> pos;
        if (rng.bernoulli(0.7)) {
            int start = rng.range(0, n_sents - m);
            for (int i = 0; i < m; ++i) pos.push_back(start + i);
        } else {
            pos = rng.sample_distinct(n_sents, m);
            std::sort(pos.begin(), pos.end());
        }
        bool clash = false;
        for (int p : pos)
            if (used.count(p)) { clash = true; break; }
        if (!clash || attempt == 63) {
            for (int p : pos) used.insert(p);
            std::sort(pos.begin(), pos.end());
            return pos;
        }
    }
    return {};
}

}  // namespace

Corpus generate_synthetic(const SynthConfig& cfg, std::uint64_t seed) {
    if (cfg.n_docs < 1 || cfg.n_sents < 1 || cfg.n_questions < 1)
        throw ValidationError("synthetic config: counts must be positive");
    if (cfg.n_options < 2)
        throw ValidationError("synthetic config: n_options must be >= 2");
    if (cfg.evidence_per_question < 1 || cfg.evidence_per_question > cfg.n_sents)
        throw ValidationError("synthetic config: evidence_per_question must be in [1, n_sents]");
    if (cfg.distractor_noise < 0.0 || cfg.distractor_noise > 1.0)
        throw ValidationError("synthetic config: distractor_noise must be in [0, 1]");
    int reserved = cfg.n_questions * (kOptionTokens * cfg.n_options + 1);
    if (cfg.vocab_size < reserved + 20)
        throw ValidationError("synthetic config: vocab_size too small (need at least " +
                              std::to_string(reserved + 20) + ")");

    Rng rng(seed);
    Corpus corpus;
    corpus.split = cfg.split;

    for (int d = 0; d < cfg.n_docs; ++d) {
        Document doc;
        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "d%04d", d);
        doc.id = idbuf;

        struct QuestionPlan {
            int keyword = 0;
            std::vector<std::vector<int>> option_words;  // per option
            int correct_idx = 0;
            std::vector<int> evidence;
        };

        std::unordered_set<int> reserved_words;  // all option words + keywords
        std::unordered_set<int> evidence_used;
        std::vector<QuestionPlan> plans;
        for (int qi = 0; qi < cfg.n_questions; ++qi) {
            QuestionPlan plan;
            plan.keyword = draw_fresh(rng, cfg.vocab_size, 1, reserved_words)[0];
            for (int o = 0; o < cfg.n_options; ++o)
                plan.option_words.push_back(
                    draw_fresh(rng, cfg.vocab_size, kOptionTokens, reserved_words));
            plan.correct_idx = static_cast<int>(rng.below(cfg.n_options));
            plan.evidence =
                pick_evidence_positions(rng, cfg.n_sents, cfg.evidence_per_question,
                                        evidence_used);
            plans.push_back(std::move(plan));
        }

        // Per-sentence planted tokens. The anchor (first evidence position)
        // carries the keyword and the majority of the correct-option words;
        // later evidence sentences are identifiable mainly through the
        // reader signal, mirroring non-extractive evidence.
        std::vector<std::vector<int>> planted(static_cast<std::size_t>(cfg.n_sents));
        for (const auto& plan : plans) {
            const auto& correct_words = plan.option_words[static_cast<std::size_t>(plan.correct_idx)];
            int m = static_cast<int>(plan.evidence.size());
            for (int t = 0; t < kOptionTokens; ++t)
                planted[static_cast<std::size_t>(plan.evidence[static_cast<std::size_t>(t % m)])]
                    .push_back(correct_words[static_cast<std::size_t>(t)]);
            planted[static_cast<std::size_t>(plan.evidence[0])].push_back(plan.keyword);
        }

        // Distractor injections on sentences not planted for any question:
        // two or three tokens of one wrong option, so distractors look at
        // least as option-like as the weaker evidence sentence.
        for (int s = 0; s < cfg.n_sents; ++s) {
            if (evidence_used.count(s)) continue;
            if (!rng.bernoulli(cfg.distractor_noise)) continue;
            const auto& plan = plans[static_cast<std::size_t>(rng.below(plans.size()))];
            if (cfg.n_options < 2) continue;
            int wrong = static_cast<int>(rng.below(cfg.n_options - 1));
            if (wrong >= plan.correct_idx) ++wrong;
            int strength = rng.bernoulli(0.75) ? 2 : 3;
            const auto& words = plan.option_words[static_cast<std::size_t>(wrong)];
            for (int t = 0; t < strength; ++t)
                planted[static_cast<std::size_t>(s)].push_back(words[static_cast<std::size_t>(t)]);
        }

        // Pad with filler vocabulary and render text.
        for (int s = 0; s < cfg.n_sents; ++s) {
            std::vector<int> words = planted[static_cast<std::size_t>(s)];
            int target = rng.range(6, 11);
            int fillers = std::max(2, target - static_cast<int>(words.size()));
            for (int f = 0; f < fillers; ++f) {
                int w;
                do {
                    w = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.vocab_size)));
                } while (reserved_words.count(w));
                words.push_back(w);
            }
            rng.shuffle(words);
            std::string text;
            for (std::size_t i = 0; i < words.size(); ++i) {
                if (i) text += ' ';
                text += vocab_word(words[i]);
            }
            text += '.';
            Sentence sent;
            sent.index = s;
            sent.text = text;
            sent.tokens = tokenize(sent.text);
            doc.sentences.push_back(std::move(sent));
        }

        for (int qi = 0; qi < cfg.n_questions; ++qi) {
            const auto& plan = plans[static_cast<std::size_t>(qi)];
            Question q;
            q.id = doc.id + "-q" + std::to_string(qi);
            q.text = "What about " + vocab_word(plan.keyword) + "?";
            q.tokens = tokenize(q.text);
            for (int o = 0; o < cfg.n_options; ++o) {
                Option opt;
                const auto& words = plan.option_words[static_cast<std::size_t>(o)];
                for (std::size_t i = 0; i < words.size(); ++i) {
                    if (i) opt.text += ' ';
                    opt.text += vocab_word(words[i]);
                }
                opt.tokens = tokenize(opt.text);
                q.options.push_back(std::move(opt));
            }
            q.correct = {plan.correct_idx};
            q.gold_evidence = plan.evidence;
            doc.questions.push_back(std::move(q));
        }
        corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

}  // namespace ese
