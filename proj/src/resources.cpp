#include "ese/resources.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "ese/errors.hpp"
#include "ese/subprocess.hpp"

namespace ese {

namespace {

[[noreturn]] void fail_line(const std::string& path, int line, const std::string& msg) {
    throw ValidationError(path + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

bool parse_double(const std::string& s, double& out) {
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end && *end == '\0' && end != s.c_str() && std::isfinite(out);
}

}  // namespace

EmbeddingTable load_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open embedding file " + path);
    EmbeddingTable table;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto parts = split_ws(line);
        if (parts.size() < 2) fail_line(path, lineno, "expected `token v1 ... vd`");
        if (table.dimension == 0) table.dimension = static_cast<int>(parts.size()) - 1;
        if (static_cast<int>(parts.size()) - 1 != table.dimension)
            fail_line(path, lineno,
                      "expected " + std::to_string(table.dimension) + " values, got " +
                          std::to_string(parts.size() - 1));
        std::vector<double> vec;
        vec.reserve(parts.size() - 1);
        for (std::size_t i = 1; i < parts.size(); ++i) {
            double v;
            if (!parse_double(parts[i], v))
                fail_line(path, lineno, "bad value \"" + parts[i] + "\"");
            vec.push_back(v);
        }
        table.vectors[to_lower(parts[0])] = std::move(vec);
    }
    return table;
}

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size())
        throw ValidationError("cosine: dimension mismatch (" + std::to_string(u.size()) +
                              " vs " + std::to_string(v.size()) + ")");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

std::optional<std::vector<double>> embed_tokens(std::span<const Token> tokens,
                                                const EmbeddingTable& table) {
    std::vector<double> sum(static_cast<std::size_t>(table.dimension), 0.0);
    int hits = 0;
    for (const auto& tok : tokens) {
        if (!is_content_token(tok.norm)) continue;
        const auto* vec = table.lookup(tok.norm);
        if (!vec) continue;
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*vec)[i];
        ++hits;
    }
    if (hits == 0) return std::nullopt;
    for (auto& x : sum) x /= hits;
    return sum;
}

SentimentLexicon load_sentiment_lexicon(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open sentiment lexicon " + path);
    SentimentLexicon lex;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto parts = split_tabs(line);
        if (parts.size() != 2) fail_line(path, lineno, "expected `token \\t score`");
        double score;
        if (!parse_double(parts[1], score))
            fail_line(path, lineno, "bad score \"" + parts[1] + "\"");
        if (score < -1.0 || score > 1.0)
            fail_line(path, lineno, "score " + parts[1] + " outside [-1, 1]");
        lex.scores[to_lower(parts[0])] = score;
    }
    return lex;
}

Polarity sentiment(std::span<const Token> tokens, const SentimentLexicon& lexicon) {
    double total = 0.0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        auto it = lexicon.scores.find(tokens[i].norm);
        if (it == lexicon.scores.end() || it->second == 0.0) continue;
        double polarity = it->second;
        for (std::size_t back = 1; back <= 3 && back <= i; ++back) {
            if (lexicon.negators.count(tokens[i - back].norm)) {
                polarity = -polarity;
                break;
            }
        }
        total += polarity;
    }
    if (total > 0.05) return Polarity::POS;
    if (total < -0.05) return Polarity::NEG;
    return Polarity::NEU;
}

bool TripleStore::add(const std::string& head, const std::string& relation,
                      const std::string& tail) {
    std::string h = to_lower(head), r = to_lower(relation), t = to_lower(tail);
    if (!keys_.insert(h + "\t" + r + "\t" + t).second) return false;
    ++n_triples_;
    adj_[h].insert(t);
    adj_[t].insert(h);
    return true;
}

bool TripleStore::linked(const std::string& a, const std::string& b) const {
    auto it = adj_.find(a);
    return it != adj_.end() && it->second.count(b) > 0;
}

const std::unordered_set<std::string>* TripleStore::neighbors(const std::string& token) const {
    auto it = adj_.find(token);
    return it == adj_.end() ? nullptr : &it->second;
}

TripleStore load_triples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open triple file " + path);
    TripleStore store;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto parts = split_tabs(line);
        if (parts.size() != 3) fail_line(path, lineno, "expected `head \\t relation \\t tail`");
        if (parts[0].empty() || parts[2].empty())
            fail_line(path, lineno, "empty head or tail");
        store.add(parts[0], parts[1], parts[2]);
    }
    return store;
}

double triple_match_ratio(const Question& question, const Sentence& sentence,
                          const TripleStore& store) {
    if (sentence.tokens.empty() || store.size() == 0) return 0.0;
    std::unordered_set<std::string> query;
    for (const auto& t : question.tokens) query.insert(t.norm);
    for (const auto& opt : question.options)
        for (const auto& t : opt.tokens) query.insert(t.norm);

    std::unordered_set<std::string> matched;
    for (const auto& tok : sentence.tokens) {
        if (matched.count(tok.norm)) continue;
        const auto* nbrs = store.neighbors(tok.norm);
        if (!nbrs) continue;
        for (const auto& q : query) {
            if (nbrs->count(q)) {
                matched.insert(tok.norm);
                break;
            }
        }
    }
    return static_cast<double>(matched.size()) / static_cast<double>(sentence.tokens.size());
}

Gazetteer load_gazetteer(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open gazetteer " + path);
    Gazetteer gaz;
    std::string line;
    while (std::getline(in, line)) {
        std::string name = to_lower(line);
        while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back())))
            name.pop_back();
        if (!name.empty()) gaz.places.insert(name);
    }
    return gaz;
}

namespace {

const std::unordered_set<std::string>& month_and_day_names() {
    static const std::unordered_set<std::string> names = {
        "january", "february", "march", "april", "may", "june", "july",
        "august", "september", "october", "november", "december",
        "monday", "tuesday", "wednesday", "thursday", "friday", "saturday",
        "sunday", "today", "yesterday", "tomorrow",
    };
    return names;
}

const std::unordered_set<std::string>& honorifics() {
    static const std::unordered_set<std::string> h = {"mr", "mrs", "ms", "dr", "prof"};
    return h;
}

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

bool is_numeric_token(const std::string& s) {
    if (s.empty()) return false;
    bool digit_seen = false;
    int dots = 0;
    for (char c : s) {
        if (std::isdigit(static_cast<unsigned char>(c))) digit_seen = true;
        else if (c == '.' && ++dots <= 1) continue;
        else if (c == ',') continue;
        else return false;
    }
    return digit_seen;
}

bool is_clock(const std::string& s) {
    auto colon = s.find(':');
    if (colon == std::string::npos) return false;
    std::string hh = s.substr(0, colon), mm = s.substr(colon + 1);
    if (hh.empty() || hh.size() > 2 || mm.size() != 2) return false;
    return all_digits(hh) && all_digits(mm);
}

bool is_year(const std::string& s) {
    if (s.size() != 4 || !all_digits(s)) return false;
    int y = std::atoi(s.c_str());
    return y >= 1000 && y <= 2999;
}

}  // namespace

std::vector<EntityTag> tag_entities(std::span<const Token> tokens, const Gazetteer* gazetteer) {
    std::vector<EntityTag> tags(tokens.size(), EntityTag::NONE);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::string& norm = tokens[i].norm;
        const std::string& surface = tokens[i].surface;
        if (is_year(norm) || month_and_day_names().count(norm) || is_clock(norm)) {
            tags[i] = EntityTag::TIME;
            continue;
        }
        if (is_numeric_token(norm)) {
            tags[i] = EntityTag::NUMBER;
            continue;
        }
        if (gazetteer && gazetteer->places.count(norm)) {
            tags[i] = EntityTag::LOCATION;
            continue;
        }
        bool capitalized = !surface.empty() && std::isupper(static_cast<unsigned char>(surface[0]));
        if (!capitalized) continue;
        bool honorific_before = false;
        for (std::size_t back = i; back > 0;) {
            --back;
            const std::string& prev = tokens[back].norm;
            if (prev == "." || prev == ",") continue;  // skip the period of "Dr."
            honorific_before = honorifics().count(prev) > 0;
            break;
        }
        if (honorific_before || (i > 0 && !is_stopword(norm))) tags[i] = EntityTag::PERSON;
    }
    return tags;
}

NliVerdict HeuristicNli::infer(const std::string& premise, const std::string& hypothesis) {
    auto prem_tokens = tokenize(premise);
    auto hyp_tokens = tokenize(hypothesis);

    std::unordered_set<std::string> prem_norms;
    bool prem_negated = false;
    for (const auto& t : prem_tokens) {
        prem_norms.insert(t.norm);
        if (default_negators().count(t.norm)) prem_negated = true;
    }
    bool hyp_negated = false;
    int content = 0, present = 0;
    for (const auto& t : hyp_tokens) {
        if (default_negators().count(t.norm)) hyp_negated = true;
        if (!is_content_token(t.norm)) continue;
        ++content;
        if (prem_norms.count(t.norm)) ++present;
    }
    NliVerdict v;
    if (content == 0) return v;  // NEUTRAL, confidence 0
    double overlap = static_cast<double>(present) / content;
    v.confidence = overlap;
    if (overlap >= 0.7)
        v.label = (prem_negated != hyp_negated) ? NliLabel::CONTRADICT : NliLabel::ENTAIL;
    return v;
}

struct ProcessNli::Impl {
    LineProcess proc;
    bool warned = false;
    Impl(const std::string& cmd, double timeout) : proc(cmd, timeout) {}
};

ProcessNli::ProcessNli(const std::string& command, double timeout_seconds)
    : impl_(std::make_unique<Impl>(command, timeout_seconds)) {}

ProcessNli::~ProcessNli() = default;

NliVerdict ProcessNli::infer(const std::string& premise, const std::string& hypothesis) {
    NliVerdict fallback;  // NEUTRAL, confidence 0
    nlohmann::json req;
    req["premise"] = premise;
    req["hypothesis"] = hypothesis;
    auto resp = impl_->proc.exchange(req.dump());
    if (!resp) {
        if (!impl_->warned) {
            std::cerr << "warning: external NLI provider failed; returning NEUTRAL\n";
            impl_->warned = true;
        }
        return fallback;
    }
    try {
        auto j = nlohmann::json::parse(*resp);
        std::string verdict = j.at("verdict").get<std::string>();
        NliVerdict v;
        if (verdict == "entail") v.label = NliLabel::ENTAIL;
        else if (verdict == "contradict") v.label = NliLabel::CONTRADICT;
        else if (verdict == "neutral") v.label = NliLabel::NEUTRAL;
        else throw std::runtime_error("bad verdict");
        v.confidence = j.at("confidence").get<double>();
        if (v.confidence < 0.0 || v.confidence > 1.0 || !std::isfinite(v.confidence))
            throw std::runtime_error("bad confidence");
        return v;
    } catch (const std::exception&) {
        if (!impl_->warned) {
            std::cerr << "warning: malformed NLI provider response; returning NEUTRAL\n";
            impl_->warned = true;
        }
        return fallback;
    }
}

NliVerdict nli(const Sentence& premise, const std::string& hypothesis, NliProvider& provider) {
    return provider.infer(premise.text, hypothesis);
}

}  // namespace ese
