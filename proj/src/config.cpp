#include "ese/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ese/errors.hpp"
#include "ese/parallel.hpp"

namespace ese {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "off" || value == "no") return false;
    throw ValidationError("config: bad boolean for \"" + key + "\": " + value);
}

double parse_num(const std::string& value, const std::string& key) {
    char* end = nullptr;
    double v = std::strtod(value.c_str(), &end);
    if (!end || *end != '\0' || end == value.c_str())
        throw ValidationError("config: bad number for \"" + key + "\": " + value);
    return v;
}

int parse_int(const std::string& value, const std::string& key) {
    double v = parse_num(value, key);
    int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw ValidationError("config: \"" + key + "\" must be an integer");
    return i;
}

}  // namespace

void apply_config_entry(PipelineConfig& c, const std::string& key, const std::string& value) {
    if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_num(value, key));
    else if (key == "jobs") c.jobs = parse_int(value, key);
    else if (key == "multi_answer") c.multi_answer = parse_bool(value, key);
    else if (key == "L") c.silver.max_sentences = parse_int(value, key);
    else if (key == "answer_weight") c.silver.answer_weight = parse_num(value, key);
    else if (key == "question_weight") c.silver.question_weight = parse_num(value, key);
    else if (key == "stopword_filter") c.silver.stopword_filter = parse_bool(value, key);
    else if (key == "case_sensitive") c.silver.case_sensitive = parse_bool(value, key);
    else if (key == "exact_threshold") c.silver.exact_threshold = parse_int(value, key);
    else if (key == "token_budget") c.silver.token_budget = parse_int(value, key);
    else if (key == "top_k") c.top_k = parse_int(value, key);
    else if (key == "w_ds") c.factors.w_ds = parse_num(value, key);
    else if (key == "w_adj") c.factors.w_adj = parse_num(value, key);
    else if (key == "w_win") c.factors.w_win = parse_num(value, key);
    else if (key == "w_xq") c.factors.w_xq = parse_num(value, key);
    else if (key == "window_distance") c.factors.window_distance = parse_int(value, key);
    else if (key == "use_lf") c.factors.use_lf = parse_bool(value, key);
    else if (key == "use_silver") c.factors.use_silver = parse_bool(value, key);
    else if (key == "use_adjacency") c.factors.use_adjacency = parse_bool(value, key);
    else if (key == "use_window") c.factors.use_window = parse_bool(value, key);
    else if (key == "use_cross_question") c.factors.use_cross_question = parse_bool(value, key);
    else if (key == "lf_min_length_ratio") c.lf.min_length_ratio = parse_num(value, key);
    else if (key == "lf_max_length_ratio") c.lf.max_length_ratio = parse_num(value, key);
    else if (key == "lf_min_tokens") c.lf.min_tokens = parse_int(value, key);
    else if (key == "lf_max_tokens") c.lf.max_tokens = parse_int(value, key);
    else if (key == "lf_paraphrase_cos") c.lf.paraphrase_cos_threshold = parse_num(value, key);
    else if (key == "lf_word_cos") c.lf.word_cos_threshold = parse_num(value, key);
    else if (key == "lf_triple_ratio") c.lf.triple_ratio_threshold = parse_num(value, key);
    else if (key == "lf_rule_strength") c.lf.rule_strength = parse_num(value, key);
    else if (key == "lf_reward_cap") c.lf.reward_cap = parse_num(value, key);
    else if (key == "lf_strengths") {
        std::vector<double> strengths;
        std::string token;
        std::istringstream is(value);
        while (std::getline(is, token, ','))
            strengths.push_back(parse_num(trim(token), key));
        if (strengths.size() != static_cast<std::size_t>(kNumLabelingFunctions))
            throw ValidationError("config: \"lf_strengths\" needs " +
                                  std::to_string(kNumLabelingFunctions) +
                                  " comma-separated values");
        c.lf.per_lf_strength = std::move(strengths);
    }
    else if (key == "bp_max_iters") c.inference.max_iters = parse_int(value, key);
    else if (key == "bp_damping") c.inference.damping = parse_num(value, key);
    else if (key == "bp_tol") c.inference.tol = parse_num(value, key);
    else if (key == "epochs") c.train.epochs = parse_int(value, key);
    else if (key == "learning_rate") c.train.learning_rate = parse_num(value, key);
    else if (key == "l2") c.train.l2 = parse_num(value, key);
    else if (key == "batch_size") c.train.batch_size = parse_int(value, key);
    else if (key == "em_rounds") c.em_rounds = parse_int(value, key);
    else if (key == "learn_factor_weights") c.learn_factor_weights = parse_bool(value, key);
    else if (key == "factor_learning_rate") c.factor_learning_rate = parse_num(value, key);
    else if (key == "reward_window") c.reward_window = parse_int(value, key);
    else if (key == "reward_max_subset") c.reward_max_subset = parse_int(value, key);
    else if (key == "resource_dir") c.resource_dir = value;
    else if (key == "word_embeddings") c.word_embeddings = value;
    else if (key == "paraphrase_embeddings") c.paraphrase_embeddings = value;
    else if (key == "sentiment_lexicon") c.sentiment_lexicon = value;
    else if (key == "triples") c.triples = value;
    else if (key == "gazetteer") c.gazetteer = value;
    else if (key == "nli_command") c.nli_command = value;
    else if (key == "reader_command") c.reader_command = value;
    else if (key == "provider_timeout") c.provider_timeout = parse_num(value, key);
    else throw ValidationError("config: unknown key \"" + key + "\"");
}

void apply_config_file(PipelineConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": expected `key = value`");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        try {
            apply_config_entry(config, key, value);
        } catch (const ValidationError& e) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

namespace {

std::string resolve_path(const std::string& path, const std::string& dir) {
    if (path.empty() || dir.empty() || path.front() == '/') return path;
    return dir + "/" + path;
}

}  // namespace

Resources load_resources(const PipelineConfig& config) {
    std::string dir = config.resource_dir;
    if (const char* env = std::getenv("ESE_RESOURCE_DIR"); env && *env) dir = env;

    Resources r;
    if (!config.word_embeddings.empty())
        r.word_embeddings = load_embeddings(resolve_path(config.word_embeddings, dir));
    if (!config.paraphrase_embeddings.empty())
        r.paraphrase_embeddings =
            load_embeddings(resolve_path(config.paraphrase_embeddings, dir));
    if (!config.sentiment_lexicon.empty())
        r.sentiment_lexicon =
            load_sentiment_lexicon(resolve_path(config.sentiment_lexicon, dir));
    if (!config.triples.empty()) r.triples = load_triples(resolve_path(config.triples, dir));
    if (!config.gazetteer.empty())
        r.gazetteer = load_gazetteer(resolve_path(config.gazetteer, dir));
    if (!config.nli_command.empty())
        r.nli_provider = std::make_shared<ProcessNli>(config.nli_command,
                                                      config.provider_timeout);
    return r;
}

EmConfig to_em_config(const PipelineConfig& c) {
    EmConfig em;
    em.em_rounds = c.em_rounds;
    em.inference = c.inference;
    em.extractor = c.train;
    em.extractor.seed = c.seed;
    em.factors = c.factors;
    em.lf = c.lf;
    em.silver = c.silver;
    em.reward_window = c.reward_window;
    em.reward_max_subset = c.reward_max_subset;
    em.learn_factor_weights = c.learn_factor_weights;
    em.factor_learning_rate = c.factor_learning_rate;
    em.multi_answer = c.multi_answer;
    em.jobs = c.jobs <= 0 ? default_jobs() : c.jobs;
    em.seed = c.seed;
    return em;
}

nlohmann::json config_echo(const PipelineConfig& c) {
    nlohmann::json j;
    j["L"] = c.silver.max_sentences;
    j["top_k"] = c.top_k;
    j["em_rounds"] = c.em_rounds;
    j["epochs"] = c.train.epochs;
    j["learning_rate"] = c.train.learning_rate;
    j["l2"] = c.train.l2;
    j["w_ds"] = c.factors.w_ds;
    j["w_adj"] = c.factors.w_adj;
    j["w_win"] = c.factors.w_win;
    j["w_xq"] = c.factors.w_xq;
    j["window_distance"] = c.factors.window_distance;
    j["bp_max_iters"] = c.inference.max_iters;
    j["bp_damping"] = c.inference.damping;
    j["multi_answer"] = c.multi_answer;
    j["reward_window"] = c.reward_window;
    j["reward_max_subset"] = c.reward_max_subset;
    j["stopword_filter"] = c.silver.stopword_filter;
    return j;
}

}  // namespace ese
