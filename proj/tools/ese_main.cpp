// ese: evidence sentence extraction pipeline for multiple-choice reading
// comprehension. Subcommands: synth, silver, train, extract, eval, inspect.

#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ese/config.hpp"
#include "ese/corpus.hpp"
#include "ese/dpl.hpp"
#include "ese/errors.hpp"
#include "ese/evaluation.hpp"
#include "ese/extractor.hpp"
#include "ese/labeling.hpp"
#include "ese/reader.hpp"
#include "ese/silver.hpp"
#include "ese/trainer.hpp"

namespace {

using ese::PipelineConfig;

std::unique_ptr<ese::Reader> make_reader(const PipelineConfig& config) {
    if (!config.reader_command.empty())
        return std::make_unique<ese::ProcessReader>(config.reader_command,
                                                    config.provider_timeout);
    return std::make_unique<ese::LexicalReader>();
}

bool effective_multi(const PipelineConfig& config, const ese::Corpus& corpus) {
    return config.multi_answer || corpus.multi_answer();
}

// Mirrors every config-file key as a --key flag; flags win over the file.
void mirror_config_flags(CLI::App* app, PipelineConfig& config) {
    static const char* keys[] = {
        "seed", "jobs", "multi_answer", "L", "answer_weight", "question_weight",
        "stopword_filter", "case_sensitive", "exact_threshold", "token_budget", "top_k",
        "w_ds", "w_adj",
        "w_win", "w_xq", "window_distance", "use_lf", "use_silver", "use_adjacency",
        "use_window", "use_cross_question", "lf_min_length_ratio", "lf_max_length_ratio",
        "lf_min_tokens", "lf_max_tokens", "lf_paraphrase_cos", "lf_word_cos",
        "lf_triple_ratio", "lf_rule_strength", "lf_reward_cap", "lf_strengths",
        "bp_max_iters",
        "bp_damping", "bp_tol", "epochs", "learning_rate", "l2", "batch_size",
        "em_rounds", "learn_factor_weights", "factor_learning_rate", "reward_window",
        "reward_max_subset", "resource_dir", "word_embeddings", "paraphrase_embeddings",
        "sentiment_lexicon", "triples", "gazetteer", "nli_command", "reader_command",
        "provider_timeout",
    };
    for (const char* key : keys) {
        std::string name = std::string("--") + key;
        app->add_option_function<std::string>(
               name,
               [&config, key](const std::string& value) {
                   ese::apply_config_entry(config, key, value);
               })
            ->group("Pipeline configuration");
    }
}

std::string history_path_for(const std::string& model_path) {
    const std::string suffix = ".json";
    if (model_path.size() > suffix.size() &&
        model_path.compare(model_path.size() - suffix.size(), suffix.size(), suffix) == 0)
        return model_path.substr(0, model_path.size() - suffix.size()) + ".history.json";
    return model_path + ".history.json";
}

void write_history(const std::string& path, const std::string& mode,
                   const ese::EmHistory& history, const ese::DplWeights* final_factors) {
    nlohmann::json j;
    j["mode"] = mode;
    j["mean_kl"] = history.mean_kl;
    j["marginal_change"] = history.marginal_change;
    if (final_factors) {
        j["final_factors"] = {{"w_ds", final_factors->w_ds},
                              {"w_adj", final_factors->w_adj},
                              {"w_win", final_factors->w_win},
                              {"w_xq", final_factors->w_xq}};
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

int run(int argc, char** argv) {
    PipelineConfig config;

    // The config file loads before flag parsing so flags override it.
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            ese::apply_config_file(config, argv[i + 1]);
            break;
        }
    }

    CLI::App app{"evidence sentence extraction for multiple-choice reading comprehension"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "pipeline config file (key = value lines)");
    mirror_config_flags(&app, config);

    // --- synth ---
    auto* synth = app.add_subcommand("synth", "generate a planted-evidence synthetic corpus");
    synth->fallthrough();
    ese::SynthConfig synth_cfg;
    std::string synth_out;
    synth->add_option("--out", synth_out, "output JSONL path")->required();
    synth->add_option("--docs", synth_cfg.n_docs, "number of documents");
    synth->add_option("--sents", synth_cfg.n_sents, "sentences per document");
    synth->add_option("--questions", synth_cfg.n_questions, "questions per document");
    synth->add_option("--options", synth_cfg.n_options, "options per question");
    synth->add_option("--evidence", synth_cfg.evidence_per_question,
                      "planted evidence sentences per question");
    synth->add_option("--vocab", synth_cfg.vocab_size, "vocabulary size");
    synth->add_option("--noise", synth_cfg.distractor_noise, "distractor probability");
    synth->add_option("--split", synth_cfg.split, "split tag");

    // --- silver ---
    auto* silver = app.add_subcommand("silver", "emit max-coverage silver evidence labels");
    silver->fallthrough();
    std::string silver_data, silver_out;
    silver->add_option("--data", silver_data, "dataset JSONL")->required();
    silver->add_option("--out", silver_out, "output JSONL path")->required();

    // --- train ---
    auto* train_cmd = app.add_subcommand("train", "train an evidence scorer");
    train_cmd->fallthrough();
    std::string train_data, train_mode = "dpl", train_out;
    train_cmd->add_option("--data", train_data, "training dataset JSONL")->required();
    train_cmd->add_option("--mode", train_mode, "silver | dpl | gold")
        ->check(CLI::IsMember({"silver", "dpl", "gold"}));
    train_cmd->add_option("--out", train_out, "model output path")->required();

    // --- extract ---
    auto* extract_cmd = app.add_subcommand("extract", "extract evidence with a trained model");
    extract_cmd->fallthrough();
    std::string extract_data, extract_model, extract_out, extract_mark = "filter";
    extract_cmd->add_option("--data", extract_data, "dataset JSONL")->required();
    extract_cmd->add_option("--model", extract_model, "trained model path")->required();
    extract_cmd->add_option("--out", extract_out, "output JSONL path")->required();
    extract_cmd->add_option("--k", config.top_k, "sentences to keep per question");
    extract_cmd->add_option("--mark", extract_mark, "filter | annotate")
        ->check(CLI::IsMember({"filter", "annotate"}));

    // --- eval ---
    auto* eval_cmd = app.add_subcommand("eval", "evaluate arms and write a report");
    eval_cmd->fallthrough();
    std::string eval_data, eval_train, eval_out, eval_arms = "full";
    std::string eval_mode = "filter";
    std::string model_silver_path, model_dpl_path, model_gold_path;
    eval_cmd->add_option("--data", eval_data, "evaluation dataset JSONL")->required();
    eval_cmd->add_option("--train", eval_train,
                         "training dataset for arms lacking a --model-* path");
    eval_cmd->add_option("--arms", eval_arms,
                         "comma list of full,random,gold,silver,dpl,gt (gold = ground-truth "
                         "evidence filter, gt = extractor trained on gold)");
    eval_cmd->add_option("--mode", eval_mode,
                         "extractor-arm reader input: filter (top-k only) | annotate "
                         "(whole document, evidence marked)")
        ->check(CLI::IsMember({"filter", "annotate"}));
    eval_cmd->add_option("--out", eval_out, "report JSON path")->required();
    eval_cmd->add_option("--k", config.top_k, "sentences per question for filter arms");
    eval_cmd->add_option("--model-silver", model_silver_path, "model for the silver arm");
    eval_cmd->add_option("--model-dpl", model_dpl_path, "model for the dpl arm");
    eval_cmd->add_option("--model-gt", model_gold_path, "model for the gt arm");

    // --- inspect ---
    auto* inspect_cmd = app.add_subcommand("inspect", "dump LF votes or the factor graph");
    inspect_cmd->fallthrough();
    std::string inspect_data, inspect_doc, inspect_question, inspect_what = "lfs";
    std::string inspect_out;
    inspect_cmd->add_option("--data", inspect_data, "dataset JSONL")->required();
    inspect_cmd->add_option("--doc", inspect_doc, "document id")->required();
    inspect_cmd->add_option("--question", inspect_question, "question id (default: all)");
    inspect_cmd->add_option("--what", inspect_what, "lfs | graph")
        ->check(CLI::IsMember({"lfs", "graph"}));
    inspect_cmd->add_option("--out", inspect_out, "output path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage problems exit 1
    }

    if (synth->parsed()) {
        auto corpus = ese::generate_synthetic(synth_cfg, config.seed);
        ese::save_dataset(corpus, synth_out);
        std::cout << "wrote " << corpus.documents.size() << " documents to " << synth_out
                  << "\n";
        return 0;
    }

    if (silver->parsed()) {
        auto corpus = ese::load_dataset(silver_data);
        int jobs = config.jobs;
        auto labels = ese::compute_silver(corpus, config.silver, jobs);
        std::ofstream out(silver_out);
        if (!out) throw std::runtime_error("cannot open " + silver_out + " for writing");
        for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
            for (const auto& lab : labels[d]) {
                nlohmann::json rec;
                rec["doc"] = corpus.documents[d].id;
                rec["question"] = lab.question_id;
                rec["selected"] = lab.selected;
                rec["objective"] = lab.objective;
                rec["exact"] = lab.exact;
                out << rec.dump() << "\n";
            }
        }
        std::cout << "wrote silver labels to " << silver_out << "\n";
        return 0;
    }

    if (train_cmd->parsed()) {
        auto corpus = ese::load_dataset(train_data);
        auto resources = ese::load_resources(config);
        auto reader = make_reader(config);
        auto em = ese::to_em_config(config);
        em.multi_answer = effective_multi(config, corpus);

        ese::ScorerModel model;
        if (train_mode == "dpl") {
            auto result = ese::run_em(corpus, resources, *reader, em);
            model = result.model;
            write_history(history_path_for(train_out), train_mode, result.history,
                          &result.final_factors);
        } else {
            ese::TrainReport report;
            if (train_mode == "silver")
                model = ese::train_on_silver(corpus, resources, *reader, em, nullptr, &report);
            else
                model = ese::train_supervised(corpus, resources, *reader, em, &report);
            ese::EmHistory history;
            history.mean_kl = {report.final_loss};
            write_history(history_path_for(train_out), train_mode, history, nullptr);
        }
        ese::save_model(model, train_out);
        std::cout << "wrote model to " << train_out << "\n";
        return 0;
    }

    if (extract_cmd->parsed()) {
        auto corpus = ese::load_dataset(extract_data);
        auto model = ese::load_model(extract_model);
        auto resources = ese::load_resources(config);
        auto reader = make_reader(config);
        bool multi = effective_multi(config, corpus);

        std::ofstream out(extract_out);
        if (!out) throw std::runtime_error("cannot open " + extract_out + " for writing");
        for (const auto& doc : corpus.documents) {
            for (const auto& q : doc.questions) {
                auto rewards = ese::compute_rewards(doc, q, *reader, config.reward_window,
                                                    config.reward_max_subset, multi);
                auto features = ese::featurize(doc, q, resources, rewards);
                int k = std::min<int>(config.top_k, static_cast<int>(doc.sentences.size()));
                auto selected = ese::extract_top_k(model, features, k);
                nlohmann::json rec;
                rec["doc"] = doc.id;
                rec["question"] = q.id;
                rec["selected"] = selected;
                if (extract_mark == "annotate") {
                    std::set<int> chosen(selected.begin(), selected.end());
                    auto sents = nlohmann::json::array();
                    for (const auto& s : doc.sentences) {
                        sents.push_back({{"index", s.index},
                                         {"text", s.text},
                                         {"evidence", chosen.count(s.index) > 0}});
                    }
                    rec["sentences"] = sents;
                }
                out << rec.dump() << "\n";
            }
        }
        std::cout << "wrote extractions to " << extract_out << "\n";
        return 0;
    }

    if (eval_cmd->parsed()) {
        auto corpus = ese::load_dataset(eval_data);
        auto resources = ese::load_resources(config);
        auto reader = make_reader(config);
        auto em = ese::to_em_config(config);
        em.multi_answer = effective_multi(config, corpus);

        std::optional<ese::Corpus> train_corpus;
        if (!eval_train.empty()) {
            train_corpus = ese::load_dataset(eval_train);
            em.multi_answer = em.multi_answer || train_corpus->multi_answer();
        }

        auto fetch_model = [&](const std::string& arm,
                               const std::string& path) -> ese::ScorerModel {
            if (!path.empty()) return ese::load_model(path);
            if (!train_corpus)
                throw ese::ValidationError("arm \"" + arm +
                                           "\" needs a --model-* path or --train");
            if (arm == "silver")
                return ese::train_on_silver(*train_corpus, resources, *reader, em);
            if (arm == "gt") return ese::train_supervised(*train_corpus, resources, *reader, em);
            return ese::run_em(*train_corpus, resources, *reader, em).model;
        };

        ese::DownstreamConfig down;
        down.k = config.top_k;
        down.seed = config.seed;
        down.multi_answer = em.multi_answer;
        down.jobs = em.jobs;
        down.reward_window = config.reward_window;
        down.reward_max_subset = config.reward_max_subset;

        auto evidence_for_model = [&](const ese::ScorerModel& model) {
            std::map<std::string, std::vector<int>> predicted;
            std::map<std::string, std::optional<std::vector<int>>> gold;
            for (const auto& doc : corpus.documents) {
                for (const auto& q : doc.questions) {
                    auto rewards =
                        ese::compute_rewards(doc, q, *reader, config.reward_window,
                                             config.reward_max_subset, em.multi_answer);
                    auto features = ese::featurize(doc, q, resources, rewards);
                    int k = std::min<int>(config.top_k,
                                          static_cast<int>(doc.sentences.size()));
                    predicted[doc.id + "\t" + q.id] = ese::extract_top_k(model, features, k);
                    gold[doc.id + "\t" + q.id] = q.gold_evidence;
                }
            }
            return ese::evidence_f1(predicted, gold);
        };

        std::vector<ese::EvalArmResult> results;
        std::stringstream arms_stream(eval_arms);
        std::string arm;
        while (std::getline(arms_stream, arm, ',')) {
            if (arm.empty()) continue;
            ese::EvalArmResult result;
            result.arm = arm;
            result.k = config.top_k;
            if (arm == "full") {
                down.mode = ese::EvalMode::Full;
                result.options = ese::downstream_eval(corpus, nullptr, resources, *reader, down);
            } else if (arm == "random") {
                down.mode = ese::EvalMode::RandomK;
                result.options = ese::downstream_eval(corpus, nullptr, resources, *reader, down);
            } else if (arm == "gold") {
                down.mode = ese::EvalMode::GoldFilter;
                result.options = ese::downstream_eval(corpus, nullptr, resources, *reader, down);
            } else if (arm == "silver" || arm == "dpl" || arm == "gt") {
                const std::string& path = arm == "silver"
                                              ? model_silver_path
                                              : (arm == "dpl" ? model_dpl_path : model_gold_path);
                auto model = fetch_model(arm, path);
                down.mode = eval_mode == "annotate" ? ese::EvalMode::Annotate
                                                    : ese::EvalMode::Filter;
                result.options = ese::downstream_eval(corpus, &model, resources, *reader, down);
                result.evidence = evidence_for_model(model);
            } else {
                throw ese::ValidationError("unknown eval arm \"" + arm + "\"");
            }
            results.push_back(std::move(result));
        }
        ese::write_report(results, ese::config_echo(config), config.seed, eval_out);
        std::cout << "wrote report to " << eval_out << "\n";
        return 0;
    }

    if (inspect_cmd->parsed()) {
        auto corpus = ese::load_dataset(inspect_data);
        const ese::Document* doc = nullptr;
        for (const auto& d : corpus.documents)
            if (d.id == inspect_doc) doc = &d;
        if (!doc) throw ese::ValidationError("document \"" + inspect_doc + "\" not found");

        auto resources = ese::load_resources(config);
        auto reader = make_reader(config);
        bool multi = effective_multi(config, corpus);

        std::ostream* os = &std::cout;
        std::ofstream file;
        if (!inspect_out.empty()) {
            file.open(inspect_out);
            if (!file) throw std::runtime_error("cannot open " + inspect_out + " for writing");
            os = &file;
        }

        if (inspect_what == "lfs") {
            for (const auto& q : doc->questions) {
                if (!inspect_question.empty() && q.id != inspect_question) continue;
                auto rewards = ese::compute_rewards(*doc, q, *reader, config.reward_window,
                                                    config.reward_max_subset, multi);
                auto matrix = ese::evaluate_lfs(*doc, q, resources, rewards, config.lf);
                *os << "# question\t" << q.id << "\n";
                *os << "sentence";
                for (int lf = 1; lf <= ese::kNumLabelingFunctions; ++lf) *os << "\tLF" << lf;
                *os << "\n";
                for (std::size_t i = 0; i < matrix.profiles.size(); ++i) {
                    *os << i;
                    for (const auto& vote : matrix.profiles[i]) {
                        *os << "\t" << ese::vote_letter(vote.vote);
                        if (vote.vote != ese::Vote::ABSTAIN) *os << ":" << vote.strength;
                    }
                    *os << "\n";
                }
                for (const auto& warning : matrix.warnings)
                    std::cerr << "warning: " << warning << "\n";
            }
        } else {
            std::vector<ese::LfMatrix> lfs;
            std::vector<ese::SilverLabels> silver_labels;
            for (const auto& q : doc->questions) {
                auto rewards = ese::compute_rewards(*doc, q, *reader, config.reward_window,
                                                    config.reward_max_subset, multi);
                lfs.push_back(ese::evaluate_lfs(*doc, q, resources, rewards, config.lf));
                auto weights = ese::word_weights(q, *doc, config.silver);
                silver_labels.push_back(ese::solve_max_coverage(*doc, q, weights, config.silver));
            }
            auto graph = ese::build_graph(*doc, lfs, silver_labels, nullptr, config.factors);
            *os << ese::dump_graph(graph);
        }
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ese::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
