#ifndef ESE_TESTUTIL_HPP
#define ESE_TESTUTIL_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "ese/corpus.hpp"

namespace testutil {

inline ese::Sentence make_sentence(int index, const std::string& text) {
    ese::Sentence s;
    s.index = index;
    s.text = text;
    s.tokens = ese::tokenize(text);
    return s;
}

inline ese::Question make_question(
    const std::string& id, const std::string& text,
    const std::vector<std::string>& options, std::vector<int> correct,
    std::optional<std::vector<int>> gold = std::nullopt) {
    ese::Question q;
    q.id = id;
    q.text = text;
    q.tokens = ese::tokenize(text);
    for (const auto& o : options) {
        ese::Option opt;
        opt.text = o;
        opt.tokens = ese::tokenize(o);
        q.options.push_back(std::move(opt));
    }
    q.correct = std::move(correct);
    q.gold_evidence = std::move(gold);
    return q;
}

inline ese::Document make_document(const std::string& id,
                                   const std::vector<std::string>& sentences,
                                   std::vector<ese::Question> questions = {}) {
    ese::Document d;
    d.id = id;
    for (std::size_t i = 0; i < sentences.size(); ++i)
        d.sentences.push_back(make_sentence(static_cast<int>(i), sentences[i]));
    d.questions = std::move(questions);
    return d;
}

// Unique temp file removed on destruction.
class TempFile {
public:
    explicit TempFile(const std::string& contents = "") {
        static int counter = 0;
        path_ = (std::filesystem::temp_directory_path() /
                 ("ese-test-" + std::to_string(getpid()) + "-" + std::to_string(counter++)))
                    .string();
        if (!contents.empty()) {
            std::ofstream out(path_);
            out << contents;
        }
    }
    ~TempFile() { std::remove(path_.c_str()); }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

}  // namespace testutil

#endif
