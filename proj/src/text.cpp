#include "ese/text.hpp"

#include <cctype>

namespace ese {

std::string to_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        unsigned char u = static_cast<unsigned char>(c);
        out.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : c);
    }
    return out;
}

const std::unordered_set<std::string>& stopwords() {
    static const std::unordered_set<std::string> words = {
        "a", "about", "above", "after", "again", "against", "all", "am", "an",
        "and", "any", "are", "aren't", "as", "at", "be", "because", "been",
        "before", "being", "below", "between", "both", "but", "by", "can",
        "cannot", "could", "couldn't", "did", "didn't", "do", "does",
        "doesn't", "doing", "don't", "down", "during", "each", "few", "for",
        "from", "further", "had", "hadn't", "has", "hasn't", "have",
        "haven't", "having", "he", "he'd", "he'll", "he's", "her", "here",
        "here's", "hers", "herself", "him", "himself", "his", "how", "how's",
        "i", "i'd", "i'll", "i'm", "i've", "if", "in", "into", "is", "isn't",
        "it", "it's", "its", "itself", "let's", "me", "more", "most",
        "mustn't", "my", "myself", "no", "nor", "not", "of", "off", "on",
        "once", "only", "or", "other", "ought", "our", "ours", "ourselves",
        "out", "over", "own", "same", "shan't", "she", "she'd", "she'll",
        "she's", "should", "shouldn't", "so", "some", "such", "than", "that",
        "that's", "the", "their", "theirs", "them", "themselves", "then",
        "there", "there's", "these", "they", "they'd", "they'll", "they're",
        "they've", "this", "those", "through", "to", "too", "under", "until",
        "up", "very", "was", "wasn't", "we", "we'd", "we'll", "we're",
        "we've", "were", "weren't", "what", "what's", "when", "when's",
        "where", "where's", "which", "while", "who", "who's", "whom", "why",
        "why's", "with", "won't", "would", "wouldn't", "you", "you'd",
        "you'll", "you're", "you've", "your", "yours", "yourself",
        "yourselves",
    };
    return words;
}

bool is_stopword(const std::string& norm) {
    return stopwords().count(norm) > 0;
}

bool is_content_token(const std::string& norm) {
    if (is_stopword(norm)) return false;
    for (char c : norm) {
        if (std::isalnum(static_cast<unsigned char>(c))) return true;
    }
    return false;
}

const std::unordered_set<std::string>& default_negators() {
    static const std::unordered_set<std::string> words = {
        "not",    "no",      "never", "none",   "nobody", "nothing",
        "n't",    "neither", "nor",   "cannot", "can't",  "won't",
        "don't",  "doesn't", "didn't", "isn't", "aren't", "wasn't",
        "weren't", "hardly", "barely", "scarcely", "without",
    };
    return words;
}

const std::unordered_set<std::string>& default_intensifiers() {
    static const std::unordered_set<std::string> words = {
        "very",     "really",    "extremely", "absolutely", "completely",
        "totally",  "utterly",   "quite",     "highly",     "so",
        "too",      "incredibly", "remarkably", "especially",
    };
    return words;
}

}  // namespace ese
