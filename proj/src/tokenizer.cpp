#include "mdr/tokenizer.hpp"

#include <fstream>

#include "mdr/errors.hpp"

namespace mdr {
namespace {

bool is_word_byte(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

}  // namespace

std::vector<std::string> Tokenizer::operator()(std::string_view text) const {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && !is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
        if (start == i) continue;
        std::string token(text.substr(start, i - start));
        if (lowercase) {
            for (auto& c : token) c = ascii_lower(c);
        }
        if (!stopwords.empty() && stopwords.count(token) != 0) continue;
        if (stemmer == Stemmer::porter) token = porter_stem(token);
        tokens.push_back(std::move(token));
    }
    return tokens;
}

std::vector<std::string> tokenize(std::string_view text) {
    static const Tokenizer defaults;
    return defaults(text);
}

std::set<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open stopword list " + path);
    std::set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        auto last = line.find_last_not_of(" \t\r");
        std::string word = line.substr(first, last - first + 1);
        for (auto& c : word) c = ascii_lower(c);
        words.insert(std::move(word));
    }
    return words;
}

std::string_view to_string(Stemmer s) {
    return s == Stemmer::porter ? "porter" : "none";
}

Stemmer parse_stemmer(std::string_view name) {
    if (name == "none") return Stemmer::none;
    if (name == "porter") return Stemmer::porter;
    throw ValidationError("unknown stemmer '" + std::string(name) + "' (expected none|porter)");
}

}  // namespace mdr
