#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace mdr {

enum class Stemmer { none, porter };

/// Splits text on maximal runs of non-alphanumeric characters. Bytes >= 0x80
/// are treated as word characters so UTF-8 words stay intact; lowercasing is
/// ASCII-only.
struct Tokenizer {
    bool lowercase = true;
    std::set<std::string> stopwords;
    Stemmer stemmer = Stemmer::none;

    std::vector<std::string> operator()(std::string_view text) const;

    bool operator==(const Tokenizer&) const = default;
};

/// Convenience wrapper around the default tokenizer.
std::vector<std::string> tokenize(std::string_view text);

/// Reads a stopword list, one word per line (blank lines and `#` comments
/// ignored).
std::set<std::string> load_stopwords(const std::string& path);

std::string porter_stem(std::string_view word);

std::string_view to_string(Stemmer s);
Stemmer parse_stemmer(std::string_view name);

}  // namespace mdr
