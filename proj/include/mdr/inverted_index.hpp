#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "mdr/corpus_io.hpp"
#include "mdr/tokenizer.hpp"

namespace mdr {

struct Posting {
    std::uint32_t doc = 0;  // ordinal into the doc table
    std::uint32_t tf = 0;

    bool operator==(const Posting&) const = default;
};

/// Term postings plus the corpus statistics BM25 needs. Immutable once built;
/// safe to share across threads.
class InvertedIndex {
public:
    static constexpr std::uint32_t kFormatVersion = 1;

    InvertedIndex() = default;

    std::size_t doc_count() const { return doc_ids_.size(); }
    double avg_doc_length() const { return avg_doc_length_; }
    std::uint32_t doc_length(std::uint32_t ordinal) const;
    const std::string& doc_id(std::uint32_t ordinal) const;
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }
    const std::vector<std::uint32_t>& doc_lengths() const { return doc_lengths_; }

    /// Empty list for unknown terms.
    const std::vector<Posting>& postings(const std::string& term) const;
    std::size_t document_frequency(const std::string& term) const { return postings(term).size(); }
    std::size_t term_count() const { return postings_.size(); }
    const std::unordered_map<std::string, std::vector<Posting>>& all_postings() const {
        return postings_;
    }

    const Tokenizer& tokenizer() const { return tokenizer_; }

    /// Layout (all integers little-endian):
    ///   magic "MDRINDEX" | u32 version | u8 lowercase | u8 stemmer | u16 reserved
    ///   u32 stopword count, then per word: u32 length + bytes
    ///   u64 doc count | f64 avg doc length (IEEE-754 bits as u64)
    ///   per doc: u32 id length + id bytes + u32 doc length
    ///   u64 term count, then terms in byte order: u32 length + bytes,
    ///     u32 posting count, then (u32 ordinal, u32 tf) pairs
    void save(const std::filesystem::path& path) const;
    static InvertedIndex load(const std::filesystem::path& path);

    std::string serialize() const;
    static InvertedIndex deserialize(const std::string& bytes);

private:
    friend InvertedIndex build_index(const std::vector<Document>&, const Tokenizer&);

    Tokenizer tokenizer_;
    std::vector<std::string> doc_ids_;
    std::vector<std::uint32_t> doc_lengths_;
    double avg_doc_length_ = 0.0;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
};

/// Throws ValidationError for an empty corpus or duplicate ids.
InvertedIndex build_index(const std::vector<Document>& corpus, const Tokenizer& tokenizer = {});

}  // namespace mdr
