#include "mdr/inverted_index.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "mdr/errors.hpp"

namespace mdr {
namespace {

constexpr char kMagic[8] = {'M', 'D', 'R', 'I', 'N', 'D', 'E', 'X'};

class Writer {
public:
    void bytes(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
    void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
    void u16(std::uint16_t v) { le(v, 2); }
    void u32(std::uint32_t v) { le(v, 4); }
    void u64(std::uint64_t v) { le(v, 8); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }
    std::string take() { return std::move(out_); }

private:
    void le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
    std::string out_;
};

class Reader {
public:
    explicit Reader(const std::string& in) : in_(in) {}

    void need(std::size_t n) const {
        if (pos_ + n > in_.size()) throw ValidationError("index file truncated at byte " + std::to_string(pos_));
    }
    std::uint64_t le(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
        }
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        auto n = u32();
        need(n);
        std::string s = in_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::string raw(std::size_t n) {
        need(n);
        std::string s = in_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == in_.size(); }

private:
    const std::string& in_;
    std::size_t pos_ = 0;
};

}  // namespace

std::uint32_t InvertedIndex::doc_length(std::uint32_t ordinal) const {
    if (ordinal >= doc_lengths_.size()) {
        throw ValidationError("unknown doc ordinal " + std::to_string(ordinal));
    }
    return doc_lengths_[ordinal];
}

const std::string& InvertedIndex::doc_id(std::uint32_t ordinal) const {
    if (ordinal >= doc_ids_.size()) {
        throw ValidationError("unknown doc ordinal " + std::to_string(ordinal));
    }
    return doc_ids_[ordinal];
}

const std::vector<Posting>& InvertedIndex::postings(const std::string& term) const {
    static const std::vector<Posting> empty;
    auto it = postings_.find(term);
    return it == postings_.end() ? empty : it->second;
}

InvertedIndex build_index(const std::vector<Document>& corpus, const Tokenizer& tokenizer) {
    if (corpus.empty()) throw ValidationError("cannot index an empty corpus");
    InvertedIndex index;
    index.tokenizer_ = tokenizer;
    index.doc_ids_.reserve(corpus.size());
    index.doc_lengths_.reserve(corpus.size());

    std::unordered_set<std::string> seen;
    std::unordered_map<std::string, std::uint32_t> tf;
    std::uint64_t total_length = 0;
    for (std::uint32_t ord = 0; ord < corpus.size(); ++ord) {
        const auto& doc = corpus[ord];
        if (!seen.insert(doc.doc_id).second) {
            throw ValidationError("duplicate doc_id '" + doc.doc_id + "' in corpus");
        }
        tf.clear();
        auto tokens = tokenizer(doc.text);
        for (auto& t : tokens) ++tf[t];
        // Ordinals are assigned in increasing order, so appending keeps every
        // postings list sorted.
        for (auto& [term, count] : tf) index.postings_[term].push_back({ord, count});
        index.doc_ids_.push_back(doc.doc_id);
        index.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
        total_length += tokens.size();
    }
    index.avg_doc_length_ = static_cast<double>(total_length) / static_cast<double>(corpus.size());
    return index;
}

std::string InvertedIndex::serialize() const {
    Writer w;
    w.bytes(kMagic, sizeof kMagic);
    w.u32(kFormatVersion);
    w.u8(tokenizer_.lowercase ? 1 : 0);
    w.u8(tokenizer_.stemmer == Stemmer::porter ? 1 : 0);
    w.u16(0);
    w.u32(static_cast<std::uint32_t>(tokenizer_.stopwords.size()));
    for (const auto& s : tokenizer_.stopwords) w.str(s);

    w.u64(doc_ids_.size());
    w.f64(avg_doc_length_);
    for (std::size_t i = 0; i < doc_ids_.size(); ++i) {
        w.str(doc_ids_[i]);
        w.u32(doc_lengths_[i]);
    }

    std::vector<const std::string*> terms;
    terms.reserve(postings_.size());
    for (const auto& [term, _] : postings_) terms.push_back(&term);
    std::sort(terms.begin(), terms.end(), [](auto* a, auto* b) { return *a < *b; });
    w.u64(terms.size());
    for (const auto* term : terms) {
        const auto& list = postings_.at(*term);
        w.str(*term);
        w.u32(static_cast<std::uint32_t>(list.size()));
        for (const auto& p : list) {
            w.u32(p.doc);
            w.u32(p.tf);
        }
    }
    return w.take();
}

InvertedIndex InvertedIndex::deserialize(const std::string& bytes) {
    Reader r(bytes);
    if (r.raw(sizeof kMagic) != std::string(kMagic, sizeof kMagic)) {
        throw ValidationError("not an index file (bad magic)");
    }
    auto version = r.u32();
    if (version != kFormatVersion) {
        throw ValidationError("unsupported index format version " + std::to_string(version));
    }
    InvertedIndex index;
    index.tokenizer_.lowercase = r.u8() != 0;
    index.tokenizer_.stemmer = r.u8() != 0 ? Stemmer::porter : Stemmer::none;
    r.u16();
    auto stopword_count = r.u32();
    for (std::uint32_t i = 0; i < stopword_count; ++i) index.tokenizer_.stopwords.insert(r.str());

    auto n = r.u64();
    index.avg_doc_length_ = r.f64();
    index.doc_ids_.reserve(n);
    index.doc_lengths_.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        index.doc_ids_.push_back(r.str());
        index.doc_lengths_.push_back(r.u32());
    }
    auto term_count = r.u64();
    for (std::uint64_t t = 0; t < term_count; ++t) {
        auto term = r.str();
        auto count = r.u32();
        std::vector<Posting> list;
        list.reserve(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            Posting p{r.u32(), r.u32()};
            if (p.doc >= n || (!list.empty() && p.doc <= list.back().doc)) {
                throw ValidationError("corrupt postings for term '" + term + "'");
            }
            list.push_back(p);
        }
        index.postings_.emplace(std::move(term), std::move(list));
    }
    if (!r.done()) throw ValidationError("trailing bytes after index payload");
    return index;
}

void InvertedIndex::save(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    const auto bytes = serialize();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open index " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize(buf.str());
}

}  // namespace mdr
