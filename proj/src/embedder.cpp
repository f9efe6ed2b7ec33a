#include "mdr/embedder.hpp"

#include <cmath>
#include <cstdlib>

#include "mdr/checksum.hpp"
#include "mdr/errors.hpp"
#include "mdr/scorer_client.hpp"
#include "mdr/tokenizer.hpp"

namespace mdr {

StubEmbedder::StubEmbedder(std::uint64_t seed, std::size_t dim) : seed_(seed), dim_(dim) {
    if (dim_ == 0) throw ValidationError("embedding dimension must be positive");
}

EmbeddingVector StubEmbedder::embed_one(const std::string& text) const {
    EmbeddingVector v{std::vector<double>(dim_, 0.0)};
    auto tokens = tokenize(text);
    if (tokens.empty()) tokens.emplace_back("\x01<empty>");
    for (const auto& t : tokens) {
        const std::uint64_t h = stable_hash(t, seed_);
        const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
        v.values[h % dim_] += sign;
    }
    // Colliding tokens with opposite signs can cancel out completely.
    bool nonzero = false;
    for (double x : v.values) nonzero = nonzero || x != 0.0;
    if (!nonzero) v.values[stable_hash(text, seed_) % dim_] = 1.0;
    return v;
}

std::vector<EmbeddingVector> StubEmbedder::embed(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out(texts.size());
    const auto count = static_cast<std::int64_t>(texts.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) {
        out[static_cast<std::size_t>(i)] = embed_one(texts[static_cast<std::size_t>(i)]);
    }
    return out;
}

std::string StubEmbedder::describe() const {
    return "stub:" + std::to_string(seed_);
}

RemoteEmbedder::RemoteEmbedder(std::string endpoint, std::size_t batch_size, RetryPolicy retry)
    : endpoint_(std::move(endpoint)), batch_size_(batch_size == 0 ? 1 : batch_size), retry_(retry) {}

std::vector<EmbeddingVector> RemoteEmbedder::embed(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    std::size_t dim = 0;
    for (std::size_t start = 0; start < texts.size(); start += batch_size_) {
        const std::size_t end = std::min(texts.size(), start + batch_size_);
        nlohmann::json body{{"texts", std::vector<std::string>(texts.begin() + static_cast<std::ptrdiff_t>(start),
                                                               texts.begin() + static_cast<std::ptrdiff_t>(end))}};
        auto reply = post_json(endpoint_, "/embed", body, retry_);
        const std::string where = endpoint_ + "/embed batch [" + std::to_string(start) + ", " +
                                  std::to_string(end) + ")";
        try {
            const auto& vectors = reply.at("vectors");
            const auto reply_dim = reply.at("dim").get<std::size_t>();
            if (!vectors.is_array() || vectors.size() != end - start) {
                throw RemoteError(where + ": expected " + std::to_string(end - start) + " vectors");
            }
            if (dim == 0) dim = reply_dim;
            if (reply_dim != dim) throw RemoteError(where + ": dim changed between batches");
            for (const auto& v : vectors) {
                EmbeddingVector e{v.get<std::vector<double>>()};
                if (e.dim() != dim) throw RemoteError(where + ": vector length disagrees with dim");
                out.push_back(std::move(e));
            }
        } catch (const nlohmann::json::exception& e) {
            throw RemoteError(where + ": malformed response: " + e.what());
        }
    }
    return out;
}

std::unique_ptr<Embedder> make_embedder(const std::string& plan) {
    if (plan.rfind("stub:", 0) == 0) {
        const std::string seed = plan.substr(5);
        char* end = nullptr;
        const auto value = std::strtoull(seed.c_str(), &end, 10);
        if (seed.empty() || *end != '\0') throw ValidationError("bad stub seed in '" + plan + "'");
        return std::make_unique<StubEmbedder>(value);
    }
    if (plan.rfind("http://", 0) == 0) {
        return std::make_unique<RemoteEmbedder>(plan);
    }
    throw ValidationError("embedder must be 'stub:<seed>' or an http:// URL, got '" + plan + "'");
}

}  // namespace mdr
