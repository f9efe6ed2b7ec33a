#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <vector>

namespace mdr {

/// Fixed-dimension embedding. Contents are opaque to everything except cosine.
struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
    bool operator==(const EmbeddingVector&) const = default;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    /// One vector per text, order-aligned.
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
    virtual std::string describe() const = 0;
};

/// Offline embedder: signed feature hashing of default-tokenizer tokens.
/// Deterministic across platforms for a given seed and dimension. Texts
/// without tokens hash a fixed sentinel so the vector is never all-zero.
class StubEmbedder final : public Embedder {
public:
    explicit StubEmbedder(std::uint64_t seed, std::size_t dim = 256);
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    std::string describe() const override;

    EmbeddingVector embed_one(const std::string& text) const;

private:
    std::uint64_t seed_;
    std::size_t dim_;
};

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{250};
};

/// Client for the scorer service's `POST /embed {texts} -> {vectors, dim}`.
class RemoteEmbedder final : public Embedder {
public:
    RemoteEmbedder(std::string endpoint, std::size_t batch_size = 32, RetryPolicy retry = {});
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    std::string describe() const override { return endpoint_; }

private:
    std::string endpoint_;
    std::size_t batch_size_;
    RetryPolicy retry_;
};

/// `stub:<seed>` or `http://host:port`.
std::unique_ptr<Embedder> make_embedder(const std::string& plan);

}  // namespace mdr
