#include "mdr/scorer_client.hpp"

#include <thread>

#include <httplib.h>

#include "mdr/errors.hpp"

namespace mdr {

nlohmann::json post_json(const std::string& endpoint, const std::string& route,
                         const nlohmann::json& body, const RetryPolicy& retry) {
    httplib::Client client(endpoint);
    client.set_connection_timeout(5);
    client.set_read_timeout(120);
    const std::string payload = body.dump();

    auto backoff = retry.initial_backoff;
    std::string last_error;
    const int attempts = std::max(1, retry.attempts);
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        auto res = client.Post(route, payload, "application/json");
        if (!res) {
            last_error = "connection failed: " + httplib::to_string(res.error());
        } else if (res->status >= 500 || res->status == 429) {
            last_error = "HTTP " + std::to_string(res->status);
        } else if (res->status != 200) {
            throw RemoteError(endpoint + route + " rejected the request: HTTP " +
                              std::to_string(res->status) + " " + res->body);
        } else {
            try {
                return nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::parse_error& e) {
                throw RemoteError(endpoint + route + " returned malformed JSON: " + e.what());
            }
        }
        if (attempt < attempts) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    throw RemoteError(endpoint + route + " unavailable after " + std::to_string(attempts) +
                      " attempts (" + last_error + ")");
}

}  // namespace mdr
