#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "mdr/embedder.hpp"

namespace mdr {

/// POSTs `body` to `endpoint + route` and returns the parsed JSON reply.
/// Connection failures and 5xx/429 replies are retried with exponential
/// backoff; other 4xx replies and unparseable bodies fail at once. All
/// failures surface as RemoteError.
nlohmann::json post_json(const std::string& endpoint, const std::string& route,
                         const nlohmann::json& body, const RetryPolicy& retry);

}  // namespace mdr
