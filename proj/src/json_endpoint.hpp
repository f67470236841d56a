#pragma once

#include <nlohmann/json.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

namespace roboaug::detail {

/// JSON-over-HTTP POST client for out-of-process model servers. Requests are
/// serialized unless the server is declared concurrent.
/// Splits "http://host:port/prefix?k=v&k2=v2" into the endpoint and its
/// backend params; keys already in `params` are overwritten.
std::string split_endpoint_params(std::string_view uri, std::map<std::string, std::string>& params);

class JsonEndpoint {
public:
    JsonEndpoint(std::string uri, int timeout_ms, bool concurrent);

    /// Throws BackendError when unreachable, timed out or non-200 (message
    /// carries the endpoint and the server's "error" field), ProtocolError when
    /// the body is not a JSON object.
    nlohmann::json post(std::string_view route, const nlohmann::json& body) const;

    const std::string& uri() const noexcept { return uri_; }

private:
    std::string uri_;
    std::string origin_;
    std::string prefix_;
    int timeout_ms_;
    bool concurrent_;
    mutable std::mutex mutex_;
};

} // namespace roboaug::detail
