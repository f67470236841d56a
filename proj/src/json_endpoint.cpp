#include "json_endpoint.hpp"

#include "roboaug/errors.hpp"

#include <httplib.h>

namespace roboaug::detail {

std::string split_endpoint_params(std::string_view uri, std::map<std::string, std::string>& params)
{
    const auto q = uri.find('?');
    if (q == std::string_view::npos)
        return std::string(uri);
    std::string_view rest = uri.substr(q + 1);
    while (!rest.empty()) {
        const auto amp = rest.find('&');
        const auto item = rest.substr(0, amp);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos || eq == 0)
            throw ConfigError("backend parameter must be key=value, got '" + std::string(item) + "'");
        params[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
        rest = amp == std::string_view::npos ? std::string_view{} : rest.substr(amp + 1);
    }
    return std::string(uri.substr(0, q));
}

JsonEndpoint::JsonEndpoint(std::string uri, int timeout_ms, bool concurrent)
    : uri_(std::move(uri)), timeout_ms_(timeout_ms), concurrent_(concurrent)
{
    while (!uri_.empty() && uri_.back() == '/')
        uri_.pop_back();
    const auto scheme = uri_.find("://");
    if (scheme == std::string::npos || uri_.compare(0, scheme, "http") != 0)
        throw ConfigError("backend endpoint must be an http:// URI, got '" + uri_ + "'");
    const auto slash = uri_.find('/', scheme + 3);
    origin_ = uri_.substr(0, slash);
    prefix_ = slash == std::string::npos ? std::string{} : uri_.substr(slash);
}

nlohmann::json JsonEndpoint::post(std::string_view route, const nlohmann::json& body) const
{
    std::unique_lock<std::mutex> lock(mutex_, std::defer_lock);
    if (!concurrent_)
        lock.lock();

    httplib::Client client(origin_);
    const auto sec = timeout_ms_ / 1000;
    const auto usec = (timeout_ms_ % 1000) * 1000;
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);

    const std::string path = prefix_ + std::string(route);
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res)
        throw BackendError("backend " + uri_ + path + " unreachable: " + httplib::to_string(res.error()));

    nlohmann::json reply;
    try {
        reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error&) {
        if (res->status != 200)
            throw BackendError("backend " + uri_ + path + " returned HTTP " + std::to_string(res->status));
        throw ProtocolError("backend " + uri_ + path + " returned a non-JSON body");
    }
    if (res->status != 200) {
        std::string msg = "backend " + uri_ + path + " returned HTTP " + std::to_string(res->status);
        if (reply.is_object() && reply.contains("error") && reply["error"].is_string())
            msg += ": " + reply["error"].get<std::string>();
        throw BackendError(msg);
    }
    if (!reply.is_object())
        throw ProtocolError("backend " + uri_ + path + " reply is not a JSON object");
    return reply;
}

} // namespace roboaug::detail
