#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "tabscout/http.hpp"

#include <httplib.h>

#include "tabscout/error.hpp"

namespace tabscout::http {

namespace {

struct SplitUrl {
    std::string origin; ///< scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw IoError("invalid URL '" + url + "': missing scheme");
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

} // namespace

Response post_json(const std::string& url, const std::string& body,
                   const std::vector<std::pair<std::string, std::string>>& headers,
                   std::chrono::seconds timeout) {
    auto [origin, path] = split_url(url);
    httplib::Client client(origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers request_headers;
    for (const auto& [name, value] : headers) {
        request_headers.emplace(name, value);
    }
    auto result = client.Post(path, request_headers, body, "application/json");
    if (!result) {
        throw IoError("POST " + url + " failed: " + httplib::to_string(result.error()));
    }
    return {result->status, result->body};
}

} // namespace tabscout::http
