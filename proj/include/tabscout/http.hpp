#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace tabscout::http {

struct Response {
    int status = 0;
    std::string body;
};

/// POST a JSON body to an absolute http(s) URL. Throws tabscout::IoError on
/// transport failure; HTTP error statuses are returned, not thrown.
Response post_json(const std::string& url, const std::string& body,
                   const std::vector<std::pair<std::string, std::string>>& headers,
                   std::chrono::seconds timeout);

} // namespace tabscout::http
