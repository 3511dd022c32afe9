#pragma once

#include <string>

#include "summactl/errors.hpp"

namespace summactl {

// "https://host:port/path" split into the client base and the request path.
struct HttpTarget {
    std::string base;  // scheme://host[:port]
    std::string path;  // /path, "/" when absent
};

inline HttpTarget split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw IoError("URL missing scheme: " + url);
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace summactl
