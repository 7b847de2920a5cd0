#pragma once

// HTTP client for historical prices. The endpoint answers
// `GET <path>?symbol=..&start=YYYY-MM-DD&end=YYYY-MM-DD` with the price CSV.

#include <chrono>
#include <string>
#include <thread>

// Eigen must precede httplib.h, which pulls in system headers that clash
// with Eigen's product kernels.
#include "sectorfolio/date.hpp"
#include "sectorfolio/error.hpp"
#include "sectorfolio/market_data.hpp"

#include <httplib.h>

namespace sectorfolio {

struct FetchOptions {
    int max_attempts = 3;
    std::chrono::milliseconds backoff{250}; // multiplied by the attempt number
    std::chrono::seconds timeout{30};
    ParseOptions parse;
};

namespace detail {

struct SplitUrl {
    std::string origin; // scheme://host[:port]
    std::string path;
};

inline SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw std::invalid_argument("endpoint must be an absolute URL: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos)
        return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

} // namespace detail

inline PriceSeries fetch_history(const std::string& symbol, Date start, Date end,
                                 const std::string& endpoint, const FetchOptions& options = {}) {
    if (!(start < end))
        throw std::invalid_argument("fetch_history: start " + start.to_string() +
                                    " must precede end " + end.to_string());
    auto url = detail::split_url(endpoint);
    httplib::Client client(url.origin);
    client.set_connection_timeout(options.timeout);
    client.set_read_timeout(options.timeout);
    httplib::Params params{{"symbol", symbol}, {"start", start.to_string()},
                           {"end", end.to_string()}};

    std::string last_error;
    for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
        if (attempt > 1)
            std::this_thread::sleep_for(options.backoff * (attempt - 1));
        auto res = client.Get(url.path, params, httplib::Headers{});
        if (!res) {
            last_error = "network error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw FetchError(symbol + ": HTTP " + std::to_string(res->status) + " from " + endpoint);
        if (res->body.empty())
            throw FetchError(symbol + ": empty response body from " + endpoint);
        return parse_csv(res->body, symbol, options.parse);
    }
    throw FetchError(symbol + ": giving up after " + std::to_string(options.max_attempts) +
                     " attempts (" + last_error + ")");
}

} // namespace sectorfolio
