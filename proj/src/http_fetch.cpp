#include "pcbench/manifest.hpp"

// httplib's transitive system headers leak macros that clash with Eigen's
// template parameter names, so it must come after the project headers.
#ifdef PCBENCH_WITH_TLS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

namespace pcbench {

namespace {

// Splits "http(s)://host[:port]/path" into the scheme+host part httplib wants
// and the request path.
bool split_url(const std::string& url, std::string& origin, std::string& path) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return false;
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    origin = url;
    path = "/";
  } else {
    origin = url.substr(0, path_start);
    path = url.substr(path_start);
  }
  return true;
}

}  // namespace

bool http_get(const std::string& url, std::string& body, std::string& error) {
  std::string origin, path;
  if (!split_url(url, origin, path)) {
    error = "malformed URL: " + url;
    return false;
  }
#ifndef PCBENCH_WITH_TLS
  if (url.starts_with("https://")) {
    error = "built without TLS support, cannot fetch " + url;
    return false;
  }
#endif
  httplib::Client client(origin);
  client.set_follow_location(true);
  client.set_connection_timeout(20, 0);
  client.set_read_timeout(120, 0);
  auto res = client.Get(path);
  if (!res) {
    error = "request failed: " + httplib::to_string(res.error());
    return false;
  }
  if (res->status != 200) {
    error = "HTTP " + std::to_string(res->status) + " for " + url;
    return false;
  }
  body = std::move(res->body);
  return true;
}

}  // namespace pcbench
