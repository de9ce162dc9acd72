#pragma once

#include <memory>
#include <string>

#include <httplib.h>

#include "swarmgraph/http_executor.hpp"

namespace swarmgraph {

/// Transport backed by cpp-httplib. HTTPS requires a build with OpenSSL
/// support; without it connections to https:// URLs fail with TransportError.
class HttplibTransport : public HttpTransport {
 public:
  explicit HttplibTransport(std::string base_url)
      : base_url_(std::move(base_url)) {}

  HttpResponse post(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& headers,
                    const std::string& body) override {
    httplib::Client client(base_url_);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto result = client.Post(path, h, body, "application/json");
    if (!result) {
      throw TransportError("request to " + base_url_ + path +
                           " failed: " + httplib::to_string(result.error()));
    }
    return {result->status, result->body};
  }

 private:
  std::string base_url_;
};

inline std::shared_ptr<HttpTransport> make_httplib_transport(
    const std::string& base_url) {
  return std::make_shared<HttplibTransport>(base_url);
}

}  // namespace swarmgraph
