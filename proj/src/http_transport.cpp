#include <httplib.h>

#include "tablesage/errors.hpp"
#include "tablesage/llm.hpp"

namespace tablesage {
namespace {

struct Endpoint {
  std::string origin;
  std::string path;
};

Endpoint split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ArgumentError("endpoint '" + url + "' has no scheme");
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    return {url, "/"};
  }
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport : public HttpTransport {
 public:
  HttpResponse post(const std::string& url, const std::string& body,
                    const std::vector<std::pair<std::string, std::string>>& headers,
                    std::chrono::seconds timeout) override {
    Endpoint endpoint = split_url(url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (endpoint.origin.rfind("https://", 0) == 0) {
      throw TransportError("https endpoints need a build with OpenSSL");
    }
#endif
    httplib::Client client(endpoint.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers h;
    for (const auto& [name, value] : headers) {
      h.emplace(name, value);
    }
    auto result = client.Post(endpoint.path, h, body, "application/json");
    HttpResponse response;
    if (!result) {
      response.error = httplib::to_string(result.error());
      return response;
    }
    response.status = result->status;
    response.body = result->body;
    return response;
  }
};

}  // namespace

std::unique_ptr<HttpTransport> make_default_transport() {
  return std::make_unique<HttplibTransport>();
}

}  // namespace tablesage
