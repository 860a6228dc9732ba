#include <httplib.h>

#include <fmt/format.h>

#include "swarmwatch/tracker_client.hpp"

namespace swarmwatch::tracker {

namespace {

class HttplibTransport final : public HttpTransport {
public:
  explicit HttplibTransport(HttpTransportOptions options) : options_(options) {}

  std::string get(const std::string& url) override {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
      throw TrackerError(Errc::bad_url, fmt::format("tracker: malformed URL '{}'", url));
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string origin = url.substr(0, path_start);
    const std::string target = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(origin);
    client.set_url_encode(false);
    client.set_follow_location(true);
    client.set_connection_timeout(options_.connect_timeout);
    client.set_read_timeout(options_.read_timeout);
    client.enable_server_certificate_verification(options_.verify_tls);

    auto result = client.Get(target);
    if (!result)
      throw TrackerError(Errc::transport_error,
                         fmt::format("tracker: GET {} failed: {}", origin, httplib::to_string(result.error())));
    if (result->status != 200)
      throw TrackerError(Errc::transport_error, fmt::format("tracker: GET {} returned HTTP {}", origin, result->status));
    return result->body;
  }

private:
  HttpTransportOptions options_;
};

} // namespace

std::shared_ptr<HttpTransport> make_http_transport(HttpTransportOptions options) {
  return std::make_shared<HttplibTransport>(options);
}

} // namespace swarmwatch::tracker
