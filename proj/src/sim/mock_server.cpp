#include "swarmwatch/sim.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <fmt/format.h>
#include <httplib.h>

namespace swarmwatch::sim {

struct MockTrackerServer::Impl {
  MockTracker& tracker;
  httplib::Server http;
  int http_port = 0;
  std::thread http_thread;
  int udp_fd = -1;
  int udp_port = 0;
  std::thread udp_thread;
  std::atomic<bool> running{true};

  explicit Impl(MockTracker& t) : tracker(t) {}

  void serve_udp() {
    std::string buffer(65536, '\0');
    while (running) {
      pollfd pfd{udp_fd, POLLIN, 0};
      if (::poll(&pfd, 1, 50) <= 0) continue;
      sockaddr_in from{};
      socklen_t len = sizeof(from);
      const auto n = ::recvfrom(udp_fd, buffer.data(), buffer.size(), 0, reinterpret_cast<sockaddr*>(&from), &len);
      if (n <= 0) continue;
      if (auto reply = tracker.handle_udp(std::string_view(buffer.data(), static_cast<std::size_t>(n))))
        ::sendto(udp_fd, reply->data(), reply->size(), 0, reinterpret_cast<sockaddr*>(&from), len);
    }
  }
};

MockTrackerServer::MockTrackerServer(MockTracker& tracker) : impl_(std::make_unique<Impl>(tracker)) {
  auto& im = *impl_;
  auto handler = [&im](const httplib::Request& req, httplib::Response& res) {
    res.set_content(im.tracker.handle_http(req.target), "text/plain");
  };
  im.http.Get("/announce", handler);
  im.http.Get("/scrape", handler);
  im.http_port = im.http.bind_to_any_port("127.0.0.1");
  if (im.http_port <= 0) throw std::runtime_error("mock tracker: cannot bind HTTP port");
  im.http_thread = std::thread([&im] { im.http.listen_after_bind(); });

  im.udp_fd = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (im.udp_fd < 0) throw std::runtime_error("mock tracker: cannot open UDP socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  socklen_t len = sizeof(addr);
  if (::bind(im.udp_fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::getsockname(im.udp_fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    stop();
    throw std::runtime_error("mock tracker: cannot bind UDP port");
  }
  im.udp_port = ntohs(addr.sin_port);
  im.udp_thread = std::thread([&im] { im.serve_udp(); });
  im.http.wait_until_ready();
}

MockTrackerServer::~MockTrackerServer() { stop(); }

std::string MockTrackerServer::http_announce_url() const {
  return fmt::format("http://127.0.0.1:{}/announce", impl_->http_port);
}

std::string MockTrackerServer::udp_announce_url() const {
  return fmt::format("udp://127.0.0.1:{}/announce", impl_->udp_port);
}

void MockTrackerServer::stop() {
  auto& im = *impl_;
  im.running = false;
  im.http.stop();
  if (im.http_thread.joinable()) im.http_thread.join();
  if (im.udp_thread.joinable()) im.udp_thread.join();
  if (im.udp_fd >= 0) {
    ::close(im.udp_fd);
    im.udp_fd = -1;
  }
}

} // namespace swarmwatch::sim
