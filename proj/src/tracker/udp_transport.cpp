#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include <fmt/format.h>

#include "swarmwatch/tracker_client.hpp"

namespace swarmwatch::tracker {

namespace {

class Socket {
public:
  Socket() : fd_(::socket(AF_INET, SOCK_DGRAM, 0)) {
    if (fd_ < 0) throw TrackerError(Errc::transport_error, fmt::format("tracker: socket: {}", std::strerror(errno)));
  }
  ~Socket() { ::close(fd_); }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  int fd() const { return fd_; }

private:
  int fd_;
};

sockaddr_in resolve(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_DGRAM;
  addrinfo* found = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), nullptr, &hints, &found); rc != 0 || found == nullptr)
    throw TrackerError(Errc::transport_error, fmt::format("tracker: cannot resolve '{}': {}", host, gai_strerror(rc)));
  sockaddr_in addr{};
  std::memcpy(&addr, found->ai_addr, sizeof(addr));
  ::freeaddrinfo(found);
  addr.sin_port = htons(port);
  return addr;
}

class UdpTransport final : public DatagramTransport {
public:
  std::optional<std::string> exchange(const std::string& host, std::uint16_t port, std::string_view payload,
                                      std::chrono::milliseconds timeout) override {
    const sockaddr_in to = resolve(host, port);
    Socket sock;
    if (::sendto(sock.fd(), payload.data(), payload.size(), 0, reinterpret_cast<const sockaddr*>(&to), sizeof(to)) < 0)
      return std::nullopt;

    const auto deadline = std::chrono::steady_clock::now() + timeout;
    std::string buffer(65536, '\0');
    for (;;) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) return std::nullopt;
      pollfd pfd{sock.fd(), POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (ready < 0 && errno == EINTR) continue;
      if (ready <= 0) return std::nullopt;
      sockaddr_in from{};
      socklen_t from_len = sizeof(from);
      const ssize_t n = ::recvfrom(sock.fd(), buffer.data(), buffer.size(), 0, reinterpret_cast<sockaddr*>(&from), &from_len);
      if (n < 0) continue;
      if (from.sin_addr.s_addr != to.sin_addr.s_addr || from.sin_port != to.sin_port) continue;
      buffer.resize(static_cast<std::size_t>(n));
      return buffer;
    }
  }
};

} // namespace

std::shared_ptr<DatagramTransport> make_udp_transport() { return std::make_shared<UdpTransport>(); }

} // namespace swarmwatch::tracker
