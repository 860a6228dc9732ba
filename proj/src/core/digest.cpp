#include "swarmwatch/digest.hpp"

#include <stdexcept>

#include <openssl/evp.h>

namespace swarmwatch {

Digest20 sha1(std::string_view data) {
  Digest20::Bytes out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha1(), nullptr) != 1 || len != Digest20::size)
    throw std::runtime_error("sha1: digest failed");
  return Digest20{out};
}

} // namespace swarmwatch
