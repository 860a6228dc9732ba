#pragma once

#include <string_view>

#include "swarmwatch/net.hpp"

namespace swarmwatch {

Digest20 sha1(std::string_view data);

} // namespace swarmwatch
