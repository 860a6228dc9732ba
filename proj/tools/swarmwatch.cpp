#include <iostream>
#include <string>
#include <vector>

#include "swarmwatch/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return swarmwatch::cli::run(args, std::cout, std::cerr);
}
