#include <iostream>

#include "fntag/cli.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  fntag::RunConfig config;
  if (auto status = fntag::parse_command_line(argc, argv, config, std::cout, std::cerr)) {
    return *status;
  }
  return fntag::run(config, std::cin, std::cout, std::cerr);
}
