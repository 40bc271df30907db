#include <iostream>
#include <string>
#include <vector>

#include "modlik/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return modlik::cli::run(args, std::cout, std::cerr);
}
