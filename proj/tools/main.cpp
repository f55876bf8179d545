#include <iostream>
#include <string>
#include <vector>

#include "mcre/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mcre::cli::run(args, std::cout, std::cerr);
}
