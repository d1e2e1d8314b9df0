#include <iostream>
#include <string>
#include <vector>

#include "resokit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return resokit::cli::run(args, std::cout, std::cerr);
}
