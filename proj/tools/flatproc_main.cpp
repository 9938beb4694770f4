#include <iostream>
#include <string>
#include <vector>

#include "flatproc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return flatproc::cli::run(args, std::cout, std::cerr);
}
