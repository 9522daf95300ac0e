#include <iostream>

#include "pwlqp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pwlqp::cli::run(args, std::cout, std::cerr);
}
