#include <iostream>
#include <string>
#include <vector>

#include "k3arith/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return k3arith::cli::run(std::move(args), std::cin, std::cout, std::cerr);
}
