#include "cli/dispatch.hpp"

#include <iostream>

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return netdiff::cli::dispatch(args, std::cout, std::cerr);
}
