#include <iostream>

#include "lcr/cli.hpp"

int main(int argc, char** argv) {
  return lcr::cli::run({argv, argv + argc}, std::cout, std::cerr);
}
