#include <iostream>

#include "spherecover/cli.hpp"

int main(int argc, char** argv) {
  return spherecover::cli::run_cli(argc, argv, std::cout, std::cerr);
}
