#include "eegscrub/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return eegscrub::cli::run_main(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
