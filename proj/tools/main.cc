#include <iostream>
#include <string>
#include <vector>

#include "cli.h"

int main(int argc, char** argv) {
  return destructure::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
