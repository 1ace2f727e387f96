#include <iostream>
#include <string>
#include <vector>

#include "phylopt/cli.hpp"

int main(int argc, char** argv) {
  return phylopt::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
