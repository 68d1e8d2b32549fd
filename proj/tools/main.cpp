#include <iostream>
#include <string>
#include <vector>

#include "hconv/cli.hpp"

int main(int argc, char** argv) {
  return hconv::cli::Run(std::vector<std::string>(argv + 1, argv + argc),
                         std::cout, std::cerr);
}
