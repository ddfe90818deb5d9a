#include <iostream>

#include "qml/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return qml::run_cli(args, std::cout, std::cerr);
}
