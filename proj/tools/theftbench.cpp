#include <string>
#include <vector>

#include "etd/cli.hpp"

int main(int argc, char** argv) {
  return etd::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
