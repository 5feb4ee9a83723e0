#include <string>
#include <vector>

#include "fieldctr/cli.hpp"

int main(int argc, char** argv) {
  return fieldctr::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
