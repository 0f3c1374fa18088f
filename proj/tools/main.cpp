#include <string>
#include <vector>

#include "duphist/cli/commands.hpp"

int main(int argc, char** argv) {
  duphist::configure_logging();
  return duphist::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
