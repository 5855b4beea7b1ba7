#include <string>
#include <vector>

#include "mcfttd/cli/app.hpp"

int main(int argc, char** argv) {
  return mcfttd::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
