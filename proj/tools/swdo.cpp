#include <string>
#include <vector>

#include "swdo/cli.hpp"

int main(int argc, char** argv) { return swdo::cli::run(std::vector<std::string>(argv + 1, argv + argc)); }
