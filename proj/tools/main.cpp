#include <string>
#include <vector>

#include "cmalight/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cml::cli::run(std::move(args));
}
