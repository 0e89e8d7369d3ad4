#include <string>
#include <vector>

#include "skr/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return skr::cli::run(std::move(args));
}
