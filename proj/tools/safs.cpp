#include "safs/cli.hpp"

#include <string>
#include <vector>

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    const auto parsed = safs::cli::parse_args(args);
    if (!parsed.config) return parsed.exit_code;
    return safs::cli::run(*parsed.config);
}
