#include <iostream>
#include <string>
#include <vector>

#include "monoapprox/cli/cli.hpp"

int main(int argc, char** argv)
{
    const std::vector<std::string> args(argv, argv + argc);
    return monoapprox::cli::run(args, std::cout, std::cerr);
}
