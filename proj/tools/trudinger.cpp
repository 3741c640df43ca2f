// Entry point for the `trudinger` command-line tool.

#include <iostream>
#include <string>
#include <vector>

#include "trudinger/cli.hpp"

int main(int argc, char **argv)
{
   const std::vector<std::string> args(argv + 1, argv + argc);
   return trudinger::cli::cli_main(args, std::cout, std::cerr);
}
