#include "rks/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return rks::run_cli(argc, argv, std::cout, std::cerr);
}
