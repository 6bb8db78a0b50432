#include "ecoforge/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return ecoforge::cli::run(argc, argv, std::cout, std::cerr);
}
