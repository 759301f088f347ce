#include <iostream>

#include "coaat/cli.hpp"

int main(int argc, char** argv)
{
    return coaat::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
