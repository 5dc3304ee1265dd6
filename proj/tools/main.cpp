#include <iostream>
#include <string>
#include <vector>

#include "rotor/cli.hpp"

int main(int argc, char** argv)
{
    const std::vector<std::string> args(argv + 1, argv + argc);
    return rotor::app::run(args, std::cout, std::cerr);
}
