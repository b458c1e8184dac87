#include <iostream>

#include <swsearch/cli.hpp>

int main(int argc, char** argv)
{
    return swsearch::run_cli(argc, argv, std::cout, std::cerr);
}
