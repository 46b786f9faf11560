#include <ctxcalc/cli.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    return ctxcalc::cli::run(argc, argv, std::cout, std::cerr);
}
