#include "fkr/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
  return fkr::run_cli(argc, argv, std::cout, std::cerr);
}
