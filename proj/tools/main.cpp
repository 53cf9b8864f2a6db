#include "tailcast/cli.hpp"

int main(int argc, char** argv)
{
    return tailcast::run_cli(argc, argv);
}
