#include "varmin/cli.hpp"

int main(int argc, char** argv) { return varmin::run_cli(argc, argv); }
