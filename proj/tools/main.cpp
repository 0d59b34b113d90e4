#include "evline/cli.hpp"

int main(int argc, char** argv) { return evline::run_cli(argc, argv); }
