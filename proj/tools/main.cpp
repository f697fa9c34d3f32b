#include "tclfit/cli.hpp"

int main(int argc, char** argv) { return tclfit::run_cli(argc, argv); }
