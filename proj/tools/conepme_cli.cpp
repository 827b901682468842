#include "conepme/harness/cli.hpp"

int main(int argc, char** argv) { return conepme::harness::run_cli(argc, argv); }
