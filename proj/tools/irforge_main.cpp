#include "irforge/cli.hpp"

int main(int argc, char** argv) { return irforge::run_cli(argc, argv); }
