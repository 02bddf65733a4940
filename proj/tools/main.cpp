#include "splinequad/cli.hpp"

int main(int argc, char** argv) { return splinequad::run_cli(argc, argv); }
