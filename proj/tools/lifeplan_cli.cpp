#include "lifeplan/cli.hpp"

int main(int argc, char** argv) { return lifeplan::run_cli(argc, argv); }
