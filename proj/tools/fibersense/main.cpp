#include "cli.hpp"

int main(int argc, char** argv) { return fibersense::app::run_cli(argc, argv); }
