#include "cli.hpp"

int main(int argc, char** argv) { return qsim::app::run_cli(argc, argv); }
