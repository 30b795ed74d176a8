#include "smpstop/cli.hpp"

int main(int argc, char** argv) { return smpstop::cli::run(argc, argv); }
