#include "elliptlab/cli.hpp"

int main(int argc, char** argv) { return elliptlab::cli::run(argc, argv); }
