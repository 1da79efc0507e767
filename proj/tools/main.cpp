#include "cli.hpp"

int main(int argc, char** argv) { return attrmtl::cli::run(argc, argv); }
