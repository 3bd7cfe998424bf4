#include "cli.hpp"

int main(int argc, char** argv) { return pvq::cli::run(argc, argv); }
