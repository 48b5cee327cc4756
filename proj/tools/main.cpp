#include "pvcast/cli.hpp"

int main(int argc, char** argv) { return pvcast::cli::run(argc, argv); }
