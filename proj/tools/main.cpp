#include "ksrg/cli.hpp"

int main(int argc, char** argv) { return ksrg::cli::run(argc, argv); }
