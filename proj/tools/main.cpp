#include "cli.hpp"

int main(int argc, char** argv) { return mscorr::cli::run_cli(argc, argv); }
