#include "gwmd/cli.hpp"

int main(int argc, char** argv) { return gwmd::cli::run(argc, argv); }
