#include "nfaq/cli.hpp"

int main(int argc, char** argv) { return nfaq::run_cli(argc, argv); }
