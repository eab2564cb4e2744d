#include "nmren/cli.hpp"

int main(int argc, char** argv) { return nmren::run_cli(argc, argv); }
