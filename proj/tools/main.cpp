#include "dupviper/cli.hpp"

int main(int argc, char** argv) { return dupviper::run_cli(argc, argv); }
