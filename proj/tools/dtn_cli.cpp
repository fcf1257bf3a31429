#include "dtn/cli.hpp"

int main(int argc, char** argv) { return dtn::cli::dispatch(argc, argv); }
