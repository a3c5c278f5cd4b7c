#include "ratekit/cli.hpp"

int main(int argc, char** argv) { return ratekit::cli::dispatch(argc, argv); }
