#include "vqrf/harness.hpp"

int main(int argc, char** argv) { return vqrf::run_cli(argc, argv); }
