#include "harness/harness.hpp"

int main(int argc, char** argv) { return wavegec::harness::run_cli(argc, argv); }
