#include "stickygraph/cli_io.hpp"

int main(int argc, char** argv) { return stickygraph::main_dispatch(argc, argv); }
