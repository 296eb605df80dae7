#include "app.hpp"

extern char** environ;

int main(int argc, char** argv) { return trapfield::cli::main_entry(argc, argv, environ); }
