// Regenerates corpus/ from the entries compiled into the library.
#include <iostream>

#include "mlq/suite.hpp"

int main(int argc, char** argv) {
  if (argc != 2 || argv[1][0] == '-') {
    std::cerr << "usage: export_corpus DIR\n";
    return 3;
  }
  mlq::export_corpus(mlq::corpus(), argv[1]);
  return 0;
}
