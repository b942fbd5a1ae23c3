#include "coxthin/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace coxthin {

int max_threads() {
  int nt = omp_get_max_threads();
  if (const char* cap = std::getenv("COXTHIN_THREADS")) {
    try {
      int c = std::stoi(cap);
      if (c >= 1 && c < nt) nt = c;
    } catch (...) {
      // unparseable cap is ignored
    }
  }
  return nt;
}

}  // namespace coxthin
