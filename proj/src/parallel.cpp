#include "sgame/parallel.hpp"

namespace sgame {

int& worker_threads() {
  static int threads = 1;
  return threads;
}

}  // namespace sgame
