#include "wcp/parallel.hpp"

#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <thread>

namespace wcp {

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  tbb::task_arena arena(jobs);
  arena.execute([&] { tbb::parallel_for(0, n, [&](int i) { fn(i); }); });
}

int default_jobs() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace wcp
