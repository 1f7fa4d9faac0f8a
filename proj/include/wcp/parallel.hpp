#pragma once

#include <functional>

namespace wcp {

/// Runs fn(0..n-1) on up to `jobs` workers. Results must not depend on the schedule.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

/// Worker count when the user does not set one.
int default_jobs();

}  // namespace wcp
