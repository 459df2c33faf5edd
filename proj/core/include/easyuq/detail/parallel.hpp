#ifndef EASYUQ_DETAIL_PARALLEL_HPP
#define EASYUQ_DETAIL_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace easyuq::detail {

// Runs body(0..count-1) on up to `threads` workers (0 = hardware
// concurrency).  The first exception thrown by any body is rethrown on
// the caller's thread after all workers join.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace easyuq::detail

#endif  // EASYUQ_DETAIL_PARALLEL_HPP
