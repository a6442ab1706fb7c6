#pragma once

#include <exception>

namespace atex {

// Captures the first exception thrown inside an OpenMP worker so it can be
// rethrown on the calling thread, keeping parallel error contracts identical
// to the serial ones.
class ExceptionCollector {
 public:
  template <class Fn>
  void run(Fn&& fn) noexcept {
    try {
      fn();
    } catch (...) {
#pragma omp critical(atex_exception_collector)
      if (!first_) first_ = std::current_exception();
    }
  }

  void rethrow() const {
    if (first_) std::rethrow_exception(first_);
  }

 private:
  std::exception_ptr first_;
};

}  // namespace atex
