#pragma once

#include <stdexcept>
#include <string>

namespace censornet {

enum class errc {
  invalid_argument = 1,
  invalid_scenario = 2,
  budget_exceeded = 3,
  degenerate = 4,
  no_convergence = 5,
  io = 6,
  out_of_range = 7,
};

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

}  // namespace censornet
