#include "fofr/error.hpp"

#include <cstdio>

namespace fofr {

void warn(const std::string& msg) {
  std::fprintf(stderr, "fofr: warning: %s\n", msg.c_str());
}

}  // namespace fofr
