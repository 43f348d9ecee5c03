#include "procnets/errors.hpp"

#include <cstdio>

namespace procnets {

void warn(const std::string& message) {
  std::fprintf(stderr, "[warn] %s\n", message.c_str());
}

}  // namespace procnets
