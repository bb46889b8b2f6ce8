#include "imcf/log.hpp"

#include <atomic>
#include <cstdlib>

#include "imcf/errors.hpp"

namespace imcf {

SingularityError::SingularityError(std::size_t node, double theta, double psi, double denominator)
    : std::runtime_error(fmt::format(
          "flow denominator nonpositive ({:.6e}) at node {} (theta={:.6f}, psi={:.6f})",
          denominator, node, theta, psi)),
      node_(node),
      theta_(theta),
      psi_(psi),
      denominator_(denominator) {}

namespace log {
namespace {
std::atomic<int>& level_storage() {
  static std::atomic<int> storage = [] {
    const char* env = std::getenv("IMCF_LOG");
    return static_cast<int>(env != nullptr ? parse_level(env) : Level::info);
  }();
  return storage;
}
}  // namespace

Level parse_level(std::string_view text) {
  if (text == "error") { return Level::error; }
  if (text == "debug") { return Level::debug; }
  return Level::info;
}

Level threshold() { return static_cast<Level>(level_storage().load(std::memory_order_relaxed)); }

void set_threshold(Level level) {
  level_storage().store(static_cast<int>(level), std::memory_order_relaxed);
}

}  // namespace log
}  // namespace imcf
