#pragma once

#include <cstdint>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mshdg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace detail {
inline void require_failed(const char* expr, const std::string& msg) {
  std::ostringstream os;
  os << msg << " (check `" << expr << "` failed)";
  throw std::runtime_error(os.str());
}
}  // namespace detail

#define MSHDG_REQUIRE(cond, msg)                        \
  do {                                                  \
    if (!(cond)) ::mshdg::detail::require_failed(#cond, (msg)); \
  } while (0)

/// Fixed 64-bit linear congruential generator (Knuth MMIX constants).
/// Used for every pseudo-random choice in the library so that meshes,
/// sampled states, and boundary data are identical across platforms.
class Lcg {
 public:
  explicit Lcg(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ = 6364136223846793005ULL * state_ + 1442695040888963407ULL;
    return state_;
  }

  /// Uniform double in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [-1, 1).
  double next_symmetric() { return 2.0 * next_double() - 1.0; }

  /// Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
};

/// Decimal form with 17 significant digits; round-trips any finite double.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline double inf_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace mshdg
