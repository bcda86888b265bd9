#include "lcq/rng.hpp"

#include <cmath>

namespace lcq {

double Rng::normal() {
    // Box-Muller on two fresh uniforms; u1 bounded away from zero.
    double u1 = uniform01();
    if (u1 < 0x1.0p-53) u1 = 0x1.0p-53;
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace lcq
