#pragma once

#include <vector>

namespace shm {

/// u(t) = s_m on [phi_m, phi_{m+1}) with phi_0 = 0 and phi_{M+1} = pi.
struct StaircaseSignal {
  std::vector<double> levels;  // s_0 .. s_M
  std::vector<double> angles;  // phi_1 .. phi_M, radians

  int switches() const { return static_cast<int>(angles.size()); }
  bool operator==(const StaircaseSignal&) const = default;
};

}  // namespace shm
