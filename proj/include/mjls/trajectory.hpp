#pragma once

#include <Eigen/Dense>
#include <vector>

namespace mjls {

// One closed-loop step. u is the applied input, excitation noise included;
// x_next is the dynamics successor A_theta x + B_theta u. usable is false
// only when the successor breached the overflow guard, in which case the
// record is kept in the trajectory but excluded from regression.
struct StepRecord {
  long k = 0;
  Eigen::VectorXd x;
  Eigen::VectorXd u;
  int theta = 0;  // 0-based
  Eigen::VectorXd x_next;
  bool usable = true;
};

// Time-indexed records plus the per-mode index lists r_{i,l}: position p is
// in mode_index[i] iff records[p].theta == i, each list strictly
// increasing, and the lists partition all record positions.
struct Trajectory {
  std::vector<StepRecord> records;
  std::vector<std::vector<long>> mode_index;
  long decay_resets = 0;
  long overflow_resets = 0;

  void rebuild_mode_index(int mode_count) {
    mode_index.assign(static_cast<std::size_t>(mode_count), {});
    for (std::size_t p = 0; p < records.size(); ++p) {
      mode_index[static_cast<std::size_t>(records[p].theta)].push_back(static_cast<long>(p));
    }
  }
};

}  // namespace mjls
