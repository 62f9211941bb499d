#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "luresid/model.hpp"
#include "luresid/types.hpp"

namespace luresid {

/// Generation recipe for the synthetic benchmark: four trajectory families
/// (sinusoidal / uniform-noise inputs, each with random or zero initial
/// state), all driven through the fixed data-generating system.
struct GenConfig {
  Index n_sin = 300;
  Index n_noise = 300;
  Index n_sin_zero = 150;
  Index n_noise_zero = 150;
  Index length = 50;
  double dt = 0.1;
  double x0_range = 6.0;
  double alpha_true = 0.97;
  // Region scale of the true system at alpha_true; <= 0 means "compute it
  // with the post-processing SDP at generation time".
  double s_true = 0.0;
  std::uint64_t seed = 0;

  [[nodiscard]] Index total() const {
    return n_sin + n_noise + n_sin_zero + n_noise_zero;
  }
  void validate() const;
};

struct Dataset {
  GenConfig config;            // with s_true resolved
  Dimensions dims;
  double delta = 0.0;          // max |u| over all steps and channels
  std::vector<Trajectory> trajectories;

  [[nodiscard]] double recompute_delta() const;
  [[nodiscard]] Index num_points() const;
  void validate() const;
};

/// The benchmark's data-generating system (n=2, r=1, e=1, m=2). Linear part
/// is stable; the deadzone feedback destabilizes large states, so regional
/// analysis is the interesting regime.
ModelParams true_system();

/// Best certified region scale s for true_system() at the given alpha,
/// obtained from the post-processing SDP with no input-bound restriction
/// (the admissible delta is derived from s afterwards).
double true_region_scale(double alpha);

Dataset generate(const GenConfig& config);

/// Companion held-out set: same families at 10% size (at least one
/// trajectory per nonempty family), decorrelated seed.
GenConfig make_test_config(const GenConfig& train);

void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

/// One CSV per trajectory, header k,u1..ur,y1..ye.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

}  // namespace luresid
