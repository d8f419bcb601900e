// SPDX-License-Identifier: Apache-2.0
//
// nfisac - secure near-field MIMO ISAC link-level simulator
// Copyright (C) 2025-2026 the nfisac contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef NFISAC_BELIEF_HPP
#define NFISAC_BELIEF_HPP

#include <random>
#include <utility>
#include <vector>

#include "nfisac/common.hpp"

namespace nfisac::belief {

// Discrete angular posterior over eavesdropper azimuth. The grid spans
// [-90, +90] degrees; kernel_width_deg is the transition-kernel sigma.
struct AngularBelief {
  std::vector<double> probs;
  std::vector<double> grid_deg;
  double kernel_width_deg = 5.0;

  static AngularBelief uniform(int num_bins, double kernel_width_deg);
  int size() const { return static_cast<int>(probs.size()); }
  double bin_width_deg() const {
    return size() > 1 ? grid_deg[1] - grid_deg[0] : 180.0;
  }
  int map_bin() const;
  void normalize();
};

struct BeliefHyperparams {
  double sigma0_deg = 5.0;
  double k_expand = 0.5;   // widen under poor secrecy / high entropy
  double k_exploit = 0.2;  // shrink otherwise
  double sigma_min_deg = 1.0;
  double sigma_max_deg = 20.0;
  double k_min = 1.0;
  double k_max = 4.0;
  double conf_threshold = 0.9;
  double gamma_min = 0.1;
  double gamma_max = 0.5;
  double entropy_target_bits = 2.249953766124962; // 0.3 * log2(181)
  double uniform_mix = 0.0;   // prediction-side uniform regularization
  double mass_ceiling = 1.0;  // per-bin posterior cap (multi-target balance)
};

// Transition step: convolution with a discretized zero-mean Gaussian kernel
// (sigma = belief.kernel_width_deg, truncated at +-4 sigma). Out-of-range
// mass reflects at the +-90 deg edges: the map is doubly stochastic, so the
// uniform belief is an exact fixed point and entropy never decreases.
// uniform_mix blends a small uniform floor into the result (target-birth
// regularization; keeps extinguished bins revivable). Both invariants
// survive any mix in [0, 1].
AngularBelief predict(const AngularBelief& belief, double uniform_mix = 0.0);

struct UpdateResult {
  AngularBelief posterior;
  bool uninformative = false; // all-zero product; prior returned unchanged
};

// Posterior ~ predicted (Hadamard) z^k_eff, renormalized.
UpdateResult update(const AngularBelief& predicted, const std::vector<double>& response,
                    double k_eff);

// Shannon entropy in bits, 0 log 0 := 0.
double entropy(const AngularBelief& belief);

// conf = 1 - min(1, H / log2 Nphi).
double confidence(const AngularBelief& belief);

// Probability mass within +-halfwidth_deg of the MAP bin; the tracker's
// lock indicator (a concentrated mode can coexist with fat diffusion tails).
double map_mass(const AngularBelief& belief, double halfwidth_deg);

// Water-filling cap on per-bin mass: excess above the ceiling redistributes
// proportionally over uncapped bins. A multiplicative filter is a martingale
// over its modes (equal likelihoods freeze mass ratios), so without a cap the
// first-discovered target starves every later one. ceiling >= 1 is a no-op.
void apply_mass_ceiling(AngularBelief& belief, double ceiling);

// k_eff = k_min + (k_max - k_min) conf.
double likelihood_exponent(double conf, const BeliefHyperparams& params);

struct MapPeaksResult {
  std::vector<int> bins;
  std::vector<double> angles_deg;
  bool truncated = false; // fewer eligible bins than requested
};

// Top-n probability bins outside the excluded intervals, with a minimum
// mutual separation of one kernel width. Ties break toward the lower index.
MapPeaksResult map_peaks(const AngularBelief& belief, int count,
                         const std::vector<std::pair<double, double>>& excluded_deg = {});

// Entropy-aware sensing fraction, affine in normalized entropy:
//   gamma = gamma_min + (gamma_max - gamma_min) min(1, H / log2 Nphi).
double sensing_fraction(double entropy_bits, int num_bins, const BeliefHyperparams& params);

// Multiplicative kernel-width adaptation, clipped to [sigma_min, sigma_max]:
//   sigma' = clip(sigma (1 + k_expand 1{!ok} - k_exploit 1{ok})).
// "ok" is mean-secrecy >= threshold in the per-slot controller and
// H <= H_star in the intra-slot refinement.
double adapt_kernel(double sigma_deg, bool condition_ok, const BeliefHyperparams& params);

struct SensingModel {
  double snr_sens = 10.0;      // echo strength over the flat response (linear)
  double sigma_meas_deg = 2.0; // angular smear of a detected echo
  double sigma_look_deg = 4.0; // half-sector each look sweeps around its peak
  double miss_depth = 0.7;     // likelihood depression of an empty look
  double noise_level = 0.15;   // multiplicative response noise
};

// Pseudo-likelihood of the steered sensing looks. Each look sweeps a soft
// window around its steered peak (width: the larger of sigma_look and the
// beam's own -3 dB halfwidth, derived from the supplied peak-normalized gain
// profile). An eavesdropper inside the window returns an echo bump centered
// on its true angle; a look that returns nothing depresses its window
// (negative evidence, which is what drives the scan). The response is
// max-normalized.
std::vector<double> sensing_response(const AngularBelief& belief,
                                     const std::vector<double>& peak_angles_deg,
                                     const std::vector<double>& true_eve_angles_deg,
                                     const std::vector<std::vector<double>>& beam_gain_profiles,
                                     const SensingModel& model, std::mt19937_64& rng);

} // namespace nfisac::belief

#endif // NFISAC_BELIEF_HPP
