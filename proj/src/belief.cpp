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

#include "nfisac/belief.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace nfisac::belief {

namespace {

// Minimal iterative radix-2 FFT; sizes are always padded to a power of two.
// Keeps the transition step at O(N log N) so the belief update stays linear
// in the grid size up to the log factor.
void fft_radix2(std::vector<cxd>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * constants::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const cxd wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cxd w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const cxd u = a[i + k];
        const cxd v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    for (auto& x : a) x /= static_cast<double>(n);
  }
}

std::vector<double> linear_convolve_fft(const std::vector<double>& signal,
                                        const std::vector<double>& kernel) {
  const std::size_t out_len = signal.size() + kernel.size() - 1;
  std::size_t n = 1;
  while (n < out_len) n <<= 1;
  std::vector<cxd> fa(n, cxd(0, 0)), fb(n, cxd(0, 0));
  for (std::size_t i = 0; i < signal.size(); ++i) fa[i] = signal[i];
  for (std::size_t i = 0; i < kernel.size(); ++i) fb[i] = kernel[i];
  fft_radix2(fa, false);
  fft_radix2(fb, false);
  for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
  fft_radix2(fa, true);
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = std::max(0.0, fa[i].real());
  return out;
}

} // namespace

AngularBelief AngularBelief::uniform(int num_bins, double kernel_width_deg) {
  if (num_bins < 1) throw std::domain_error("AngularBelief: need at least one bin");
  AngularBelief b;
  b.kernel_width_deg = kernel_width_deg;
  b.probs.assign(num_bins, 1.0 / num_bins);
  b.grid_deg.resize(num_bins);
  for (int i = 0; i < num_bins; ++i) {
    b.grid_deg[i] =
        num_bins == 1 ? 0.0 : -90.0 + 180.0 * static_cast<double>(i) / (num_bins - 1);
  }
  return b;
}

int AngularBelief::map_bin() const {
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

void AngularBelief::normalize() {
  double s = 0.0;
  for (double p : probs) s += p;
  if (s <= 0.0) {
    std::fill(probs.begin(), probs.end(), 1.0 / probs.size());
    return;
  }
  for (double& p : probs) p /= s;
}

AngularBelief predict(const AngularBelief& belief, double uniform_mix) {
  if (uniform_mix < 0.0 || uniform_mix > 1.0)
    throw std::domain_error("predict: uniform_mix outside [0,1]");
  const int n = belief.size();
  AngularBelief out = belief;
  if (n <= 1) return out;

  const double sigma_bins = belief.kernel_width_deg / belief.bin_width_deg();
  const int half = std::max(1, static_cast<int>(std::ceil(4.0 * sigma_bins)));

  std::vector<double> kernel(2 * half + 1);
  double ksum = 0.0;
  for (int k = -half; k <= half; ++k) {
    const double v = std::exp(-0.5 * (k / sigma_bins) * (k / sigma_bins));
    kernel[k + half] = v;
    ksum += v;
  }
  for (double& v : kernel) v /= ksum;

  // Full linear convolution, then reflect spilled tails back into the grid.
  // Reflection keeps the transition doubly stochastic on the truncated grid.
  const std::vector<double> full = linear_convolve_fft(belief.probs, kernel);
  std::vector<double> probs(n, 0.0);
  for (int i = 0; i < static_cast<int>(full.size()); ++i) {
    int idx = i - half;
    while (idx < 0 || idx >= n) {
      if (idx < 0) idx = -idx - 1;
      if (idx >= n) idx = 2 * n - 1 - idx;
    }
    probs[idx] += full[i];
  }
  out.probs = std::move(probs);
  out.normalize();
  if (uniform_mix > 0.0) {
    for (double& p : out.probs)
      p = (1.0 - uniform_mix) * p + uniform_mix / n;
  }
  return out;
}

UpdateResult update(const AngularBelief& predicted, const std::vector<double>& response,
                    double k_eff) {
  if (static_cast<int>(response.size()) != predicted.size())
    throw std::invalid_argument("update: response size mismatch");
  if (k_eff < 0.0) throw std::domain_error("update: k_eff must be nonnegative");
  for (double z : response)
    if (z < 0.0) throw std::domain_error("update: negative response entry");

  UpdateResult res;
  res.posterior = predicted;
  double sum = 0.0;
  for (int i = 0; i < predicted.size(); ++i) {
    const double w = k_eff == 0.0 ? 1.0 : std::pow(response[i], k_eff);
    res.posterior.probs[i] = predicted.probs[i] * w;
    sum += res.posterior.probs[i];
  }
  if (sum <= 0.0) {
    res.posterior = predicted;
    res.uninformative = true;
    return res;
  }
  for (double& p : res.posterior.probs) p /= sum;
  return res;
}

double entropy(const AngularBelief& belief) {
  double h = 0.0;
  for (double p : belief.probs) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return std::max(0.0, h);
}

double confidence(const AngularBelief& belief) {
  if (belief.size() <= 1) return 1.0;
  const double hmax = std::log2(static_cast<double>(belief.size()));
  return 1.0 - std::min(1.0, entropy(belief) / hmax);
}

void apply_mass_ceiling(AngularBelief& belief, double ceiling) {
  if (ceiling >= 1.0) return;
  if (ceiling <= 0.0) throw std::domain_error("apply_mass_ceiling: ceiling must be positive");
  const int n = belief.size();
  if (ceiling * n < 1.0) return; // infeasible cap, leave untouched
  // Excess spreads uniformly over uncapped bins. A proportional spill would
  // only widen the capped mode itself; the uniform spill is what lets a
  // weaker, later-discovered mode accumulate mass at all.
  std::vector<char> capped(n, 0);
  for (int iter = 0; iter < 6; ++iter) {
    double excess = 0.0;
    int uncapped = 0;
    bool any = false;
    for (int i = 0; i < n; ++i) {
      if (capped[i]) continue;
      if (belief.probs[i] > ceiling) {
        excess += belief.probs[i] - ceiling;
        belief.probs[i] = ceiling;
        capped[i] = 1;
        any = true;
      } else {
        ++uncapped;
      }
    }
    if (!any || uncapped == 0) break;
    const double share = excess / uncapped;
    for (int i = 0; i < n; ++i)
      if (!capped[i]) belief.probs[i] += share;
  }
}

double map_mass(const AngularBelief& belief, double halfwidth_deg) {
  const int m = belief.map_bin();
  const double center = belief.grid_deg[m];
  double mass = 0.0;
  for (int i = 0; i < belief.size(); ++i) {
    if (std::abs(belief.grid_deg[i] - center) <= halfwidth_deg) mass += belief.probs[i];
  }
  return mass;
}

double likelihood_exponent(double conf, const BeliefHyperparams& params) {
  if (conf < 0.0 || conf > 1.0) throw std::domain_error("likelihood_exponent: conf outside [0,1]");
  return params.k_min + (params.k_max - params.k_min) * conf;
}

MapPeaksResult map_peaks(const AngularBelief& belief, int count,
                         const std::vector<std::pair<double, double>>& excluded_deg) {
  if (count < 1) throw std::domain_error("map_peaks: count must be >= 1");
  MapPeaksResult res;
  const int n = belief.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (belief.probs[a] != belief.probs[b]) return belief.probs[a] > belief.probs[b];
    return a < b; // deterministic tie-break toward the lower bin index
  });

  const auto excluded = [&](double angle) {
    for (const auto& [lo, hi] : excluded_deg)
      if (angle >= lo && angle <= hi) return true;
    return false;
  };

  const double min_sep = belief.kernel_width_deg;
  for (int idx : order) {
    if (static_cast<int>(res.bins.size()) >= count) break;
    const double angle = belief.grid_deg[idx];
    if (excluded(angle)) continue;
    bool far_enough = true;
    for (double chosen : res.angles_deg) {
      if (std::abs(chosen - angle) < min_sep) {
        far_enough = false;
        break;
      }
    }
    if (!far_enough) continue;
    res.bins.push_back(idx);
    res.angles_deg.push_back(angle);
  }
  res.truncated = static_cast<int>(res.bins.size()) < count;
  return res;
}

double sensing_fraction(double entropy_bits, int num_bins, const BeliefHyperparams& params) {
  if (entropy_bits < 0.0) throw std::domain_error("sensing_fraction: entropy must be nonnegative");
  const double hmax = num_bins > 1 ? std::log2(static_cast<double>(num_bins)) : 1.0;
  const double t = std::min(1.0, entropy_bits / hmax);
  return params.gamma_min + (params.gamma_max - params.gamma_min) * t;
}

double adapt_kernel(double sigma_deg, bool condition_ok, const BeliefHyperparams& params) {
  const double factor = condition_ok ? (1.0 - params.k_exploit) : (1.0 + params.k_expand);
  return std::clamp(sigma_deg * factor, params.sigma_min_deg, params.sigma_max_deg);
}

std::vector<double> sensing_response(const AngularBelief& belief,
                                     const std::vector<double>& peak_angles_deg,
                                     const std::vector<double>& true_eve_angles_deg,
                                     const std::vector<std::vector<double>>& beam_gain_profiles,
                                     const SensingModel& model, std::mt19937_64& rng) {
  const int n = belief.size();
  if (beam_gain_profiles.size() != peak_angles_deg.size())
    throw std::invalid_argument("sensing_response: profile per steered beam required");
  for (const auto& prof : beam_gain_profiles)
    if (static_cast<int>(prof.size()) != n)
      throw std::invalid_argument("sensing_response: profile size mismatch");

  std::vector<double> z(n, 1.0);
  const double two_meas = 2.0 * model.sigma_meas_deg * model.sigma_meas_deg;
  const double bin_w = belief.bin_width_deg();

  for (std::size_t b = 0; b < peak_angles_deg.size(); ++b) {
    const double beam_angle = peak_angles_deg[b];
    // Look width: at least the configured sweep sector, widened to the beam's
    // own -3 dB halfwidth for heavily tapered (broad) beams.
    double half3db = 0.0;
    const auto& prof = beam_gain_profiles[b];
    const int peak_bin =
        static_cast<int>(std::max_element(prof.begin(), prof.end()) - prof.begin());
    for (int i = peak_bin; i < n && prof[i] >= 0.5; ++i) half3db = (i - peak_bin) * bin_w;
    const double sigma_look = std::max(model.sigma_look_deg, half3db / 1.1774);
    const double two_look = 2.0 * sigma_look * sigma_look;

    double caught_weight = 0.0;
    for (double eve : true_eve_angles_deg) {
      const double w = std::exp(-(eve - beam_angle) * (eve - beam_angle) / two_look);
      if (w < std::exp(-2.0)) continue;
      caught_weight = std::max(caught_weight, w);
      for (int i = 0; i < n; ++i) {
        const double phi = belief.grid_deg[i];
        z[i] += model.snr_sens * w * std::exp(-(phi - eve) * (phi - eve) / two_meas);
      }
    }
    if (caught_weight == 0.0) {
      // Empty look: negative evidence across the swept window.
      for (int i = 0; i < n; ++i) {
        const double phi = belief.grid_deg[i];
        z[i] -= model.miss_depth *
                std::exp(-(phi - beam_angle) * (phi - beam_angle) / two_look);
      }
    }
  }

  if (model.noise_level > 0.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& v : z) v *= std::max(1e-6, 1.0 + model.noise_level * u(rng));
  }
  for (double& v : z) v = std::max(v, 1e-6);
  const double zmax = *std::max_element(z.begin(), z.end());
  if (zmax > 0.0)
    for (double& v : z) v /= zmax;
  return z;
}

} // namespace nfisac::belief
