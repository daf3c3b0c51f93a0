#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rrm/baselines.hpp"
#include "rrm/env.hpp"

namespace rrm {

/// Raw samples gathered by running baselines on offline realizations.
/// Padding and not-yet-reported slots are excluded from the feature samples.
struct ObservationDataset {
  std::vector<double> weights;
  std::vector<double> sinr_db;
  std::vector<double> rewards;
};

/// Episode e runs baselines[e % baselines.size()] on realization seed
/// derive_seed(seed, e); every agent's observation entries and per-interval
/// rewards are recorded.
ObservationDataset collect_offline_dataset(const EnvConfig& config,
                                           std::span<const BaselineKind> baselines,
                                           int num_episodes, std::uint64_t seed);

/// Empirical quantile with linear interpolation between order statistics.
double quantile_linear(std::span<const double> sorted, double prob);

/// Percentile thresholds at probabilities {0, 1/(Q-1), ..., 1} for the weight
/// and SINR (dB) features.
struct PercentileMapper {
  int levels = 20;  // Q
  std::vector<double> weight_thresholds;
  std::vector<double> sinr_db_thresholds;

  /// Maps the raw (weight, sinr_db) pairs of an observation into [-1/2, 1/2].
  std::vector<double> map(std::span<const double> raw) const;
};

/// Maps v onto {-1/2, 1/Q - 1/2, ..., 1/2}: -1/2 below the first threshold,
/// (q+1)/Q - 1/2 on [p_q, p_{q+1}), +1/2 at or above the last.
double map_observation(double v, std::span<const double> thresholds);

struct RewardNormalizer {
  double mean = 0.0;
  double stddev = 1.0;

  double normalize(double r) const { return (r - mean) / stddev; }
};

inline double normalize_reward(double r, const RewardNormalizer& n) { return n.normalize(r); }

struct NormalizationStats {
  PercentileMapper mapper;
  RewardNormalizer reward;
  std::string config_fingerprint;
};

/// Throws DegenerateDataset when a feature or the reward has no spread.
NormalizationStats fit(const ObservationDataset& dataset, int levels);

/// Fingerprint of everything in the config that shapes observation statistics.
std::string config_fingerprint(const EnvConfig& config);

void to_json(nlohmann::json& j, const NormalizationStats& s);
void from_json(const nlohmann::json& j, NormalizationStats& s);

NormalizationStats load_normalization(const std::string& path);
void save_normalization(const NormalizationStats& stats, const std::string& path);

}  // namespace rrm
