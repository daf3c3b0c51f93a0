#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace rrm {

using Rng = std::mt19937_64;

// Error taxonomy. Each type maps to one failure the callers are expected to
// tell apart; everything else is std::invalid_argument from config checks.
struct PlacementInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
struct ShapeMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ActionOutOfRange : std::out_of_range {
  using std::out_of_range::out_of_range;
};
struct EpisodeFinished : std::logic_error {
  using std::logic_error::logic_error;
};
struct DegenerateDataset : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BufferUnderfilled : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InsufficientCandidates : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Mixes a base seed with a stream tag (splitmix64 finalizer), so independent
/// components of one run draw from uncorrelated generators.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

/// FNV-1a over a string; used for config fingerprints.
std::string fingerprint(const std::string& text);

}  // namespace rrm
