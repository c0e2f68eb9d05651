#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "citymesh/dissem/content.hpp"
#include "citymesh/ids.hpp"
#include "citymesh/rng.hpp"

namespace citymesh::workload {

// ============================================================================
// Parameters
// ============================================================================

/// Target statistics for one integer count measure: the generator draws
/// counts from a distribution fitted so that the *truncated* distribution
/// over [min, max] has exactly this mean. `sd` selects the family shape
/// (over-dispersed counts get a heavier tail than under-dispersed ones).
struct CountMeasure {
  double mean = 0.0;
  double sd = 0.0;
  int min = 0;
  int max = 0;
};

/// Tags every participant can pick from without inventing anything new.
[[nodiscard]] const std::vector<std::string>& default_tag_vocabulary();

/// Knobs for the synthetic social workload. Defaults reproduce the aggregate
/// activity observed in the three-hour campus field trial the simulator is
/// calibrated against: a small crowd posting little but commenting a lot.
struct WorkloadParams {
  std::size_t n_users = 22;
  /// Length of the simulated session; creation times are uniform over it.
  double session_length_s = 10'800.0;

  CountMeasure posts_per_user{1.77, 2.18, 0, 8};
  CountMeasure tags_per_post{1.72, 1.19, 1, 5};
  CountMeasure comments_per_user{6.86, 5.58, 0, 21};
  CountMeasure tags_created_per_user{2.32, 3.01, 0, 12};
  /// Photo count per post *that carries photos at all* (hence min 1).
  CountMeasure photos_per_post{1.22, 0.73, 1, 4};
  /// Probability that a post carries photos. The default makes the expected
  /// photo total match the field trial (photos per photo-post 1.22 and
  /// roughly 22 photos over 39 posts imply ~0.46).
  double photo_attach_probability = 0.46;

  std::vector<std::string> vocabulary = default_tag_vocabulary();

  /// Nominal payload sizes used when materializing content items.
  std::uint64_t post_size_bytes = 2'000;
  std::uint64_t comment_size_bytes = 500;
  std::uint64_t photo_size_bytes = 1'000'000;
};

/// Throws ValidationError unless every measure has finite mean within
/// [min, max], sd >= 0, 0 <= min <= max, the session length is positive,
/// the attach probability is within [0, 1], payload sizes are positive and
/// the vocabulary is non-empty with CSV-safe tag names.
void validate_workload_params(const WorkloadParams& params);

// ============================================================================
// Fitted count distributions
// ============================================================================

/// Discrete distribution over the inclusive support [min, min + pmf.size()).
struct CountDistribution {
  int min = 0;
  std::vector<double> pmf;  ///< Non-negative, sums to 1.

  [[nodiscard]] double mean() const;
  /// Inverse-CDF draw; deterministic given the generator state.
  [[nodiscard]] int sample(Rng& rng) const;
};

/// Fits a count distribution to a measure. Family by dispersion: sd^2 above
/// the mean gets a negative binomial (the heavy tail a Poisson cannot
/// express), sd^2 below it a binomial, equal dispersion a Poisson. The
/// distribution is truncated to [min, max], renormalized, and its location
/// parameter is then adjusted by bisection so the truncated mean matches
/// `measure.mean` (plain truncation or clamping would bias it). Degenerate
/// measures (sd 0, or mean pinned to an endpoint) become point masses.
/// Throws ValidationError when the measure is invalid or cannot be fitted.
[[nodiscard]] CountDistribution fit_count_distribution(const CountMeasure& measure);

// ============================================================================
// Generation
// ============================================================================

/// Generates a time-ordered sequence of content-creation events (posts,
/// comments, photos) for users 1..n_users, deterministic given the seed.
///
/// Per-user post/comment/created-tag counts come from the fitted count
/// distributions; creation times are uniform over the session. Comments pick
/// their target post by preferential attachment (probability proportional to
/// 1 + comments already received) among strictly earlier posts; a comment
/// drawn before the first post is dropped. Tags are picked from the shared
/// vocabulary plus the author's own invented tags; invented tags are placed
/// with priority so each one the author "creates" actually appears. Photos
/// attach to a post with photo_attach_probability, inherit its tags and
/// creation time, and point at it via `parent` (as comments do).
///
/// Item ids are dense 1..N: posts first in time order, then comments in time
/// order, then photos in post order. Throws ValidationError on bad params.
[[nodiscard]] std::vector<dissem::ContentItem> generate_workload(const WorkloadParams& params,
                                                                 std::uint64_t seed);

// ============================================================================
// Summary statistics
// ============================================================================

/// Mean / sample standard deviation / min / max over `count` observations.
/// A measure with no observations is all zeros.
struct MeasureStats {
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

/// The nine aggregate measures summarizing a workload, mirroring the
/// field-trial report the defaults were taken from. Per-user measures count
/// inactive users as zeros; "received"/"per tag"/photo measures are computed
/// over posts or tags with at least one observation, so their min is >= 1.
struct WorkloadStats {
  MeasureStats posts_per_user;
  MeasureStats tags_per_post;
  MeasureStats comments_per_user;
  MeasureStats comments_received_per_post;
  MeasureStats tags_created_per_user;
  MeasureStats posts_per_tag;
  MeasureStats comments_per_tag;
  MeasureStats photos_per_post;
  MeasureStats photos_per_tag;

  std::size_t total_posts = 0;
  std::size_t total_comments = 0;
  std::size_t total_photos = 0;
  std::size_t n_users = 0;

  /// Rows in display order, for reports and tabular output.
  [[nodiscard]] std::vector<std::pair<std::string_view, const MeasureStats*>> rows() const;
};

/// Computes the summary table from an event sequence. Pure.
///
/// `vocabulary` identifies which tags are user-created (anything not in it);
/// `n_users` fixes the per-user denominators so silent users count as zeros
/// (0 means "infer from the distinct authors present"). An empty workload
/// yields an all-zero table.
[[nodiscard]] WorkloadStats workload_stats(const std::vector<dissem::ContentItem>& items,
                                           const std::vector<std::string>& vocabulary,
                                           std::size_t n_users = 0);

// ============================================================================
// CSV import/export
// ============================================================================

/// Serializes items as CSV with a fixed header. Tags are ';'-joined inside
/// one field; times round-trip exactly (shortest form). Throws
/// ValidationError if a tag contains a CSV metacharacter.
[[nodiscard]] std::string workload_to_csv(const std::vector<dissem::ContentItem>& items);

/// Parses workload CSV produced by workload_to_csv. Throws ParseError on
/// malformed input (wrong header, field count, numbers, kinds) and
/// ValidationError when a row violates content invariants.
[[nodiscard]] std::vector<dissem::ContentItem> workload_from_csv(std::string_view text);

/// File convenience wrappers; throw IoError when the file cannot be
/// written or read.
void save_workload_csv(const std::filesystem::path& path,
                       const std::vector<dissem::ContentItem>& items);
[[nodiscard]] std::vector<dissem::ContentItem> load_workload_csv(const std::filesystem::path& path);

}  // namespace citymesh::workload
