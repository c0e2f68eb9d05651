#include "citymesh/workload/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "citymesh/error.hpp"

namespace citymesh::workload {

namespace {

// ============================================================================
// Small helpers
// ============================================================================

[[nodiscard]] std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

[[nodiscard]] bool csv_safe_tag(const std::string& tag) {
  if (tag.empty()) return false;
  return tag.find_first_of(",;\n\r") == std::string::npos;
}

void validate_measure(const CountMeasure& m, std::string_view name) {
  const std::string label(name);
  if (m.min < 0 || m.max < m.min) {
    throw ValidationError(label + ": requires 0 <= min <= max, got [" +
                          std::to_string(m.min) + ", " + std::to_string(m.max) + "]");
  }
  if (!std::isfinite(m.mean) || m.mean < m.min || m.mean > m.max) {
    throw ValidationError(label + ": mean " + format_double(m.mean) +
                          " must lie within [" + std::to_string(m.min) + ", " +
                          std::to_string(m.max) + "]");
  }
  if (!(m.sd >= 0.0) || !std::isfinite(m.sd)) {
    throw ValidationError(label + ": sd must be finite and >= 0, got " + format_double(m.sd));
  }
}

// ============================================================================
// Count distribution fitting
// ============================================================================

enum class Family { negative_binomial, poisson, binomial };

[[nodiscard]] Family family_for(double mean, double variance) {
  const double tol = 1e-9 * std::max({mean, variance, 1.0});
  if (variance > mean + tol) return Family::negative_binomial;
  if (variance < mean - tol) return Family::binomial;
  return Family::poisson;
}

/// log P(k) for the family at the given location parameter. `variance` is
/// only meaningful for the negative binomial (its fixed spread); `max_k` is
/// only meaningful for the binomial (its trial count).
[[nodiscard]] double log_pmf(Family family, double location, double variance, int max_k, int k) {
  const double kd = static_cast<double>(k);
  switch (family) {
    case Family::negative_binomial: {
      const double m = location;
      const double r = m * m / (variance - m);
      // p = r / (r + m); written via log1p/log for precision at extreme r.
      return std::lgamma(kd + r) - std::lgamma(r) - std::lgamma(kd + 1.0) -
             r * std::log1p(m / r) + kd * (std::log(m) - std::log(r + m));
    }
    case Family::poisson:
      return kd * std::log(location) - location - std::lgamma(kd + 1.0);
    case Family::binomial: {
      const double n = static_cast<double>(max_k);
      return std::lgamma(n + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(n - kd + 1.0) +
             kd * std::log(location) + (n - kd) * std::log1p(-location);
    }
  }
  return -std::numeric_limits<double>::infinity();
}

struct TruncatedPmf {
  std::vector<double> pmf;
  double mean = 0.0;
};

/// Family pmf restricted to [min_k, max_k] and renormalized. Computed in log
/// space so even supports holding a vanishing fraction of the mass stay
/// representable.
[[nodiscard]] TruncatedPmf truncated_pmf(Family family, double location, double variance,
                                         int min_k, int max_k) {
  const std::size_t span = static_cast<std::size_t>(max_k - min_k) + 1;
  std::vector<double> logs(span);
  for (std::size_t i = 0; i < span; ++i) {
    logs[i] = log_pmf(family, location, variance, max_k, min_k + static_cast<int>(i));
  }
  const double peak = *std::max_element(logs.begin(), logs.end());
  if (!std::isfinite(peak)) {
    throw ValidationError("count distribution has no mass on its support");
  }
  TruncatedPmf out;
  out.pmf.resize(span);
  double sum = 0.0;
  for (std::size_t i = 0; i < span; ++i) {
    out.pmf[i] = std::exp(logs[i] - peak);
    sum += out.pmf[i];
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < span; ++i) {
    out.pmf[i] /= sum;
    acc += (min_k + static_cast<double>(i)) * out.pmf[i];
  }
  out.mean = acc;
  return out;
}

[[nodiscard]] CountDistribution point_mass(int k) {
  CountDistribution d;
  d.min = k;
  d.pmf = {1.0};
  return d;
}

}  // namespace

double CountDistribution::mean() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    acc += (min + static_cast<double>(i)) * pmf[i];
  }
  return acc;
}

int CountDistribution::sample(Rng& rng) const {
  const double u = rng.next_double();
  double cum = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    cum += pmf[i];
    if (u < cum) return min + static_cast<int>(i);
  }
  return min + static_cast<int>(pmf.size()) - 1;
}

CountDistribution fit_count_distribution(const CountMeasure& measure) {
  validate_measure(measure, "count measure");
  if (measure.min == measure.max) return point_mass(measure.min);
  if (measure.sd == 0.0) {
    const int k = static_cast<int>(
        std::clamp<long long>(std::llround(measure.mean), measure.min, measure.max));
    return point_mass(k);
  }
  if (measure.mean <= measure.min) return point_mass(measure.min);
  if (measure.mean >= measure.max) return point_mass(measure.max);

  const double variance = measure.sd * measure.sd;
  const Family family = family_for(measure.mean, variance);

  // Bisect the family's location parameter until the truncated mean matches
  // the target; truncation alone would bias it (mass cut at the max pulls
  // the mean down, mass cut at the min pushes it up).
  double lo = 1e-12;
  double hi = 0.0;
  switch (family) {
    case Family::negative_binomial:
      // The family needs variance > location; at the cap it degenerates
      // towards a Poisson with the same spread.
      hi = variance * (1.0 - 1e-9);
      break;
    case Family::poisson:
      hi = 64.0 * (measure.max + 1.0);
      break;
    case Family::binomial:
      hi = 1.0 - 1e-12;
      break;
  }
  const auto mean_at = [&](double location) {
    return truncated_pmf(family, location, variance, measure.min, measure.max).mean;
  };
  if (mean_at(hi) < measure.mean) {
    throw ValidationError("count measure cannot be fitted: mean " + format_double(measure.mean) +
                          " with sd " + format_double(measure.sd) +
                          " is unreachable on [" + std::to_string(measure.min) + ", " +
                          std::to_string(measure.max) + "]");
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mean_at(mid) < measure.mean ? lo : hi) = mid;
  }
  const TruncatedPmf fitted = truncated_pmf(family, hi, variance, measure.min, measure.max);
  CountDistribution d;
  d.min = measure.min;
  d.pmf = fitted.pmf;
  return d;
}

// ============================================================================
// Parameters
// ============================================================================

const std::vector<std::string>& default_tag_vocabulary() {
  static const std::vector<std::string> kTags = {
      "air-quality", "culture", "events",   "food",  "mobility", "music",
      "nightlife",   "safety",  "shopping", "sport", "traffic",  "weather",
  };
  return kTags;
}

void validate_workload_params(const WorkloadParams& params) {
  if (!(params.session_length_s > 0.0) || !std::isfinite(params.session_length_s)) {
    throw ValidationError("session_length_s must be positive and finite");
  }
  validate_measure(params.posts_per_user, "posts_per_user");
  validate_measure(params.tags_per_post, "tags_per_post");
  validate_measure(params.comments_per_user, "comments_per_user");
  validate_measure(params.tags_created_per_user, "tags_created_per_user");
  validate_measure(params.photos_per_post, "photos_per_post");
  if (!(params.photo_attach_probability >= 0.0 && params.photo_attach_probability <= 1.0)) {
    throw ValidationError("photo_attach_probability must lie within [0, 1]");
  }
  if (params.post_size_bytes == 0 || params.comment_size_bytes == 0 ||
      params.photo_size_bytes == 0) {
    throw ValidationError("payload sizes must be positive");
  }
  if (params.vocabulary.empty()) {
    throw ValidationError("tag vocabulary must not be empty");
  }
  std::set<std::string> seen;
  for (const auto& tag : params.vocabulary) {
    if (!csv_safe_tag(tag)) {
      throw ValidationError("vocabulary tag is empty or contains a CSV metacharacter: \"" +
                            tag + "\"");
    }
    if (!seen.insert(tag).second) {
      throw ValidationError("vocabulary tag appears twice: \"" + tag + "\"");
    }
  }
}

// ============================================================================
// Generation
// ============================================================================

namespace {

struct EventDraft {
  PeerId author = 0;
  double time = 0.0;
  std::size_t seq = 0;  ///< Draw order, as a deterministic tie-break.
};

[[nodiscard]] bool draft_before(const EventDraft& a, const EventDraft& b) {
  if (a.time != b.time) return a.time < b.time;
  if (a.author != b.author) return a.author < b.author;
  return a.seq < b.seq;
}

}  // namespace

std::vector<dissem::ContentItem> generate_workload(const WorkloadParams& params,
                                                   std::uint64_t seed) {
  validate_workload_params(params);
  const CountDistribution post_dist = fit_count_distribution(params.posts_per_user);
  const CountDistribution tag_dist = fit_count_distribution(params.tags_per_post);
  const CountDistribution comment_dist = fit_count_distribution(params.comments_per_user);
  const CountDistribution created_dist = fit_count_distribution(params.tags_created_per_user);
  const CountDistribution photo_dist = fit_count_distribution(params.photos_per_post);

  Rng rng = Rng{seed}.derive("workload");
  const std::size_t n = params.n_users;

  // Per-user activity volumes first, in one fixed block per distribution, so
  // the draw sequence is stable and documented.
  std::vector<int> posts_n(n), comments_n(n), created_n(n);
  for (auto& c : posts_n) c = post_dist.sample(rng);
  for (auto& c : comments_n) c = comment_dist.sample(rng);
  for (auto& c : created_n) c = created_dist.sample(rng);

  // Each user's tag pool is the shared vocabulary plus their own invented
  // tags. Invented tags wait in a queue and take priority when the user next
  // tags something, so every invented tag actually shows up in the workload.
  std::vector<std::vector<std::string>> pools(n);
  std::vector<std::deque<std::string>> pending(n);
  for (std::size_t u = 0; u < n; ++u) {
    pools[u] = params.vocabulary;
    for (int k = 1; k <= created_n[u]; ++k) {
      std::string name = "u" + std::to_string(u + 1) + "-tag" + std::to_string(k);
      pools[u].push_back(name);
      pending[u].push_back(std::move(name));
    }
  }

  const auto draw_tags = [&](PeerId author, int want) {
    const std::size_t slot = author - 1;
    // Content items always carry at least one tag, and at most a full pool.
    const std::size_t target = std::min<std::size_t>(
        pools[slot].size(), static_cast<std::size_t>(std::max(want, 1)));
    std::vector<std::string> tags;
    tags.reserve(target);
    auto& queue = pending[slot];
    while (!queue.empty() && tags.size() < target) {
      tags.push_back(std::move(queue.front()));
      queue.pop_front();
    }
    if (tags.size() < target) {
      std::vector<const std::string*> available;
      available.reserve(pools[slot].size());
      for (const auto& tag : pools[slot]) {
        if (std::find(tags.begin(), tags.end(), tag) == tags.end()) {
          available.push_back(&tag);
        }
      }
      while (tags.size() < target) {
        const std::size_t j =
            static_cast<std::size_t>(rng.next_below(available.size()));
        tags.push_back(*available[j]);
        available.erase(available.begin() + static_cast<std::ptrdiff_t>(j));
      }
    }
    std::sort(tags.begin(), tags.end());
    return tags;
  };

  // Posts: drafts with uniform times, sorted, then ids assigned in time
  // order so later stages can treat "posts before t" as a prefix.
  std::vector<EventDraft> post_drafts;
  for (std::size_t u = 0; u < n; ++u) {
    for (int i = 0; i < posts_n[u]; ++i) {
      post_drafts.push_back(
          {static_cast<PeerId>(u + 1), rng.next_in(0.0, params.session_length_s),
           post_drafts.size()});
    }
  }
  std::sort(post_drafts.begin(), post_drafts.end(), draft_before);

  std::vector<dissem::ContentItem> items;
  ContentId next_id = 1;

  struct PostInfo {
    ContentId id;
    double time;
    PeerId author;
    std::vector<std::string> tags;
  };
  std::vector<PostInfo> posts;
  posts.reserve(post_drafts.size());
  for (const EventDraft& draft : post_drafts) {
    const int n_tags = tag_dist.sample(rng);
    PostInfo info{next_id++, draft.time, draft.author, draw_tags(draft.author, n_tags)};
    dissem::ContentItem item;
    item.id = info.id;
    item.author = info.author;
    item.kind = dissem::ContentKind::post;
    item.tags = info.tags;
    item.size_bytes = params.post_size_bytes;
    item.created_at = info.time;
    items.push_back(std::move(item));
    posts.push_back(std::move(info));
  }

  // Photo attachment is decided per post, in post order; the items are
  // materialized after comments so ids stay grouped by kind.
  struct PhotoDraft {
    std::size_t post_index;
    int count;
  };
  std::vector<PhotoDraft> photo_drafts;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    if (rng.next_double() < params.photo_attach_probability) {
      const int count = photo_dist.sample(rng);
      if (count > 0) photo_drafts.push_back({i, count});
    }
  }

  // Comments: drafts with uniform times, processed in time order. Each picks
  // a strictly earlier post with probability proportional to 1 + comments
  // that post has already received, which concentrates threads on a few
  // popular posts. A comment drawn before any post exists is dropped.
  std::vector<EventDraft> comment_drafts;
  for (std::size_t u = 0; u < n; ++u) {
    for (int i = 0; i < comments_n[u]; ++i) {
      comment_drafts.push_back(
          {static_cast<PeerId>(u + 1), rng.next_in(0.0, params.session_length_s),
           comment_drafts.size()});
    }
  }
  std::sort(comment_drafts.begin(), comment_drafts.end(), draft_before);

  std::vector<std::size_t> received(posts.size(), 0);
  for (const EventDraft& draft : comment_drafts) {
    const auto first_later = std::partition_point(
        posts.begin(), posts.end(),
        [&](const PostInfo& p) { return p.time < draft.time; });
    const std::size_t eligible = static_cast<std::size_t>(first_later - posts.begin());
    if (eligible == 0) continue;
    std::uint64_t total_weight = eligible;
    for (std::size_t i = 0; i < eligible; ++i) total_weight += received[i];
    std::uint64_t pick = rng.next_below(total_weight);
    std::size_t target = eligible - 1;
    for (std::size_t i = 0; i < eligible; ++i) {
      const std::uint64_t weight = 1 + received[i];
      if (pick < weight) {
        target = i;
        break;
      }
      pick -= weight;
    }
    received[target]++;

    const int n_tags = tag_dist.sample(rng);
    dissem::ContentItem item;
    item.id = next_id++;
    item.author = draft.author;
    item.kind = dissem::ContentKind::comment;
    item.parent = posts[target].id;
    item.tags = draw_tags(draft.author, n_tags);
    item.size_bytes = params.comment_size_bytes;
    item.created_at = draft.time;
    items.push_back(std::move(item));
  }

  for (const PhotoDraft& draft : photo_drafts) {
    const PostInfo& post = posts[draft.post_index];
    for (int c = 0; c < draft.count; ++c) {
      dissem::ContentItem item;
      item.id = next_id++;
      item.author = post.author;
      item.kind = dissem::ContentKind::photo;
      item.parent = post.id;
      item.tags = post.tags;
      item.size_bytes = params.photo_size_bytes;
      item.created_at = post.time;
      items.push_back(std::move(item));
    }
  }

  for (auto& item : items) dissem::validate_content_item(item);
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.created_at != b.created_at) return a.created_at < b.created_at;
    return a.id < b.id;
  });
  return items;
}

// ============================================================================
// Summary statistics
// ============================================================================

namespace {

[[nodiscard]] MeasureStats measure_of(const std::vector<double>& values) {
  MeasureStats s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double acc = 0.0;
    for (double v : values) acc += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(acc / static_cast<double>(values.size() - 1));
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

template <typename Map>
[[nodiscard]] std::vector<double> map_values(const Map& map) {
  std::vector<double> out;
  out.reserve(map.size());
  for (const auto& [key, value] : map) out.push_back(static_cast<double>(value));
  return out;
}

}  // namespace

std::vector<std::pair<std::string_view, const MeasureStats*>> WorkloadStats::rows() const {
  return {
      {"posts per user", &posts_per_user},
      {"tags per post", &tags_per_post},
      {"comments per user", &comments_per_user},
      {"comments received per post", &comments_received_per_post},
      {"tags created per user", &tags_created_per_user},
      {"posts per tag", &posts_per_tag},
      {"comments per tag", &comments_per_tag},
      {"photos per post", &photos_per_post},
      {"photos per tag", &photos_per_tag},
  };
}

WorkloadStats workload_stats(const std::vector<dissem::ContentItem>& items,
                             const std::vector<std::string>& vocabulary,
                             std::size_t n_users) {
  const std::set<std::string> vocab(vocabulary.begin(), vocabulary.end());

  std::map<PeerId, std::size_t> user_slot;
  std::vector<std::size_t> user_posts, user_comments;
  std::vector<std::set<std::string>> user_created;
  const auto slot_of = [&](PeerId peer) {
    const auto [it, inserted] = user_slot.try_emplace(peer, user_slot.size());
    if (inserted) {
      user_posts.push_back(0);
      user_comments.push_back(0);
      user_created.emplace_back();
    }
    return it->second;
  };
  for (std::size_t u = 1; u <= n_users; ++u) slot_of(static_cast<PeerId>(u));

  std::vector<double> tags_per_post_v;
  std::map<ContentId, std::size_t> comments_received, photos_per_post;
  std::map<std::string, std::size_t> posts_by_tag, comments_by_tag, photos_by_tag;

  WorkloadStats out;
  for (const auto& item : items) {
    if (item.kind == dissem::ContentKind::sensor_data) continue;
    const std::size_t slot = slot_of(item.author);
    for (const auto& tag : item.tags) {
      if (!vocab.contains(tag)) user_created[slot].insert(tag);
    }
    switch (item.kind) {
      case dissem::ContentKind::post:
        out.total_posts++;
        user_posts[slot]++;
        tags_per_post_v.push_back(static_cast<double>(item.tags.size()));
        for (const auto& tag : item.tags) posts_by_tag[tag]++;
        break;
      case dissem::ContentKind::comment:
        out.total_comments++;
        user_comments[slot]++;
        if (item.parent) comments_received[*item.parent]++;
        for (const auto& tag : item.tags) comments_by_tag[tag]++;
        break;
      case dissem::ContentKind::photo:
        out.total_photos++;
        if (item.parent) photos_per_post[*item.parent]++;
        for (const auto& tag : item.tags) photos_by_tag[tag]++;
        break;
      case dissem::ContentKind::sensor_data:
        break;
    }
  }

  std::vector<double> posts_v(user_posts.begin(), user_posts.end());
  std::vector<double> comments_v(user_comments.begin(), user_comments.end());
  std::vector<double> created_v;
  created_v.reserve(user_created.size());
  for (const auto& tags : user_created) created_v.push_back(static_cast<double>(tags.size()));

  out.posts_per_user = measure_of(posts_v);
  out.tags_per_post = measure_of(tags_per_post_v);
  out.comments_per_user = measure_of(comments_v);
  out.comments_received_per_post = measure_of(map_values(comments_received));
  out.tags_created_per_user = measure_of(created_v);
  out.posts_per_tag = measure_of(map_values(posts_by_tag));
  out.comments_per_tag = measure_of(map_values(comments_by_tag));
  out.photos_per_post = measure_of(map_values(photos_per_post));
  out.photos_per_tag = measure_of(map_values(photos_by_tag));
  out.n_users = user_slot.size();
  return out;
}

// ============================================================================
// CSV import/export
// ============================================================================

namespace {

constexpr std::string_view kCsvHeader =
    "id,author,kind,parent,created_at,size_bytes,share_in_proximity,store_remotely,tags";

[[nodiscard]] std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
[[nodiscard]] T parse_number(std::string_view field, std::string_view what,
                             std::size_t offset) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError("workload CSV: bad " + std::string(what) + " \"" + std::string(field) +
                         "\"",
                     offset);
  }
  return value;
}

}  // namespace

std::string workload_to_csv(const std::vector<dissem::ContentItem>& items) {
  std::string out(kCsvHeader);
  out.push_back('\n');
  for (const auto& item : items) {
    for (const auto& tag : item.tags) {
      if (!csv_safe_tag(tag)) {
        throw ValidationError("tag contains a CSV metacharacter: \"" + tag + "\"");
      }
    }
    out += std::to_string(item.id);
    out.push_back(',');
    out += std::to_string(item.author);
    out.push_back(',');
    out += dissem::to_string(item.kind);
    out.push_back(',');
    if (item.parent) out += std::to_string(*item.parent);
    out.push_back(',');
    out += format_double(item.created_at);
    out.push_back(',');
    out += std::to_string(item.size_bytes);
    out.push_back(',');
    out.push_back(item.share_in_proximity ? '1' : '0');
    out.push_back(',');
    out.push_back(item.store_remotely ? '1' : '0');
    out.push_back(',');
    for (std::size_t i = 0; i < item.tags.size(); ++i) {
      if (i > 0) out.push_back(';');
      out += item.tags[i];
    }
    out.push_back('\n');
  }
  return out;
}

std::vector<dissem::ContentItem> workload_from_csv(std::string_view text) {
  std::vector<dissem::ContentItem> items;
  std::size_t offset = 0;
  bool saw_header = false;
  while (offset < text.size()) {
    std::size_t end = text.find('\n', offset);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(offset, end - offset);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::size_t line_offset = offset;
    offset = end + 1;
    if (!saw_header) {
      if (line != kCsvHeader) {
        throw ParseError("workload CSV: missing or unexpected header", line_offset);
      }
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;

    const auto fields = split(line, ',');
    if (fields.size() != 9) {
      throw ParseError("workload CSV: expected 9 fields, got " + std::to_string(fields.size()),
                       line_offset);
    }
    dissem::ContentItem item;
    item.id = parse_number<ContentId>(fields[0], "id", line_offset);
    item.author = parse_number<PeerId>(fields[1], "author", line_offset);
    const auto kind = dissem::content_kind_from_string(fields[2]);
    if (!kind) {
      throw ParseError("workload CSV: unknown kind \"" + std::string(fields[2]) + "\"",
                       line_offset);
    }
    item.kind = *kind;
    if (!fields[3].empty()) {
      item.parent = parse_number<ContentId>(fields[3], "parent", line_offset);
    }
    item.created_at = parse_number<double>(fields[4], "created_at", line_offset);
    item.size_bytes = parse_number<std::uint64_t>(fields[5], "size_bytes", line_offset);
    for (std::size_t i : {std::size_t{6}, std::size_t{7}}) {
      if (fields[i] != "0" && fields[i] != "1") {
        throw ParseError("workload CSV: flag fields must be 0 or 1", line_offset);
      }
    }
    item.share_in_proximity = fields[6] == "1";
    item.store_remotely = fields[7] == "1";
    for (std::string_view tag : split(fields[8], ';')) {
      item.tags.emplace_back(tag);
    }

    const bool needs_parent =
        item.kind == dissem::ContentKind::comment || item.kind == dissem::ContentKind::photo;
    if (needs_parent && !item.parent) {
      throw ValidationError("workload CSV: " + std::string(dissem::to_string(item.kind)) +
                            " " + std::to_string(item.id) + " has no parent");
    }
    if (item.kind == dissem::ContentKind::post && item.parent) {
      throw ValidationError("workload CSV: post " + std::to_string(item.id) +
                            " must not have a parent");
    }
    dissem::validate_content_item(item);
    items.push_back(std::move(item));
  }
  if (!saw_header) {
    throw ParseError("workload CSV: missing or unexpected header", 0);
  }
  return items;
}

void save_workload_csv(const std::filesystem::path& path,
                       const std::vector<dissem::ContentItem>& items) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  const std::string text = workload_to_csv(items);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed to write " + path.string());
}

std::vector<dissem::ContentItem> load_workload_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed to read " + path.string());
  return workload_from_csv(text);
}

}  // namespace citymesh::workload
