#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "citymesh/dissem/content.hpp"
#include "citymesh/error.hpp"
#include "citymesh/rng.hpp"
#include "citymesh/workload/workload.hpp"

using namespace citymesh;
using namespace citymesh::workload;
using dissem::ContentItem;
using dissem::ContentKind;

namespace {

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& name)
      : path{std::filesystem::temp_directory_path() /
             (name + "." + std::to_string(::getpid()))} {}
  ~TempFile() { std::filesystem::remove(path); }
};

[[nodiscard]] ContentItem make_item(ContentId id, PeerId author, ContentKind kind,
                                    std::vector<std::string> tags, double time,
                                    std::optional<ContentId> parent = std::nullopt) {
  ContentItem item;
  item.id = id;
  item.author = author;
  item.kind = kind;
  item.parent = parent;
  item.tags = std::move(tags);
  item.size_bytes = kind == ContentKind::photo ? 1'000'000 : 1'000;
  item.created_at = time;
  return item;
}

/// Two posts, three comments, one photo across two users; every stat row is
/// small enough to check by hand.
[[nodiscard]] std::vector<ContentItem> fixture_items() {
  return {
      make_item(1, 1, ContentKind::post, {"x", "y"}, 10.0),
      make_item(2, 2, ContentKind::post, {"x"}, 20.0),
      make_item(3, 2, ContentKind::comment, {"x"}, 30.0, 1),
      make_item(4, 1, ContentKind::comment, {"z"}, 40.0, 1),
      make_item(5, 1, ContentKind::comment, {"y"}, 50.0, 2),
      make_item(6, 1, ContentKind::photo, {"x", "y"}, 10.0, 1),
  };
}

const std::vector<std::string> kFixtureVocab = {"x", "y"};

[[nodiscard]] CountMeasure exact(int k) {
  return CountMeasure{static_cast<double>(k), 0.0, k, k};
}

/// Parameters under which nothing is ever generated.
[[nodiscard]] WorkloadParams silent_params() {
  WorkloadParams params;
  params.posts_per_user = exact(0);
  params.tags_per_post = exact(0);
  params.comments_per_user = exact(0);
  params.tags_created_per_user = exact(0);
  params.photos_per_post = exact(0);
  return params;
}

}  // namespace

// ============================================================================
// Fitted count distributions
// ============================================================================

TEST_CASE("under-dispersed fit reduces to the exact binomial") {
  // mean 1, sd 0.5 on [0, 2]: binomial with two trials and p = 1/2 is the
  // unique member of the family hitting that mean, and nothing truncates.
  const CountDistribution d = fit_count_distribution({1.0, 0.5, 0, 2});
  REQUIRE(d.pmf.size() == 3);
  CHECK(d.min == 0);
  CHECK(d.pmf[0] == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(d.pmf[1] == doctest::Approx(0.50).epsilon(1e-9));
  CHECK(d.pmf[2] == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("truncated fits reproduce the configured mean exactly") {
  const WorkloadParams defaults;
  const std::vector<CountMeasure> measures = {
      defaults.posts_per_user,      defaults.tags_per_post,
      defaults.comments_per_user,   defaults.tags_created_per_user,
      defaults.photos_per_post,     {2.0, std::sqrt(2.0), 0, 30},  // equal-dispersion case
  };
  for (const CountMeasure& m : measures) {
    CAPTURE(m.mean);
    const CountDistribution d = fit_count_distribution(m);
    REQUIRE(d.pmf.size() == static_cast<std::size_t>(m.max - m.min) + 1);
    CHECK(d.min == m.min);
    double sum = 0.0;
    for (double p : d.pmf) {
      CHECK(p >= 0.0);
      sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.mean() == doctest::Approx(m.mean).epsilon(1e-9));
  }
}

TEST_CASE("degenerate measures become point masses") {
  SUBCASE("zero spread") {
    const CountDistribution d = fit_count_distribution({3.0, 0.0, 0, 8});
    CHECK(d.min == 3);
    CHECK(d.pmf == std::vector<double>{1.0});
  }
  SUBCASE("mean pinned to the lower endpoint") {
    const CountDistribution d = fit_count_distribution({0.0, 2.0, 0, 8});
    CHECK(d.min == 0);
    CHECK(d.pmf == std::vector<double>{1.0});
  }
  SUBCASE("mean pinned to the upper endpoint") {
    const CountDistribution d = fit_count_distribution({8.0, 2.0, 0, 8});
    CHECK(d.min == 8);
    CHECK(d.pmf == std::vector<double>{1.0});
  }
  SUBCASE("single-point support") {
    const CountDistribution d = fit_count_distribution({4.0, 9.9, 4, 4});
    CHECK(d.min == 4);
    CHECK(d.pmf == std::vector<double>{1.0});
  }
}

TEST_CASE("an unreachable mean is rejected rather than silently missed") {
  // With sd 10 the family cap behaves like an equal-spread distribution
  // centered far above the support, whose truncated mean tops out near 7.92
  // on [0, 8]; a target of 7.95 cannot be hit.
  CHECK_THROWS_AS((void)fit_count_distribution({7.95, 10.0, 0, 8}), ValidationError);
}

TEST_CASE("invalid measures are rejected") {
  CHECK_THROWS_AS((void)fit_count_distribution({9.0, 1.0, 0, 8}), ValidationError);
  CHECK_THROWS_AS((void)fit_count_distribution({-1.0, 1.0, 0, 8}), ValidationError);
  CHECK_THROWS_AS((void)fit_count_distribution({1.0, -0.5, 0, 8}), ValidationError);
  CHECK_THROWS_AS((void)fit_count_distribution({1.0, 1.0, -1, 8}), ValidationError);
  CHECK_THROWS_AS((void)fit_count_distribution({1.0, 1.0, 5, 2}), ValidationError);
  const double nan = std::nan("");
  CHECK_THROWS_AS((void)fit_count_distribution({nan, 1.0, 0, 8}), ValidationError);
  CHECK_THROWS_AS((void)fit_count_distribution({1.0, nan, 0, 8}), ValidationError);
}

TEST_CASE("inverse-CDF sampling tracks the fitted distribution") {
  const WorkloadParams defaults;
  const CountDistribution d = fit_count_distribution(defaults.posts_per_user);
  Rng rng{0x5eedu};
  const int n = 50'000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const int k = d.sample(rng);
    REQUIRE(k >= 0);
    REQUIRE(k <= 8);
    sum += k;
  }
  CHECK(sum / n == doctest::Approx(defaults.posts_per_user.mean).epsilon(0.03));

  Rng a{9u}, b{9u};
  for (int i = 0; i < 20; ++i) CHECK(d.sample(a) == d.sample(b));
}

// ============================================================================
// Workload generation: structure
// ============================================================================

TEST_CASE("generated workloads are structurally valid for any seed") {
  const WorkloadParams params;
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u, 6u, 7u, 8u, 9u, 10u}) {
    CAPTURE(seed);
    const auto items = generate_workload(params, seed);

    std::map<ContentId, const ContentItem*> by_id;
    std::map<PeerId, int> posts_by_user, comments_by_user;
    std::map<ContentId, int> photos_by_post;
    for (const auto& item : items) {
      REQUIRE(by_id.emplace(item.id, &item).second);  // unique ids
      REQUIRE(item.author >= 1);
      REQUIRE(item.author <= params.n_users);
      REQUIRE(item.created_at >= 0.0);
      REQUIRE(item.created_at <= params.session_length_s);
      REQUIRE(!item.tags.empty());
      REQUIRE(std::is_sorted(item.tags.begin(), item.tags.end()));
      switch (item.kind) {
        case ContentKind::post:
          posts_by_user[item.author]++;
          REQUIRE(!item.parent.has_value());
          REQUIRE(item.tags.size() <= 5);
          REQUIRE(item.size_bytes == params.post_size_bytes);
          break;
        case ContentKind::comment:
          comments_by_user[item.author]++;
          REQUIRE(item.size_bytes == params.comment_size_bytes);
          break;
        case ContentKind::photo:
          REQUIRE(item.parent.has_value());
          photos_by_post[*item.parent]++;
          REQUIRE(item.size_bytes == params.photo_size_bytes);
          break;
        case ContentKind::sensor_data:
          REQUIRE(false);
          break;
      }
    }

    // Ids are dense 1..N and the sequence is time-ordered.
    REQUIRE(by_id.size() == items.size());
    if (!items.empty()) REQUIRE(by_id.rbegin()->first == items.size());
    for (std::size_t i = 1; i < items.size(); ++i) {
      REQUIRE(items[i - 1].created_at <= items[i].created_at);
    }

    // Comments point at strictly earlier posts; photos inherit their post's
    // time and tags.
    for (const auto& item : items) {
      if (item.kind == ContentKind::comment) {
        REQUIRE(item.parent.has_value());
        const auto parent = by_id.find(*item.parent);
        REQUIRE(parent != by_id.end());
        REQUIRE(parent->second->kind == ContentKind::post);
        REQUIRE(parent->second->created_at < item.created_at);
      } else if (item.kind == ContentKind::photo) {
        const auto parent = by_id.find(*item.parent);
        REQUIRE(parent != by_id.end());
        REQUIRE(parent->second->kind == ContentKind::post);
        REQUIRE(parent->second->created_at == item.created_at);
        REQUIRE(parent->second->tags == item.tags);
      }
    }

    // Per-user and per-post counts respect the configured ranges.
    for (const auto& [user, count] : posts_by_user) CHECK(count <= params.posts_per_user.max);
    for (const auto& [user, count] : comments_by_user)
      CHECK(count <= params.comments_per_user.max);
    for (const auto& [post, count] : photos_by_post) {
      CHECK(count >= params.photos_per_post.min);
      CHECK(count <= params.photos_per_post.max);
    }

    // Invented tags follow the per-user naming scheme and are only ever used
    // by their inventor.
    const std::set<std::string> vocab(params.vocabulary.begin(), params.vocabulary.end());
    std::map<std::string, std::set<PeerId>> created_users;
    for (const auto& item : items) {
      for (const auto& tag : item.tags) {
        if (!vocab.contains(tag)) created_users[tag].insert(item.author);
      }
    }
    for (const auto& [tag, users] : created_users) {
      CHECK(users.size() == 1);
      CHECK(tag.rfind("u" + std::to_string(*users.begin()) + "-tag", 0) == 0);
    }
  }
}

TEST_CASE("silent parameters generate an empty workload") {
  CHECK(generate_workload(silent_params(), 1).empty());

  WorkloadParams no_users;
  no_users.n_users = 0;
  CHECK(generate_workload(no_users, 1).empty());
}

TEST_CASE("comments with no earlier post to reference are dropped") {
  WorkloadParams params;
  params.posts_per_user = exact(0);  // nobody posts, so every comment is orphaned
  params.photo_attach_probability = 0.0;
  params.tags_created_per_user = exact(0);
  const auto items = generate_workload(params, 11);
  CHECK(items.empty());
}

TEST_CASE("generation is deterministic in the seed") {
  const WorkloadParams params;
  const auto a = generate_workload(params, 42);
  const auto b = generate_workload(params, 42);
  REQUIRE(a == b);
  const auto c = generate_workload(params, 43);
  CHECK(a != c);
}

TEST_CASE("invalid workload parameters are rejected") {
  const auto reject = [](auto mutate) {
    WorkloadParams params;
    mutate(params);
    CHECK_THROWS_AS((void)generate_workload(params, 1), ValidationError);
  };
  reject([](WorkloadParams& p) { p.session_length_s = 0.0; });
  reject([](WorkloadParams& p) { p.posts_per_user.mean = 9.0; });
  reject([](WorkloadParams& p) { p.tags_per_post.sd = -1.0; });
  reject([](WorkloadParams& p) { p.photo_attach_probability = 1.5; });
  reject([](WorkloadParams& p) { p.photo_attach_probability = -0.1; });
  reject([](WorkloadParams& p) { p.vocabulary.clear(); });
  reject([](WorkloadParams& p) { p.vocabulary.push_back(p.vocabulary.front()); });
  reject([](WorkloadParams& p) { p.vocabulary.push_back("bad;tag"); });
  reject([](WorkloadParams& p) { p.post_size_bytes = 0; });
}

// ============================================================================
// Workload generation: statistics
// ============================================================================

TEST_CASE("comment targeting concentrates threads on popular posts") {
  WorkloadParams params;
  params.n_users = 30;
  params.posts_per_user = exact(1);
  params.comments_per_user = exact(10);
  params.photo_attach_probability = 0.0;
  params.tags_created_per_user = exact(0);
  const auto items = generate_workload(params, 7);
  const WorkloadStats stats = workload_stats(items, params.vocabulary, params.n_users);
  REQUIRE(stats.total_posts == 30);
  // Preferential attachment plus the earlier-post constraint produce a heavy
  // tail: the busiest thread collects far more than an even share.
  CHECK(stats.comments_received_per_post.max >= 2.0 * stats.comments_received_per_post.mean);
}

TEST_CASE("totals for the default crowd stay inside the documented band") {
  const WorkloadParams params;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CAPTURE(seed);
    const auto items = generate_workload(params, seed);
    const auto posts = std::count_if(items.begin(), items.end(), [](const ContentItem& i) {
      return i.kind == ContentKind::post;
    });
    CHECK(posts >= 19);
    CHECK(posts <= 59);
  }
}

TEST_CASE("realized means converge to the configured targets at scale") {
  WorkloadParams params;
  params.n_users = 500;
  for (std::uint64_t seed : {1u, 2u}) {
    CAPTURE(seed);
    const auto items = generate_workload(params, seed);
    const WorkloadStats stats = workload_stats(items, params.vocabulary, params.n_users);
    REQUIRE(stats.n_users == 500);

    const auto within = [](const MeasureStats& row, const CountMeasure& target) {
      const double se = target.sd / std::sqrt(static_cast<double>(row.count));
      CAPTURE(row.mean);
      CAPTURE(target.mean);
      CHECK(std::abs(row.mean - target.mean) <= 3.0 * se);
    };
    within(stats.posts_per_user, params.posts_per_user);
    within(stats.tags_per_post, params.tags_per_post);
    within(stats.comments_per_user, params.comments_per_user);
    within(stats.tags_created_per_user, params.tags_created_per_user);
    within(stats.photos_per_post, params.photos_per_post);

    // Count ranges hold in aggregate too.
    CHECK(stats.posts_per_user.max <= params.posts_per_user.max);
    CHECK(stats.tags_per_post.min >= params.tags_per_post.min);
    CHECK(stats.photos_per_post.max <= params.photos_per_post.max);
  }
}

// ============================================================================
// Summary statistics
// ============================================================================

TEST_CASE("the hand-built fixture yields exact hand-computed statistics") {
  const double kSdHalf = std::sqrt(0.5);  // sample sd of {1, 2}
  const WorkloadStats stats = workload_stats(fixture_items(), kFixtureVocab, 2);

  CHECK(stats.total_posts == 2);
  CHECK(stats.total_comments == 3);
  CHECK(stats.total_photos == 1);
  CHECK(stats.n_users == 2);

  CHECK(stats.posts_per_user.mean == 1.0);
  CHECK(stats.posts_per_user.sd == 0.0);
  CHECK(stats.posts_per_user.min == 1.0);
  CHECK(stats.posts_per_user.max == 1.0);
  CHECK(stats.posts_per_user.count == 2);

  CHECK(stats.tags_per_post.mean == 1.5);
  CHECK(stats.tags_per_post.sd == doctest::Approx(kSdHalf).epsilon(1e-12));
  CHECK(stats.tags_per_post.min == 1.0);
  CHECK(stats.tags_per_post.max == 2.0);

  CHECK(stats.comments_per_user.mean == 1.5);
  CHECK(stats.comments_per_user.sd == doctest::Approx(kSdHalf).epsilon(1e-12));

  CHECK(stats.comments_received_per_post.mean == 1.5);
  CHECK(stats.comments_received_per_post.min == 1.0);
  CHECK(stats.comments_received_per_post.max == 2.0);
  CHECK(stats.comments_received_per_post.count == 2);

  CHECK(stats.tags_created_per_user.mean == 0.5);  // only "z", used by user 1
  CHECK(stats.tags_created_per_user.min == 0.0);
  CHECK(stats.tags_created_per_user.max == 1.0);

  CHECK(stats.posts_per_tag.mean == 1.5);  // x on two posts, y on one
  CHECK(stats.posts_per_tag.count == 2);

  CHECK(stats.comments_per_tag.mean == 1.0);  // x, y, z each on one comment
  CHECK(stats.comments_per_tag.sd == 0.0);
  CHECK(stats.comments_per_tag.count == 3);

  CHECK(stats.photos_per_post.mean == 1.0);
  CHECK(stats.photos_per_post.count == 1);

  CHECK(stats.photos_per_tag.mean == 1.0);  // the photo carries x and y
  CHECK(stats.photos_per_tag.count == 2);

  const auto rows = stats.rows();
  REQUIRE(rows.size() == 9);
  CHECK(rows.front().first == "posts per user");
  CHECK(rows.front().second == &stats.posts_per_user);
}

TEST_CASE("explicit user counts pad silent users with zeros") {
  const WorkloadStats stats = workload_stats(fixture_items(), kFixtureVocab, 3);
  CHECK(stats.n_users == 3);
  CHECK(stats.posts_per_user.count == 3);
  CHECK(stats.posts_per_user.mean == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(stats.posts_per_user.min == 0.0);
  CHECK(stats.comments_per_user.mean == 1.0);
  CHECK(stats.comments_per_user.sd == 1.0);
  CHECK(stats.tags_created_per_user.mean == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  SUBCASE("zero means infer the user set from the events") {
    const WorkloadStats inferred = workload_stats(fixture_items(), kFixtureVocab, 0);
    CHECK(inferred.n_users == 2);
    CHECK(inferred.posts_per_user.mean == 1.0);
  }
}

TEST_CASE("an empty workload yields an all-zero table") {
  const WorkloadStats stats = workload_stats({}, kFixtureVocab, 0);
  CHECK(stats.n_users == 0);
  CHECK(stats.total_posts == 0);
  CHECK(stats.total_comments == 0);
  CHECK(stats.total_photos == 0);
  for (const auto& [name, row] : stats.rows()) {
    CAPTURE(name);
    CHECK(row->mean == 0.0);
    CHECK(row->sd == 0.0);
    CHECK(row->min == 0.0);
    CHECK(row->max == 0.0);
    CHECK(row->count == 0);
  }
}

TEST_CASE("sensor items are not part of the social statistics") {
  auto items = fixture_items();
  ContentItem sensor = make_item(99, kInfrastructurePeer, ContentKind::sensor_data,
                                 {"air-quality"}, 5.0);
  items.insert(items.begin(), sensor);
  const WorkloadStats with_sensor = workload_stats(items, kFixtureVocab, 2);
  const WorkloadStats without = workload_stats(fixture_items(), kFixtureVocab, 2);
  CHECK(with_sensor.total_posts == without.total_posts);
  CHECK(with_sensor.n_users == without.n_users);
  CHECK(with_sensor.tags_created_per_user.mean == without.tags_created_per_user.mean);
}

// ============================================================================
// CSV round-trip
// ============================================================================

TEST_CASE("workloads survive a CSV round-trip bit for bit") {
  WorkloadParams params;
  params.n_users = 8;
  const auto items = generate_workload(params, 3);
  REQUIRE(!items.empty());
  const std::string text = workload_to_csv(items);
  const auto parsed = workload_from_csv(text);
  REQUIRE(parsed == items);

  SUBCASE("and through a file") {
    const TempFile file{"citymesh-workload"};
    save_workload_csv(file.path, items);
    CHECK(load_workload_csv(file.path) == items);
  }
}

TEST_CASE("a header-only CSV is an empty workload") {
  const std::string text = workload_to_csv({});
  CHECK(workload_from_csv(text).empty());
}

TEST_CASE("malformed workload CSV is rejected") {
  const std::string header =
      "id,author,kind,parent,created_at,size_bytes,share_in_proximity,store_remotely,tags\n";
  CHECK_THROWS_AS((void)workload_from_csv(""), ParseError);
  CHECK_THROWS_AS((void)workload_from_csv("id,author\n"), ParseError);
  CHECK_THROWS_AS((void)workload_from_csv(header + "1,1,post,,0,100,1,1\n"), ParseError);
  CHECK_THROWS_AS((void)workload_from_csv(header + "x,1,post,,0,100,1,1,food\n"), ParseError);
  CHECK_THROWS_AS((void)workload_from_csv(header + "1,1,story,,0,100,1,1,food\n"), ParseError);
  CHECK_THROWS_AS((void)workload_from_csv(header + "1,1,post,,zero,100,1,1,food\n"), ParseError);
  CHECK_THROWS_AS((void)workload_from_csv(header + "1,1,post,,0,100,2,1,food\n"), ParseError);
  CHECK_THROWS_AS((void)workload_from_csv(header + "1,1,comment,,0,100,1,1,food\n"),
                  ValidationError);
  CHECK_THROWS_AS((void)workload_from_csv(header + "1,1,post,7,0,100,1,1,food\n"),
                  ValidationError);
  CHECK_THROWS_AS((void)workload_from_csv(header + "1,1,post,,0,100,1,1,\n"), ValidationError);
  CHECK_THROWS_AS((void)workload_from_csv(header + "1,1,post,,0,0,1,1,food\n"), ValidationError);

  SUBCASE("the error names the offending line's byte offset") {
    try {
      (void)workload_from_csv(header + "1,1,post,,0,100,1,1\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.byte_offset() == header.size());
    }
  }
}

TEST_CASE("items with CSV metacharacters in tags cannot be exported") {
  auto item = make_item(1, 1, ContentKind::post, {"oops,comma"}, 0.0);
  CHECK_THROWS_AS((void)workload_to_csv({item}), ValidationError);
}

TEST_CASE("missing workload files raise an I/O error") {
  CHECK_THROWS_AS((void)load_workload_csv("/nonexistent/dir/workload.csv"), IoError);
}
