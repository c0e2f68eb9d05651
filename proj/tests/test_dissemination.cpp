#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "citymesh/dissem/dissemination.hpp"
#include "citymesh/error.hpp"
#include "citymesh/rng.hpp"

using namespace citymesh;
using namespace citymesh::dissem;

namespace {

[[nodiscard]] ContentItem make_item(ContentId id, PeerId author,
                                    std::vector<std::string> tags,
                                    std::uint64_t size_bytes = 10,
                                    double created_at = 0.0) {
  ContentItem item;
  item.id = id;
  item.author = author;
  item.tags = std::move(tags);
  item.size_bytes = size_bytes;
  item.created_at = created_at;
  validate_content_item(item);
  return item;
}

[[nodiscard]] UserProfile make_profile(PeerId peer,
                                       std::map<std::string, double> interests) {
  UserProfile profile;
  profile.peer = peer;
  profile.category = "citizen";
  profile.interests = std::move(interests);
  validate_profile(profile);
  return profile;
}

[[nodiscard]] PeerState make_peer(PeerId peer, std::map<std::string, double> interests,
                                  std::uint64_t capacity = 1'000'000'000) {
  PeerState state;
  state.profile = make_profile(peer, std::move(interests));
  state.cache.peer = peer;
  state.cache.capacity_bytes = capacity;
  return state;
}

void put(Cache& cache, const ContentItem& item) {
  cache.items.emplace(item.id, item);
  cache.used_bytes += item.size_bytes;
  validate_cache(cache);
}

[[nodiscard]] std::set<ContentId> ids_of(const Cache& cache) {
  std::set<ContentId> ids;
  for (const auto& [id, item] : cache.items) ids.insert(id);
  return ids;
}

}  // namespace

// ============================================================================
// Utility matching
// ============================================================================

TEST_CASE("content utility is the mean interest over the item's tags") {
  const UserProfile profile = make_profile(1, {{"air", 0.8}, {"sport", 0.4}});
  CHECK(content_utility(make_profile(1, {{"air", 1.0}}), make_item(1, 2, {"air"})) == 1.0);
  CHECK(content_utility(make_profile(1, {}), make_item(1, 2, {"air"})) == 0.0);
  CHECK(content_utility(profile, make_item(1, 2, {"air", "sport"})) ==
        doctest::Approx(0.6).epsilon(1e-12));
  // Tags the profile has never seen weigh zero.
  CHECK(content_utility(profile, make_item(1, 2, {"air", "opera"})) ==
        doctest::Approx(0.4).epsilon(1e-12));

  ContentItem bare;
  bare.id = 9;
  bare.size_bytes = 1;
  CHECK_THROWS_AS((void)content_utility(profile, bare), ValidationError);
}

TEST_CASE("utility is bounded and monotone") {
  Rng rng{0x10b5u};
  const std::vector<std::string> vocab{"t0", "t1", "t2", "t3", "t4"};
  for (int trial = 0; trial < 500; ++trial) {
    std::map<std::string, double> interests;
    for (const std::string& tag : vocab)
      if (rng.next_below(2) == 0) interests[tag] = rng.next_double();
    const UserProfile profile = make_profile(1, interests);

    std::vector<std::string> tags;
    for (const std::string& tag : vocab)
      if (rng.next_below(2) == 0) tags.push_back(tag);
    if (tags.empty()) tags.push_back("t0");
    const ContentItem item = make_item(1, 2, tags);

    const double u = content_utility(profile, item);
    CHECK(u >= 0.0);
    CHECK(u <= 1.0);

    // Raising any weight never decreases utility.
    UserProfile raised = profile;
    raised.interests[tags.front()] = 1.0;
    CHECK(content_utility(raised, item) >= u);

    // Adding a tag the profile weights at zero never increases it.
    ContentItem diluted = item;
    diluted.tags.push_back("unheard-of");
    validate_content_item(diluted);
    CHECK(content_utility(profile, diluted) <= u);
  }
}

// ============================================================================
// Interest adaptation
// ============================================================================

TEST_CASE("consuming content pulls the consumed tags toward full interest") {
  const ContentItem item = make_item(1, 2, {"air"});
  UserProfile profile = make_profile(1, {{"air", 0.0}, {"food", 0.3}});

  profile = update_interests(std::move(profile), item, 0.1);
  CHECK(profile.interests.at("air") == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(profile.interests.at("food") == 0.3);  // untouched, bitwise

  SUBCASE("full interest is a fixed point") {
    UserProfile keen = make_profile(1, {{"air", 1.0}});
    for (const double alpha : {0.01, 0.5, 1.0}) {
      keen = update_interests(std::move(keen), item, alpha);
      CHECK(keen.interests.at("air") == 1.0);
    }
  }
  SUBCASE("unseen tags enter the profile at alpha") {
    const UserProfile grown =
        update_interests(make_profile(1, {{"food", 0.3}}), item, 0.25);
    CHECK(grown.interests.at("air") == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(grown.interests.at("food") == 0.3);
  }
  SUBCASE("adaptation contracts the distance to 1") {
    Rng rng{0xada9u};
    for (int trial = 0; trial < 200; ++trial) {
      const double w = rng.next_double();
      const double alpha = 0.01 + 0.99 * rng.next_double();
      const UserProfile next =
          update_interests(make_profile(1, {{"air", w}}), item, alpha);
      const double w2 = next.interests.at("air");
      CHECK(std::abs(1.0 - w2) ==
            doctest::Approx((1.0 - alpha) * std::abs(1.0 - w)).epsilon(1e-12));
      CHECK(w2 >= w);
      CHECK(w2 <= 1.0);
    }
  }
  SUBCASE("alpha outside (0,1] is rejected") {
    CHECK_THROWS_AS((void)update_interests(make_profile(1, {}), item, 0.0),
                    ValidationError);
    CHECK_THROWS_AS((void)update_interests(make_profile(1, {}), item, 1.5),
                    ValidationError);
  }
}

// ============================================================================
// Transfer selection
// ============================================================================

TEST_CASE("transfer selection filters, orders, and packs the budget") {
  DisseminationParams params;  // theta = 0.2
  Cache cache;
  cache.peer = 1;
  cache.capacity_bytes = 1000;
  put(cache, make_item(11, 1, {"p"}, 10, 1.0));
  put(cache, make_item(12, 1, {"q"}, 10, 2.0));
  put(cache, make_item(13, 1, {"r"}, 10, 3.0));
  const UserProfile remote = make_profile(2, {{"p", 0.9}, {"q", 0.5}, {"r", 0.1}});

  SUBCASE("the reference trace sends exactly the best-fitting item") {
    const auto picked = select_items_for_transfer(cache, remote, {}, 15, params);
    REQUIRE(picked.size() == 1);
    CHECK(picked[0].id == 11);  // utility 0.9; 0.5-item no longer fits; 0.1 < theta
  }
  SUBCASE("zero budget sends nothing") {
    CHECK(select_items_for_transfer(cache, remote, {}, 0, params).empty());
  }
  SUBCASE("items the remote peer already holds are never re-sent") {
    CHECK(select_items_for_transfer(cache, remote, {11, 12, 13}, 1000, params).empty());
  }
  SUBCASE("a smaller lower-utility item can fill the leftover budget") {
    Cache mixed;
    mixed.peer = 1;
    mixed.capacity_bytes = 1000;
    put(mixed, make_item(21, 1, {"p"}, 10, 1.0));   // utility 0.9
    put(mixed, make_item(22, 1, {"q"}, 10, 2.0));   // utility 0.5, won't fit
    put(mixed, make_item(23, 1, {"r2"}, 3, 3.0));   // utility 0.3, fits after skip
    const UserProfile wants =
        make_profile(2, {{"p", 0.9}, {"q", 0.5}, {"r2", 0.3}});
    const auto picked = select_items_for_transfer(mixed, wants, {}, 13, params);
    REQUIRE(picked.size() == 2);
    CHECK(picked[0].id == 21);
    CHECK(picked[1].id == 23);
  }
  SUBCASE("opted-out items never leave the cache") {
    Cache shy;
    shy.peer = 1;
    shy.capacity_bytes = 1000;
    ContentItem secret = make_item(31, 1, {"p"}, 10, 1.0);
    secret.share_in_proximity = false;
    put(shy, secret);
    CHECK(select_items_for_transfer(shy, remote, {}, 1000, params).empty());
  }
  SUBCASE("threshold boundary is inclusive") {
    const UserProfile lukewarm = make_profile(2, {{"p", 0.2}});
    const auto picked = select_items_for_transfer(cache, lukewarm, {}, 1000, params);
    REQUIRE(picked.size() == 1);
    CHECK(picked[0].id == 11);
  }
  SUBCASE("ties order by age then id") {
    Cache tied;
    tied.peer = 1;
    tied.capacity_bytes = 1000;
    put(tied, make_item(41, 1, {"p"}, 10, 5.0));
    put(tied, make_item(42, 1, {"p"}, 10, 3.0));  // same utility, older
    put(tied, make_item(43, 1, {"p"}, 10, 3.0));  // same utility, same age, larger id
    const UserProfile fan = make_profile(2, {{"p", 0.8}});
    const auto picked = select_items_for_transfer(tied, fan, {}, 1000, params);
    REQUIRE(picked.size() == 3);
    CHECK(picked[0].id == 42);
    CHECK(picked[1].id == 43);
    CHECK(picked[2].id == 41);
  }
}

// ============================================================================
// Eviction
// ============================================================================

TEST_CASE("eviction drops the least useful foreign content first") {
  const UserProfile owner = make_profile(1, {{"a", 0.9}, {"b", 0.5}, {"c", 0.1}});
  Cache cache;
  cache.peer = 1;
  cache.capacity_bytes = 30;
  put(cache, make_item(1, 2, {"a"}, 10, 5.0));  // foreign, utility 0.9
  put(cache, make_item(2, 3, {"b"}, 10, 3.0));  // foreign, utility 0.5
  put(cache, make_item(3, 1, {"c"}, 10, 1.0));  // owner-authored, utility 0.1

  SUBCASE("free space stores without dropping") {
    Cache roomy = cache;
    roomy.capacity_bytes = 100;
    const EvictOutcome out = evict(roomy, make_item(4, 4, {"a"}, 10, 9.0), owner);
    CHECK(out.stored);
    CHECK(out.dropped.empty());
    validate_cache(roomy);
  }
  SUBCASE("the lowest-utility foreign item goes, never the owner's") {
    const EvictOutcome out = evict(cache, make_item(4, 4, {"a"}, 10, 9.0), owner);
    CHECK(out.stored);
    REQUIRE(out.dropped.size() == 1);
    CHECK(out.dropped[0].id == 2);  // utility 0.5 < 0.9; id 3 is protected
    CHECK(ids_of(cache) == std::set<ContentId>{1, 3, 4});
    validate_cache(cache);
  }
  SUBCASE("equal utility drops the oldest first") {
    Cache twins;
    twins.peer = 1;
    twins.capacity_bytes = 20;
    put(twins, make_item(7, 2, {"b"}, 10, 8.0));
    put(twins, make_item(8, 3, {"b"}, 10, 2.0));  // same utility, older
    const EvictOutcome out = evict(twins, make_item(9, 4, {"a"}, 10, 9.0), owner);
    CHECK(out.stored);
    REQUIRE(out.dropped.size() == 1);
    CHECK(out.dropped[0].id == 8);
  }
  SUBCASE("a cache full of the owner's content rejects foreign items untouched") {
    Cache selfish;
    selfish.peer = 1;
    selfish.capacity_bytes = 20;
    put(selfish, make_item(5, 1, {"a"}, 10, 1.0));
    put(selfish, make_item(6, 1, {"b"}, 10, 2.0));
    const Cache before = selfish;
    const EvictOutcome out = evict(selfish, make_item(7, 4, {"a"}, 10, 9.0), owner);
    CHECK_FALSE(out.stored);
    CHECK(out.dropped.empty());
    CHECK(selfish == before);
  }
  SUBCASE("items larger than the whole buffer are errors") {
    CHECK_THROWS_AS((void)evict(cache, make_item(9, 4, {"a"}, 31, 9.0), owner),
                    CapacityError);
    CHECK_THROWS_AS((void)evict(cache, make_item(1, 4, {"a"}, 10, 9.0), owner),
                    ValidationError);  // duplicate id
  }
}

// ============================================================================
// Contacts
// ============================================================================

TEST_CASE("pairing setup accumulates across contacts before any transfer") {
  DisseminationParams params;  // setup 2 s
  PeerState a = make_peer(1, {{"air", 1.0}});
  PeerState b = make_peer(2, {{"air", 1.0}});
  put(a.cache, make_item(10, 1, {"air"}, 1000, 0.0));

  ContactResult first = handle_contact(a, b, 1.5, 54.4, params);
  CHECK(first.transfers.empty());
  CHECK(first.effective_duration_s == 0.0);
  CHECK(a.pairing_progress_s.at(2) == doctest::Approx(1.5));

  ContactResult second = handle_contact(a, b, 0.5, 54.4, params);
  CHECK(second.transfers.empty());  // handshake completes exactly at the end
  CHECK(b.pairing_progress_s.at(1) == doctest::Approx(2.0));

  ContactResult third = handle_contact(a, b, 1.0, 54.4, params);
  REQUIRE(third.transfers.size() == 1);
  CHECK(third.effective_duration_s == doctest::Approx(1.0));
  CHECK(holds(b.cache, 10));
}

TEST_CASE("the per-direction byte budget is duration times half the link rate") {
  DisseminationParams params;
  PeerState a = make_peer(1, {{"air", 1.0}});
  PeerState b = make_peer(2, {{"air", 1.0}});
  for (ContentId id = 1; id <= 5; ++id)
    put(a.cache, make_item(id, 1, {"air"}, 1'000'000, static_cast<double>(id)));

  // 3 s contact - 2 s setup = 1 s at 54.4 Mbps -> 3.4 MB per direction.
  const ContactResult result = handle_contact(a, b, 3.0, 54.4, params);
  REQUIRE(result.transfers.size() == 3);
  std::uint64_t total = 0;
  for (const TransferRecord& t : result.transfers) {
    CHECK(t.sender == 1);
    CHECK(t.receiver == 2);
    CHECK(t.stored);
    CHECK(t.consumed);
    CHECK(t.utility == 1.0);
    total += t.bytes;
  }
  CHECK(total == 3'000'000);
  CHECK(b.cache.items.size() == 3);
  // Oldest (highest-priority ties) items went first.
  CHECK(holds(b.cache, 1));
  CHECK(holds(b.cache, 2));
  CHECK(holds(b.cache, 3));
  // Consumption adapted the receiver's interests (already at the fixed point).
  CHECK(b.profile.interests.at("air") == 1.0);
}

TEST_CASE("an unbounded contact fully synchronizes disjoint caches") {
  DisseminationParams params;
  params.pairing_setup_s = 0.0;
  PeerState a = make_peer(1, {{"air", 1.0}, {"sport", 1.0}});
  PeerState b = make_peer(2, {{"air", 1.0}, {"sport", 1.0}});
  put(a.cache, make_item(1, 1, {"air"}, 500, 0.0));
  put(a.cache, make_item(2, 1, {"sport"}, 700, 1.0));
  put(b.cache, make_item(3, 2, {"air"}, 900, 2.0));

  const ContactResult result = handle_contact(a, b, 1000.0, 1000.0, params);
  CHECK(result.transfers.size() == 3);
  CHECK(ids_of(a.cache) == std::set<ContentId>{1, 2, 3});
  CHECK(ids_of(b.cache) == std::set<ContentId>{1, 2, 3});
  validate_cache(a.cache);
  validate_cache(b.cache);
}

TEST_CASE("contacts respect privacy, thresholds, and basic validity") {
  DisseminationParams params;
  params.pairing_setup_s = 0.0;

  SUBCASE("profiles opted out of proximity sharing exchange nothing") {
    PeerState a = make_peer(1, {{"air", 1.0}});
    PeerState b = make_peer(2, {{"air", 1.0}});
    put(a.cache, make_item(1, 1, {"air"}, 10, 0.0));
    b.profile.share_in_proximity = false;
    const ContactResult result = handle_contact(a, b, 10.0, 100.0, params);
    CHECK(result.transfers.empty());
    CHECK(b.cache.items.empty());
  }
  SUBCASE("items below the receiver's threshold stay put") {
    PeerState a = make_peer(1, {{"air", 1.0}});
    PeerState b = make_peer(2, {{"air", 0.1}});  // below theta = 0.2
    put(a.cache, make_item(1, 1, {"air"}, 10, 0.0));
    CHECK(handle_contact(a, b, 10.0, 100.0, params).transfers.empty());
  }
  SUBCASE("zero throughput logs an empty transfer") {
    PeerState a = make_peer(1, {{"air", 1.0}});
    PeerState b = make_peer(2, {{"air", 1.0}});
    put(a.cache, make_item(1, 1, {"air"}, 10, 0.0));
    const ContactResult result = handle_contact(a, b, 10.0, 0.0, params);
    CHECK(result.transfers.empty());
    CHECK(result.effective_duration_s == 10.0);
  }
  SUBCASE("degenerate inputs are rejected") {
    PeerState a = make_peer(1, {});
    PeerState b = make_peer(2, {});
    CHECK_THROWS_AS((void)handle_contact(a, b, 0.0, 10.0, params), ValidationError);
    CHECK_THROWS_AS((void)handle_contact(a, b, 1.0, -1.0, params), ValidationError);
    CHECK_THROWS_AS((void)handle_contact(a, a, 1.0, 10.0, params), ValidationError);
    b.pairing_progress_s[1] = 1.0;  // one-sided progress
    CHECK_THROWS_AS((void)handle_contact(a, b, 1.0, 10.0, params), IntegrityError);
  }
}

// ============================================================================
// Epidemic completeness vs a flooding oracle
// ============================================================================

namespace {

using PairList = std::vector<std::pair<std::size_t, std::size_t>>;

[[nodiscard]] PairList all_pairs(std::size_t k) {
  PairList pairs;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) pairs.emplace_back(i, j);
  return pairs;
}

[[nodiscard]] std::vector<PeerState> clique_start(std::size_t k) {
  std::vector<PeerState> states;
  for (std::size_t i = 0; i < k; ++i) {
    PeerState peer = make_peer(static_cast<PeerId>(i + 1), {{"t", 1.0}});
    put(peer.cache,
        make_item(1000 + static_cast<ContentId>(i), peer.profile.peer, {"t"}, 1,
                  static_cast<double>(i)));
    states.push_back(std::move(peer));
  }
  return states;
}

/// Independent reachability oracle: a contact simply unions both holdings.
void flood_round(std::vector<std::set<ContentId>>& reach, const PairList& order) {
  for (const auto& [i, j] : order) {
    std::set<ContentId> merged = reach[i];
    merged.insert(reach[j].begin(), reach[j].end());
    reach[i] = merged;
    reach[j] = std::move(merged);
  }
}

}  // namespace

TEST_CASE("epidemic spread matches brute-force flooding for every ordering") {
  DisseminationParams params;
  params.pairing_setup_s = 0.0;

  for (const std::size_t k : {std::size_t{2}, std::size_t{3}, std::size_t{4}}) {
    CAPTURE(k);
    PairList order = all_pairs(k);
    std::sort(order.begin(), order.end());
    std::set<std::pair<PeerId, ContentId>> ever_delivered_global;
    do {
      std::vector<PeerState> states = clique_start(k);
      std::vector<std::set<ContentId>> reach;
      for (const PeerState& s : states) reach.push_back(ids_of(s.cache));

      std::set<std::pair<PeerId, ContentId>> delivered;
      for (std::size_t round = 0; round + 1 < k; ++round) {
        for (const auto& [i, j] : order) {
          const ContactResult result =
              handle_contact(states[i], states[j], 1.0, 1e6, params);
          for (const TransferRecord& t : result.transfers) {
            // No duplicate delivery, ever.
            CHECK(delivered.emplace(t.receiver, t.content).second);
          }
          validate_cache(states[i].cache);
          validate_cache(states[j].cache);
        }
        flood_round(reach, order);
        for (std::size_t i = 0; i < k; ++i) REQUIRE(ids_of(states[i].cache) == reach[i]);
      }
      // Within k-1 rounds everyone has everything.
      for (std::size_t i = 0; i < k; ++i) {
        REQUIRE(states[i].cache.items.size() == k);
        REQUIRE(reach[i].size() == k);
      }
      ever_delivered_global.insert(delivered.begin(), delivered.end());
    } while (std::next_permutation(order.begin(), order.end()));
    CHECK_FALSE(ever_delivered_global.empty());
  }
}

TEST_CASE("epidemic spread completes within k-1 rounds for larger cliques") {
  DisseminationParams params;
  params.pairing_setup_s = 0.0;
  Rng rng{0xc11c0u};

  for (const std::size_t k : {std::size_t{5}, std::size_t{6}}) {
    CAPTURE(k);
    for (int trial = 0; trial < 30; ++trial) {
      PairList order = all_pairs(k);
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.next_below(i)]);

      std::vector<PeerState> states = clique_start(k);
      for (std::size_t round = 0; round + 1 < k; ++round)
        for (const auto& [i, j] : order)
          (void)handle_contact(states[i], states[j], 1.0, 1e6, params);
      for (const PeerState& s : states) REQUIRE(s.cache.items.size() == k);
    }
  }
}
