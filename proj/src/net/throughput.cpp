#include "citymesh/net/throughput.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "citymesh/error.hpp"

namespace citymesh::net {

namespace {

struct SignatureToken {
  FlowKind kind = FlowKind::g2c;
  bool shared_sink = false;

  [[nodiscard]] std::pair<int, int> rank() const {
    return {kind == FlowKind::g2c ? 0 : 1, shared_sink ? 1 : 0};
  }
};

[[nodiscard]] std::string token_text(const SignatureToken& token) {
  std::string text = to_string(token.kind);
  if (token.shared_sink) text += '!';
  return text;
}

[[nodiscard]] double parse_rate(std::string_view token, int line_no) {
  double value = 0.0;
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || end != token.data() + token.size() || !std::isfinite(value) ||
      value <= 0.0) {
    throw ValidationError{"empirical table line " + std::to_string(line_no) +
                          ": bad rate '" + std::string(token) + "'"};
  }
  return value;
}

[[nodiscard]] SignatureToken parse_token(std::string_view text, int line_no) {
  SignatureToken token;
  if (!text.empty() && text.back() == '!') {
    token.shared_sink = true;
    text.remove_suffix(1);
  }
  if (text == "g2c") {
    token.kind = FlowKind::g2c;
  } else if (text == "c2c") {
    token.kind = FlowKind::c2c;
  } else {
    throw ValidationError{"empirical table line " + std::to_string(line_no) +
                          ": unknown flow token '" + std::string(text) + "'"};
  }
  return token;
}

}  // namespace

const char* to_string(FlowKind kind) {
  switch (kind) {
    case FlowKind::g2c: return "g2c";
    case FlowKind::c2c: return "c2c";
    case FlowKind::bridge: return "bridge";
  }
  return "unknown";
}

const char* to_string(ThroughputMode mode) {
  return mode == ThroughputMode::empirical ? "empirical" : "analytic";
}

std::optional<ThroughputMode> throughput_mode_from_string(std::string_view text) {
  if (text == "empirical") return ThroughputMode::empirical;
  if (text == "analytic") return ThroughputMode::analytic;
  return std::nullopt;
}

// ============================================================================
// Signatures
// ============================================================================

PatternSignature make_pattern_signature(const std::vector<Flow>& flows) {
  std::vector<SignatureToken> tokens(flows.size());
  for (std::size_t i = 0; i < flows.size(); ++i) {
    if (flows[i].kind == FlowKind::bridge)
      throw ValidationError{"bridge flows have no group signature"};
    tokens[i].kind = flows[i].kind;
    for (std::size_t j = 0; j < flows.size(); ++j) {
      if (j != i && flows[j].dst == flows[i].dst) {
        tokens[i].shared_sink = true;
        break;
      }
    }
  }

  PatternSignature signature;
  signature.canonical.resize(flows.size());
  std::iota(signature.canonical.begin(), signature.canonical.end(), std::size_t{0});
  std::stable_sort(signature.canonical.begin(), signature.canonical.end(),
                   [&tokens](std::size_t a, std::size_t b) {
                     return tokens[a].rank() < tokens[b].rank();
                   });
  for (std::size_t k = 0; k < signature.canonical.size(); ++k) {
    if (k > 0) signature.text += '+';
    signature.text += token_text(tokens[signature.canonical[k]]);
  }
  return signature;
}

// ============================================================================
// Empirical table
// ============================================================================

EmpiricalTable builtin_empirical_table() {
  return EmpiricalTable{
      {{2, "g2c"}, {54.4}},
      {{3, "g2c"}, {52.6}},
      {{3, "c2c"}, {22.3}},
      {{3, "g2c+c2c"}, {44.3, 4.24}},
      {{4, "g2c"}, {52.75}},
      {{4, "c2c"}, {17.0}},
      {{4, "g2c+c2c"}, {40.0, 5.41}},
      {{4, "c2c!+c2c!"}, {12.7, 9.07}},
      {{4, "g2c!+c2c!+c2c!"}, {37.4, 2.9, 3.22}},
  };
}

EmpiricalTable parse_empirical_table(std::string_view text) {
  EmpiricalTable table;
  std::istringstream lines{std::string{text}};
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream in{line};
    std::string size_token;
    if (!(in >> size_token)) continue;  // blank line

    std::size_t group_size = 0;
    const auto [end, ec] = std::from_chars(
        size_token.data(), size_token.data() + size_token.size(), group_size);
    if (ec != std::errc{} || end != size_token.data() + size_token.size() || group_size < 2)
      throw ValidationError{"empirical table line " + std::to_string(line_no) +
                            ": bad group size '" + size_token + "'"};

    std::string signature_text;
    if (!(in >> signature_text))
      throw ValidationError{"empirical table line " + std::to_string(line_no) +
                            ": missing flow signature"};

    std::vector<SignatureToken> tokens;
    std::size_t start = 0;
    while (start <= signature_text.size()) {
      const auto plus = signature_text.find('+', start);
      const auto piece = signature_text.substr(
          start, plus == std::string::npos ? std::string::npos : plus - start);
      tokens.push_back(parse_token(piece, line_no));
      if (plus == std::string::npos) break;
      start = plus + 1;
    }
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      if (tokens[i].rank() < tokens[i - 1].rank())
        throw ValidationError{"empirical table line " + std::to_string(line_no) +
                              ": signature not in canonical order"};
    }
    const bool any_c2c =
        std::any_of(tokens.begin(), tokens.end(),
                    [](const SignatureToken& t) { return t.kind == FlowKind::c2c; });
    if (any_c2c && group_size < 3)
      throw ValidationError{"empirical table line " + std::to_string(line_no) +
                            ": client-to-client flow needs a group of 3+"};

    std::vector<double> rates;
    std::string rate_token;
    while (in >> rate_token) rates.push_back(parse_rate(rate_token, line_no));
    if (rates.size() != tokens.size())
      throw ValidationError{"empirical table line " + std::to_string(line_no) +
                            ": expected one rate per flow"};

    if (!table.emplace(EmpiricalKey{group_size, signature_text}, std::move(rates)).second)
      throw ValidationError{"empirical table line " + std::to_string(line_no) +
                            ": duplicate row"};
  }
  return table;
}

EmpiricalTable load_empirical_table(const std::filesystem::path& path) {
  std::ifstream in{path, std::ios::binary};
  if (!in) throw IoError{"cannot open empirical table: " + path.string()};
  std::ostringstream text;
  text << in.rdbuf();
  return parse_empirical_table(text.str());
}

// ============================================================================
// Analytic model
// ============================================================================

double medium_capacity(const ThroughputModelParams& params, std::size_t group_size) {
  const auto slot = params.c_med_by_size.find(group_size);
  const double c_med = slot == params.c_med_by_size.end() ? params.default_c_med : slot->second;
  if (!std::isfinite(c_med) || c_med <= 0.0)
    throw ValidationError{"medium capacity must be positive"};
  return c_med;
}

std::vector<double> analytic_throughputs(
    const std::vector<std::pair<int, double>>& hops_and_weights, double c_med) {
  if (!std::isfinite(c_med) || c_med <= 0.0)
    throw ValidationError{"medium capacity must be positive"};
  double total_weight = 0.0;
  for (const auto& [hops, weight] : hops_and_weights) {
    if (hops < 1) throw ValidationError{"flow hop count must be at least 1"};
    if (!std::isfinite(weight) || weight <= 0.0)
      throw ValidationError{"flow weight must be positive"};
    total_weight += weight;
  }
  std::vector<double> rates;
  rates.reserve(hops_and_weights.size());
  for (const auto& [hops, weight] : hops_and_weights)
    rates.push_back((weight / total_weight) * c_med / hops);
  return rates;
}

// ============================================================================
// Pattern evaluation
// ============================================================================

ThroughputResult flow_throughputs(const GroupRegistry& registry,
                                  const std::vector<MultiGroupLink>& links,
                                  const FlowPattern& pattern,
                                  const ThroughputModelParams& params) {
  ThroughputResult result;
  result.per_flow_mbps.assign(pattern.flows.size(), 0.0);

  std::map<GroupId, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < pattern.flows.size(); ++i) {
    const Flow& flow = pattern.flows[i];
    if (flow.src == flow.dst) throw ValidationError{"flow endpoints must differ"};
    if (!std::isfinite(flow.weight) || flow.weight <= 0.0)
      throw ValidationError{"flow weight must be positive"};

    if (flow.kind == FlowKind::bridge) {
      const bool declared = std::any_of(
          links.begin(), links.end(), [&flow](const MultiGroupLink& link) {
            return (link.bridge == flow.src && link.remote_owner == flow.dst) ||
                   (link.bridge == flow.dst && link.remote_owner == flow.src);
          });
      if (!declared)
        throw ValidationError{"bridge flow does not match any active cross-group link"};
      result.per_flow_mbps[i] = params.bridge_rate_mbps;
      continue;
    }

    const Group* group = registry.group_of(flow.src);
    if (group == nullptr || registry.group_of(flow.dst) != group)
      throw ValidationError{"intra-group flow endpoints must share a group"};
    const bool src_is_owner = group->owner == flow.src;
    const bool dst_is_owner = group->owner == flow.dst;
    if (flow.kind == FlowKind::g2c && !(src_is_owner ^ dst_is_owner))
      throw ValidationError{"owner-client flow needs the owner as exactly one endpoint"};
    if (flow.kind == FlowKind::c2c && (src_is_owner || dst_is_owner))
      throw ValidationError{"client-to-client flow endpoints must both be clients"};
    buckets[group->id].push_back(i);
  }

  for (const auto& [group_id, indices] : buckets) {
    const Group* group = registry.find(group_id);
    const std::size_t group_size = 1 + group->clients.size();
    std::vector<Flow> flows;
    flows.reserve(indices.size());
    for (const std::size_t index : indices) flows.push_back(pattern.flows[index]);
    const PatternSignature signature = make_pattern_signature(flows);
    const EmpiricalKey key{group_size, signature.text};

    if (params.mode == ThroughputMode::empirical) {
      const auto row = params.empirical_table.find(key);
      if (row != params.empirical_table.end()) {
        if (row->second.size() != flows.size())
          throw ValidationError{"empirical row arity does not match the pattern"};
        for (std::size_t k = 0; k < flows.size(); ++k)
          result.per_flow_mbps[indices[signature.canonical[k]]] = row->second[k];
        continue;
      }
      result.extrapolated = true;
    }

    std::vector<std::pair<int, double>> hops_and_weights(flows.size());
    const auto fitted = params.fitted_weights.find(key);
    if (fitted != params.fitted_weights.end()) {
      if (fitted->second.size() != flows.size())
        throw ValidationError{"fitted weights arity does not match the pattern"};
      for (std::size_t k = 0; k < flows.size(); ++k) {
        const std::size_t j = signature.canonical[k];
        hops_and_weights[j] = {hop_count(flows[j].kind), fitted->second[k]};
      }
    } else {
      for (std::size_t j = 0; j < flows.size(); ++j)
        hops_and_weights[j] = {hop_count(flows[j].kind), flows[j].weight};
    }
    const auto rates = analytic_throughputs(hops_and_weights, medium_capacity(params, group_size));
    for (std::size_t j = 0; j < flows.size(); ++j)
      result.per_flow_mbps[indices[j]] = rates[j];
  }
  return result;
}

}  // namespace citymesh::net
