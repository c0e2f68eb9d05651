#include "citymesh/net/calibrate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "citymesh/error.hpp"

namespace citymesh::net {

namespace {

[[nodiscard]] std::vector<int> hops_from_signature(const std::string& signature) {
  std::vector<int> hops;
  std::size_t start = 0;
  while (start <= signature.size()) {
    const auto plus = signature.find('+', start);
    std::string piece = signature.substr(
        start, plus == std::string::npos ? std::string::npos : plus - start);
    if (!piece.empty() && piece.back() == '!') piece.pop_back();
    if (piece == "g2c") {
      hops.push_back(1);
    } else if (piece == "c2c") {
      hops.push_back(2);
    } else {
      throw ValidationError{"unknown flow token '" + piece + "' in signature"};
    }
    if (plus == std::string::npos) break;
    start = plus + 1;
  }
  return hops;
}

struct WeightFit {
  std::vector<double> weights;
  std::vector<double> fitted;
  double squared_error = 0.0;
};

/// Least-squares airtime shares for one row at capacity c: minimizes the
/// summed squared relative errors sum_i ((s_i*c/h_i - m_i)/m_i)^2 subject to
/// sum_i s_i = 1 (Lagrange closed form). Single-flow rows have no freedom.
[[nodiscard]] WeightFit fit_row_weights(const std::vector<int>& hops,
                                        const std::vector<double>& measured, double c) {
  WeightFit fit;
  const std::size_t n = measured.size();
  if (n == 1) {
    fit.weights = {1.0};
    fit.fitted = {c / hops[0]};
    const double rel = (fit.fitted[0] - measured[0]) / measured[0];
    fit.squared_error = rel * rel;
    return fit;
  }

  // inv_a_i = h_i*m_i/c is the airtime fraction that would fit flow i exactly.
  std::vector<double> inv_a(n);
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    inv_a[i] = hops[i] * measured[i] / c;
    s1 += inv_a[i];
    s2 += inv_a[i] * inv_a[i];
  }
  const double half_lambda = (s1 - 1.0) / s2;
  fit.weights.resize(n);
  fit.fitted.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    fit.weights[i] = inv_a[i] - half_lambda * inv_a[i] * inv_a[i];
    if (!std::isfinite(fit.weights[i]) || fit.weights[i] <= 0.0)
      throw ValidationError{"row cannot be fitted with positive airtime weights"};
    fit.fitted[i] = fit.weights[i] * c / hops[i];
    const double rel = (fit.fitted[i] - measured[i]) / measured[i];
    fit.squared_error += rel * rel;
  }
  return fit;
}

/// Deterministic golden-section minimizer over [lo, hi].
template <typename F>
[[nodiscard]] double golden_minimize(F objective, double lo, double hi, int iterations) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  double f1 = objective(x1);
  double f2 = objective(x2);
  for (int i = 0; i < iterations; ++i) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = objective(x2);
    }
  }
  return (a + b) / 2.0;
}

[[nodiscard]] std::string format_double(double value) {
  char buffer[32];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc{}) throw IntegrityError{"number formatting failed"};
  return std::string{buffer, end};
}

[[nodiscard]] double parse_positive(std::string_view token, int line_no, const char* what) {
  double value = 0.0;
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || end != token.data() + token.size() || !std::isfinite(value) ||
      value <= 0.0) {
    throw ValidationError{"params line " + std::to_string(line_no) + ": bad " + what +
                          " '" + std::string(token) + "'"};
  }
  return value;
}

}  // namespace

// ============================================================================
// Calibration
// ============================================================================

CalibrationReport calibrate_throughput(const EmpiricalTable& table, double error_bound) {
  if (table.empty()) throw ValidationError{"empirical table is empty"};
  if (!std::isfinite(error_bound) || error_bound <= 0.0)
    throw ValidationError{"calibration error bound must be positive"};

  struct Row {
    std::string signature;
    std::vector<int> hops;
    std::vector<double> measured;
  };
  std::map<std::size_t, std::vector<Row>> by_size;
  for (const auto& [key, rates] : table) {
    Row row{key.second, hops_from_signature(key.second), rates};
    if (row.hops.size() != rates.size())
      throw ValidationError{"empirical row arity mismatch for '" + key.second + "'"};
    for (const double rate : rates) {
      if (!std::isfinite(rate) || rate <= 0.0)
        throw ValidationError{"empirical rates must be positive"};
    }
    by_size[key.first].push_back(std::move(row));
  }

  CalibrationReport report;
  report.error_bound = error_bound;
  for (const auto& [group_size, rows] : by_size) {
    // The lone owner-to-client flow saturates the medium at one hop, so its
    // measured rate *is* the capacity. Without that row, search for the
    // capacity minimizing the total squared relative error.
    double c_med = 0.0;
    const auto direct = std::find_if(rows.begin(), rows.end(), [](const Row& row) {
      return row.signature == "g2c";
    });
    if (direct != rows.end()) {
      c_med = direct->measured[0];
    } else {
      const auto objective = [&rows](double c) {
        double total = 0.0;
        for (const Row& row : rows)
          total += fit_row_weights(row.hops, row.measured, c).squared_error;
        return total;
      };
      c_med = golden_minimize(objective, 1.0, 200.0, 200);
    }
    report.c_med_by_size.emplace(group_size, c_med);

    for (const Row& row : rows) {
      const WeightFit fit = fit_row_weights(row.hops, row.measured, c_med);
      CalibrationCell cell;
      cell.group_size = group_size;
      cell.signature = row.signature;
      cell.measured = row.measured;
      cell.fitted = fit.fitted;
      cell.weights = fit.weights;
      cell.concurrent = row.measured.size() >= 2;
      for (std::size_t i = 0; i < row.measured.size(); ++i) {
        cell.max_relative_error =
            std::max(cell.max_relative_error,
                     std::abs(fit.fitted[i] - row.measured[i]) / row.measured[i]);
      }
      if (cell.concurrent) {
        report.worst_concurrent_error =
            std::max(report.worst_concurrent_error, cell.max_relative_error);
      }
      report.cells.push_back(std::move(cell));
    }
  }
  report.within_bound = report.worst_concurrent_error <= error_bound;
  return report;
}

ThroughputModelParams params_from_calibration(const CalibrationReport& report,
                                              double bridge_rate_mbps) {
  ThroughputModelParams params;
  params.c_med_by_size = report.c_med_by_size;
  params.bridge_rate_mbps = bridge_rate_mbps;
  if (!report.c_med_by_size.empty())
    params.default_c_med = report.c_med_by_size.rbegin()->second;
  for (const CalibrationCell& cell : report.cells) {
    if (cell.concurrent)
      params.fitted_weights.emplace(EmpiricalKey{cell.group_size, cell.signature},
                                    cell.weights);
  }
  return params;
}

// ============================================================================
// Params file round-trip
// ============================================================================

std::string serialize_analytic_params(const ThroughputModelParams& params) {
  std::ostringstream out;
  out << "# Analytic throughput parameters fitted from the empirical table.\n";
  out << "# Regenerate with the calibrate subcommand.\n";
  out << "default_c_med " << format_double(params.default_c_med) << '\n';
  out << "bridge_rate " << format_double(params.bridge_rate_mbps) << '\n';
  for (const auto& [size, c_med] : params.c_med_by_size)
    out << "c_med " << size << ' ' << format_double(c_med) << '\n';
  for (const auto& [key, weights] : params.fitted_weights) {
    out << "weights " << key.first << ' ' << key.second;
    for (const double weight : weights) out << ' ' << format_double(weight);
    out << '\n';
  }
  return std::move(out).str();
}

void merge_analytic_params(ThroughputModelParams& params, std::string_view text) {
  std::map<std::size_t, double> c_med_by_size;
  std::map<EmpiricalKey, std::vector<double>> fitted_weights;
  double default_c_med = params.default_c_med;
  double bridge_rate = params.bridge_rate_mbps;

  std::istringstream lines{std::string{text}};
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream in{line};
    std::string directive;
    if (!(in >> directive)) continue;

    const auto parse_size = [line_no](const std::string& token) {
      std::size_t size = 0;
      const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), size);
      if (ec != std::errc{} || end != token.data() + token.size() || size < 2)
        throw ValidationError{"params line " + std::to_string(line_no) +
                              ": bad group size '" + token + "'"};
      return size;
    };

    std::string token;
    if (directive == "default_c_med") {
      if (!(in >> token))
        throw ValidationError{"params line " + std::to_string(line_no) + ": missing value"};
      default_c_med = parse_positive(token, line_no, "capacity");
    } else if (directive == "bridge_rate") {
      if (!(in >> token))
        throw ValidationError{"params line " + std::to_string(line_no) + ": missing value"};
      bridge_rate = parse_positive(token, line_no, "rate");
    } else if (directive == "c_med") {
      std::string size_token;
      if (!(in >> size_token >> token))
        throw ValidationError{"params line " + std::to_string(line_no) +
                              ": expected 'c_med <size> <mbps>'"};
      if (!c_med_by_size.emplace(parse_size(size_token), parse_positive(token, line_no, "capacity")).second)
        throw ValidationError{"params line " + std::to_string(line_no) + ": duplicate c_med"};
    } else if (directive == "weights") {
      std::string size_token;
      std::string signature;
      if (!(in >> size_token >> signature))
        throw ValidationError{"params line " + std::to_string(line_no) +
                              ": expected 'weights <size> <signature> <w>...'"};
      const std::size_t arity = hops_from_signature(signature).size();
      std::vector<double> weights;
      while (in >> token) weights.push_back(parse_positive(token, line_no, "weight"));
      if (weights.size() != arity)
        throw ValidationError{"params line " + std::to_string(line_no) +
                              ": expected one weight per flow"};
      if (!fitted_weights.emplace(EmpiricalKey{parse_size(size_token), signature},
                                  std::move(weights)).second)
        throw ValidationError{"params line " + std::to_string(line_no) + ": duplicate weights"};
    } else {
      throw ValidationError{"params line " + std::to_string(line_no) +
                            ": unknown directive '" + directive + "'"};
    }
  }

  params.c_med_by_size = std::move(c_med_by_size);
  params.fitted_weights = std::move(fitted_weights);
  params.default_c_med = default_c_med;
  params.bridge_rate_mbps = bridge_rate;
}

void load_analytic_params(ThroughputModelParams& params, const std::filesystem::path& path) {
  std::ifstream in{path, std::ios::binary};
  if (!in) throw IoError{"cannot open analytic params: " + path.string()};
  std::ostringstream text;
  text << in.rdbuf();
  merge_analytic_params(params, text.str());
}

}  // namespace citymesh::net
