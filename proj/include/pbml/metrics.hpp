#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pbml {

/// Per-generation record. Describes the population as it was evaluated,
/// weighted by the ratios it held at that moment.
struct MetricsRow {
  std::uint64_t generation = 0;
  std::string strategy;
  std::uint64_t seed = 0;
  std::size_t num_genomes = 0;
  double weighted_mean_fitness = 0.0;
  double max_fitness = 0.0;
  double lineage_entropy = 0.0;
  std::vector<double> extra;  // world-specific columns, in the world's order
};

/// Column names shared by every world; world columns follow.
std::vector<std::string> base_columns();

double weighted_mean(std::span<const double> values, std::span<const double> weights);

/// Fractional ranks (position + 1) / n in ascending order, ties averaged.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman rank correlation with tie-averaged ranks. A constant series
/// yields 0.
double spearman(std::span<const double> x, std::span<const double> y);

/// R^2 of a quadratic least-squares fit minus R^2 of a linear fit.
double polyfit_gain(std::span<const double> x, std::span<const double> y);

/// -sum p ln p over the population ratios.
double lineage_entropy(std::span<const double> ratios);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

/// Metrics CSV with a header row and a fixed column order.
class MetricsTable {
 public:
  MetricsTable() = default;
  explicit MetricsTable(std::vector<std::string> extra_columns)
      : extra_columns_(std::move(extra_columns)) {}

  void add(MetricsRow row);
  const std::vector<MetricsRow>& rows() const { return rows_; }
  const std::vector<std::string>& extra_columns() const { return extra_columns_; }
  std::vector<std::string> columns() const;

  void write_csv(std::ostream& out) const;
  std::string to_csv() const;
  static MetricsTable parse_csv(std::istream& in);
  static MetricsTable read_csv(const std::string& path);

  /// Values of a named column as doubles (generation, seed and the numeric
  /// base columns included). Throws if the column is absent.
  std::vector<double> column(const std::string& name) const;
  bool has_column(const std::string& name) const;

 private:
  std::vector<std::string> extra_columns_;
  std::vector<MetricsRow> rows_;
};

}  // namespace pbml
