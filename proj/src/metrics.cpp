#include "pbml/metrics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pbml/error.hpp"

namespace pbml {

std::vector<std::string> base_columns() {
  return {"generation",           "strategy",    "seed",           "num_genomes",
          "weighted_mean_fitness", "max_fitness", "lineage_entropy"};
}

double weighted_mean(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size())
    throw std::invalid_argument("weighted_mean: values and weights differ in length");
  if (values.empty()) throw std::invalid_argument("weighted_mean: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) acc += values[i] * weights[i];
  return acc;
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share the mean of (pos + 1) / n.
    const double mean_pos = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_pos / static_cast<double>(n);
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
  if (x.size() < 3) throw std::invalid_argument("spearman: need at least 3 points");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

double r_squared(const Eigen::VectorXd& t, const Eigen::VectorXd& y, int degree) {
  const Eigen::Index n = t.size();
  Eigen::MatrixXd design(n, degree + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    double p = 1.0;
    for (int d = 0; d <= degree; ++d) {
      design(i, d) = p;
      p *= t(i);
    }
  }
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(y);
  const double ss_res = (y - design * coef).squaredNorm();
  const double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
  return 1.0 - ss_res / ss_tot;
}

}  // namespace

double polyfit_gain(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("polyfit_gain: length mismatch");
  if (x.size() < 5) throw std::invalid_argument("polyfit_gain: need at least 5 points");
  const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
  if (*xmin == *xmax) throw std::invalid_argument("polyfit_gain: x is degenerate");

  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  Eigen::VectorXd t(n), v(n);
  // Map x onto [-1, 1] so the Vandermonde columns stay well conditioned.
  const double mid = 0.5 * (*xmin + *xmax), half = 0.5 * (*xmax - *xmin);
  for (Eigen::Index i = 0; i < n; ++i) {
    t(i) = (x[static_cast<std::size_t>(i)] - mid) / half;
    v(i) = y[static_cast<std::size_t>(i)];
  }
  const double spread = (v.array() - v.mean()).abs().maxCoeff();
  if (spread == 0.0 || spread <= 1e-14 * std::max(1.0, v.cwiseAbs().maxCoeff())) return 0.0;
  return std::max(0.0, r_squared(t, v, 2) - r_squared(t, v, 1));
}

double lineage_entropy(std::span<const double> ratios) {
  double h = 0.0;
  for (double p : ratios)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void MetricsTable::add(MetricsRow row) {
  if (row.extra.size() != extra_columns_.size())
    throw std::invalid_argument("MetricsTable::add: world column count mismatch");
  if (!rows_.empty() && row.generation <= rows_.back().generation)
    throw std::invalid_argument("MetricsTable::add: generation must strictly increase");
  rows_.push_back(std::move(row));
}

std::vector<std::string> MetricsTable::columns() const {
  auto cols = base_columns();
  cols.insert(cols.end(), extra_columns_.begin(), extra_columns_.end());
  return cols;
}

void MetricsTable::write_csv(std::ostream& out) const {
  const auto cols = columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : rows_) {
    out << r.generation << ',' << r.strategy << ',' << r.seed << ',' << r.num_genomes << ','
        << format_double(r.weighted_mean_fitness) << ',' << format_double(r.max_fitness) << ','
        << format_double(r.lineage_entropy);
    for (double v : r.extra) out << ',' << format_double(v);
    out << '\n';
  }
}

std::string MetricsTable::to_csv() const {
  std::ostringstream os;
  write_csv(os);
  return os.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ConfigError("metrics CSV: cannot parse number '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ConfigError("metrics CSV: cannot parse integer '" + s + "'");
  return v;
}

}  // namespace

MetricsTable MetricsTable::parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("metrics CSV: missing header");
  const auto header = split_csv_line(line);
  const auto base = base_columns();
  if (header.size() < base.size() || !std::equal(base.begin(), base.end(), header.begin()))
    throw ConfigError("metrics CSV: unexpected header");
  MetricsTable table(std::vector<std::string>(header.begin() + static_cast<long>(base.size()),
                                              header.end()));
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ConfigError("metrics CSV: line " + std::to_string(lineno) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(header.size()));
    MetricsRow r;
    r.generation = parse_u64(cells[0]);
    r.strategy = cells[1];
    r.seed = parse_u64(cells[2]);
    r.num_genomes = static_cast<std::size_t>(parse_u64(cells[3]));
    r.weighted_mean_fitness = parse_double(cells[4]);
    r.max_fitness = parse_double(cells[5]);
    r.lineage_entropy = parse_double(cells[6]);
    for (std::size_t i = base.size(); i < cells.size(); ++i) r.extra.push_back(parse_double(cells[i]));
    table.add(std::move(r));
  }
  return table;
}

MetricsTable MetricsTable::read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open metrics CSV: " + path);
  return parse_csv(in);
}

bool MetricsTable::has_column(const std::string& name) const {
  const auto cols = columns();
  return std::find(cols.begin(), cols.end(), name) != cols.end();
}

std::vector<double> MetricsTable::column(const std::string& name) const {
  if (name == "strategy") throw std::invalid_argument("column: strategy is not numeric");
  if (!has_column(name)) throw std::invalid_argument("column: no column named " + name);
  const auto it = std::find(extra_columns_.begin(), extra_columns_.end(), name);
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) {
    if (name == "generation") out.push_back(static_cast<double>(r.generation));
    else if (name == "seed") out.push_back(static_cast<double>(r.seed));
    else if (name == "num_genomes") out.push_back(static_cast<double>(r.num_genomes));
    else if (name == "weighted_mean_fitness") out.push_back(r.weighted_mean_fitness);
    else if (name == "max_fitness") out.push_back(r.max_fitness);
    else if (name == "lineage_entropy") out.push_back(r.lineage_entropy);
    else out.push_back(r.extra[static_cast<std::size_t>(it - extra_columns_.begin())]);
  }
  return out;
}

}  // namespace pbml
