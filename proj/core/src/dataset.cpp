#include "qtele/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <string_view>

#include "qtele/errors.hpp"

namespace qtele {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(std::string_view text, const char* field, std::size_t line) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || text.empty() || !std::isfinite(v)) {
    throw DataError(std::string("bad ") + field + " value '" + std::string(text) + "'", line);
  }
  return v;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<DataPoint> read_dataset(std::istream& in) {
  std::vector<DataPoint> out;
  std::string raw;
  std::size_t line = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line;
    const auto text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = split(text);
    if (!have_header) {
      if (fields.size() != 4 || fields[0] != "alpha2" || fields[1] != "y" || fields[2] != "sigma" ||
          fields[3] != "kind") {
        throw DataError("expected header 'alpha2,y,sigma,kind'", line);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != 4) {
      throw DataError("expected 4 fields, found " + std::to_string(fields.size()), line);
    }
    DataPoint d;
    d.alpha2 = parse_number(fields[0], "alpha2", line);
    d.y = parse_number(fields[1], "y", line);
    d.sigma = parse_number(fields[2], "sigma", line);
    try {
      d.kind = parse_data_kind(fields[3]);
    } catch (const DataError& e) {
      throw DataError(e.what(), line);
    }
    if (!(d.alpha2 > 0.0)) throw DataError("alpha2 must be positive", line);
    if (d.y < 0.0) throw DataError("y must be non-negative", line);
    if (d.sigma < 0.0) throw DataError("sigma must be non-negative", line);
    out.push_back(d);
  }
  if (!have_header) throw DataError("empty dataset: missing header");
  if (out.empty()) throw DataError("dataset has no data rows");
  return out;
}

std::vector<DataPoint> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_dataset(in);
}

void write_dataset(std::ostream& out, const std::vector<DataPoint>& data, const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "alpha2,y,sigma,kind\n";
  for (const auto& d : data) {
    out << format_double(d.alpha2) << ',' << format_double(d.y) << ',' << format_double(d.sigma) << ','
        << to_string(d.kind) << '\n';
  }
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (count < 2 || !(lo > 0.0) || !(hi > lo)) throw InvalidArgument("log_grid: need 0 < lo < hi and count >= 2");
  std::vector<double> g(count);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t count) {
  if (count < 2 || !(hi > lo)) throw InvalidArgument("linear_grid: need lo < hi and count >= 2");
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  g.back() = hi;
  return g;
}

std::vector<DataPoint> synthesize(DataKind kind, const ModelParameters& p, const std::vector<double>& alpha2,
                                  double relative_noise, std::uint64_t seed) {
  if (!(relative_noise >= 0.0)) throw InvalidArgument("synthesize: relative noise must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::optional<double> phi;
  if (kind == DataKind::kFidelityX && !alpha2.empty()) {
    phi = optimal_phase(std::exp(0.5 * (std::log(alpha2.front()) + std::log(alpha2.back()))), p);
  }
  const double rel_sigma = relative_noise > 0.0 ? relative_noise : 0.02;
  std::vector<DataPoint> out;
  out.reserve(alpha2.size());
  for (double a : alpha2) {
    const double m = model_value(kind, a, p, phi);
    const double noise = relative_noise * normal(rng);
    out.push_back({a, std::max(0.0, m * (1.0 + noise)), rel_sigma * std::abs(m), kind});
  }
  return out;
}

}  // namespace qtele
