#include "stratmod/synth_data.hpp"

#include "stratmod/counter_rng.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace stratmod {

void MixtureSpec::validate() const {
  if (d <= 0) fail("mixture dimension d must be positive");
  if (n <= 0) fail("mixture size n must be positive");
  if (k <= 0) fail("mixture center count k must be positive");
  if (n % k != 0)
    fail("k = " + std::to_string(k) + " must divide n = " + std::to_string(n));
  if (!(sigma_lo >= 0.0 && sigma_lo <= sigma_hi)) fail("need 0 <= sigma_lo <= sigma_hi");
  if (!(c_lo > 0.0 && c_lo <= c_hi)) fail("need 0 < c_lo <= c_hi");
}

Population generate(const MixtureSpec& spec) {
  spec.validate();
  CounterRng centers_rng(spec.seed, static_cast<std::uint64_t>(MixtureStream::Centers));
  CounterRng sigma_rng(spec.seed, static_cast<std::uint64_t>(MixtureStream::Sigmas));
  CounterRng points_rng(spec.seed, static_cast<std::uint64_t>(MixtureStream::Points));
  CounterRng costs_rng(spec.seed, static_cast<std::uint64_t>(MixtureStream::Costs));

  const long per_center = spec.n / spec.k;
  Matrix features(spec.d, spec.n);
  Eigen::Index col = 0;
  for (int center = 0; center < spec.k; ++center) {
    Vector mu(spec.d);
    for (int j = 0; j < spec.d; ++j) mu[j] = centers_rng.normal();
    const double sigma = sigma_rng.uniform(spec.sigma_lo, spec.sigma_hi);
    for (long s = 0; s < per_center; ++s, ++col)
      for (int j = 0; j < spec.d; ++j) features(j, col) = points_rng.normal(mu[j], sigma);
  }
  Vector costs(spec.n);
  for (long i = 0; i < spec.n; ++i) costs[i] = costs_rng.uniform(spec.c_lo, spec.c_hi);

  Vector e = Vector::Zero(spec.d);
  e[0] = 1.0;
  return Population(std::move(features), std::move(costs), Trend(std::move(e)));
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_population(std::ostream& out, const Population& pop, const Metadata& extra) {
  const Eigen::Index d = pop.dim();
  out << "# d=" << d << '\n' << "# n=" << pop.size() << '\n' << "# trend=";
  for (Eigen::Index j = 0; j < d; ++j) out << (j ? "," : "") << format_double(pop.trend().e()[j]);
  out << '\n';
  for (const auto& [key, value] : extra) out << "# " << key << '=' << value << '\n';
  for (Eigen::Index j = 0; j < d; ++j) out << "x_" << j << ',';
  out << "c\n";
  for (Eigen::Index i = 0; i < pop.size(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) out << format_double(pop.features()(j, i)) << ',';
    out << format_double(pop.costs()[i]) << '\n';
  }
}

void save(const Population& pop, const std::filesystem::path& path, const Metadata& extra) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  write_population(out, pop, extra);
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) parts.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

class Parser {
 public:
  explicit Parser(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void error(long line, const std::string& what) const {
    throw Error(ErrorCode::Parse, source_ + ":" + std::to_string(line) + ": " + what);
  }

  double number(long line, const std::string& field, const std::string& column) const {
    double v = 0.0;
    const char* first = field.data();
    const char* last = first + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || field.empty())
      error(line, "column \"" + column + "\": cannot parse \"" + field + "\" as a number");
    return v;
  }

 private:
  std::string source_;
};

}  // namespace

Population read_population(std::istream& in, const std::string& source) {
  const Parser p(source);
  std::vector<double> trend;
  long declared_d = -1;
  std::vector<std::string> header;
  std::vector<double> values;
  std::vector<double> costs;

  std::string raw;
  long line_no = 0;
  long header_line = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (!header.empty()) continue;
      const std::string body = trim(std::string_view(line).substr(1));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(std::string_view(body).substr(0, eq));
      const std::string value = trim(std::string_view(body).substr(eq + 1));
      if (key == "d") {
        declared_d = static_cast<long>(p.number(line_no, value, "d"));
      } else if (key == "trend") {
        trend.clear();
        for (const auto& part : split(value, ',')) trend.push_back(p.number(line_no, part, "trend"));
      }
      continue;
    }
    if (header.empty()) {
      header = split(line, ',');
      header_line = line_no;
      if (header.empty() || header.back() != "c")
        p.error(line_no, "header is missing the cost column \"c\"");
      for (std::size_t j = 0; j + 1 < header.size(); ++j)
        if (header[j] != "x_" + std::to_string(j))
          p.error(line_no, "expected column \"x_" + std::to_string(j) + "\", found \"" +
                               header[j] + "\"");
      if (header.size() < 2) p.error(line_no, "header has no feature columns");
      if (declared_d >= 0 && static_cast<long>(header.size()) - 1 != declared_d)
        p.error(line_no, "header has " + std::to_string(header.size() - 1) +
                             " feature columns but metadata declares d=" +
                             std::to_string(declared_d));
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != header.size())
      p.error(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields.size()));
    for (std::size_t j = 0; j + 1 < fields.size(); ++j)
      values.push_back(p.number(line_no, fields[j], header[j]));
    const double c = p.number(line_no, fields.back(), "c");
    if (!(c > 0.0)) p.error(line_no, "column \"c\": cost must be positive");
    costs.push_back(c);
  }
  if (header.empty()) p.error(line_no, "missing header line");
  if (costs.empty()) p.error(header_line, "empty population");
  const auto d = static_cast<Eigen::Index>(header.size() - 1);
  if (trend.empty()) p.error(1, "missing \"# trend=\" metadata");
  if (static_cast<Eigen::Index>(trend.size()) != d)
    p.error(1, "trend has " + std::to_string(trend.size()) + " entries, expected " +
                   std::to_string(d));

  const auto n = static_cast<Eigen::Index>(costs.size());
  Matrix features = Eigen::Map<const Matrix>(values.data(), d, n);
  Vector c = Eigen::Map<const Vector>(costs.data(), n);
  Vector e = Eigen::Map<const Vector>(trend.data(), d);
  return Population(std::move(features), std::move(c), Trend(std::move(e)));
}

Population load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_population(in, path.string());
}

}  // namespace stratmod
