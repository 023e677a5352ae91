#pragma once

#include "stratmod/types.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace stratmod {

/// Gaussian mixture: k standard-normal centers, n/k points per center drawn
/// with an isotropic std-dev uniform in [sigma_lo, sigma_hi], costs uniform in
/// [c_lo, c_hi], and trend (1, 0, ..., 0).
struct MixtureSpec {
  int d = 5;
  long n = 500;
  int k = 5;
  double sigma_lo = 0.3;
  double sigma_hi = 0.5;
  double c_lo = 0.5;
  double c_hi = 1.5;
  std::uint64_t seed = 0;

  void validate() const;
};

/// RNG stream ids; each is an independent counter-based stream under the seed.
enum class MixtureStream : std::uint64_t { Centers = 1, Sigmas = 2, Points = 3, Costs = 4 };

Population generate(const MixtureSpec& spec);

/// Extra `# key=value` lines written after the metadata block.
using Metadata = std::vector<std::pair<std::string, std::string>>;

/// CSV with a `# key=value` metadata block (d, n, trend), a header
/// `x_0,...,x_{d-1},c`, and 17 significant digits per value.
void write_population(std::ostream& out, const Population& pop, const Metadata& extra = {});
void save(const Population& pop, const std::filesystem::path& path, const Metadata& extra = {});

/// Parse errors report the 1-based line number.
Population read_population(std::istream& in, const std::string& source = "<stream>");
Population load(const std::filesystem::path& path);

/// Text for a double with 17 significant digits; parses back exactly.
std::string format_double(double v);

}  // namespace stratmod
