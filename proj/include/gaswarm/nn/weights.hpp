#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaswarm/nn/networks.hpp"

namespace gaswarm::nn {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kWeightsFormatVersion = 1;

/// Binary container: the 8 bytes "GSWMWTS\n", a little-endian u64 header
/// length, the JSON header, then every array listed in header["arrays"] as
/// little-endian float64 values in order.
struct Container {
  nlohmann::json header;
  std::vector<std::pair<std::string, Tensor>> arrays;

  [[nodiscard]] const Tensor& array(const std::string& name) const;
};

void write_container(const std::string& path, const Container& c);
/// Throws FormatError on bad magic, truncation or inconsistent sizes.
[[nodiscard]] Container read_container(const std::string& path);

struct NetworkPair {
  std::unique_ptr<GeneratorNet> generator;
  std::unique_ptr<DiscriminatorNet> discriminator;
};

/// Writes whichever networks are non-null. The header carries
/// format_version, architecture_hash, temperature, beta, the architecture
/// and the encoding layout.
void save_networks(const std::string& path, const GeneratorNet* generator,
                   const DiscriminatorNet* discriminator);
/// Rebuilds the stored networks. When `expected` is given the stored encoding
/// must equal it. Throws FormatError on hash or layout mismatch.
[[nodiscard]] NetworkPair load_networks(const std::string& path,
                                        const EncodingLayout* expected = nullptr);

/// Copies parameter values between stores of the same architecture.
void copy_values(const ParameterStore& from, ParameterStore& to);

}  // namespace gaswarm::nn
