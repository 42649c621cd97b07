#include "gaswarm/nn/weights.hpp"

#include <bit>
#include <fstream>
#include <iterator>

namespace gaswarm::nn {

namespace {

constexpr char kMagic[8] = {'G', 'S', 'W', 'M', 'W', 'T', 'S', '\n'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

std::uint64_t combined_hash(const GeneratorNet* g, const DiscriminatorNet* d) {
  std::string s;
  if (g) s += std::to_string(g->architecture_hash()) + ";";
  if (d) s += std::to_string(d->architecture_hash()) + ";";
  return fnv1a(s);
}

void add_store(Container& c, const ParameterStore& store) {
  for (std::size_t i = 0; i < store.size(); ++i) c.arrays.emplace_back(store[i].name, store[i].value);
}

void load_store(const Container& c, ParameterStore& store) {
  for (std::size_t i = 0; i < store.size(); ++i) {
    const Tensor& t = c.array(store[i].name);
    if (t.shape() != store[i].value.shape())
      throw FormatError("array " + store[i].name + " has shape " + t.shape_string());
    store[i].value = t;
  }
}

}  // namespace

const Tensor& Container::array(const std::string& name) const {
  for (const auto& [n, t] : arrays)
    if (n == name) return t;
  throw FormatError("container has no array " + name);
}

void write_container(const std::string& path, const Container& c) {
  nlohmann::json header = c.header;
  header["arrays"] = nlohmann::json::array();
  for (const auto& [name, t] : c.arrays) header["arrays"].push_back({{"name", name}, {"shape", t.shape()}});
  const std::string text = header.dump();
  std::string out(kMagic, sizeof kMagic);
  put_u64(out, text.size());
  out += text;
  for (const auto& [name, t] : c.arrays)
    for (double v : t.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot write " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw FormatError("write failed: " + path);
}

Container read_container(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path);
  const std::string in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (in.size() < 16 || in.compare(0, 8, kMagic, 8) != 0)
    throw FormatError(path + " is not a weights container");
  const std::uint64_t len = get_u64(in, 8);
  if (len > in.size() - 16) throw FormatError(path + ": truncated header");
  Container c;
  try {
    c.header = nlohmann::json::parse(in.substr(16, len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  std::size_t at = 16 + len;
  try {
    for (const auto& a : c.header.at("arrays")) {
      const std::vector<int> shape = a.at("shape").get<std::vector<int>>();
      Tensor t(shape);
      if (in.size() - at < 8 * t.size()) throw FormatError(path + ": truncated data");
      for (std::size_t k = 0; k < t.size(); ++k, at += 8)
        t[k] = std::bit_cast<double>(get_u64(in, at));
      c.arrays.emplace_back(a.at("name").get<std::string>(), std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  } catch (const ShapeMismatch& e) {
    throw FormatError(path + ": " + e.what());
  }
  if (at != in.size()) throw FormatError(path + ": trailing bytes");
  return c;
}

void save_networks(const std::string& path, const GeneratorNet* generator,
                   const DiscriminatorNet* discriminator) {
  if (!generator && !discriminator) throw FormatError("nothing to save");
  const EncodingLayout& layout = generator ? generator->layout() : discriminator->layout();
  const ArchConfig& arch = generator ? generator->arch() : discriminator->arch();
  Container c;
  c.header = {{"format_version", kWeightsFormatVersion},
              {"architecture_hash", combined_hash(generator, discriminator)},
              {"temperature", generator ? generator->temperature() : 1.0},
              {"beta", arch.beta},
              {"arch", arch.to_json()},
              {"encoding", layout.to_json()},
              {"generator", generator != nullptr},
              {"discriminator", discriminator != nullptr}};
  if (generator) add_store(c, generator->params());
  if (discriminator) add_store(c, discriminator->params());
  write_container(path, c);
}

NetworkPair load_networks(const std::string& path, const EncodingLayout* expected) {
  const Container c = read_container(path);
  NetworkPair out;
  try {
    const auto& h = c.header;
    if (h.at("format_version").get<int>() != kWeightsFormatVersion)
      throw FormatError(path + ": unsupported format version");
    const ArchConfig arch = ArchConfig::from_json(h.at("arch"));
    const EncodingLayout layout = EncodingLayout::from_json(h.at("encoding"));
    if (expected && !(layout == *expected))
      throw FormatError(path + ": encoding layout does not match the network");
    if (h.at("generator").get<bool>()) {
      out.generator = std::make_unique<GeneratorNet>(layout, arch, 0);
      load_store(c, out.generator->params());
      out.generator->set_temperature(h.at("temperature").get<double>());
    }
    if (h.at("discriminator").get<bool>()) {
      out.discriminator = std::make_unique<DiscriminatorNet>(layout, arch, 0);
      load_store(c, out.discriminator->params());
    }
    if (h.at("architecture_hash").get<std::uint64_t>() !=
        combined_hash(out.generator.get(), out.discriminator.get()))
      throw FormatError(path + ": architecture hash mismatch");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(path + ": " + e.what());
  }
  return out;
}

void copy_values(const ParameterStore& from, ParameterStore& to) {
  if (from.describe() != to.describe()) throw ShapeMismatch("parameter stores differ");
  for (std::size_t i = 0; i < from.size(); ++i) to[i].value = from[i].value;
}

}  // namespace gaswarm::nn
