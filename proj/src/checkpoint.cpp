#include "camp/checkpoint.hpp"

#include "camp/errors.hpp"

#include <nlohmann/json.hpp>

#include <cstring>
#include <fstream>

namespace camp {

namespace {
constexpr char kNetMagic[8] = {'C', 'A', 'M', 'P', 'N', 'E', 'T', '1'};
constexpr char kVecMagic[8] = {'C', 'A', 'M', 'P', 'V', 'E', 'C', '1'};

void write_blob(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), std::streamsize(n));
}

void read_blob(std::istream& is, void* p, std::size_t n) {
  is.read(static_cast<char*>(p), std::streamsize(n));
}
}  // namespace

void save_network(const std::filesystem::path& path, const Mlp& net) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("save_network: cannot open " + path.string());
  write_blob(os, kNetMagic, sizeof(kNetMagic));
  nlohmann::json manifest{{"sizes", net.spec().sizes},
                          {"activation", activation_name(net.spec().activation)},
                          {"param_count", net.param_count()}};
  const std::string m = manifest.dump();
  const std::uint32_t mlen = std::uint32_t(m.size());
  write_blob(os, &mlen, sizeof(mlen));
  write_blob(os, m.data(), m.size());
  write_blob(os, net.params().data(), net.param_count() * sizeof(double));
  if (!os) throw DataError("save_network: write failed for " + path.string());
}

Mlp load_network(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("load_network: cannot open " + path.string());
  char magic[8];
  read_blob(is, magic, sizeof(magic));
  if (!is || std::memcmp(magic, kNetMagic, sizeof(magic)) != 0) {
    throw DataError("load_network: bad magic in " + path.string());
  }
  std::uint32_t mlen = 0;
  read_blob(is, &mlen, sizeof(mlen));
  std::string m(mlen, '\0');
  read_blob(is, m.data(), mlen);
  nlohmann::json manifest = nlohmann::json::parse(m);
  MlpSpec spec;
  spec.sizes = manifest.at("sizes").get<std::vector<int>>();
  spec.activation = activation_from_name(manifest.at("activation").get<std::string>());
  Mlp net(spec);
  if (net.param_count() != manifest.at("param_count").get<std::size_t>()) {
    throw DataError("load_network: inconsistent manifest in " + path.string());
  }
  read_blob(is, net.params().data(), net.param_count() * sizeof(double));
  if (!is) throw DataError("load_network: truncated file " + path.string());
  return net;
}

void save_vector(const std::filesystem::path& path, const VecX& v) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("save_vector: cannot open " + path.string());
  write_blob(os, kVecMagic, sizeof(kVecMagic));
  const std::uint64_t n = std::uint64_t(v.size());
  write_blob(os, &n, sizeof(n));
  write_blob(os, v.data(), std::size_t(v.size()) * sizeof(double));
  if (!os) throw DataError("save_vector: write failed for " + path.string());
}

VecX load_vector(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("load_vector: cannot open " + path.string());
  char magic[8];
  read_blob(is, magic, sizeof(magic));
  if (!is || std::memcmp(magic, kVecMagic, sizeof(magic)) != 0) {
    throw DataError("load_vector: bad magic in " + path.string());
  }
  std::uint64_t n = 0;
  read_blob(is, &n, sizeof(n));
  VecX v{Eigen::Index(n)};
  read_blob(is, v.data(), std::size_t(n) * sizeof(double));
  if (!is) throw DataError("load_vector: truncated file " + path.string());
  return v;
}

void save_adam(const std::filesystem::path& path, const Adam& adam) {
  const Eigen::Index n = adam.first_moment().size();
  VecX packed(2 * n + 1);
  packed(0) = double(adam.step_count());
  packed.segment(1, n) = adam.first_moment();
  packed.segment(1 + n, n) = adam.second_moment();
  save_vector(path, packed);
}

void load_adam(const std::filesystem::path& path, Adam& adam) {
  const VecX packed = load_vector(path);
  const Eigen::Index n = adam.first_moment().size();
  if (packed.size() != 2 * n + 1) throw DataError("load_adam: size mismatch in " + path.string());
  adam.set_step_count(long(packed(0)));
  adam.first_moment() = packed.segment(1, n);
  adam.second_moment() = packed.segment(1 + n, n);
}

}  // namespace camp
