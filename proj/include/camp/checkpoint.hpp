#pragma once

#include "camp/adam.hpp"
#include "camp/mlp.hpp"

#include <filesystem>

namespace camp {

// Network checkpoint: manifest (layer sizes, activation) + flat float64
// parameter array, little-endian. Same format for every network; see
// docs/formats.md.
void save_network(const std::filesystem::path& path, const Mlp& net);
Mlp load_network(const std::filesystem::path& path);

// Raw float64 vector (optimizer moments, embeddings, normalizer stats, ...).
void save_vector(const std::filesystem::path& path, const VecX& v);
VecX load_vector(const std::filesystem::path& path);

void save_adam(const std::filesystem::path& path, const Adam& adam);
void load_adam(const std::filesystem::path& path, Adam& adam);

}  // namespace camp
