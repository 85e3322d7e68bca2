#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "etd/model.hpp"

namespace etd {

/// Self-describing binary model format: "ETDM" magic, format version,
/// temperature, input shape, layer specs, and little-endian 64-bit parameter
/// values. Round-trips are bit-exact.
std::vector<std::uint8_t> serialize_model(const NeuralModel& model);
NeuralModel deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_model(const NeuralModel& model, const std::string& path);
NeuralModel load_model(const std::string& path);

std::uint64_t fnv1a64(const void* data, std::size_t n);
std::uint64_t fnv1a64(const std::string& s);

/// Hash of the serialized bytes; identifies exact parameters in sidecars.
std::uint64_t model_hash(const NeuralModel& model);

std::string hex64(std::uint64_t v);

}  // namespace etd
