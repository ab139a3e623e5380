#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mpdr/data.hpp"
#include "mpdr/energy.hpp"

namespace mpdr {

/// Serialized model state. The on-disk layout is a little-endian binary
/// block with a trailing checksum; docs/checkpoint-format.md documents every
/// byte.
struct Checkpoint {
    static constexpr std::uint32_t kFormatVersion = 1;

    /// "autoencoder" or an energy model kind.
    std::string kind;
    /// key=value architecture lines, parseable back into a spec.
    std::string architecture;
    std::vector<Tensor> params;
    /// Training-set preprocessing, replayed on any data scored later.
    PreprocessStats preprocess;
    /// FNV-1a of the config file that produced this artifact.
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
};

void save_checkpoint(const Checkpoint& c, const std::string& path);
/// Verifies magic, version, and checksum; IntegrityError on any mismatch.
Checkpoint load_checkpoint(const std::string& path);

std::string describe_autoencoder(const AutoencoderSpec& spec);
AutoencoderSpec parse_autoencoder_description(const std::string& text);
std::string describe_mlp(const MlpSpec& spec);
MlpSpec parse_mlp_description(const std::string& text);

Checkpoint checkpoint_of_autoencoder(const Autoencoder& ae);
Checkpoint checkpoint_of_model(const EnergyModel& model);
Autoencoder autoencoder_from_checkpoint(const Checkpoint& c);
std::unique_ptr<EnergyModel> model_from_checkpoint(const Checkpoint& c);

} // namespace mpdr
