#ifndef GWAD_CHECKPOINT_HPP
#define GWAD_CHECKPOINT_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gwad/adam.hpp"
#include "gwad/tensor.hpp"
#include "gwad/vae.hpp"

namespace gwad::nn {

// Raised when a checkpoint exists and parses but does not fit: wrong format
// version, or tensor names/shapes that disagree with the target model.
struct CheckpointMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

// "VAE1": magic, u32 version, u32 tensor count, then per tensor
// u16 name length, name, u8 rank, u32 dims, float32 values (little-endian).
void save_tensors_vae1(const std::string& path,
                       const std::vector<std::pair<std::string, const Tensor*>>& tensors);
NamedTensors load_tensors_vae1(const std::string& path);

// "OPT1": same framing plus u64 step_count after the tensor count.
// Moments are stored as "<param>.m" / "<param>.v" pairs.
void save_adam_opt1(const std::string& path, const AdamState& state,
                    const std::vector<std::pair<std::string, const Tensor*>>& params);
void load_adam_opt1(const std::string& path, AdamState& state,
                    const std::vector<std::pair<std::string, const Tensor*>>& params);

}  // namespace gwad::nn

namespace gwad::vae {

void save_model(const std::string& path, VaeModel& model);

// Loads into an already-constructed model; names and shapes must match.
void load_model(const std::string& path, VaeModel& model);

}  // namespace gwad::vae

#endif  // GWAD_CHECKPOINT_HPP
