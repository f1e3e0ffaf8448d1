#pragma once

#include <filesystem>
#include <stdexcept>

#include "rnav/agent/agent.hpp"

namespace rnav::agent {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Text format, version 1:
//   rnav-checkpoint 1
//   config <agent config json>
//   params <count>
//   <name> <rows> <cols> <trainable> then rows*cols values (%.17g, round-trip exact)
void save_checkpoint(const Agent& agent, const std::filesystem::path& path);

// Rebuilds the agent from the stored config and loads every tensor.
Agent load_checkpoint(const std::filesystem::path& path);

// Loads values into an existing agent; throws CheckpointError on a missing
// name, an unexpected name, or a shape mismatch.
void load_parameters(Agent& agent, const std::filesystem::path& path);

}  // namespace rnav::agent
