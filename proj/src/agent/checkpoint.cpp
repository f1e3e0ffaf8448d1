#include "rnav/agent/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace rnav::agent {
namespace {

constexpr const char* kMagic = "rnav-checkpoint";
constexpr int kVersion = 1;

struct Entry {
  std::string name;
  ad::Shape shape;
  bool trainable = true;
  std::vector<double> values;
};

struct Contents {
  AgentConfig config;
  std::vector<Entry> entries;
};

Contents read_contents(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != kMagic) throw CheckpointError(path.string() + " is not a checkpoint");
  if (version != kVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  std::string key;
  in >> key;
  if (key != "config") throw CheckpointError("checkpoint is missing its config line");
  std::string config_line;
  std::getline(in, config_line);
  Contents c;
  c.config = agent_config_from_json(nlohmann::json::parse(config_line));
  std::size_t count = 0;
  in >> key >> count;
  if (key != "params") throw CheckpointError("checkpoint is missing its parameter block");
  for (std::size_t i = 0; i < count; ++i) {
    Entry e;
    int trainable = 0;
    in >> e.name >> e.shape.rows >> e.shape.cols >> trainable;
    e.trainable = trainable != 0;
    e.values.resize(e.shape.size());
    for (double& v : e.values) {
      std::string token;
      in >> token;
      v = std::stod(token);
    }
    if (!in) throw CheckpointError("truncated checkpoint at parameter " + std::to_string(i));
    c.entries.push_back(std::move(e));
  }
  return c;
}

void apply_entries(Agent& agent, const std::vector<Entry>& entries) {
  auto& params = agent.params();
  if (entries.size() != params.size()) {
    throw CheckpointError("checkpoint has " + std::to_string(entries.size()) + " tensors, model expects " +
                          std::to_string(params.size()));
  }
  for (const Entry& e : entries) {
    const auto index = params.find(e.name);
    if (!index) throw CheckpointError("checkpoint tensor " + e.name + " does not exist in the model");
    ad::Parameter& p = params[*index];
    if (p.value.shape() != e.shape) {
      throw CheckpointError("shape mismatch for " + e.name + ": checkpoint " + e.shape.to_string() + ", model " +
                            p.value.shape().to_string());
    }
    p.value = ad::Tensor(e.shape, e.values);
  }
}

}  // namespace

void save_checkpoint(const Agent& agent, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out << kMagic << ' ' << kVersion << '\n';
  out << "config " << to_json(agent.config()).dump() << '\n';
  out << "params " << agent.params().size() << '\n';
  char buf[32];
  for (const auto& p : agent.params()) {
    out << p.name << ' ' << p.value.rows() << ' ' << p.value.cols() << ' ' << (p.trainable ? 1 : 0) << '\n';
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", p.value[i]);
      out << buf << (i + 1 == p.value.size() || (i + 1) % p.value.cols() == 0 ? '\n' : ' ');
    }
  }
  if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

Agent load_checkpoint(const std::filesystem::path& path) {
  const Contents c = read_contents(path);
  Agent agent(c.config, 0);
  apply_entries(agent, c.entries);
  return agent;
}

void load_parameters(Agent& agent, const std::filesystem::path& path) { apply_entries(agent, read_contents(path).entries); }

}  // namespace rnav::agent
