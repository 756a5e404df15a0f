#pragma once

#include <string>
#include <variant>

#include "clearn/solver.hpp"

namespace clearn {

/// Versioned on-disk model. Doubles survive the JSON round trip exactly, so
/// load(save(m)) reproduces predictions bit for bit.
struct ModelFile {
  static constexpr int kSchemaVersion = 1;
  std::variant<KernelModel, LinearModel> model;
  TrainConfig config;  // training configuration echo
};

void save_model(const ModelFile& mf, const std::string& path);
ModelFile load_model(const std::string& path);

std::string model_to_json_text(const ModelFile& mf);
ModelFile model_from_json_text(const std::string& text);

}  // namespace clearn
