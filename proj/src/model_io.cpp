#include "clearn/model_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "clearn/errors.hpp"

namespace clearn {

namespace {

using nlohmann::json;

json config_to_json(const TrainConfig& cfg) {
  return {{"gamma", cfg.gamma},
          {"omega", cfg.omega},
          {"rho", cfg.rho},
          {"eps_outer", cfg.eps_outer},
          {"eps_inner", cfg.eps_inner},
          {"max_outer", cfg.max_outer},
          {"max_inner", cfg.max_inner},
          {"loss_scale", cfg.loss_scale == LossScale::c_loss ? "c_loss" : "v_loss"}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig cfg;
  cfg.gamma = j.at("gamma").get<double>();
  cfg.omega = j.at("omega").get<double>();
  cfg.rho = j.at("rho").get<double>();
  cfg.eps_outer = j.at("eps_outer").get<double>();
  cfg.eps_inner = j.at("eps_inner").get<double>();
  cfg.max_outer = j.at("max_outer").get<int>();
  cfg.max_inner = j.at("max_inner").get<int>();
  const std::string scale = j.at("loss_scale").get<std::string>();
  if (scale == "c_loss") {
    cfg.loss_scale = LossScale::c_loss;
  } else if (scale == "v_loss") {
    cfg.loss_scale = LossScale::v_loss;
  } else {
    throw Error("model-file", "unknown loss_scale '" + scale + "'");
  }
  return cfg;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < m.cols; ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  Matrix m;
  m.rows = j.size();
  m.cols = m.rows == 0 ? 0 : j.at(0).size();
  m.data.reserve(m.rows * m.cols);
  for (const auto& row : j) {
    if (row.size() != m.cols) throw Error("model-file", "ragged support_inputs");
    for (const auto& v : row) m.data.push_back(v.get<double>());
  }
  return m;
}

}  // namespace

std::string model_to_json_text(const ModelFile& mf) {
  json j;
  j["schema_version"] = ModelFile::kSchemaVersion;
  j["train_config"] = config_to_json(mf.config);
  if (const auto* km = std::get_if<KernelModel>(&mf.model)) {
    j["kind"] = "kernel";
    j["offset"] = km->alpha;
    j["coefficients"] = km->beta;
    j["kernel"] = {{"kind", km->spec.kind == KernelKind::rbf ? "rbf" : "linear"},
                   {"sigma", km->spec.sigma}};
    j["support_inputs"] = matrix_to_json(km->support_inputs);
    j["converged"] = km->converged;
  } else {
    const auto& lm = std::get<LinearModel>(mf.model);
    j["kind"] = "linear";
    j["offset"] = lm.a;
    j["coefficients"] = lm.b;
    j["converged"] = lm.converged;
  }
  return j.dump(2) + "\n";
}

ModelFile model_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error("model-file", std::string("bad model JSON: ") + e.what());
  }
  try {
    if (!j.contains("schema_version"))
      throw Error("model-file", "missing schema_version");
    if (j.at("schema_version").get<int>() != ModelFile::kSchemaVersion)
      throw Error("model-file", "unsupported schema version");
    ModelFile mf;
    mf.config = config_from_json(j.at("train_config"));
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "kernel") {
      KernelModel km;
      km.alpha = j.at("offset").get<double>();
      km.beta = j.at("coefficients").get<std::vector<double>>();
      const auto& jk = j.at("kernel");
      const std::string kk = jk.at("kind").get<std::string>();
      km.spec.kind = kk == "rbf" ? KernelKind::rbf : KernelKind::linear;
      km.spec.sigma = jk.at("sigma").get<double>();
      km.support_inputs = matrix_from_json(j.at("support_inputs"));
      km.converged = j.value("converged", true);
      if (km.beta.size() != km.support_inputs.rows)
        throw Error("model-file", "coefficient count does not match support inputs");
      mf.model = std::move(km);
    } else if (kind == "linear") {
      LinearModel lm;
      lm.a = j.at("offset").get<double>();
      lm.b = j.at("coefficients").get<std::vector<double>>();
      lm.converged = j.value("converged", true);
      mf.model = std::move(lm);
    } else {
      throw Error("model-file", "unknown model kind '" + kind + "'");
    }
    return mf;
  } catch (const json::exception& e) {
    throw Error("model-file", std::string("bad model JSON: ") + e.what());
  }
}

void save_model(const ModelFile& mf, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io-error", "cannot open " + tmp + " for writing");
    out << model_to_json_text(mf);
    if (!out.flush()) throw Error("io-error", "failed writing " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("io-error", "cannot rename " + tmp + " to " + path);
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io-error", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json_text(ss.str());
}

}  // namespace clearn
