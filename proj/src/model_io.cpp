#include "rfsr/model_io.hpp"

#include <fstream>

#include "rfsr/base64.hpp"
#include "rfsr/errors.hpp"

namespace rfsr {

nlohmann::json model_to_json(const RfModel& model) {
  nlohmann::json j;
  j["map"] = model.map().descriptor();
  j["filter"] = model.filter().descriptor();
  j["lambda"] = model.lambda();
  j["iterations"] = model.iterations() ? nlohmann::json(*model.iterations()) : nlohmann::json();
  j["fit_path"] = to_string(model.fit_path());
  j["theta_size"] = model.theta().size();
  j["theta"] = encode_doubles({model.theta().data(), static_cast<std::size_t>(model.theta().size())});
  const auto& fp = model.fingerprint();
  j["train_fingerprint"] = {{"n", fp.n}, {"seed", fp.seed}, {"data_hash", fp.data_hash}};
  return j;
}

RfModel model_from_json(const nlohmann::json& j) {
  try {
    FeatureMap map = FeatureMap::from_descriptor(j.at("map"));
    SpectralFilter filter = SpectralFilter::from_descriptor(j.at("filter"));
    const auto values = decode_doubles(j.at("theta").get<std::string>());
    if (values.size() != j.at("theta_size").get<std::size_t>())
      throw InvalidArgument("model: theta_size does not match the encoded payload");
    Vector theta = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    std::optional<int> T;
    if (j.contains("iterations") && !j.at("iterations").is_null()) T = j.at("iterations").get<int>();
    const auto& fp = j.at("train_fingerprint");
    TrainFingerprint fingerprint{fp.at("n").get<std::size_t>(), fp.at("seed").get<std::uint64_t>(),
                                 fp.at("data_hash").get<std::uint64_t>()};
    return RfModel(std::move(map), std::move(theta), std::move(filter), j.at("lambda").get<double>(),
                   T, fit_path_from_string(j.at("fit_path").get<std::string>()), fingerprint);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("model descriptor: ") + e.what());
  }
}

void save_model(const RfModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_model: cannot open " + path.string());
  out << model_to_json(model).dump(2) << '\n';
}

RfModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_model: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("load_model: ") + e.what());
  }
  return model_from_json(j);
}

}  // namespace rfsr
