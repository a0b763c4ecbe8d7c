#include "albias/json_io.hpp"

namespace albias {

Json calibration_to_json(const diag::CalibrationReport& r) {
    Json j;
    j["count"] = r.count;
    j["nll"] = r.nll;
    j["brier"] = r.brier;
    j["ece"] = r.ece;
    j["variation_ratio"] = r.variation_ratio;
    j["mean_entropy"] = r.mean_entropy;
    j["mean_std"] = r.mean_std;
    return j;
}

diag::CalibrationReport calibration_from_json(const nlohmann::json& j) {
    diag::CalibrationReport r;
    r.count = j.at("count").get<std::size_t>();
    r.nll = j.at("nll").get<double>();
    r.brier = j.at("brier").get<double>();
    r.ece = j.at("ece").get<double>();
    r.variation_ratio = j.at("variation_ratio").get<double>();
    r.mean_entropy = j.at("mean_entropy").get<double>();
    r.mean_std = j.at("mean_std").get<double>();
    return r;
}

Json loop_config_to_json(const al::LoopConfig& c) {
    Json j;
    j["model"] = al::model_name(c.model);
    j["strategy"] = al::strategy_name(c.acquisition.kind);
    j["k"] = c.query_size;
    j["rounds"] = c.rounds;
    j["init_size"] = c.initial_size();
    j["seed"] = c.seed;
    j["ensemble_size"] = c.acquisition.ensemble_size;
    j["delete_count"] = c.acquisition.uses_deletion() ? c.deletion_count() : c.acquisition.delete_count.value_or(0);
    j["dim"] = c.ftext.dim;
    j["epochs"] = c.ftext.epochs;
    j["lr"] = c.ftext.initial_lr;
    j["bucket_count"] = c.ftext.bucket_count;
    j["max_features"] = c.tfidf.max_features;
    j["remove_stop_words"] = c.tfidf.remove_stop_words;
    return j;
}

al::LoopConfig loop_config_from_json(const nlohmann::json& j) {
    al::LoopConfig c;
    c.model = al::parse_model(j.at("model").get<std::string>());
    c.acquisition.kind = al::parse_strategy(j.at("strategy").get<std::string>());
    c.query_size = j.at("k").get<std::size_t>();
    c.rounds = j.at("rounds").get<std::size_t>();
    c.init_size = j.at("init_size").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.acquisition.ensemble_size = j.at("ensemble_size").get<std::size_t>();
    if (c.acquisition.uses_deletion()) c.acquisition.delete_count = j.at("delete_count").get<std::size_t>();
    c.ftext.dim = j.at("dim").get<std::size_t>();
    c.ftext.epochs = j.at("epochs").get<std::size_t>();
    c.ftext.initial_lr = j.at("lr").get<double>();
    c.ftext.bucket_count = j.at("bucket_count").get<std::uint64_t>();
    c.tfidf.max_features = j.at("max_features").get<std::size_t>();
    c.tfidf.remove_stop_words = j.at("remove_stop_words").get<bool>();
    return c;
}

}  // namespace albias
