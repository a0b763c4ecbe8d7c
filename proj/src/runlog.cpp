#include "albias/runlog.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "albias/error.hpp"
#include "albias/json_io.hpp"

namespace albias::al {

namespace {

constexpr const char* kFormatTag = "albias-runlog";
constexpr int kFormatVersion = 1;

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> read_optional(const nlohmann::json& j, const char* key) {
    const auto& v = j.at(key);
    return v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
}

}  // namespace

std::string to_jsonl(const RunLog& log) {
    const AlState& st = log.result.state;
    std::string out;

    Json head;
    head["type"] = "config";
    head["format"] = kFormatTag;
    head["version"] = kFormatVersion;
    head["source"] = log.source;
    head["corpus_size"] = st.corpus_size;
    head["num_classes"] = log.num_classes;
    head["test_size"] = log.test_size ? Json(*log.test_size) : Json(nullptr);
    head["config"] = loop_config_to_json(st.config);
    head["initial_ids"] = st.initial_ids;
    out += head.dump() + "\n";

    for (const QueryRecord& q : st.queries) {
        Json r;
        r["type"] = "round";
        r["round"] = q.round;
        r["train_size"] = q.train_size;
        r["accuracy"] = optional_number(q.accuracy);
        r["selected"] = q.selected;
        r["scores"] = q.scores;
        r["deleted"] = q.deleted;
        out += r.dump() + "\n";
    }

    Json fin;
    fin["type"] = "final";
    fin["train_size"] = st.partition.train.size();
    fin["final_accuracy"] = optional_number(st.final_accuracy);
    Json curve = Json::array();
    for (const CurvePoint& p : log.result.curve) {
        curve.push_back({{"train_size", p.train_size}, {"fraction", p.fraction}, {"accuracy", p.accuracy}});
    }
    fin["curve"] = std::move(curve);
    fin["calibration"] = st.final_calibration ? calibration_to_json(*st.final_calibration) : Json(nullptr);
    out += fin.dump() + "\n";
    return out;
}

RunLog parse_jsonl(std::string_view text) {
    RunLog log;
    AlState& st = log.result.state;
    bool have_head = false;
    bool have_final = false;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const nlohmann::json j = nlohmann::json::parse(line);
            const std::string type = j.at("type").get<std::string>();
            if (type == "config") {
                if (j.at("format").get<std::string>() != kFormatTag) throw DataError("not a run log");
                if (j.at("version").get<int>() != kFormatVersion) throw DataError("unsupported run log version");
                log.source = j.at("source").get<std::string>();
                log.num_classes = j.at("num_classes").get<std::size_t>();
                if (!j.at("test_size").is_null()) log.test_size = j.at("test_size").get<std::size_t>();
                st.config = loop_config_from_json(j.at("config"));
                st.corpus_size = j.at("corpus_size").get<std::size_t>();
                st.initial_ids = j.at("initial_ids").get<std::vector<DocId>>();
                std::sort(st.initial_ids.begin(), st.initial_ids.end());
                st.partition.pool.resize(st.corpus_size);
                for (std::size_t i = 0; i < st.corpus_size; ++i) st.partition.pool[i] = static_cast<DocId>(i);
                st.partition.acquire(st.initial_ids);
                st.train_sets.push_back(st.partition.train);
                have_head = true;
            } else if (type == "round") {
                if (!have_head) throw DataError("round record before the config record");
                QueryRecord q;
                q.round = j.at("round").get<std::size_t>();
                q.train_size = j.at("train_size").get<std::size_t>();
                q.accuracy = read_optional(j, "accuracy");
                q.selected = j.at("selected").get<std::vector<DocId>>();
                q.scores = j.at("scores").get<std::vector<double>>();
                q.deleted = j.at("deleted").get<std::vector<DocId>>();
                if (q.round != st.queries.size() + 1) throw DataError("round records out of order");
                if (q.train_size != st.partition.train.size()) throw DataError("train size does not replay");
                st.partition.release(q.deleted);
                st.partition.acquire(q.selected);
                st.train_sets.push_back(st.partition.train);
                st.queries.push_back(std::move(q));
            } else if (type == "final") {
                if (!have_head) throw DataError("final record before the config record");
                if (j.at("train_size").get<std::size_t>() != st.partition.train.size()) {
                    throw DataError("final train size does not replay");
                }
                st.final_accuracy = read_optional(j, "final_accuracy");
                for (const auto& p : j.at("curve")) {
                    log.result.curve.push_back({p.at("train_size").get<std::size_t>(), p.at("fraction").get<double>(),
                                                p.at("accuracy").get<double>()});
                }
                if (!j.at("calibration").is_null()) st.final_calibration = calibration_from_json(j.at("calibration"));
                have_final = true;
            } else {
                throw DataError("unknown record type '" + type + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw DataError("run log line " + std::to_string(line_no) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError("run log line " + std::to_string(line_no) + ": " + e.what());
        } catch (const ComputeError& e) {
            throw DataError("run log line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!have_head) throw DataError("run log has no config record");
    if (!have_final) throw DataError("run log is incomplete (no final record)");
    return log;
}

void write_run_log(const RunLog& log, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << to_jsonl(log);
    if (!out) throw DataError("write failed for " + path.string());
}

RunLog read_run_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open run log " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_jsonl(buf.str());
}

}  // namespace albias::al
