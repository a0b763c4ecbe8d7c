#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "albias/alcore.hpp"

// Run logs: JSON Lines, one object per line.
//
//   {"type":"config", "format":"albias-runlog", "version":1, "source":..., "corpus_size":n,
//    "num_classes":C, "test_size":m|null, "config":{...}, "initial_ids":[...]}
//   {"type":"round", "round":r, "train_size":|S_{r-1}|, "accuracy":a|null,
//    "selected":[...], "scores":[...], "deleted":[...]}            (one per round)
//   {"type":"final", "train_size":|S_b|, "final_accuracy":a|null,
//    "curve":[{"train_size","fraction","accuracy"}...], "calibration":{...}|null}
//
// Doubles are written in shortest round-trip form, so equal runs give equal bytes.
namespace albias::al {

struct RunLog {
    std::string source;        // corpus identifier echoed from the command line
    std::size_t num_classes = 0;
    std::optional<std::size_t> test_size;
    LoopResult result;
};

std::string to_jsonl(const RunLog& log);

/// Parses a run log and rebuilds every train set by replaying the query records.
RunLog parse_jsonl(std::string_view text);

void write_run_log(const RunLog& log, const std::filesystem::path& path);
RunLog read_run_log(const std::filesystem::path& path);

}  // namespace albias::al
