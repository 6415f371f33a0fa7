#pragma once

// JSONL persistence for trajectories, preference pairs, tasks and splits.
// One record per line; `category` is derived and never written.

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "tipo/aligner.hpp"
#include "tipo/core.hpp"

namespace tipo {

using json = nlohmann::json;

json to_json(const Step& s);
json to_json(const Trajectory& t);
json to_json(const PreferencePair& p);
json to_json(const AlignedPair& ap);
json to_json(const TaskInstance& t);

// `line` is only used to annotate SchemaError messages.
Step step_from_json(const json& j, std::size_t line = 0);
Trajectory trajectory_from_json(const json& j, std::size_t line = 0);
PreferencePair pair_from_json(const json& j, std::size_t line = 0);
AlignedPair aligned_pair_from_json(const json& j, std::size_t line = 0);
TaskInstance task_from_json(const json& j, std::size_t line = 0);

using Record = std::variant<Trajectory, PreferencePair>;

// Items must validate; throws PreconditionError otherwise.
void write_jsonl(const std::filesystem::path& path, const std::vector<Trajectory>& items);
void write_jsonl(const std::filesystem::path& path, const std::vector<PreferencePair>& items);
void write_jsonl(const std::filesystem::path& path, const std::vector<AlignedPair>& items);
void write_jsonl(const std::filesystem::path& path, const std::vector<TaskInstance>& items);

// Mixed read: a record with a "chosen" key is a PreferencePair.
std::vector<Record> read_jsonl(const std::filesystem::path& path);
std::vector<Trajectory> read_trajectories(const std::filesystem::path& path);
std::vector<PreferencePair> read_pairs(const std::filesystem::path& path);
std::vector<AlignedPair> read_aligned_pairs(const std::filesystem::path& path);
std::vector<TaskInstance> read_tasks(const std::filesystem::path& path);

// Reads a whole JSON document (config files, splits.json).
json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace tipo
