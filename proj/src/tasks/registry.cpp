//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <fstream>

#include "json.hpp"
#include "moltext/tasks.hpp"

namespace moltext {

namespace {

using nlohmann::json;

std::string require_string(const json &node, const char *key,
                           const std::string &where) {
  if (!node.contains(key) || !node[key].is_string()) {
    throw Error(Errc::kConfig,
                "task registry: " + where + " needs a string field '" + key +
                    "'");
  }
  return node[key].get<std::string>();
}

}  // namespace

TaskRegistry TaskRegistry::load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(Errc::kConfig, "cannot open task registry: " + path.string());
  }
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error &e) {
    throw Error(Errc::kData,
                "task registry is not valid JSON: " + std::string(e.what()));
  }
  if (!root.is_object() || !root.contains("tasks") ||
      !root["tasks"].is_object()) {
    throw Error(Errc::kData, "task registry needs a 'tasks' object");
  }
  for (const auto &[key, value] : root.items()) {
    if (key != "tasks" && key != "targets") {
      throw Error(Errc::kConfig, "task registry: unknown key '" + key + "'");
    }
  }

  TaskRegistry registry;
  for (const auto &[name, node] : root["tasks"].items()) {
    PromptTemplate tmpl;
    tmpl.task = name;
    tmpl.prefix = require_string(node, "prefix", "task '" + name + "'");
    tmpl.suffix = require_string(node, "suffix", "task '" + name + "'");
    tmpl.positive_tag = require_string(node, "positive", "task '" + name + "'");
    tmpl.negative_tag = require_string(node, "negative", "task '" + name + "'");
    for (const auto &[key, unused] : node.items()) {
      (void)unused;
      if (key != "prefix" && key != "suffix" && key != "positive" &&
          key != "negative") {
        throw Error(Errc::kConfig, "task registry: task '" + name +
                                       "' has an unknown key '" + key + "'");
      }
    }
    tmpl.needs_target =
        tmpl.suffix.find("{target}") != std::string::npos ||
        tmpl.prefix.find("{target}") != std::string::npos;
    registry.templates_.emplace(name, std::move(tmpl));
  }

  if (root.contains("targets")) {
    if (!root["targets"].is_object()) {
      throw Error(Errc::kData, "task registry: 'targets' must be an object");
    }
    for (const auto &[task, table] : root["targets"].items()) {
      if (!table.is_object()) {
        throw Error(Errc::kData, "task registry: targets for '" + task +
                                     "' must be an object");
      }
      auto &dest = registry.targets_[task];
      for (const auto &[subtask, display] : table.items()) {
        if (!display.is_string()) {
          throw Error(Errc::kData, "task registry: target '" + subtask +
                                       "' must map to a string");
        }
        dest.emplace(subtask, display.get<std::string>());
      }
    }
  }
  return registry;
}

const PromptTemplate &TaskRegistry::get(std::string_view task) const {
  auto it = templates_.find(task);
  if (it == templates_.end()) {
    throw Error(Errc::kConfig, "unknown task: " + std::string(task));
  }
  return it->second;
}

const std::string &TaskRegistry::target_name(std::string_view task,
                                             std::string_view subtask) const {
  auto table = targets_.find(task);
  if (table == targets_.end()) {
    throw Error(Errc::kConfig,
                "task has no target table: " + std::string(task));
  }
  auto it = table->second.find(subtask);
  if (it == table->second.end()) {
    throw Error(Errc::kConfig, "unknown subtask '" + std::string(subtask) +
                                   "' for task '" + std::string(task) + "'");
  }
  return it->second;
}

std::vector<std::string> TaskRegistry::task_names() const {
  std::vector<std::string> names;
  names.reserve(templates_.size());
  for (const auto &[name, tmpl] : templates_) names.push_back(name);
  return names;
}

}  // namespace moltext
