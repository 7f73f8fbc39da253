#include "sffnn/config.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "sffnn/errors.h"

namespace sffnn {
namespace {

std::string Trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double ParseDouble(const std::string& value, const std::string& key) {
  try {
    size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': bad number '" + value + "'");
  }
}

uint64_t ParseUint(const std::string& value, const std::string& key) {
  uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + key + "': bad integer '" + value + "'");
  }
  return v;
}

bool ParseBool(const std::string& value, const std::string& key) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  throw ConfigError("config key '" + key + "': bad flag '" + value + "'");
}

template <typename T, typename Fn>
std::vector<T> ParseList(const std::string& value, const std::string& key,
                         Fn parse_one) {
  std::vector<T> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(parse_one(item, key));
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

}  // namespace

TaskConfig TaskConfig::Parse(std::string_view text) {
  TaskConfig config;
  config.text = std::string(text);

  std::string template_lines;
  std::istringstream in{config.text};
  std::string line;
  int line_no = 0;
  bool saw_task = false;
  while (std::getline(in, line)) {
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string trimmed = Trim(line);
    if (trimmed.empty()) continue;
    if (trimmed.starts_with("group ") || trimmed.starts_with("template ")) {
      template_lines += trimmed;
      template_lines += '\n';
      continue;
    }
    size_t eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value, group or template");
    }
    std::string key = Trim(trimmed.substr(0, eq));
    std::string value = Trim(trimmed.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty key or value");
    }
    if (key == "task") {
      config.task = ParseTask(value);
      saw_task = true;
    } else if (key == "mode") {
      config.preorder_mode = ParsePreorderMode(value);
    } else if (key == "hidden_dim") {
      config.hidden_dim = static_cast<uint32_t>(ParseUint(value, key));
    } else if (key == "num_labels") {
      config.num_labels = static_cast<uint32_t>(ParseUint(value, key));
    } else if (key == "lexicon_cutoff") {
      config.lexicon_cutoff = ParseUint(value, key);
    } else if (key == "oracle") {
      if (value == "eager") {
        config.oracle = PreOracleStrategy::kEagerAppend;
      } else if (value == "bubble") {
        config.oracle = PreOracleStrategy::kBubbleSort;
      } else {
        throw ConfigError("config key 'oracle': expected eager or bubble");
      }
    } else if (key == "learning_rate") {
      config.train.learning_rate = ParseDouble(value, key);
    } else if (key == "momentum") {
      config.train.momentum = ParseDouble(value, key);
    } else if (key == "decay_gamma") {
      config.train.decay_gamma = ParseUint(value, key);
    } else if (key == "decay_factor") {
      config.train.decay_factor = ParseDouble(value, key);
    } else if (key == "max_steps") {
      config.train.max_steps = ParseUint(value, key);
    } else if (key == "batch_size") {
      config.train.batch_size = static_cast<uint32_t>(ParseUint(value, key));
    } else if (key == "l2_lambda") {
      config.train.l2_lambda = ParseDouble(value, key);
    } else if (key == "dropout_p") {
      config.train.dropout_p = ParseDouble(value, key);
    } else if (key == "eval_metric") {
      config.train.eval_metric = value;
    } else if (key == "early_stop_patience") {
      config.train.early_stop_patience =
          static_cast<uint32_t>(ParseUint(value, key));
    } else if (key == "eval_every") {
      config.train.eval_every = ParseUint(value, key);
    } else if (key == "seed") {
      config.train.seed = ParseUint(value, key);
    } else if (key == "averaging") {
      config.train.averaging = ParseBool(value, key);
    } else if (key == "grid.learning_rate") {
      config.grid.learning_rate = ParseList<double>(value, key, ParseDouble);
    } else if (key == "grid.momentum") {
      config.grid.momentum = ParseList<double>(value, key, ParseDouble);
    } else if (key == "grid.decay_gamma") {
      config.grid.decay_gamma = ParseList<uint64_t>(value, key, ParseUint);
    } else if (key == "grid.dropout_p") {
      config.grid.dropout_p = ParseList<double>(value, key, ParseDouble);
    } else if (key == "grid.l2_lambda") {
      config.grid.l2_lambda = ParseList<double>(value, key, ParseDouble);
    } else {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    }
  }
  if (!saw_task) throw ConfigError("config is missing the 'task' key");
  config.templates = TemplateSet::Parse(template_lines);
  config.Validate();
  return config;
}

TaskConfig TaskConfig::ParseFile(const std::string& path) {
  return Parse(ReadTextFile(path));
}

void TaskConfig::Validate() const {
  if (hidden_dim == 0) throw ConfigError("config needs hidden_dim >= 1");
  if (templates.groups.empty()) {
    throw ConfigError("config declares no feature groups");
  }
  if (templates.templates.empty()) {
    throw ConfigError("config declares no templates");
  }
  if (task == TaskKind::kLangId) {
    for (const FeatureGroup& g : templates.groups) {
      if (g.pooling != Pooling::kAverage) {
        throw ConfigError("langid groups use average pooling (group '" +
                          g.name + "')");
      }
    }
  }
}

ModelFile BuildModelSkeleton(const TaskConfig& config,
                             const std::vector<std::string>& labels) {
  ModelFile model;
  model.task = config.task;
  model.preorder_mode = config.preorder_mode;
  model.config_text = config.text;

  NetworkModel& net = model.net;
  net.groups = config.templates.groups;
  net.slots = config.templates.slots;
  for (const FeatureGroup& g : net.groups) {
    if (g.vocab_size == 0) {
      throw ConfigError("group '" + g.name +
                        "' has vocab=auto; train a model to size it");
    }
    net.embeddings.push_back(EmbeddingMatrix::Zero(g.vocab_size, g.embedding_dim));
  }
  net.hidden_dim = config.hidden_dim;
  net.h0_dim = NetworkModel::ComputeH0(net.groups, net.slots);
  net.hidden_weights.assign(static_cast<size_t>(net.hidden_dim) * net.h0_dim, 0.f);
  net.hidden_bias.assign(net.hidden_dim, 0.f);

  if (!labels.empty()) {
    net.labels = labels;
  } else {
    if (config.num_labels == 0) {
      throw ConfigError("config needs num_labels (or train with labeled data)");
    }
    net.labels.reserve(config.num_labels);
    for (uint32_t i = 0; i < config.num_labels; ++i) {
      char buf[8];
      std::snprintf(buf, sizeof(buf), "L%02u", i);
      net.labels.emplace_back(buf);
    }
  }
  const uint32_t k = net.num_labels();
  net.output_weights.assign(static_cast<size_t>(k) * net.hidden_dim, 0.f);
  net.output_bias.assign(k, 0.f);
  return model;
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void WriteTextFile(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("failed writing '" + path + "'");
}

}  // namespace sffnn
