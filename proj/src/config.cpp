#include "yoto/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "yoto/errors.hpp"
#include "yoto/text_io.hpp"

namespace yoto {

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& part : split_csv(text)) out.push_back(parse_double(part));
  return out;
}

std::uint64_t parse_u64(const std::string& text) {
  const auto t = std::string(trim(text));
  std::size_t pos = 0;
  if (t.empty() || t.front() == '-') throw std::invalid_argument("not a non-negative integer");
  const auto v = std::stoull(t, &pos);
  if (pos != t.size()) throw std::invalid_argument("not an integer: '" + t + "'");
  return v;
}

std::int64_t parse_i64(const std::string& text) {
  const auto t = std::string(trim(text));
  std::size_t pos = 0;
  const auto v = std::stoll(t, &pos);
  if (pos != t.size()) throw std::invalid_argument("not an integer: '" + t + "'");
  return v;
}

std::string fmt_u64_list(const std::vector<std::uint64_t>& xs) {
  std::vector<std::string> parts;
  for (auto x : xs) parts.push_back(std::to_string(x));
  return join(parts, ",");
}

std::string schedule_name(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::kConstant: return "constant";
    case ScheduleKind::kCosine: return "cosine";
    case ScheduleKind::kStep: return "step";
  }
  return "constant";
}

struct KeyDef {
  std::string name;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define YOTO_REAL(key, field)                                                         \
  KeyDef{key, [](ExperimentConfig& c, const std::string& v) { c.field = parse_double(v); }, \
         [](const ExperimentConfig& c) { return format_double(c.field); }}
#define YOTO_SIZE(key, field)                                                                \
  KeyDef{key,                                                                                \
         [](ExperimentConfig& c, const std::string& v) {                                     \
           c.field = static_cast<decltype(c.field)>(parse_u64(v));                           \
         },                                                                                  \
         [](const ExperimentConfig& c) { return std::to_string(c.field); }}

const std::vector<KeyDef>& key_table() {
  static const std::vector<KeyDef> table = {
      KeyDef{"model.kind",
             [](ExperimentConfig& c, const std::string& v) {
               c.model.kind = parse_model_kind(std::string(trim(v)));
             },
             [](const ExperimentConfig& c) { return std::string(to_string(c.model.kind)); }},
      YOTO_SIZE("model.input_dim", model.input_dim),
      YOTO_SIZE("model.hidden_units", model.hidden_units),
      KeyDef{"model.aux_terms",
             [](ExperimentConfig& c, const std::string& v) {
               c.model.aux_terms.clear();
               for (const auto& part : split_csv(v)) c.model.aux_terms.push_back(parse_aux_term(part));
             },
             [](const ExperimentConfig& c) {
               std::vector<std::string> parts;
               for (auto t : c.model.aux_terms) parts.emplace_back(to_string(t));
               return join(parts, ",");
             }},
      YOTO_REAL("model.label_noise", model.label_noise),
      YOTO_REAL("model.jitter_scale", model.jitter_scale),
      YOTO_REAL("model.random_target_scale", model.random_target_scale),
      YOTO_SIZE("data.seed", data_seed),
      YOTO_SIZE("data.n_train", n_train),
      YOTO_SIZE("data.n_val", n_val),
      KeyDef{"optimizer.kind",
             [](ExperimentConfig& c, const std::string& v) {
               const auto t = trim(v);
               if (t == "sgdw") c.optimizer.kind = OptimizerKind::kSgdw;
               else if (t == "adamw") c.optimizer.kind = OptimizerKind::kAdamw;
               else throw std::invalid_argument("optimizer.kind must be sgdw or adamw");
             },
             [](const ExperimentConfig& c) {
               return std::string(c.optimizer.kind == OptimizerKind::kAdamw ? "adamw" : "sgdw");
             }},
      YOTO_REAL("optimizer.alpha", optimizer.alpha),
      YOTO_REAL("optimizer.beta1", optimizer.beta1),
      YOTO_REAL("optimizer.beta2", optimizer.beta2),
      YOTO_REAL("optimizer.adam_epsilon", optimizer.adam_epsilon),
      YOTO_REAL("optimizer.weight_decay", optimizer.weight_decay),
      YOTO_REAL("optimizer.hp_decay", optimizer.hp_decay),
      YOTO_REAL("optimizer.init_epsilon", optimizer.init_epsilon),
      YOTO_REAL("optimizer.grad_clip", optimizer.grad_clip),
      YOTO_REAL("optimizer.lr_scale", lr_scale),
      KeyDef{"optimizer.schedule",
             [](ExperimentConfig& c, const std::string& v) {
               const auto t = trim(v);
               if (t == "constant") c.optimizer.schedule.kind = ScheduleKind::kConstant;
               else if (t == "cosine") c.optimizer.schedule.kind = ScheduleKind::kCosine;
               else if (t == "step") c.optimizer.schedule.kind = ScheduleKind::kStep;
               else throw std::invalid_argument("schedule must be constant, cosine or step");
             },
             [](const ExperimentConfig& c) { return schedule_name(c.optimizer.schedule.kind); }},
      KeyDef{"optimizer.milestones",
             [](ExperimentConfig& c, const std::string& v) {
               c.optimizer.schedule.milestones.clear();
               if (trim(v).empty()) return;
               for (const auto& p : split_csv(v)) c.optimizer.schedule.milestones.push_back(parse_i64(p));
             },
             [](const ExperimentConfig& c) {
               std::vector<std::string> parts;
               for (auto m : c.optimizer.schedule.milestones) parts.push_back(std::to_string(m));
               return join(parts, ",");
             }},
      YOTO_REAL("optimizer.step_factor", optimizer.schedule.factor),
      KeyDef{"train.steps",
             [](ExperimentConfig& c, const std::string& v) { c.steps = parse_i64(v); },
             [](const ExperimentConfig& c) { return std::to_string(c.steps); }},
      YOTO_SIZE("train.batch_size", batch_size),
      KeyDef{"train.record_every",
             [](ExperimentConfig& c, const std::string& v) { c.record_every = parse_i64(v); },
             [](const ExperimentConfig& c) { return std::to_string(c.record_every); }},
      KeyDef{"train.mode",
             [](ExperimentConfig& c, const std::string& v) {
               const auto t = trim(v);
               if (t == "yoto") c.mode = TrainingMode::kYoto;
               else if (t == "fixed") c.mode = TrainingMode::kFixed;
               else throw std::invalid_argument("train.mode must be yoto or fixed");
             },
             [](const ExperimentConfig& c) {
               return std::string(c.mode == TrainingMode::kYoto ? "yoto" : "fixed");
             }},
      KeyDef{"train.fixed_weights",
             [](ExperimentConfig& c, const std::string& v) { c.fixed_weights = parse_list(v); },
             [](const ExperimentConfig& c) { return join_numbers(c.fixed_weights); }},
      KeyDef{"grid.axes",
             [](ExperimentConfig& c, const std::string& v) {
               c.grid.axes.clear();
               std::string_view rest = v;
               while (!trim(rest).empty()) {
                 const auto pos = rest.find(';');
                 c.grid.axes.push_back(parse_list(std::string(rest.substr(0, pos))));
                 if (pos == std::string_view::npos) break;
                 rest.remove_prefix(pos + 1);
               }
             },
             [](const ExperimentConfig& c) {
               std::vector<std::string> parts;
               for (const auto& axis : c.grid.axes) parts.push_back(join_numbers(axis));
               return join(parts, ";");
             }},
      KeyDef{"grid.log_ratios",
             [](ExperimentConfig& c, const std::string& v) { c.grid.log_ratios = parse_list(v); },
             [](const ExperimentConfig& c) { return join_numbers(c.grid.log_ratios); }},
      KeyDef{"seeds",
             [](ExperimentConfig& c, const std::string& v) {
               c.seeds.clear();
               for (const auto& p : split_csv(v)) c.seeds.push_back(parse_u64(p));
             },
             [](const ExperimentConfig& c) { return fmt_u64_list(c.seeds); }},
      KeyDef{"init_sweep.epsilons",
             [](ExperimentConfig& c, const std::string& v) { c.init_epsilons = parse_list(v); },
             [](const ExperimentConfig& c) { return join_numbers(c.init_epsilons); }},
      YOTO_REAL("init_sweep.cluster_threshold", cluster_threshold),
      YOTO_SIZE("threads", threads),
      KeyDef{"output_dir",
             [](ExperimentConfig& c, const std::string& v) { c.output_dir = std::string(trim(v)); },
             [](const ExperimentConfig& c) { return c.output_dir.string(); }},
  };
  return table;
}

#undef YOTO_REAL
#undef YOTO_SIZE

const KeyDef* find_key(const std::string& name) {
  for (const auto& def : key_table()) {
    if (def.name == name) return &def;
  }
  return nullptr;
}

}  // namespace

std::vector<std::vector<double>> GridSpec::points() const {
  std::vector<std::vector<double>> out;
  if (!log_ratios.empty()) {
    for (double r : log_ratios) out.push_back({1.0, std::pow(10.0, r)});
    return out;
  }
  if (axes.empty()) return out;
  out.push_back({1.0});
  for (const auto& axis : axes) {
    std::vector<std::vector<double>> next;
    for (const auto& prefix : out) {
      for (double v : axis) {
        auto p = prefix;
        p.push_back(v);
        next.push_back(std::move(p));
      }
    }
    out = std::move(next);
  }
  return out;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  try {
    model.validate();
    optimizer.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (n_train == 0 || n_val == 0) fail("data.n_train and data.n_val must be >= 1");
  if (!(lr_scale > 0.0)) fail("optimizer.lr_scale must be > 0");
  if (steps < 1) fail("train.steps must be >= 1");
  if (optimizer.total_steps != steps) fail("optimizer.total_steps must equal train.steps");
  if (batch_size == 0) fail("train.batch_size must be >= 1");
  if (record_every < 1) fail("train.record_every must be >= 1");
  if (mode == TrainingMode::kFixed) {
    if (fixed_weights.size() != model.loss_count()) {
      fail("train.fixed_weights needs " + std::to_string(model.loss_count()) + " entries");
    }
    for (double w : fixed_weights) {
      if (!(w > 0.0) || !std::isfinite(w)) fail("train.fixed_weights must be positive");
    }
  }
  if (!grid.axes.empty() && grid.axes.size() != model.aux_terms.size()) {
    fail("grid.axes needs one axis per auxiliary loss");
  }
  for (const auto& axis : grid.axes) {
    if (axis.empty()) fail("grid.axes contains an empty axis");
    for (double v : axis) {
      if (!(v > 0.0)) fail("grid values must be positive");
    }
  }
  if (!grid.log_ratios.empty() && model.aux_terms.size() != 1) {
    fail("grid.log_ratios requires exactly one auxiliary loss");
  }
  if (!grid.axes.empty() && !grid.log_ratios.empty()) {
    fail("set either grid.axes or grid.log_ratios, not both");
  }
  if (seeds.empty()) fail("seeds must not be empty");
  for (double e : init_epsilons) {
    if (!(e > 0.0)) fail("init_sweep.epsilons must be positive");
  }
  if (!(cluster_threshold >= 0.0)) fail("init_sweep.cluster_threshold must be >= 0");
}

ConfigEntries parse_config_text(const std::string& text) {
  ConfigEntries entries;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const auto body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(body.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    entries[std::string(key)] = std::string(trim(body.substr(eq + 1)));
  }
  return entries;
}

ConfigEntries load_config_entries(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void apply_override(ConfigEntries& entries, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  const auto key = std::string(trim(std::string_view(assignment).substr(0, eq)));
  if (!find_key(key)) throw ConfigError("unknown config key '" + key + "'");
  entries[key] = std::string(trim(std::string_view(assignment).substr(eq + 1)));
}

ExperimentConfig build_config(const ConfigEntries& entries) {
  ExperimentConfig config;
  for (const auto& [key, value] : entries) {
    const KeyDef* def = find_key(key);
    if (!def) throw ConfigError("unknown config key '" + key + "'");
    try {
      def->set(config, value);
    } catch (const std::exception& e) {
      throw ConfigError(key + ": " + e.what());
    }
  }
  config.optimizer.total_steps = config.steps;
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides) {
  ConfigEntries entries = load_config_entries(path);
  for (const auto& o : overrides) apply_override(entries, o);
  return build_config(entries);
}

ConfigEntries to_entries(const ExperimentConfig& config) {
  ConfigEntries entries;
  for (const auto& def : key_table()) entries[def.name] = def.get(config);
  return entries;
}

std::string to_config_text(const ExperimentConfig& config) {
  std::string out;
  for (const auto& def : key_table()) out += def.name + " = " + def.get(config) + "\n";
  return out;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& def : key_table()) k.push_back(def.name);
    return k;
  }();
  return keys;
}

}  // namespace yoto
