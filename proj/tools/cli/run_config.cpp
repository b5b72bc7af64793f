#include "cli/run_config.hpp"

#include <charconv>
#include <functional>
#include <string>

#include "multishape/error.hpp"
#include "multishape/netpbm.hpp"

namespace multishape::cli {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  throw ConfigError("key '" + std::string(key) + "': cannot parse '" + std::string(value) +
                    "' as " + std::string(want));
}

template <class T>
T parse_number(std::string_view key, std::string_view value, std::string_view want) {
  const std::string v = trim(value);
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, value, want);
  return out;
}

int as_int(std::string_view k, std::string_view v) { return parse_number<int>(k, v, "integer"); }
double as_real(std::string_view k, std::string_view v) { return parse_number<double>(k, v, "number"); }

bool as_bool(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, value, "boolean");
}

struct Entry {
  const char* name;
  bool boolean;
  std::function<void(RunConfig&, std::string_view, std::string_view)> set;
  std::function<nlohmann::json(const RunConfig&)> get;
};

#define MS_INT(NAME, FIELD)                                                                  \
  Entry{NAME, false, [](RunConfig& c, std::string_view k, std::string_view v) { c.FIELD = as_int(k, v); }, \
        [](const RunConfig& c) { return nlohmann::json(c.FIELD); }}
#define MS_REAL(NAME, FIELD)                                                                 \
  Entry{NAME, false, [](RunConfig& c, std::string_view k, std::string_view v) { c.FIELD = as_real(k, v); }, \
        [](const RunConfig& c) { return nlohmann::json(c.FIELD); }}
#define MS_BOOL(NAME, FIELD)                                                                 \
  Entry{NAME, true, [](RunConfig& c, std::string_view k, std::string_view v) { c.FIELD = as_bool(k, v); }, \
        [](const RunConfig& c) { return nlohmann::json(c.FIELD); }}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      Entry{"seed", false,
            [](RunConfig& c, std::string_view k, std::string_view v) {
              c.seed = parse_number<std::uint64_t>(k, v, "unsigned integer");
            },
            [](const RunConfig& c) { return nlohmann::json(c.seed); }},
      MS_INT("ray_count", ray_count),
      MS_REAL("variance_threshold", variance_threshold),
      MS_REAL("energy_threshold_fraction", evolution.energy_threshold_fraction),
      MS_INT("count", count),
      MS_INT("jobs", jobs),
      MS_BOOL("learn_importance", learn_importance),
      MS_INT("fold", fold),
      MS_INT("folds", folds),
      MS_BOOL("invert", invert),
      // generator
      MS_INT("n_objects_min", generator.n_objects_min),
      MS_INT("n_objects_max", generator.n_objects_max),
      MS_REAL("base_radius_min", generator.base_radius_min),
      MS_REAL("base_radius_max", generator.base_radius_max),
      MS_REAL("eccentricity_min", generator.eccentricity_min),
      MS_REAL("eccentricity_max", generator.eccentricity_max),
      MS_REAL("boundary_noise_amplitude", generator.boundary_noise_amplitude),
      MS_INT("harmonics", generator.harmonics),
      MS_REAL("centroid_spacing_min", generator.centroid_spacing_min),
      MS_REAL("centroid_spacing_max", generator.centroid_spacing_max),
      MS_INT("width", generator.width),
      MS_INT("height", generator.height),
      // evolution
      MS_INT("max_outer_iterations", evolution.max_outer_iterations),
      MS_REAL("fd_step", evolution.fd_step),
      MS_REAL("initial_trust_radius", evolution.initial_trust_radius),
      MS_REAL("min_trust_radius", evolution.min_trust_radius),
      MS_REAL("max_trust_radius", evolution.max_trust_radius),
      MS_REAL("shrink_ratio", evolution.shrink_ratio),
      MS_REAL("grow_ratio", evolution.grow_ratio),
      MS_REAL("shrink_factor", evolution.shrink_factor),
      MS_REAL("grow_factor", evolution.grow_factor),
      MS_INT("alignment_refresh_period", evolution.alignment_refresh_period),
      MS_BOOL("exact_fd_hessian", evolution.exact_fd_hessian),
      MS_INT("exact_fd_hessian_max_dim", evolution.exact_fd_hessian_max_dim),
      MS_REAL("scale_min", evolution.grid.scale_min),
      MS_REAL("scale_max", evolution.grid.scale_max),
      MS_REAL("scale_step", evolution.grid.scale_step),
      MS_INT("rotation_steps", evolution.grid.rotation_steps),
      MS_REAL("radius_floor", evolution.limits.radius_floor),
      MS_REAL("box_sigmas", evolution.limits.box_sigmas),
      // importance learning
      MS_REAL("importance_step", learning.step),
      MS_INT("max_tries_per_example", learning.max_tries_per_example),
      MS_INT("max_cycles", learning.max_cycles),
      MS_INT("learning_max_outer_iterations", learning.evolution.max_outer_iterations),
      MS_BOOL("shuffle", learning.shuffle),
  };
  return table;
}

#undef MS_INT
#undef MS_REAL
#undef MS_BOOL

const Entry* find_entry(std::string_view key) {
  for (const auto& e : entries()) {
    if (key == e.name) return &e;
  }
  return nullptr;
}

}  // namespace

const std::vector<KeyInfo>& config_keys() {
  static const std::vector<KeyInfo> keys = [] {
    std::vector<KeyInfo> out;
    for (const auto& e : entries()) out.push_back({e.name, e.boolean});
    return out;
  }();
  return keys;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  const Entry* e = find_entry(key);
  if (e == nullptr) throw ConfigError("unknown key '" + std::string(key) + "'");
  e->set(*this, key, value);
}

void RunConfig::finalize() {
  if (count < 1) throw ConfigError("key 'count': must be at least 1");
  if (jobs < 1) throw ConfigError("key 'jobs': must be at least 1");
  if (folds < 1) throw ConfigError("key 'folds': must be at least 1");
  if (fold < 0 || fold >= folds) throw ConfigError("key 'fold': must lie in [0, folds)");
  if (invert && folds < 2) throw ConfigError("key 'invert': requires folds >= 2");
  if (ray_count < 3) throw ConfigError("key 'ray_count': must be at least 3");
  if (!(variance_threshold > 0.0 && variance_threshold <= 1.0)) {
    throw ConfigError("key 'variance_threshold': must lie in (0, 1]");
  }

  generator.seed = seed;
  generator.ray_count = ray_count;
  learning.seed = seed;
  learning.variance_threshold = variance_threshold;
  const int inner_iterations = learning.evolution.max_outer_iterations;
  learning.evolution = evolution;
  learning.evolution.max_outer_iterations = inner_iterations;

  try {
    generator.validate();
    evolution.validate();
    learning.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& e : entries()) doc[e.name] = e.get(*this);
  return doc;
}

void load_config_text(RunConfig& config, std::string_view text) {
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("malformed JSON config: ") + e.what());
    }
    for (const auto& [key, value] : doc.items()) {
      if (value.is_string()) {
        config.set(key, value.get<std::string>());
      } else if (value.is_number() || value.is_boolean()) {
        config.set(key, value.dump());
      } else {
        throw ConfigError("key '" + key + "': value must be a scalar");
      }
    }
    return;
  }

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    config.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void load_config_file(RunConfig& config, const std::filesystem::path& path) {
  load_config_text(config, read_file(path));
}

}  // namespace multishape::cli
