#include "sphirf/run_config.hpp"

#include <fstream>
#include <set>

#include "sphirf/error.hpp"

namespace sphirf {
namespace {

using nlohmann::json;

/// Typed access to one JSON object; rejects keys that were never declared.
class Section {
 public:
  Section(const json& object, std::string name, std::set<std::string> allowed)
      : object_(object), name_(std::move(name)) {
    if (!object_.is_object()) throw ConfigError("'" + name_ + "' must be a JSON object");
    for (const auto& [key, value] : object_.items()) {
      if (!allowed.count(key)) throw ConfigError("unknown key '" + name_ + "." + key + "'");
    }
  }

  bool has(const std::string& key) const { return object_.contains(key) && !object_[key].is_null(); }

  const json& at(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing required key '" + path(key) + "'");
    return object_[key];
  }

  double number(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError("'" + path(key) + "' must be a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  long integer(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number_integer()) throw ConfigError("'" + path(key) + "' must be an integer");
    return v.get<long>();
  }
  long integer(const std::string& key, long fallback) const {
    return has(key) ? integer(key) : fallback;
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number_unsigned()) {
      throw ConfigError("'" + path(key) + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) throw ConfigError("'" + path(key) + "' must be true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError("'" + path(key) + "' must be a string");
    return v.get<std::string>();
  }
  std::string text(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }

  std::vector<double> numbers(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_array()) throw ConfigError("'" + path(key) + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError("'" + path(key) + "' must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<int> integers(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_array()) throw ConfigError("'" + path(key) + "' must be an array of integers");
    std::vector<int> out;
    for (const auto& e : v) {
      if (!e.is_number_integer()) {
        throw ConfigError("'" + path(key) + "' must be an array of integers");
      }
      out.push_back(e.get<int>());
    }
    return out;
  }

  /// [[lat_deg, lon_deg], ...]
  std::vector<SpherePoint> points(const std::string& key) const {
    const json& v = at(key);
    const std::string where = path(key);
    if (!v.is_array()) throw ConfigError("'" + where + "' must be an array of [lat_deg, lon_deg]");
    std::vector<SpherePoint> out;
    for (const auto& e : v) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
        throw ConfigError("'" + where + "' entries must be [lat_deg, lon_deg]");
      }
      const double lat = e[0].get<double>();
      const double lon = e[1].get<double>();
      if (lat < -90.0 || lat > 90.0) throw ConfigError("'" + where + "' latitude outside [-90, 90]");
      out.push_back(SpherePoint::from_degrees(lat, lon));
    }
    return out;
  }

 private:
  std::string path(const std::string& key) const { return name_ + "." + key; }

  const json& object_;
  std::string name_;
};

int checked_int(long v, const char* what) {
  if (v < 0 || v > 1'000'000'000) throw ConfigError(std::string(what) + " out of range");
  return static_cast<int>(v);
}

ModelSpec parse_model(const json& j) {
  const Section s(j, "model", {"family", "alpha", "beta", "gamma", "shape"});
  std::optional<double> shape;
  if (s.has("shape")) shape = s.number("shape");
  return ModelSpec(parse_family(s.text("family")), s.number("alpha"), s.number("beta"),
                   s.number("gamma", 1.0), shape);
}

IntrinsicSpec parse_full_intrinsic(const json& j) {
  const Section s(j, "intrinsic", {"kappa", "d", "gamma0", "gamma_nu", "anchors"});
  const int kappa = checked_int(s.integer("kappa"), "intrinsic.kappa");
  const int d = checked_int(s.integer("d"), "intrinsic.d");
  const double gamma0 = s.number("gamma0", 1.0);
  IntrinsicSpec defaults = IntrinsicSpec::with_defaults(kappa, d, gamma0);
  std::vector<double> gamma_nu = s.has("gamma_nu") ? s.numbers("gamma_nu") : defaults.gamma_nu();
  std::vector<SpherePoint> anchors = s.has("anchors") ? s.points("anchors") : defaults.anchors();
  return IntrinsicSpec(kappa, d, gamma0, std::move(gamma_nu), std::move(anchors));
}

GridSpec parse_grid(const json& j, int d, long& cap) {
  const Section s(j, "grid", {"n_locations", "T", "sampling", "seed", "locations", "cap"});
  GridSpec grid;
  grid.sampling = parse_sampling(s.text("sampling", "uniform"));
  grid.T = checked_int(s.integer("T"), "grid.T");
  grid.seed = s.unsigned_integer("seed", 0);
  cap = s.integer("cap", kDefaultCovarianceCap);
  if (cap < 1) throw ConfigError("grid.cap must be positive");
  if (grid.sampling == Sampling::FromFile) {
    grid.locations = s.points("locations");
    grid.n_locations = static_cast<int>(grid.locations.size());
    if (s.has("n_locations") && s.integer("n_locations") != grid.n_locations) {
      throw ConfigError("grid.n_locations disagrees with the length of grid.locations");
    }
  } else {
    if (s.has("locations")) {
      throw ConfigError("grid.locations is only used with sampling \"file\"");
    }
    grid.n_locations = checked_int(s.integer("n_locations"), "grid.n_locations");
  }
  grid.validate(d);
  return grid;
}

BinSpec parse_bins(const json& j) {
  const Section s(j, "bins", {"psi_centers", "epsilon", "lags", "allow_overlap"});
  BinSpec bins = BinSpec::defaults();
  if (s.has("psi_centers")) bins.psi_centers = s.numbers("psi_centers");
  bins.epsilon = s.number("epsilon", bins.epsilon);
  if (s.has("lags")) bins.lags = s.integers("lags");
  bins.allow_overlap = s.boolean("allow_overlap", false);
  bins.validate();
  return bins;
}

FitOptions parse_fit(const json& j) {
  const Section s(j, "fit", {"starts", "max_iter", "tol"});
  FitOptions options;
  options.starts = static_cast<int>(s.integer("starts", options.starts));
  options.max_iter = static_cast<int>(s.integer("max_iter", options.max_iter));
  options.tol = s.number("tol", options.tol);
  if (options.starts < 1 || options.starts > static_cast<int>(start_grid().size())) {
    throw ConfigError("fit.starts must lie in [1, " + std::to_string(start_grid().size()) + "]");
  }
  if (options.max_iter < 1) throw ConfigError("fit.max_iter must be positive");
  if (!(options.tol > 0.0)) throw ConfigError("fit.tol must be positive");
  return options;
}

OrderOptions parse_order(const json& j) {
  const Section s(j, "order", {"n_max", "drop_ratio"});
  OrderOptions options;
  options.n_max = static_cast<int>(s.integer("n_max", options.n_max));
  options.drop_ratio = s.number("drop_ratio", options.drop_ratio);
  if (options.n_max < 0) throw ConfigError("order.n_max must be non-negative");
  if (!(options.drop_ratio > 1.0)) throw ConfigError("order.drop_ratio must exceed 1");
  return options;
}

FitParams parse_truth(const json& j) {
  const Section s(j, "truth", {"alpha", "beta", "gamma0"});
  FitParams p{s.number("alpha"), s.number("beta"), s.number("gamma0", 1.0)};
  if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw ConfigError("truth.alpha must lie in (0, 1)");
  if (!(p.beta > 0.0)) throw ConfigError("truth.beta must be positive");
  if (!(p.gamma0 > 0.0)) throw ConfigError("truth.gamma0 must be positive");
  return p;
}

CurveGrid parse_curves(const json& j) {
  const Section s(j, "curves", {"psi_max", "psi_points", "lags"});
  CurveGrid grid;
  grid.psi_max = s.number("psi_max", grid.psi_max);
  grid.psi_points = static_cast<int>(s.integer("psi_points", grid.psi_points));
  if (s.has("lags")) grid.lags = s.integers("lags");
  if (!(grid.psi_max >= 0.0 && grid.psi_max <= kPi)) {
    throw ConfigError("curves.psi_max must lie in [0, pi]");
  }
  if (grid.psi_points < 1 || grid.psi_points > 100000) {
    throw ConfigError("curves.psi_points must lie in [1, 100000]");
  }
  if (grid.lags.empty()) throw ConfigError("curves.lags must not be empty");
  for (int h : grid.lags) {
    if (h < 0) throw ConfigError("curves.lags must be non-negative");
  }
  return grid;
}

std::set<std::string> sections_for(Command command) {
  switch (command) {
    case Command::Simulate: return {"model", "intrinsic", "grid", "output"};
    case Command::Fit: return {"input", "intrinsic", "bins", "fit", "truth", "output"};
    case Command::Mom: return {"input", "intrinsic", "bins", "output"};
    case Command::SelectOrder: return {"input", "intrinsic", "bins", "order", "output"};
    case Command::Curves: return {"model", "intrinsic", "curves", "output"};
  }
  return {};
}

void apply_overrides(Command command, json& doc, const Overrides& o) {
  if (o.seed) {
    if (command != Command::Simulate) throw ConfigError("--seed applies to simulate only");
    if (!doc.contains("grid")) doc["grid"] = json::object();
    doc["grid"]["seed"] = *o.seed;
  }
  if (o.kappa) {
    if (command == Command::SelectOrder) {
      throw ConfigError("--kappa does not apply to select-order, which estimates it");
    }
    if (!doc.contains("intrinsic")) doc["intrinsic"] = json::object();
    doc["intrinsic"]["kappa"] = *o.kappa;
  }
  if (o.d) {
    if (command == Command::Curves) throw ConfigError("--d does not apply to curves");
    if (!doc.contains("intrinsic")) doc["intrinsic"] = json::object();
    doc["intrinsic"]["d"] = *o.d;
  }
  if (o.out) doc["output"] = *o.out;
  if (o.input) {
    if (command == Command::Simulate || command == Command::Curves) {
      throw ConfigError("--input does not apply to " + std::string(command_name(command)));
    }
    doc["input"] = *o.input;
  }
}

std::string required_text(const json& doc, const char* key) {
  if (!doc.contains(key)) throw ConfigError(std::string("missing required key '") + key + "'");
  if (!doc[key].is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
  return doc[key].get<std::string>();
}

}  // namespace

std::string_view command_name(Command command) noexcept {
  switch (command) {
    case Command::Simulate: return "simulate";
    case Command::Fit: return "fit";
    case Command::Mom: return "mom";
    case Command::SelectOrder: return "select-order";
    case Command::Curves: return "curves";
  }
  return "unknown";
}

Command parse_command(std::string_view name) {
  for (Command c : {Command::Simulate, Command::Fit, Command::Mom, Command::SelectOrder,
                    Command::Curves}) {
    if (command_name(c) == name) return c;
  }
  throw ConfigError("unknown command '" + std::string(name) + "'");
}

RunConfig parse_run_config(Command command, json doc, const Overrides& overrides) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  apply_overrides(command, doc, overrides);
  const auto allowed = sections_for(command);
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("section '" + key + "' is not used by " +
                        std::string(command_name(command)));
    }
  }

  RunConfig cfg;
  cfg.command = command;
  cfg.effective = doc;
  if (doc.contains("output")) cfg.output = required_text(doc, "output");

  switch (command) {
    case Command::Simulate: {
      if (!doc.contains("model")) throw ConfigError("simulate needs a 'model' section");
      if (!doc.contains("intrinsic")) throw ConfigError("simulate needs an 'intrinsic' section");
      if (!doc.contains("grid")) throw ConfigError("simulate needs a 'grid' section");
      cfg.model = parse_model(doc["model"]);
      cfg.intrinsic = parse_full_intrinsic(doc["intrinsic"]);
      cfg.kappa = cfg.intrinsic->kappa();
      cfg.d = cfg.intrinsic->d();
      cfg.grid = parse_grid(doc["grid"], cfg.d, cfg.cap);
      break;
    }
    case Command::Fit:
    case Command::Mom: {
      cfg.input = required_text(doc, "input");
      if (!doc.contains("intrinsic")) {
        throw ConfigError(std::string(command_name(command)) + " needs an 'intrinsic' section");
      }
      const Section s(doc["intrinsic"], "intrinsic", {"kappa", "d"});
      cfg.kappa = checked_int(s.integer("kappa"), "intrinsic.kappa");
      cfg.d = checked_int(s.integer("d"), "intrinsic.d");
      if (cfg.d > 1) throw ConfigError("intrinsic.d must be 0 or 1");
      if (doc.contains("bins")) cfg.bins = parse_bins(doc["bins"]);
      if (command == Command::Fit) {
        if (doc.contains("fit")) cfg.fit = parse_fit(doc["fit"]);
        if (doc.contains("truth")) cfg.truth = parse_truth(doc["truth"]);
      }
      break;
    }
    case Command::SelectOrder: {
      cfg.input = required_text(doc, "input");
      if (doc.contains("intrinsic")) {
        const Section s(doc["intrinsic"], "intrinsic", {"d"});
        cfg.d = checked_int(s.integer("d"), "intrinsic.d");
        if (cfg.d > 1) throw ConfigError("intrinsic.d must be 0 or 1");
      }
      if (doc.contains("bins")) cfg.bins = parse_bins(doc["bins"]);
      if (doc.contains("order")) cfg.order = parse_order(doc["order"]);
      break;
    }
    case Command::Curves: {
      if (!doc.contains("model")) throw ConfigError("curves needs a 'model' section");
      cfg.model = parse_model(doc["model"]);
      if (doc.contains("intrinsic")) {
        const Section s(doc["intrinsic"], "intrinsic", {"kappa", "gamma0"});
        cfg.kappa = checked_int(s.integer("kappa", 0), "intrinsic.kappa");
        cfg.intrinsic = IntrinsicSpec::with_defaults(cfg.kappa, 0, s.number("gamma0", 1.0));
      } else {
        cfg.intrinsic = IntrinsicSpec::with_defaults(0, 0);
      }
      if (doc.contains("curves")) cfg.curves = parse_curves(doc["curves"]);
      break;
    }
  }
  return cfg;
}

RunConfig load_run_config(Command command, const std::filesystem::path& path,
                          const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_run_config(command, std::move(doc), overrides);
}

json to_json(const ModelSpec& spec) {
  json j = {{"family", std::string(family_name(spec.family()))},
            {"alpha", spec.alpha()},
            {"beta", spec.beta()},
            {"gamma", spec.gamma()}};
  if (family_has_shape(spec.family())) j["shape"] = spec.shape();
  return j;
}

json to_json(const IntrinsicSpec& intrinsic) {
  json anchors = json::array();
  for (const auto& p : intrinsic.anchors()) anchors.push_back({p.lat_deg(), p.lon_deg()});
  return {{"kappa", intrinsic.kappa()},
          {"d", intrinsic.d()},
          {"gamma0", intrinsic.gamma0()},
          {"gamma_nu", intrinsic.gamma_nu()},
          {"anchors", anchors}};
}

json to_json(const GridSpec& grid) {
  json j = {{"n_locations", grid.n_locations},
            {"T", grid.T},
            {"sampling", std::string(sampling_name(grid.sampling))},
            {"seed", grid.seed}};
  if (grid.sampling == Sampling::FromFile) {
    json pts = json::array();
    for (const auto& p : grid.locations) pts.push_back({p.lat_deg(), p.lon_deg()});
    j["locations"] = pts;
  }
  return j;
}

json to_json(const BinSpec& bins) {
  return {{"psi_centers", bins.psi_centers},
          {"epsilon", bins.epsilon},
          {"lags", bins.lags},
          {"allow_overlap", bins.allow_overlap}};
}

}  // namespace sphirf
