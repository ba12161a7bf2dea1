#include "pollreg/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "pollreg/errors.hpp"

namespace pollreg {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ParseError(path + ": " + what);
}

const json& field(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

// Station indices are 1-based in files, 0-based in memory.
int station_index(const json& j, const std::string& path, int d) {
  const int v = integer(j, path);
  if (v < 1 || v > d) fail(path, "station index out of range");
  return v - 1;
}

ServiceDistribution parse_service(const json& j, const std::string& path) {
  ServiceDistribution out;
  const std::string family = field(j, path, "family").get<std::string>();
  if (family == "exponential") {
    out.family = ServiceFamily::Exponential;
  } else if (family == "deterministic") {
    out.family = ServiceFamily::Deterministic;
  } else {
    fail(path + ".family", "expected \"exponential\" or \"deterministic\"");
  }
  out.rate = number(field(j, path, "rate"), path + ".rate");
  if (!(out.rate > 0.0)) fail(path + ".rate", "must be positive");
  return out;
}

json service_to_json(const ServiceDistribution& s) {
  return json{{"family", s.family == ServiceFamily::Exponential
                             ? "exponential"
                             : "deterministic"},
              {"rate", s.rate}};
}

SwitchingDistribution parse_switching_entry(const json& j,
                                            const std::string& path) {
  SwitchingDistribution out;
  const std::string family = field(j, path, "family").get<std::string>();
  if (family == "zero") {
    out.family = SwitchingFamily::Zero;
    out.mean = 0.0;
    return out;
  }
  if (family == "deterministic") {
    out.family = SwitchingFamily::Deterministic;
  } else if (family == "exponential") {
    out.family = SwitchingFamily::Exponential;
  } else {
    fail(path + ".family", "expected \"zero\", \"deterministic\" or \"exponential\"");
  }
  out.mean = number(field(j, path, "mean"), path + ".mean");
  return out;
}

const char* switching_family_name(SwitchingFamily f) {
  switch (f) {
    case SwitchingFamily::Zero: return "zero";
    case SwitchingFamily::Deterministic: return "deterministic";
    case SwitchingFamily::Exponential: return "exponential";
  }
  return "zero";
}

}  // namespace

ScenarioSpec parse_scenario(const json& j) {
  ScenarioSpec spec;
  const std::string root = "scenario";

  const int d = integer(field(j, root, "stations"), root + ".stations");
  if (d < 2) fail(root + ".stations", "need at least two stations");
  spec.chain.d = d;
  spec.chain.p = Matrix(d, d);

  const json& routing = field(j, root, "routing");
  if (!routing.is_array() || static_cast<int>(routing.size()) != d) {
    fail(root + ".routing", "expected an array of exactly `stations` rows");
  }
  for (int i = 0; i < d; ++i) {
    const json& row = routing[i];
    std::ostringstream rowpath;
    rowpath << root << ".routing[" << i << "]";
    if (!row.is_array() || static_cast<int>(row.size()) != d) {
      fail(rowpath.str(), "expected an array of exactly `stations` numbers");
    }
    for (int k = 0; k < d; ++k) {
      std::ostringstream cell;
      cell << rowpath.str() << "[" << k << "]";
      spec.chain.p.at(i, k) = number(row[k], cell.str());
    }
  }

  const json& bounds = field(j, root, "bounds");
  spec.bounds.m0 = number(field(bounds, root + ".bounds", "m0"), root + ".bounds.m0");
  spec.bounds.M0 = number(field(bounds, root + ".bounds", "M0"), root + ".bounds.M0");

  const json& regen = field(j, root, "regeneration");
  if (!regen.is_array() || regen.empty()) {
    fail(root + ".regeneration", "expected a nonempty array");
  }
  for (std::size_t e = 0; e < regen.size(); ++e) {
    std::ostringstream p;
    p << root << ".regeneration[" << e << "]";
    const json& entry = regen[e];
    const int from = station_index(field(entry, p.str(), "from"), p.str() + ".from", d);
    const int to = station_index(field(entry, p.str(), "to"), p.str() + ".to", d);
    if (spec.regeneration.count({from, to}) > 0) {
      fail(p.str(), "duplicate station pair");
    }
    const json& atoms = field(entry, p.str(), "atoms");
    if (!atoms.is_array() || atoms.empty()) {
      fail(p.str() + ".atoms", "expected a nonempty array");
    }
    RegenerationMeasure measure;
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      std::ostringstream ap;
      ap << p.str() << ".atoms[" << a << "]";
      const json& ja = atoms[a];
      ParamAtom atom;
      atom.weight = number(field(ja, ap.str(), "weight"), ap.str() + ".weight");
      atom.service = parse_service(field(ja, ap.str(), "service"), ap.str() + ".service");
      atom.lambda1 = number(field(ja, ap.str(), "lambda1"), ap.str() + ".lambda1");
      atom.lambda2 = number(field(ja, ap.str(), "lambda2"), ap.str() + ".lambda2");
      measure.atoms.push_back(atom);
    }
    spec.regeneration.emplace(StationPair{from, to}, std::move(measure));
  }

  if (j.contains("switching")) {
    const json& sw = j.at("switching");
    if (!sw.is_array()) fail(root + ".switching", "expected an array");
    for (std::size_t e = 0; e < sw.size(); ++e) {
      std::ostringstream p;
      p << root << ".switching[" << e << "]";
      const json& entry = sw[e];
      const int from = station_index(field(entry, p.str(), "from"), p.str() + ".from", d);
      const int to = station_index(field(entry, p.str(), "to"), p.str() + ".to", d);
      if (spec.switching.count({from, to}) > 0) fail(p.str(), "duplicate station pair");
      spec.switching.emplace(StationPair{from, to},
                             parse_switching_entry(entry, p.str()));
    }
  }

  return spec;
}

ScenarioSpec load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file: " + path);
  json j;
  try {
    // allow_exceptions = true, ignore_comments = true
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return parse_scenario(j);
}

json scenario_to_json(const ScenarioSpec& spec) {
  json j;
  const int d = spec.chain.d;
  j["stations"] = d;
  json routing = json::array();
  for (int i = 0; i < d; ++i) {
    json row = json::array();
    for (int k = 0; k < d; ++k) row.push_back(spec.chain.p.at(i, k));
    routing.push_back(std::move(row));
  }
  j["routing"] = std::move(routing);
  j["bounds"] = json{{"m0", spec.bounds.m0}, {"M0", spec.bounds.M0}};

  json regen = json::array();
  for (const auto& [pair, measure] : spec.regeneration) {
    json atoms = json::array();
    for (const auto& atom : measure.atoms) {
      atoms.push_back(json{{"weight", atom.weight},
                           {"service", service_to_json(atom.service)},
                           {"lambda1", atom.lambda1},
                           {"lambda2", atom.lambda2}});
    }
    regen.push_back(json{{"from", pair.first + 1},
                         {"to", pair.second + 1},
                         {"atoms", std::move(atoms)}});
  }
  j["regeneration"] = std::move(regen);

  if (!spec.switching.empty()) {
    json sw = json::array();
    for (const auto& [pair, dist] : spec.switching) {
      json entry{{"from", pair.first + 1},
                 {"to", pair.second + 1},
                 {"family", switching_family_name(dist.family)}};
      if (dist.family != SwitchingFamily::Zero) entry["mean"] = dist.mean;
      sw.push_back(std::move(entry));
    }
    j["switching"] = std::move(sw);
  }
  return j;
}

std::optional<SweepSpec> sweep_of(const json& j) {
  if (!j.contains("sweep")) return std::nullopt;
  const json& sw = j.at("sweep");
  const std::string path = "scenario.sweep";
  SweepSpec out;
  const int d = integer(field(j, "scenario", "stations"), "scenario.stations");
  const json& pair = field(sw, path, "pair");
  if (!pair.is_array() || pair.size() != 2) fail(path + ".pair", "expected [from, to]");
  out.pair.first = station_index(pair[0], path + ".pair[0]", d);
  out.pair.second = station_index(pair[1], path + ".pair[1]", d);
  // Atom indices are 1-based in files, like station indices.
  out.atom = integer(field(sw, path, "atom"), path + ".atom") - 1;
  if (out.atom < 0) fail(path + ".atom", "atom index is 1-based");
  const json& grid = field(sw, path, "grid");
  if (!grid.is_array() || grid.empty()) fail(path + ".grid", "expected a nonempty array");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::ostringstream p;
    p << path << ".grid[" << i << "]";
    out.grid.push_back(number(grid[i], p.str()));
  }
  return out;
}

ScenarioSpec with_sweep_value(ScenarioSpec spec, const SweepSpec& sweep,
                              double value) {
  auto it = spec.regeneration.find(sweep.pair);
  if (it == spec.regeneration.end()) {
    throw std::invalid_argument("sweep pair has no regeneration measure");
  }
  auto& atoms = it->second.atoms;
  if (sweep.atom < 0 || sweep.atom >= static_cast<int>(atoms.size())) {
    throw std::invalid_argument("sweep atom index out of range");
  }
  if (!(value > 0.0 && value < 1.0)) {
    throw std::invalid_argument("sweep value must lie in (0, 1)");
  }
  double rest = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    if (static_cast<int>(k) != sweep.atom) rest += atoms[k].weight;
  }
  if (!(rest > 0.0)) {
    throw std::invalid_argument("sweep needs at least one other atom");
  }
  const double scale = (1.0 - value) / rest;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    if (static_cast<int>(k) == sweep.atom) {
      atoms[k].weight = value;
    } else {
      atoms[k].weight *= scale;
    }
  }
  return spec;
}

ScenarioSpec example_scenario(double p, SwitchingDistribution switching) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("mixture weight must lie in [0, 1]");
  }
  ScenarioSpec spec;
  spec.chain.d = 2;
  spec.chain.p = Matrix(2, 2);
  spec.chain.p.at(0, 1) = 1.0;
  spec.chain.p.at(1, 0) = 1.0;
  spec.bounds = {0.1, 10.0};

  const ServiceDistribution fixed{ServiceFamily::Exponential, 2.0};
  const ServiceDistribution slow{ServiceFamily::Exponential, 1.25};
  const ServiceDistribution fast{ServiceFamily::Exponential, 5.0};

  spec.regeneration[{0, 1}] = RegenerationMeasure{{{1.0, fixed, 1.0, 1.0}}};

  RegenerationMeasure mixture;
  if (p > 0.0) mixture.atoms.push_back({p, slow, 1.0, 1.0});
  if (p < 1.0) mixture.atoms.push_back({1.0 - p, fast, 1.0, 1.0});
  spec.regeneration[{1, 0}] = std::move(mixture);

  if (switching.family != SwitchingFamily::Zero) {
    spec.switching[{0, 1}] = switching;
    spec.switching[{1, 0}] = switching;
  }
  return spec;
}

SweepSpec example_sweep(std::vector<double> grid) {
  return SweepSpec{{1, 0}, 0, std::move(grid)};
}

}  // namespace pollreg
