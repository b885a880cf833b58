#include "riskprice/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace riskprice {

namespace {

using nlohmann::json;

const std::vector<std::string> kLegs = {"low", "buyer", "seller", "up"};

std::size_t line_at(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of the last key in `path`, found by scanning for each quoted key in
// turn. Good enough for hand-written configs; 0 when not found.
std::size_t locate(const std::string& text, const std::vector<std::string>& path) {
  std::size_t pos = 0;
  for (const auto& key : path) {
    const std::size_t hit = text.find("\"" + key + "\"", pos);
    if (hit == std::string::npos) return pos == 0 ? 0 : line_at(text, pos);
    pos = hit;
  }
  return path.empty() ? 0 : line_at(text, pos);
}

std::string dotted(const std::vector<std::string>& path) {
  std::string out;
  for (const auto& p : path) {
    if (!out.empty()) out += '.';
    out += p;
  }
  return out;
}

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& message) const {
    const std::size_t line = locate(text_, path);
    std::ostringstream os;
    os << "line " << line << ": " << dotted(path) << ": " << message;
    throw ConfigError(os.str(), line);
  }

  const json& object(const json& parent, std::vector<std::string> path, const std::vector<std::string>& allowed) const {
    const json& obj = field(parent, path);
    if (!obj.is_object()) fail(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
        path.push_back(it.key());
        fail(path, "unknown key");
      }
    }
    for (const auto& key : allowed) {
      if (!obj.contains(key)) fail(path, "missing required key '" + key + "'");
    }
    return obj;
  }

  const json& field(const json& root, const std::vector<std::string>& path) const {
    const json* cur = &root;
    for (const auto& key : path) cur = &cur->at(key);
    return *cur;
  }

  double number(const json& v, const std::vector<std::string>& path) const {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const auto& s = v.get_ref<const std::string&>();
      double out = 0.0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
      if (ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out)) return out;
      fail(path, "'" + s + "' is not a decimal number");
    }
    fail(path, "expected a number");
  }

  int integer(const json& v, const std::vector<std::string>& path) const {
    const double x = number(v, path);
    if (x != std::floor(x) || std::abs(x) > 1e9) fail(path, "expected an integer");
    return static_cast<int>(x);
  }

  bool boolean(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_boolean()) fail(path, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const json& v, const std::vector<std::string>& path, std::size_t expected) const {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    if (v.size() != expected) fail(path, "expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
    std::vector<double> out;
    for (const auto& x : v) out.push_back(number(x, path));
    return out;
  }

 private:
  const std::string& text_;
};

ModelSpec read_model(const Reader& r, const json& root) {
  const std::vector<std::string> at = {"model"};
  const json& m = r.object(root, at, {"n", "d", "mu", "sigma", "u", "s0", "T", "N"});
  auto p = [&](const char* key) { return std::vector<std::string>{"model", key}; };

  ModelSpec spec;
  spec.n = r.integer(m["n"], p("n"));
  spec.d = r.integer(m["d"], p("d"));
  if (spec.n < 1) r.fail(p("n"), "must be >= 1");
  if (spec.d < spec.n) r.fail(p("d"), "must be >= n");
  spec.steps = r.integer(m["N"], p("N"));
  if (spec.steps < 1) r.fail(p("N"), "must be >= 1");
  spec.horizon = r.number(m["T"], p("T"));
  if (!(spec.horizon > 0.0)) r.fail(p("T"), "must be positive");
  const auto n = static_cast<std::size_t>(spec.n);

  const json& mu = m["mu"];
  if (!mu.is_array() || mu.empty()) r.fail(p("mu"), "expected an array");
  if (mu.front().is_array()) {
    if (mu.size() != static_cast<std::size_t>(spec.steps)) r.fail(p("mu"), "per-step mu needs N rows");
    for (const auto& row : mu) spec.mu.push_back(r.numbers(row, p("mu"), n));
  } else {
    spec.mu.push_back(r.numbers(mu, p("mu"), n));
  }

  const json& sigma = m["sigma"];
  if (!sigma.is_array() || sigma.size() != n) r.fail(p("sigma"), "expected n rows");
  for (const auto& row : sigma) spec.sigma.push_back(r.numbers(row, p("sigma"), static_cast<std::size_t>(spec.d)));

  const json& u = m["u"];
  if (u.is_array()) {
    spec.u = r.numbers(u, p("u"), static_cast<std::size_t>(spec.steps));
  } else {
    spec.u.push_back(r.number(u, p("u")));
  }
  spec.s0 = r.numbers(m["s0"], p("s0"), n);
  return spec;
}

ClaimSpec read_claim(const Reader& r, const json& root) {
  const json& c = r.object(root, {"claim"}, {"kind", "strike", "cap", "asset"});
  auto p = [&](const char* key) { return std::vector<std::string>{"claim", key}; };
  ClaimSpec spec;
  spec.kind = r.string(c["kind"], p("kind"));
  if (spec.kind != "call" && spec.kind != "put" && spec.kind != "digital") {
    r.fail(p("kind"), "must be one of call, put, digital");
  }
  spec.strike = r.number(c["strike"], p("strike"));
  if (!(spec.strike > 0.0)) r.fail(p("strike"), "must be positive");
  if (!c["cap"].is_null()) spec.cap = r.number(c["cap"], p("cap"));
  spec.asset = r.integer(c["asset"], p("asset"));
  return spec;
}

PenaltySpec read_penalty(const Reader& r, const json& root) {
  const json& c = r.object(root, {"penalty"}, {"kind", "gamma"});
  auto p = [&](const char* key) { return std::vector<std::string>{"penalty", key}; };
  PenaltySpec spec;
  spec.kind = r.string(c["kind"], p("kind"));
  if (spec.kind != "zero" && spec.kind != "quadratic") r.fail(p("kind"), "must be one of zero, quadratic");
  spec.gamma = r.number(c["gamma"], p("gamma"));
  if (!(spec.gamma > 0.0)) r.fail(p("gamma"), "must be positive");
  return spec;
}

RunSpec read_run(const Reader& r, const json& root) {
  const json& c = r.object(root, {"run"},
                           {"drivers", "chain_check", "hedging_variant", "oracle_checks", "oracle_grid_points",
                            "csv_path", "summary_path", "sweep_path", "csv_row_limit", "record_timings"});
  auto p = [&](const char* key) { return std::vector<std::string>{"run", key}; };
  RunSpec spec;
  const json& drivers = c["drivers"];
  if (!drivers.is_array()) r.fail(p("drivers"), "expected an array of names");
  for (const auto& d : drivers) {
    const std::string name = r.string(d, p("drivers"));
    if (std::find(kLegs.begin(), kLegs.end(), name) == kLegs.end()) {
      r.fail(p("drivers"), "'" + name + "' is not one of low, buyer, seller, up");
    }
    if (std::find(spec.drivers.begin(), spec.drivers.end(), name) != spec.drivers.end()) {
      r.fail(p("drivers"), "'" + name + "' listed twice");
    }
    spec.drivers.push_back(name);
  }
  if (spec.drivers.empty()) r.fail(p("drivers"), "must name at least one price");
  spec.chain_check = r.boolean(c["chain_check"], p("chain_check"));
  if (spec.chain_check && spec.drivers.size() != kLegs.size()) {
    r.fail(p("chain_check"), "needs all four drivers (low, buyer, seller, up)");
  }
  const std::string variant = r.string(c["hedging_variant"], p("hedging_variant"));
  if (variant == "M") {
    spec.hedging = HedgingVariant::M;
  } else if (variant == "CW") {
    spec.hedging = HedgingVariant::CW;
  } else {
    r.fail(p("hedging_variant"), "must be M or CW");
  }
  spec.oracle_checks = r.boolean(c["oracle_checks"], p("oracle_checks"));
  spec.oracle_grid_points = r.integer(c["oracle_grid_points"], p("oracle_grid_points"));
  if (spec.oracle_grid_points < 1) r.fail(p("oracle_grid_points"), "must be >= 1");
  spec.csv_path = r.string(c["csv_path"], p("csv_path"));
  spec.summary_path = r.string(c["summary_path"], p("summary_path"));
  spec.sweep_path = r.string(c["sweep_path"], p("sweep_path"));
  const int limit = r.integer(c["csv_row_limit"], p("csv_row_limit"));
  if (limit < 0) r.fail(p("csv_row_limit"), "must be >= 0");
  spec.csv_row_limit = static_cast<std::size_t>(limit);
  spec.record_timings = r.boolean(c["record_timings"], p("record_timings"));
  return spec;
}

}  // namespace

MarketModel ModelSpec::build() const {
  MarketModel model;
  model.n = n;
  model.d = d;
  model.horizon = horizon;
  model.steps = steps;
  model.s0 = Eigen::Map<const Eigen::VectorXd>(s0.data(), static_cast<Eigen::Index>(s0.size()));
  Eigen::MatrixXd sig(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) sig(i, j) = sigma[i][j];
  }
  for (int m = 0; m < steps; ++m) {
    const auto& row = mu.size() == 1 ? mu.front() : mu.at(m);
    model.mu.push_back(Eigen::Map<const Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(row.size())));
    model.sigma.push_back(sig);
    model.u.push_back(u.size() == 1 ? u.front() : u.at(m));
  }
  return model;
}

Claim ClaimSpec::build() const {
  Claim claim;
  if (kind == "call") {
    claim = Claim::call(strike, cap);
  } else if (kind == "put") {
    claim = Claim::put(strike);
    claim.cap = cap;
  } else {
    claim = Claim::digital(strike);
    claim.cap = cap;
  }
  claim.asset = asset;
  return claim;
}

Penalty PenaltySpec::build() const { return kind == "quadratic" ? Penalty::quadratic(gamma) : Penalty::zero(); }

bool RunSpec::wants(const std::string& leg) const {
  return std::find(drivers.begin(), drivers.end(), leg) != drivers.end();
}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t line = line_at(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError("line " + std::to_string(line) + ": malformed JSON: " + e.what(), line);
  }
  const Reader r(text);
  if (!root.is_object()) r.fail({}, "top level must be an object");
  r.object(json{{"root", root}}, {"root"}, {"model", "claim", "penalty", "run"});

  ExperimentConfig config;
  config.model = read_model(r, root);
  config.claim = read_claim(r, root);
  if (config.claim.asset < 0 || config.claim.asset >= config.model.n) r.fail({"claim", "asset"}, "must index an asset");
  config.penalty = read_penalty(r, root);
  config.run = read_run(r, root);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string(), 0);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

nlohmann::ordered_json to_json(const ExperimentConfig& config) {
  using nlohmann::ordered_json;
  // Shortest decimal string that reads back to the same double.
  auto dec = [](double x) { return fmt::format("{}", x); };
  auto decs = [&](const std::vector<double>& xs) {
    ordered_json a = ordered_json::array();
    for (double x : xs) a.push_back(dec(x));
    return a;
  };
  auto rows = [&](const std::vector<std::vector<double>>& xs) {
    ordered_json a = ordered_json::array();
    for (const auto& x : xs) a.push_back(decs(x));
    return a;
  };

  ordered_json out;
  const auto& m = config.model;
  out["model"]["n"] = m.n;
  out["model"]["d"] = m.d;
  out["model"]["mu"] = m.mu.size() == 1 ? decs(m.mu.front()) : rows(m.mu);
  out["model"]["sigma"] = rows(m.sigma);
  out["model"]["u"] = m.u.size() == 1 ? ordered_json(dec(m.u.front())) : decs(m.u);
  out["model"]["s0"] = decs(m.s0);
  out["model"]["T"] = dec(m.horizon);
  out["model"]["N"] = m.steps;

  out["claim"]["kind"] = config.claim.kind;
  out["claim"]["strike"] = dec(config.claim.strike);
  out["claim"]["cap"] = config.claim.cap ? ordered_json(dec(*config.claim.cap)) : ordered_json(nullptr);
  out["claim"]["asset"] = config.claim.asset;

  out["penalty"]["kind"] = config.penalty.kind;
  out["penalty"]["gamma"] = dec(config.penalty.gamma);

  const auto& r = config.run;
  out["run"]["drivers"] = r.drivers;
  out["run"]["chain_check"] = r.chain_check;
  out["run"]["hedging_variant"] = r.hedging == HedgingVariant::M ? "M" : "CW";
  out["run"]["oracle_checks"] = r.oracle_checks;
  out["run"]["oracle_grid_points"] = r.oracle_grid_points;
  out["run"]["csv_path"] = r.csv_path;
  out["run"]["summary_path"] = r.summary_path;
  out["run"]["sweep_path"] = r.sweep_path;
  out["run"]["csv_row_limit"] = r.csv_row_limit;
  out["run"]["record_timings"] = r.record_timings;
  return out;
}

}  // namespace riskprice
