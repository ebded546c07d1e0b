#include "excitrans/scenario.hpp"

#include <cmath>
#include <set>

#include "excitrans/errors.hpp"

namespace excitrans {

using nlohmann::json;

namespace {

// Reads one JSON object, remembering which keys were consumed so that
// anything left over can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ConfigError(where(), "expected an object");
  }

  bool has(const std::string& key) const { return doc_.contains(key); }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return doc_.at(key);
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(field(key), "must be finite");
    return x;
  }

  long long integer(const std::string& key, long long fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
    return v.get<long long>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ConfigError(field(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    return v.get<std::string>();
  }

  void finish() const {
    for (const auto& [key, value] : doc_.items())
      if (!seen_.count(key)) throw ConfigError(field(key), "unknown field");
  }

 private:
  std::string where() const { return path_.empty() ? "scenario" : path_; }

  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

Eigen::VectorXd read_vector(const json& v, const std::string& field) {
  if (!v.is_array()) throw ConfigError(field, "expected an array of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(field, "expected an array of numbers");
    out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  }
  return out;
}

Eigen::MatrixXd read_matrix(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) throw ConfigError(field, "expected a square array of rows");
  const auto n = static_cast<Eigen::Index>(v.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd row = read_vector(v[i], field);
    if (row.size() != n) throw ConfigError(field, "expected a square array of rows");
    out.row(i) = row.transpose();
  }
  return out;
}

std::vector<DrivingTerm<>> read_terms(const json& v, const std::string& field) {
  if (!v.is_array()) throw ConfigError(field, "expected an array of terms");
  std::vector<DrivingTerm<>> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    ObjectReader r(v[i], field + "[" + std::to_string(i) + "]");
    out.push_back({r.number("amplitude", 0.0), r.number("frequency", 0.0), r.number("phase", 0.0)});
    r.finish();
  }
  return out;
}

json write_terms(const std::vector<DrivingTerm<>>& terms) {
  json out = json::array();
  for (const auto& t : terms)
    out.push_back({{"amplitude", t.amplitude}, {"frequency", t.frequency}, {"phase", t.phase}});
  return out;
}

json write_vector(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json write_matrix(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(write_vector(m.row(i).transpose()));
  return out;
}

std::string initial_state_name(InitialState s) {
  switch (s) {
    case InitialState::Photon: return "photon";
    case InitialState::Antenna: return "antenna";
    case InitialState::Sink: return "sink";
  }
  return "?";
}

InitialState parse_initial_state(const std::string& name) {
  if (name == "photon") return InitialState::Photon;
  if (name == "antenna") return InitialState::Antenna;
  if (name == "sink") return InitialState::Sink;
  throw ConfigError("initial_state", "unknown initial state '" + name +
                                         "' (expected photon, antenna or sink)");
}

void read_network(Scenario& s, const json& doc) {
  ObjectReader r(doc, "network");
  s.network_kind = r.string("kind", "nn");
  const bool custom = s.network_kind == "custom";
  if (custom) {
    if (!r.has("couplings") || !r.has("site_energies"))
      throw ConfigError("network", "custom networks need couplings and site_energies");
    s.network.couplings = read_matrix(r.at("couplings"), "network.couplings");
    s.network.n_sites = static_cast<int>(s.network.couplings.rows());
    if (r.has("n_sites") && r.integer("n_sites", 0) != s.network.n_sites)
      throw ConfigError("network.n_sites", "does not match the couplings matrix");
    s.network.label = "custom";
  } else {
    const NetworkKind kind = parse_network_kind(s.network_kind);
    const int default_sites = kind == NetworkKind::Star ? 8 : kind == NetworkKind::Fmo ? 7 : 4;
    s.network = builtin_network(kind, static_cast<int>(r.integer("n_sites", default_sites)));
    if (r.has("couplings")) {
      const Eigen::MatrixXd c = read_matrix(r.at("couplings"), "network.couplings");
      if (c.rows() != s.network.n_sites)
        throw ConfigError("network.couplings", "must be an n_sites x n_sites matrix");
      s.network.couplings = c;
    }
  }
  if (r.has("site_energies"))
    s.network.site_energies = read_vector(r.at("site_energies"), "network.site_energies");
  r.finish();
  validate(s.network);
}

}  // namespace

std::vector<double> SweepGrid::points() const {
  if (!(omega_step > 0.0)) throw ConfigError("sweep.omega_step", "must be positive");
  if (!(omega_max >= omega_min)) throw ConfigError("sweep.omega_max", "must be >= omega_min");
  const long n = std::lround(std::floor((omega_max - omega_min) / omega_step + 0.5)) + 1;
  std::vector<double> out;
  out.reserve(n);
  for (long k = 0; k < n; ++k) out.push_back(omega_min + double(k) * omega_step);
  return out;
}

double default_dt(const std::string& network_kind) {
  if (network_kind == "nn" || network_kind == "star") return 1e-2;
  if (network_kind == "fmo") return 2e-3;
  return 1e-3;
}

ModelConfig<> Scenario::model() const {
  ModelConfig<> c = make_config(network, omega_r, lambda_ar, lambda_a1, lambda_N, lambda_sN);
  c.antenna_driving.terms = antenna_terms;
  c.site_driving.terms = site_terms;
  return c;
}

OptimizeSettings Scenario::optimize_settings(int threads) const {
  OptimizeSettings o;
  o.horizon = horizon;
  o.dt = dt;
  o.restarts = restarts;
  o.master_seed = master_seed;
  o.threads = threads;
  return o;
}

DensityMatrix<double> Scenario::initial_state() const {
  const BasisMap basis{network.n_sites};
  switch (initial) {
    case InitialState::Photon: return DensityMatrix<>::pure(basis.dimension(), basis.radiation());
    case InitialState::Antenna: return DensityMatrix<>::pure(basis.dimension(), basis.antenna());
    case InitialState::Sink: return DensityMatrix<>::pure(basis.dimension(), basis.sink());
  }
  return DensityMatrix<>::pure(basis.dimension(), basis.radiation());
}

Scenario scenario_from_json(const json& doc) {
  Scenario s;
  ObjectReader r(doc, "");
  s.name = r.string("name", s.name);

  if (r.has("network")) {
    read_network(s, r.at("network"));
  } else {
    s.network = builtin_network(NetworkKind::NearestNeighbour, 4);
  }

  s.omega_r = r.number("omega_r", s.omega_r);
  if (r.has("lambda")) {
    ObjectReader l(r.at("lambda"), "lambda");
    s.lambda_ar = l.number("ar", s.lambda_ar);
    s.lambda_a1 = l.number("a1", s.lambda_a1);
    s.lambda_N = l.number("N", s.lambda_N);
    s.lambda_sN = l.number("sN", s.lambda_sN);
    l.finish();
  }

  if (r.has("driving")) {
    ObjectReader d(r.at("driving"), "driving");
    if (d.has("antenna")) s.antenna_terms = read_terms(d.at("antenna"), "driving.antenna");
    if (d.has("site")) s.site_terms = read_terms(d.at("site"), "driving.site");
    d.finish();
  }

  if (r.has("strategy")) {
    const json& v = r.at("strategy");
    if (v.is_string() && v.get<std::string>() == "none") {
      s.strategy.reset();
    } else if (v.is_string()) {
      s.strategy = parse_strategy(v.get<std::string>(), 1);
    } else {
      ObjectReader st(v, "strategy");
      const std::string kind = st.string("kind", "driving");
      const int harmonics = static_cast<int>(st.integer("R", 1));
      if (kind != "none") s.strategy = parse_strategy(kind, harmonics);
      st.finish();
    }
  }

  s.adam.learning_rate = s.strategy ? default_learning_rate(*s.strategy) : s.adam.learning_rate;
  if (r.has("adam")) {
    ObjectReader a(r.at("adam"), "adam");
    s.adam.learning_rate = a.number("learning_rate", s.adam.learning_rate);
    s.adam.beta1 = a.number("beta1", s.adam.beta1);
    s.adam.beta2 = a.number("beta2", s.adam.beta2);
    s.adam.epsilon = a.number("epsilon", s.adam.epsilon);
    s.adam.iterations = static_cast<int>(a.integer("iterations", s.adam.iterations));
    a.finish();
  }
  s.adam.validate();

  s.dt = default_dt(s.network_kind);
  bool stride_given = false;
  if (r.has("times")) {
    ObjectReader t(r.at("times"), "times");
    s.horizon = t.number("T_L", s.horizon);
    s.t_end = t.number("T", s.t_end);
    s.dt = t.number("dt", s.dt);
    stride_given = t.has("record_stride");
    s.record_stride = static_cast<int>(t.integer("record_stride", 1));
    t.finish();
  }
  if (!(s.dt > 0.0)) throw ConfigError("times.dt", "must be positive");
  // Unit-time records by default.
  if (!stride_given) s.record_stride = std::max(1, static_cast<int>(std::lround(1.0 / s.dt)));
  s.trajectory().validate();
  TrajectoryConfig{s.dt, s.horizon, 1}.validate();

  s.restarts = static_cast<int>(r.integer("restarts", s.restarts));
  if (s.restarts < 1) throw ConfigError("restarts", "must be at least 1");
  s.master_seed = r.unsigned_integer("master_seed", s.master_seed);
  s.initial = parse_initial_state(r.string("initial_state", "photon"));

  if (r.has("sweep")) {
    ObjectReader w(r.at("sweep"), "sweep");
    s.sweep.omega_min = w.number("omega_min", s.sweep.omega_min);
    s.sweep.omega_max = w.number("omega_max", s.sweep.omega_max);
    s.sweep.omega_step = w.number("omega_step", s.sweep.omega_step);
    w.finish();
  }
  s.sweep.points();

  if (r.has("compare")) {
    const json& list = r.at("compare");
    if (!list.is_array()) throw ConfigError("compare", "expected an array of members");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "compare[" + std::to_string(i) + "]";
      ObjectReader m(list[i], path);
      CompareMember member;
      member.label = m.string("label", "");
      if (member.label.empty()) throw ConfigError(path + ".label", "must be a non-empty string");
      if (!labels.insert(member.label).second)
        throw ConfigError(path + ".label", "duplicate label '" + member.label + "'");
      member.patch = m.has("patch") ? m.at("patch") : json::object();
      if (!member.patch.is_object()) throw ConfigError(path + ".patch", "expected an object");
      m.finish();
      s.compare.push_back(std::move(member));
    }
  }

  s.output = r.string("output", "");
  r.finish();
  validate(s.model());
  return s;
}

json scenario_to_json(const Scenario& s) {
  json doc;
  doc["name"] = s.name;
  doc["network"] = {{"kind", s.network_kind},
                    {"n_sites", s.network.n_sites},
                    {"couplings", write_matrix(s.network.couplings)},
                    {"site_energies", write_vector(s.network.site_energies)}};
  doc["omega_r"] = s.omega_r;
  doc["lambda"] = {{"ar", s.lambda_ar}, {"a1", s.lambda_a1}, {"N", s.lambda_N}, {"sN", s.lambda_sN}};
  doc["driving"] = {{"antenna", write_terms(s.antenna_terms)}, {"site", write_terms(s.site_terms)}};
  if (s.strategy)
    doc["strategy"] = {{"kind", s.strategy->name()}, {"R", s.strategy->harmonics}};
  else
    doc["strategy"] = "none";
  doc["adam"] = {{"learning_rate", s.adam.learning_rate},
                 {"beta1", s.adam.beta1},
                 {"beta2", s.adam.beta2},
                 {"epsilon", s.adam.epsilon},
                 {"iterations", s.adam.iterations}};
  doc["times"] = {
      {"T_L", s.horizon}, {"T", s.t_end}, {"dt", s.dt}, {"record_stride", s.record_stride}};
  doc["restarts"] = s.restarts;
  doc["master_seed"] = s.master_seed;
  doc["initial_state"] = initial_state_name(s.initial);
  doc["sweep"] = {{"omega_min", s.sweep.omega_min},
                  {"omega_max", s.sweep.omega_max},
                  {"omega_step", s.sweep.omega_step}};
  json members = json::array();
  for (const auto& m : s.compare) members.push_back({{"label", m.label}, {"patch", m.patch}});
  doc["compare"] = members;
  return doc;
}

Scenario member_scenario(const Scenario& s, const CompareMember& member) {
  json doc = scenario_to_json(s);
  doc.erase("compare");
  // A patch that changes the network must not inherit the parent's explicit
  // matrices or step size, which were resolved for the parent network.
  if (member.patch.contains("network")) {
    doc["network"].erase("couplings");
    doc["network"].erase("site_energies");
    if (!member.patch["network"].contains("n_sites")) doc["network"].erase("n_sites");
    if (!member.patch.contains("times") || !member.patch["times"].contains("dt")) {
      doc["times"].erase("dt");
      doc["times"].erase("record_stride");
    }
  }
  // Likewise a new strategy picks its own default learning rate.
  if (member.patch.contains("strategy") &&
      !(member.patch.contains("adam") && member.patch["adam"].contains("learning_rate")))
    doc["adam"].erase("learning_rate");
  doc.merge_patch(member.patch);
  try {
    return scenario_from_json(doc);
  } catch (const ConfigError& e) {
    throw ConfigError("compare." + member.label + "." + e.field(), e.what());
  }
}

namespace {

json driving(int harmonics) { return {{"kind", "driving"}, {"R", harmonics}}; }

json member(const std::string& label, json patch) {
  return {{"label", label}, {"patch", std::move(patch)}};
}

json strategy_members(std::vector<int> harmonics) {
  json list = json::array();
  for (int r : harmonics)
    list.push_back(member("driving_R" + std::to_string(r), {{"strategy", driving(r)}}));
  list.push_back(member("couplings", {{"strategy", "couplings"}}));
  list.push_back(member("energies", {{"strategy", "energies"}}));
  return list;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"default", "fig2a", "fig2bc", "fig4", "fig5", "fig10",
          "appendix-R", "appendix-size", "appendix-noise"};
}

json preset(const std::string& name) {
  if (name == "default") return {{"name", "default"}};
  if (name == "fig2a")
    return {{"name", name}, {"omega_r", 0.264}, {"strategy", driving(1)},
            {"compare", strategy_members({1})}};
  if (name == "fig2bc")
    return {{"name", name}, {"omega_r", 15.0}, {"strategy", driving(1)},
            {"compare", strategy_members({1})}};
  if (name == "fig4")
    return {{"name", name},
            {"network", {{"kind", "star"}, {"n_sites", 8}}},
            {"omega_r", 15.0},
            {"strategy", driving(2)},
            {"compare", strategy_members({1, 2, 7})}};
  if (name == "fig5")
    return {{"name", name},
            {"network", {{"kind", "fmo"}}},
            {"omega_r", 15.0},
            {"strategy", driving(2)},
            {"compare", strategy_members({1, 2, 7})}};
  if (name == "fig10") {
    json list = json::array();
    for (const auto& [label, rate] : {std::pair{"lambda_N_0.1", 0.1}, {"lambda_N_1", 1.0},
                                      {"lambda_N_100", 100.0}})
      list.push_back(member(label, {{"lambda", {{"N", rate}}}}));
    return {{"name", name}, {"omega_r", 15.0}, {"strategy", driving(1)}, {"compare", list}};
  }
  if (name == "appendix-R") {
    json list = json::array();
    for (int r : {1, 2, 7})
      list.push_back(member("driving_R" + std::to_string(r), {{"strategy", driving(r)}}));
    return {{"name", name}, {"omega_r", 15.0}, {"strategy", driving(1)}, {"compare", list}};
  }
  if (name == "appendix-size") {
    json list = json::array();
    for (int n : {4, 6, 8})
      list.push_back(member("N_" + std::to_string(n),
                            {{"network", {{"kind", "nn"}, {"n_sites", n}}}}));
    return {{"name", name}, {"omega_r", 15.0}, {"strategy", driving(1)}, {"compare", list}};
  }
  if (name == "appendix-noise")
    return {{"name", name},
            {"omega_r", 15.0},
            {"lambda", {{"N", 1.0}}},
            {"strategy", driving(1)},
            {"compare", strategy_members({1})}};
  throw ConfigError("preset", "unknown preset '" + name + "'");
}

}  // namespace excitrans
