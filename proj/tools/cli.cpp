#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "requ_gap/requ_gap.hpp"

namespace requ_gap::cli {
namespace {

using nlohmann::json;

/// Bad configuration; reported with exit status kUsage.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json policy_defaults(int depth_cap) {
  return {{"theta_c", 0.0},         {"kappa_c", 0.0},           {"scale", 1.0}, {"depth_cap", depth_cap},
          {"depth_floor", nullptr}, {"depth_per_doubling", nullptr}, {"rows", nullptr}};
}

json hat_defaults() {
  return {{"n", 1}, {"L", 5}, {"C", nullptr}, {"M", 1.0}, {"d", 1}, {"y", 0.5}};
}

json defaults_for(const std::string& cmd) {
  if (cmd == "build-hat") {
    json j = hat_defaults();
    j["policy"] = policy_defaults(8);
    j["points"] = 10000;
    j["seed"] = 1;
    j["tolerance"] = 1e-9;
    return j;
  }
  if (cmd == "verify-hat") {
    return {{"alpha", 1.0}, {"gamma", nullptr}, {"M", 1.0},         {"d", 1},
            {"y", 0.5},     {"t_max", 1 << 20}, {"amplitude_factor", 1.0}, {"n_scan", 1000000},
            {"policy", policy_defaults(5)}};
  }
  if (cmd == "rates") {
    return {{"quantity", "window"}, {"alpha", 1.0}, {"d", 1},  {"method", "auto"}, {"n_max", 100000},
            {"R0", 1.0},            {"C", 1.0},     {"n", 1.0}, {"j", 1},          {"policy", policy_defaults(5)}};
  }
  if (cmd == "lipschitz") {
    json j = hat_defaults();
    j["net"] = "hat";
    j["slope"] = 2.0;
    j["network"] = "";
    j["policy"] = policy_defaults(8);
    j["norm"] = "unit_cube_l1";
    j["samples"] = 1000;
    j["seed"] = 7;
    j["bound_L"] = nullptr;
    j["bound_C"] = nullptr;
    j["bound_n"] = nullptr;
    j["R"] = 1.0;
    return j;
  }
  if (cmd == "hardness" || cmd == "mc-hardness") {
    json j = {{"d", 1},           {"alpha", 1.0}, {"gamma", nullptr}, {"m_list", {4, 16, 64, 256}},
              {"grid_res", 9},    {"seed", 1},    {"kappa1_override", nullptr}, {"n_scan", 1000000},
              {"policy", policy_defaults(5)}};
    if (cmd == "hardness") {
      j["algorithm"] = "grid-nearest";
    } else {
      j["algorithm"] = "random";
      j["draws"] = 30;
    }
    return j;
  }
  if (cmd == "upper-bound") {
    json j = hat_defaults();
    j["alpha"] = 1.0;
    j["gamma"] = nullptr;
    j["m_list"] = {16, 64, 256, 1024, 4096};
    j["mode"] = "multilinear";
    j["eval_res"] = 2001;
    j["n_scan"] = 1000000;
    j["policy"] = policy_defaults(5);
    return j;
  }
  if (cmd == "sum-check") {
    return {{"trials", 20}, {"points", 1000}, {"seed", 1}, {"max_dim", 3}, {"max_depth", 4}, {"tolerance", 1e-12}};
  }
  throw ConfigError("unknown command '" + cmd + "'");
}

/// Overwrites `base` with `patch`; every key of `patch` must already exist.
void merge_into(json& base, const json& patch, const std::string& path) {
  if (!patch.is_object()) throw ConfigError(path.empty() ? "config must be a JSON object" : path + " must be an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown key '" + key + "'");
    json& slot = base[it.key()];
    if (slot.is_object() && it.value().is_object()) {
      merge_into(slot, it.value(), key);
    } else {
      slot = it.value();
    }
  }
}

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
}

void set_path(json& base, const std::string& dotted, const json& value) {
  json* node = &base;
  std::stringstream ss(dotted);
  std::string part, seen;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    seen += (k ? "." : "") + parts[k];
    if (!node->is_object() || !node->contains(parts[k])) throw ConfigError("unknown key '" + seen + "'");
    node = &(*node)[parts[k]];
  }
  *node = value;
}

double get_num(const json& p, const char* key) {
  const json& v = p.at(key);
  if (!v.is_number()) throw ConfigError(std::string(key) + " must be a number");
  return v.get<double>();
}

std::int64_t get_int(const json& p, const char* key) {
  const json& v = p.at(key);
  if (!v.is_number_integer() && !(v.is_number() && std::floor(v.get<double>()) == v.get<double>())) {
    throw ConfigError(std::string(key) + " must be an integer");
  }
  return v.is_number_integer() ? v.get<std::int64_t>() : static_cast<std::int64_t>(v.get<double>());
}

std::uint64_t get_positive(const json& p, const char* key) {
  const auto v = get_int(p, key);
  if (v < 1) throw ConfigError(std::string(key) + " must be >= 1");
  return static_cast<std::uint64_t>(v);
}

std::string get_str(const json& p, const char* key) {
  const json& v = p.at(key);
  if (!v.is_string()) throw ConfigError(std::string(key) + " must be a string");
  return v.get<std::string>();
}

std::optional<double> get_opt_num(const json& p, const char* key) {
  if (p.at(key).is_null()) return std::nullopt;
  return get_num(p, key);
}

GrowthPolicy policy_from(const json& j) {
  if (!j.at("rows").is_null()) {
    std::vector<GrowthPolicy::Row> rows;
    for (const auto& r : j.at("rows")) {
      if (!r.is_array() || r.size() != 3) throw ConfigError("policy.rows entries must be [n, depth, coef]");
      const double coef = r[2].is_null() || (r[2].is_string() && r[2] == "inf") ? kUnbounded : r[2].get<double>();
      rows.push_back({r[0].get<std::uint64_t>(), r[1].get<int>(), coef});
    }
    return GrowthPolicy::tabulated(std::move(rows));
  }
  std::optional<int> cap;
  if (!j.at("depth_cap").is_null()) cap = static_cast<int>(get_int(j, "depth_cap"));
  std::optional<int> floor;
  if (!j.at("depth_floor").is_null()) floor = static_cast<int>(get_int(j, "depth_floor"));
  const int dpd = j.at("depth_per_doubling").is_null() ? -1 : static_cast<int>(get_int(j, "depth_per_doubling"));
  return GrowthPolicy::parametric(get_num(j, "theta_c"), get_num(j, "kappa_c"), get_num(j, "scale"), cap, floor, dpd);
}

/// y as a number (repeated d times) or an explicit list; fills in d.
std::vector<double> centre_from(json& p) {
  const json& y = p.at("y");
  std::vector<double> out;
  if (y.is_number()) {
    const auto d = get_positive(p, "d");
    out.assign(d, y.get<double>());
  } else if (y.is_array()) {
    for (const auto& v : y) out.push_back(v.get<double>());
    if (out.empty()) throw ConfigError("y must not be empty");
    if (p.at("d").get<std::size_t>() != out.size() && p.at("d") != 1) throw ConfigError("d does not match len(y)");
    p["d"] = out.size();
  } else {
    throw ConfigError("y must be a number or a list");
  }
  return out;
}

std::vector<std::uint64_t> m_list_from(const json& p) {
  std::vector<std::uint64_t> out;
  for (const auto& v : p.at("m_list")) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1) throw ConfigError("m_list entries must be positive integers");
    out.push_back(v.get<std::uint64_t>());
  }
  return out;
}

json log_value(const LogValue& v) {
  return {{"value", v.overflow ? json(nullptr) : json(v.value)}, {"log2_value", v.log2}, {"overflow", v.overflow}};
}

HatBuildParams hat_params_from(json& p, const GrowthPolicy& policy) {
  HatBuildParams hp;
  hp.n = get_positive(p, "n");
  hp.L = static_cast<int>(get_int(p, "L"));
  hp.policy = policy;
  hp.spec = BumpSpec(get_num(p, "M"), centre_from(p));
  hp.C = p.at("C").is_null() ? choose_C(policy.coef(hp.n)) : get_num(p, "C");
  p["C"] = hp.C;
  return hp;
}

struct Outcome {
  json result;
  bool pass = false;
};

struct Context {
  json params;
  std::string out_path;
  std::string format = "csv";
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file '" + path + "'");
  f << text;
}

// build-hat ---------------------------------------------------------------

Outcome cmd_build_hat(Context& ctx) {
  json& p = ctx.params;
  const GrowthPolicy policy = policy_from(p.at("policy"));
  const HatBuildParams hp = hat_params_from(p, policy);
  const HatNetwork hat = build_hat_network(hp);
  const std::size_t d = hp.spec.d;

  std::mt19937_64 rng(static_cast<std::uint64_t>(get_int(p, "seed")));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto points = get_positive(p, "points");
  double max_abs = 0.0, max_rel = 0.0;
  std::vector<double> x(d);
  for (std::uint64_t k = 0; k < points; ++k) {
    // alternate between the support cube and the unit cube
    for (std::size_t j = 0; j < d; ++j) {
      x[j] = k % 2 == 0 ? hp.spec.y[j] + (2.0 * u(rng) - 1.0) / hp.spec.M : u(rng);
    }
    const double want = hat.amplitude * vartheta(hp.spec, x);
    const double err = std::abs(hat.evaluate(x) - want);
    max_abs = std::max(max_abs, err);
    max_rel = std::max(max_rel, err / hat.amplitude);
  }
  const double budget = hat.weight_budget();
  const auto W = hat.net.weight_count();
  const bool structure_ok = static_cast<double>(W) <= budget && hat.net.depth() == static_cast<std::size_t>(hp.L) &&
                            hat.net.max_norm() <= policy.coef(hp.n);
  Outcome o;
  o.pass = structure_ok && max_rel <= get_num(p, "tolerance");
  o.result = {{"max_abs_err", max_abs},
              {"max_rel_err", max_rel},
              {"amplitude", hat.amplitude},
              {"weight_count", W},
              {"budget", budget},
              {"depth", hat.net.depth()},
              {"max_norm", hat.net.max_norm()},
              {"architecture", hat.net.architecture()},
              {"network_file", ctx.out_path},
              {"pass", o.pass}};
  std::ofstream f(ctx.out_path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file '" + ctx.out_path + "'");
  serialize(hat.net, f);
  return o;
}

// verify-hat --------------------------------------------------------------

Outcome cmd_verify_hat(Context& ctx) {
  json& p = ctx.params;
  const GrowthPolicy policy = policy_from(p.at("policy"));
  const double alpha = get_num(p, "alpha");
  auto y = centre_from(p);
  double gamma;
  if (p.at("gamma").is_null()) {
    gamma = gamma_for(policy).flat - 0.5;
    p["gamma"] = gamma;
  } else {
    gamma = get_num(p, "gamma");
  }
  UnitBallOptions opt;
  opt.n_scan = get_positive(p, "n_scan");
  auto g = scaled_unit_ball_bump(alpha, gamma, get_num(p, "M"), std::move(y), policy, opt);
  g.g.amplitude *= get_num(p, "amplitude_factor");
  const auto rep = verify_unit_ball_certificate(g.g, g.cert, policy, get_positive(p, "t_max"));
  const auto& c = g.cert;
  Outcome o;
  o.pass = rep.pass();
  o.result = {{"certificate",
               {{"L", c.L},
                {"n0", c.n0},
                {"C1", c.C1},
                {"C1_log2", c.C1_log2},
                {"kappa", c.kappa},
                {"kappa_log2", c.kappa_log2},
                {"tail_ok", c.tail_ok},
                {"n", c.n},
                {"C", c.C},
                {"amplitude", g.g.amplitude},
                {"amplitude_log2", std::log2(std::abs(g.g.amplitude))}}},
              {"threshold", rep.threshold},
              {"branch1_pass", rep.branch1_pass},
              {"branch1_first_failure", rep.branch1_first_failure ? json(*rep.branch1_first_failure) : json(nullptr)},
              {"branch1_worst", rep.branch1_worst},
              {"branch2_checked", rep.branch2_checked},
              {"branch2_pass", rep.branch2_pass},
              {"branch2_materialized", rep.branch2_materialized},
              {"hat_scale", rep.hat_scale},
              {"violations", rep.violations},
              {"pass", o.pass}};
  return o;
}

// rates -------------------------------------------------------------------

Outcome cmd_rates(Context& ctx) {
  json& p = ctx.params;
  const std::string quantity = get_str(p, "quantity");
  Outcome o;
  if (quantity == "radius") {
    const auto v = radius_recursion(get_num(p, "R0"), get_num(p, "C"), get_num(p, "n"), static_cast<int>(get_int(p, "j")));
    o.result = log_value(v);
    o.pass = true;
    return o;
  }
  if (quantity != "window") throw ConfigError("quantity must be 'window' or 'radius'");
  const GrowthPolicy policy = policy_from(p.at("policy"));
  const std::string method = get_str(p, "method");
  GammaPair g;
  if (method == "auto") {
    g = gamma_for(policy, get_positive(p, "n_max"));
  } else if (method == "closed_form") {
    g = gamma_closed_form(policy);
  } else if (method == "numeric") {
    g = gamma_numeric(policy, get_positive(p, "n_max"));
  } else {
    throw ConfigError("method must be auto, closed_form or numeric");
  }
  RateWindow w = rate_window(get_num(p, "alpha"), get_positive(p, "d"), g.flat, g.sharp);
  auto finite = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  o.result = {{"gamma", finite(g.flat)},
              {"gamma_flat", finite(g.flat)},
              {"gamma_sharp", finite(g.sharp)},
              {"method", g.method},
              {"lower", w.lower_rate},
              {"upper", w.upper_rate},
              {"degenerate", w.degenerate}};
  o.pass = !w.degenerate && w.lower_rate <= w.upper_rate;
  return o;
}

// lipschitz ---------------------------------------------------------------

LipschitzNorm norm_from(const std::string& s) {
  if (s == "l1") return LipschitzNorm::l1;
  if (s == "linf") return LipschitzNorm::linf;
  if (s == "unit_cube_l1") return LipschitzNorm::unit_cube_l1;
  if (s == "unit_cube_linf") return LipschitzNorm::unit_cube_linf;
  throw ConfigError("norm must be l1, linf, unit_cube_l1 or unit_cube_linf");
}

Outcome cmd_lipschitz(Context& ctx) {
  json& p = ctx.params;
  const std::string kind = get_str(p, "net");
  const LipschitzNorm norm = norm_from(get_str(p, "norm"));
  const bool cube = norm == LipschitzNorm::unit_cube_l1 || norm == LipschitzNorm::unit_cube_linf;
  std::function<double(const std::vector<double>&)> eval;
  std::optional<HatNetwork> hat;
  std::optional<NeuralNetwork> net;
  if (kind == "hat") {
    hat = build_hat_network(hat_params_from(p, policy_from(p.at("policy"))));
    net.emplace(hat->net);
    eval = [&](const std::vector<double>& x) { return hat->evaluate(x); };
  } else if (kind == "affine") {
    net.emplace(std::vector<Layer>{Layer{SparseMatrix(1, 1, {{0, 0, get_num(p, "slope")}}), {0.0}}});
    eval = [&](const std::vector<double>& x) { return realize(*net, x).front(); };
  } else if (kind == "file") {
    std::ifstream f(get_str(p, "network"), std::ios::binary);
    if (!f) throw ConfigError("cannot open network file '" + get_str(p, "network") + "'");
    net.emplace(deserialize(f));
    if (net->output_dim() != 1) throw ConfigError("network must have scalar output");
    eval = [&](const std::vector<double>& x) { return realize(*net, x).front(); };
  } else {
    throw ConfigError("net must be hat, affine or file");
  }
  const double R = get_num(p, "R");
  LipschitzBoundInput in = lipschitz_input_for(*net, norm, R);
  if (!p.at("bound_L").is_null()) in.L = static_cast<int>(get_int(p, "bound_L"));
  if (!p.at("bound_C").is_null()) in.C = get_num(p, "bound_C");
  if (!p.at("bound_n").is_null()) in.n = get_num(p, "bound_n");
  const LogValue bound = lipschitz_bound(in);
  const std::size_t d = net->input_dim();
  // the l1 / l-inf variants certify the ball of radius R; sample the box inside it
  const double half = cube ? 0.0 : (norm == LipschitzNorm::l1 ? R / static_cast<double>(d) : R);
  const Box box = cube ? Box::unit_cube(d) : Box{std::vector<double>(d, -half), std::vector<double>(d, half)};
  const auto emp = empirical_lipschitz(eval, box, get_positive(p, "samples"), norm,
                                       static_cast<std::uint64_t>(get_int(p, "seed")));
  Outcome o;
  o.pass = emp.value <= bound.value;
  o.result = {{"bound_L", in.L},
              {"bound_C", in.C},
              {"bound_n", in.n},
              {"bound", bound.overflow ? json(nullptr) : json(bound.value)},
              {"bound_log2", bound.log2},
              {"overflow", bound.overflow},
              {"empirical", emp.value},
              {"pairs", emp.pairs},
              {"ratio_log2", emp.value > 0 ? json(std::log2(emp.value) - bound.log2) : json(nullptr)},
              {"pass", o.pass}};
  return o;
}

// hardness ----------------------------------------------------------------

std::string report_csv(const ExperimentReport& rep) {
  std::string s = "m,measured_avg_error,lower_bound,unseen_count,amplitude,pass";
  const bool ov = rep.kappa1_override.has_value();
  if (ov) s += ",lower_bound_override";
  s += "\n";
  for (const auto& r : rep.rows) {
    s += std::to_string(r.m) + "," + num(r.measured) + "," + num(r.lower_bound) + "," + std::to_string(r.unseen) + "," +
         num(r.amplitude) + "," + (r.pass ? "true" : "false");
    if (ov) s += "," + num(r.lower_bound_override.value_or(0.0));
    s += "\n";
  }
  return s;
}

json report_json(const ExperimentReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows) {
    json row = {{"m", r.m},
                {"measured_avg_error", r.measured},
                {"measured_centre_only", r.measured_centre},
                {"lower_bound", r.lower_bound},
                {"lower_bound_log2", r.lower_bound_log2},
                {"unseen_count", r.unseen},
                {"amplitude", r.amplitude},
                {"mean_samples", r.mean_samples},
                {"budget_ok", r.budget_ok},
                {"pass", r.pass}};
    if (r.lower_bound_override) row["lower_bound_override"] = *r.lower_bound_override;
    rows.push_back(row);
  }
  json j = {{"label", rep.label},
            {"kappa1", rep.kappa1},
            {"kappa1_log2", rep.kappa1_log2},
            {"kappa1_override", rep.kappa1_override ? json(*rep.kappa1_override) : json(nullptr)},
            {"grid_res", rep.grid_res},
            {"rows", rows},
            {"fitted_exponent", rep.fitted_exponent},
            {"theoretical_exponent", rep.theoretical_exponent},
            {"budget_ok", rep.budget_ok},
            {"pass", rep.pass}};
  if (rep.seed) {
    j["seed"] = *rep.seed;
    j["draws"] = rep.draws;
  }
  return j;
}

AdversarialFamily family_from(json& p, const GrowthPolicy& policy, std::uint64_t m0) {
  const double alpha = get_num(p, "alpha");
  if (p.at("gamma").is_null()) p["gamma"] = gamma_for(policy).flat - 0.5;
  UnitBallOptions opt;
  opt.n_scan = get_positive(p, "n_scan");
  return build_adversarial_family(m0, get_positive(p, "d"), alpha, get_num(p, "gamma"), policy,
                                  get_opt_num(p, "kappa1_override"), opt);
}

Outcome finish_sweep(const Context& ctx, const ExperimentReport& rep) {
  Outcome o;
  o.result = report_json(rep);
  o.pass = rep.pass;
  write_file(ctx.out_path, ctx.format == "json" ? o.result.dump(2) + "\n" : report_csv(rep));
  return o;
}

Outcome cmd_hardness(Context& ctx) {
  json& p = ctx.params;
  const GrowthPolicy policy = policy_from(p.at("policy"));
  const auto ms = m_list_from(p);
  if (ms.empty()) throw ConfigError("m_list must not be empty");
  const AdversarialFamily base = family_from(p, policy, ms.front());
  const std::string name = get_str(p, "algorithm");
  const auto seed = static_cast<std::uint64_t>(get_int(p, "seed"));
  AlgorithmFactory factory;
  if (name == "grid-nearest") {
    factory = [](std::uint64_t m, std::size_t d) { return grid_algorithm(m, d, GridMode::nearest); };
  } else if (name == "grid-multilinear") {
    factory = [](std::uint64_t m, std::size_t d) { return grid_algorithm(m, d, GridMode::multilinear); };
  } else if (name == "random") {
    factory = [seed](std::uint64_t m, std::size_t d) { return random_points_algorithm(m, d, stream_seed(seed, m, 0)); };
  } else if (name == "zero") {
    factory = [](std::uint64_t m, std::size_t d) { return zero_algorithm(m, d); };
  } else {
    throw ConfigError("algorithm must be grid-nearest, grid-multilinear, random or zero");
  }
  return finish_sweep(ctx, run_hardness_sweep(factory, ms, base, get_positive(p, "grid_res")));
}

Outcome cmd_mc_hardness(Context& ctx) {
  json& p = ctx.params;
  const GrowthPolicy policy = policy_from(p.at("policy"));
  const auto ms = m_list_from(p);
  if (ms.empty()) throw ConfigError("m_list must not be empty");
  const AdversarialFamily base = family_from(p, policy, ms.front());
  const std::string name = get_str(p, "algorithm");
  MonteCarloAlgorithm mc;
  if (name == "random") {
    mc = mc_random_points();
  } else if (name == "thinned") {
    mc = mc_thinned_points();
  } else if (name == "grid-nearest") {
    mc = mc_fixed([](std::uint64_t m, std::size_t d) { return grid_algorithm(m, d, GridMode::nearest); }, "fixed-grid");
  } else {
    throw ConfigError("algorithm must be random, thinned or grid-nearest");
  }
  const auto rep = run_mc_sweep(mc, ms, base, get_positive(p, "draws"), static_cast<std::uint64_t>(get_int(p, "seed")),
                                get_positive(p, "grid_res"));
  Outcome o = finish_sweep(ctx, rep);
  o.pass = rep.pass && rep.budget_ok;
  return o;
}

// upper-bound -------------------------------------------------------------

Outcome cmd_upper_bound(Context& ctx) {
  json& p = ctx.params;
  const GrowthPolicy policy = policy_from(p.at("policy"));
  const HatBuildParams hp = hat_params_from(p, policy);
  const HatNetwork hat = build_hat_network(hp);
  if (p.at("gamma").is_null()) p["gamma"] = gamma_for(policy).sharp;
  const std::string mode_s = get_str(p, "mode");
  if (mode_s != "nearest" && mode_s != "multilinear") throw ConfigError("mode must be nearest or multilinear");
  const GridMode mode = mode_s == "nearest" ? GridMode::nearest : GridMode::multilinear;
  UpperBoundOptions opt;
  opt.n_scan = get_positive(p, "n_scan");
  const auto ms = m_list_from(p);
  const auto eval_res = get_positive(p, "eval_res");
  if (eval_res < 2) throw ConfigError("eval_res must be >= 2");
  const auto f = [&](std::span<const double> x) { return hat.evaluate(x); };
  const auto audit = audit_upper_bound(f, ms, hp.spec.d, policy, get_num(p, "alpha"), get_num(p, "gamma"), mode,
                                       eval_res, opt);
  json rows = json::array();
  std::string csv = "m,measured_sup_error,bound,within_bound\n";
  for (const auto& r : audit.rows) {
    rows.push_back({{"m", r.m},
                    {"measured", r.measured},
                    {"bound", r.bound.overflow ? json(nullptr) : json(r.bound.value)},
                    {"bound_log2", r.bound.log2},
                    {"within_bound", r.within_bound}});
    csv += std::to_string(r.m) + "," + num(r.measured) + "," + num(r.bound.value) + "," +
           (r.within_bound ? "true" : "false") + "\n";
  }
  Outcome o;
  o.pass = audit.pass();
  o.result = {{"rows", rows},
              {"fitted_exponent", audit.fitted_exponent},
              {"theoretical_exponent", audit.theoretical_exponent},
              {"slope_ok", audit.slope_ok},
              {"bound_ok", audit.bound_ok},
              {"pass", o.pass}};
  if (!ctx.out_path.empty()) write_file(ctx.out_path, ctx.format == "json" ? o.result.dump(2) + "\n" : csv);
  return o;
}

// sum-check ---------------------------------------------------------------

NeuralNetwork random_bounded(std::mt19937_64& rng, std::size_t d, std::size_t depth, std::size_t max_width) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> width(1, max_width);
  std::vector<Layer> layers;
  std::size_t in = d;
  for (std::size_t j = 0; j < depth; ++j) {
    const std::size_t out = j + 1 == depth ? 1 : width(rng);
    std::vector<MatrixEntry> e;
    for (std::size_t r = 0; r < out; ++r) {
      for (std::size_t c = 0; c < in; ++c) e.push_back({r, c, u(rng)});
    }
    std::vector<double> b(out);
    for (auto& v : b) v = u(rng);
    layers.push_back({SparseMatrix(out, in, std::move(e)), std::move(b)});
    in = out;
  }
  NeuralNetwork net(std::move(layers));
  // rescale the output layer so |R(net)| <= 1/2 on the probe points
  const double peak = sampled_output_bound(net, -1.0, 1.0, 4000, rng());
  if (peak > 0.5) {
    auto ls = net.layers();
    const double f = 0.5 / peak;
    ls.back().weights = ls.back().weights.scaled(f);
    for (auto& v : ls.back().bias) v *= f;
    net = NeuralNetwork(std::move(ls));
  }
  return net;
}

Outcome cmd_sum_check(Context& ctx) {
  json& p = ctx.params;
  std::mt19937_64 rng(static_cast<std::uint64_t>(get_int(p, "seed")));
  const auto trials = get_positive(p, "trials");
  const auto points = get_positive(p, "points");
  const auto max_dim = get_positive(p, "max_dim");
  const auto max_depth = get_positive(p, "max_depth");
  const double tol = get_num(p, "tolerance");
  std::uniform_int_distribution<std::size_t> dim(1, max_dim), depth(1, max_depth);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double sum_err = 0.0, ext_err = 0.0, worst_ratio = 0.0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const std::size_t d = dim(rng);
    const auto a = random_bounded(rng, d, depth(rng), 4);
    const auto b = random_bounded(rng, d, depth(rng), 4);
    const auto s = sum_networks(a, b);
    const std::size_t target = std::max(a.depth(), static_cast<std::size_t>(max_depth)) + 2;
    const auto e = depth_extend(a, target);
    worst_ratio = std::max(worst_ratio, static_cast<double>(s.weight_count()) /
                                            static_cast<double>(std::max(a.weight_count(), b.weight_count())));
    std::vector<double> x(d);
    for (std::uint64_t k = 0; k < points; ++k) {
      for (auto& v : x) v = u(rng);
      const double ra = realize_scalar(a, x), rb = realize_scalar(b, x);
      sum_err = std::max(sum_err, std::abs(realize_scalar(s, x) - (ra + rb)));
      ext_err = std::max(ext_err, std::abs(realize_scalar(e, x) - ra));
    }
  }
  Outcome o;
  o.pass = sum_err <= tol && ext_err <= tol && worst_ratio <= 9.0;
  o.result = {{"sum_max_abs_err", sum_err},
              {"extend_max_abs_err", ext_err},
              {"worst_weight_ratio", worst_ratio},
              {"pass", o.pass}};
  return o;
}

const std::map<std::string, std::function<Outcome(Context&)>>& commands() {
  static const std::map<std::string, std::function<Outcome(Context&)>> table{
      {"build-hat", cmd_build_hat},   {"verify-hat", cmd_verify_hat},  {"rates", cmd_rates},
      {"lipschitz", cmd_lipschitz},   {"hardness", cmd_hardness},      {"mc-hardness", cmd_mc_hardness},
      {"upper-bound", cmd_upper_bound}, {"sum-check", cmd_sum_check}};
  return table;
}

bool needs_out(const std::string& cmd) { return cmd == "build-hat" || cmd == "hardness" || cmd == "mc-hardness"; }

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ReQU sampling-gap experiments"};
  app.require_subcommand(1);
  struct Flags {
    std::string config, out, format = "csv", m_list;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> grid_res;
    std::vector<std::string> params;
  };
  std::map<std::string, Flags> flags;
  for (const auto& [name, fn] : commands()) {
    (void)fn;
    static const std::map<std::string, std::string> blurb{
        {"build-hat", "build a hat network, write it and check it against the closed form"},
        {"verify-hat", "check the unit-ball certificate of a scaled hat network"},
        {"rates", "rate window or radius recursion"},
        {"lipschitz", "Lipschitz bound against an empirical estimate"},
        {"hardness", "deterministic hardness sweep over the adversarial family"},
        {"mc-hardness", "Monte Carlo hardness sweep"},
        {"upper-bound", "grid reconstruction error of a network input"},
        {"sum-check", "sum and depth extension on random bounded networks"}};
    auto* sub = app.add_subcommand(name, blurb.at(name));
    Flags& f = flags[name];
    sub->add_option("--config", f.config, "JSON file with parameters");
    sub->add_option("--out", f.out, "output path");
    sub->add_option("--seed", f.seed, "random seed");
    sub->add_option("--grid-res", f.grid_res, "probe points per support edge");
    sub->add_option("--m-list", f.m_list, "comma separated sample budgets");
    sub->add_option("--format", f.format, "output file format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--param", f.params, "key=value override (repeatable; dotted keys reach nested fields)");
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  if (app.get_subcommands().front()->count("--help")) {
    out << app.get_subcommands().front()->help();
    return kPass;
  }
  Flags& f = flags[cmd];

  try {
    if (needs_out(cmd) && f.out.empty()) throw ConfigError("--out is required for " + cmd);
    Context ctx;
    ctx.params = defaults_for(cmd);
    ctx.out_path = f.out;
    ctx.format = f.format;
    if (!f.config.empty()) {
      std::ifstream in(f.config, std::ios::binary);
      if (!in) throw ConfigError("cannot read config '" + f.config + "'");
      json cfg;
      try {
        cfg = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
      merge_into(ctx.params, cfg, "");
    }
    if (f.seed) set_path(ctx.params, "seed", *f.seed);
    if (f.grid_res) set_path(ctx.params, "grid_res", *f.grid_res);
    if (!f.m_list.empty()) {
      json list = json::array();
      std::stringstream ss(f.m_list);
      std::string item;
      while (std::getline(ss, item, ',')) {
        try {
          std::size_t used = 0;
          const auto v = std::stoll(item, &used);
          if (used != item.size()) throw std::invalid_argument(item);
          list.push_back(v);
        } catch (const std::exception&) {
          throw ConfigError("--m-list entries must be integers");
        }
      }
      set_path(ctx.params, "m_list", list);
    }
    for (const auto& kv : f.params) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("--param expects key=value, got '" + kv + "'");
      set_path(ctx.params, kv.substr(0, eq), parse_value(kv.substr(eq + 1)));
    }

    const Outcome o = commands().at(cmd)(ctx);
    json envelope = {{"command", cmd}, {"params", ctx.params}, {"result", o.result}, {"pass", o.pass}};
    if (!f.out.empty()) envelope["out"] = f.out;
    out << envelope.dump(2) << "\n";
    return o.pass ? kPass : kFail;
  } catch (const PreconditionError& e) {
    err << "error: precondition " << e.constraint() << " violated: " << e.what() << "\n";
    return kUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const json::exception& e) {
    err << "error: bad parameter value: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace requ_gap::cli
