#include "qtele/cli/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "qtele/dataset.hpp"
#include "qtele/errors.hpp"
#include "qtele/fit.hpp"
#include "qtele/oracle.hpp"
#include "qtele/parallel.hpp"

namespace qtele::cli {
namespace {

using json = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double v = 0.0;
  const char* first = t.data();
  if (!t.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw UsageError("bad number for " + what + ": '" + text + "'");
  }
  return v;
}

bool is_parameter_key(const std::string& key) {
  return std::find(std::begin(kParameterKeys), std::end(kParameterKeys), key) != std::end(kParameterKeys);
}

Basis parse_basis(const std::string& s) {
  if (s == "x" || s == "X") return Basis::X;
  if (s == "z" || s == "Z") return Basis::Z;
  throw UsageError("basis must be x or z, got '" + s + "'");
}

json params_json(const TeleportParams& p) {
  return json{{"alpha2", p.alpha2},   {"mu", p.mu},   {"zeta", p.zeta},
              {"eta_i", p.eta_i},     {"eta_s", p.eta_s}, {"phi", p.phi},
              {"basis", p.basis == Basis::X ? "x" : "z"}, {"epsilon", p.epsilon},
              {"theta_in", p.theta_in}};
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Where results go: the --out file (plus its manifest) or the stream.
class Output {
 public:
  Output(const Invocation& inv, std::ostream& fallback) : inv_(inv), fallback_(fallback) {}

  std::ostream& stream() { return inv_.out ? static_cast<std::ostream&>(buffer_) : fallback_; }

  void finish(const TeleportParams& params, json extra) {
    if (!inv_.out) return;
    {
      std::ofstream f(*inv_.out, std::ios::binary);
      if (!f) throw DataError("cannot write " + inv_.out->string());
      f << buffer_.str();
    }
    json m;
    m["tool"] = "qtele";
    m["version"] = kVersion;
    m["command"] = inv_.command;
    m["parameters"] = params_json(params);
    for (auto& [k, v] : extra.items()) m[k] = v;
    m["seed"] = inv_.seed;
    m["threads"] = thread_count();
    m["timestamp"] = utc_timestamp();
    json inputs = json::array();
    for (const auto& path : {inv_.config, inv_.dataset}) {
      if (path) inputs.push_back({{"path", path->string()}, {"sha256", sha256_file(*path)}});
    }
    m["inputs"] = inputs;
    m["output"] = {{"path", inv_.out->string()}, {"sha256", sha256_file(*inv_.out)}};
    std::ofstream mf(inv_.out->string() + ".manifest.json");
    if (!mf) throw DataError("cannot write manifest for " + inv_.out->string());
    mf << m.dump(2) << '\n';
  }

 private:
  const Invocation& inv_;
  std::ostream& fallback_;
  std::ostringstream buffer_;
};

std::map<std::string, std::string> load_config(const Invocation& inv) {
  if (!inv.config) return {};
  std::ifstream in(*inv.config);
  if (!in) throw UsageError("cannot open config " + inv.config->string());
  return parse_config(in);
}

std::optional<Axis> find_axis(const Invocation& inv, const std::string& name) {
  for (const auto& text : inv.axes) {
    auto a = parse_axis(text);
    if (a.name == name) return a;
  }
  return std::nullopt;
}

TeleportParams params_for(const Invocation& inv, std::optional<Quantity> q = {}) {
  auto overrides = inv.overrides;
  const auto config = load_config(inv);
  // The Z-basis figure of merit is quoted for a photon sent in the early bin.
  if (q == Quantity::kFz && !overrides.count("epsilon") && !config.count("epsilon")) overrides["epsilon"] = "1";
  if (q == Quantity::kFz && !overrides.count("basis") && !config.count("basis")) overrides["basis"] = "z";
  auto p = resolve_params(config, overrides);
  if (q == Quantity::kFx) p.basis = Basis::X;
  if (q == Quantity::kFz) p.basis = Basis::Z;
  return p;
}

int cmd_sweep(const Invocation& inv, std::ostream& out) {
  if (!inv.quantity) throw UsageError("sweep needs --quantity");
  const Quantity q = parse_quantity(*inv.quantity);
  if (inv.axes.size() != 1) throw UsageError("sweep needs exactly one --axis");
  const Axis axis = parse_axis(inv.axes.front());
  const TeleportParams base = params_for(inv, q);
  const auto xs = axis.values();
  std::vector<double> ys(xs.size());
  // Validate every grid point up front so usage errors are not reported from a worker.
  for (double x : xs) {
    auto p = base;
    set_parameter(p, axis.name, x);
    p.validate();
  }
  parallel_for(xs.size(), [&](std::size_t i) {
    auto p = base;
    set_parameter(p, axis.name, xs[i]);
    ys[i] = evaluate(q, p);
  });
  Output o(inv, out);
  o.stream() << axis.name << ',' << to_string(q) << '\n';
  for (std::size_t i = 0; i < xs.size(); ++i) o.stream() << fmt(xs[i]) << ',' << fmt(ys[i]) << '\n';
  o.finish(base, {{"quantity", to_string(q)}, {"axis", inv.axes.front()}});
  return kOk;
}

int cmd_heatmap(const Invocation& inv, std::ostream& out) {
  const Quantity q = parse_quantity(inv.quantity.value_or("v2"));
  if (q != Quantity::kV2 && q != Quantity::kV3) throw UsageError("heatmap supports --quantity v2 or v3");
  for (const auto& a : inv.axes) {
    const auto name = parse_axis(a).name;
    if (name != "alpha2" && name != "mu") throw UsageError("heatmap axes must be alpha2 and mu");
  }
  const Axis a_axis = find_axis(inv, "alpha2").value_or(Axis{"alpha2", true, 1e-5, 1e-2, 50});
  const Axis m_axis = find_axis(inv, "mu").value_or(Axis{"mu", true, 1e-5, 1e-2, 50});
  if (a_axis.values().front() <= 0.0 || m_axis.values().front() <= 0.0) {
    throw UsageError("heatmap axes must be positive");
  }
  const TeleportParams p = params_for(inv);
  const auto surface =
      visibility_surface(q == Quantity::kV2 ? VisibilityKind::kTwoFold : VisibilityKind::kThreeFold,
                         a_axis.values(), m_axis.values(), p.zeta, p.eta_i, p.eta_s);
  Output o(inv, out);
  auto& s = o.stream();
  s << to_string(q) << ":alpha2\\mu";
  for (double m : surface.mu) s << ',' << fmt(m);
  s << '\n';
  for (std::size_t i = 0; i < surface.alpha2.size(); ++i) {
    s << fmt(surface.alpha2[i]);
    for (std::size_t j = 0; j < surface.mu.size(); ++j) s << ',' << fmt(surface.at(i, j));
    s << '\n';
  }
  o.finish(p, {{"quantity", to_string(q)},
               {"alpha2_axis", json{{"log", a_axis.log}, {"min", a_axis.min}, {"max", a_axis.max}, {"count", a_axis.count}}},
               {"mu_axis", json{{"log", m_axis.log}, {"min", m_axis.min}, {"max", m_axis.max}, {"count", m_axis.count}}}});
  return kOk;
}

int cmd_fit(const Invocation& inv, std::ostream& out, std::ostream& err) {
  if (!inv.dataset) throw UsageError("fit needs a dataset path");
  const TeleportParams p = params_for(inv);
  const auto data = read_dataset(*inv.dataset);
  std::vector<DataPoint> two, three, fx;
  for (const auto& d : data) {
    (d.kind == DataKind::kTwoFold ? two : d.kind == DataKind::kThreeFold ? three : fx).push_back(d);
  }
  FitResult r;
  if (inv.mode == "two_fold") {
    if (two.empty()) throw DataError("dataset has no two_fold rows");
    if (two.size() != data.size()) err << "note: ignoring " << data.size() - two.size() << " non-two_fold rows\n";
    r = fit_two_fold(two, p.mu, inv.seed, inv.floor_sigma);
  } else if (inv.mode == "joint") {
    if (three.empty() || fx.empty()) throw DataError("joint mode needs both three_fold and fidelity_x rows");
    if (!two.empty()) err << "note: ignoring " << two.size() << " two_fold rows\n";
    r = fit_three_fold_joint(three, fx, p.eta_i, p.eta_s, p.mu, inv.seed, inv.floor_sigma);
  } else {
    throw UsageError("fit --mode must be two_fold or joint");
  }

  out << "fit mode " << inv.mode << ", " << data.size() << " rows, seed " << inv.seed
      << (inv.floor_sigma ? ", sigma floored at sqrt(y)" : "") << '\n';
  for (std::size_t k = 0; k < r.names.size(); ++k) {
    char line[160];
    std::snprintf(line, sizeof line, "  %-7s = %.6g +/- %.2g\n", r.names[k].c_str(), r.estimates[k], r.uncertainties[k]);
    out << line;
  }
  out << "  chi2 = " << fmt(r.objective) << ", generations = " << r.iterations
      << (r.converged ? ", converged" : ", NOT converged") << ", uncertainty from "
      << (r.method == UncertaintyMethod::kCurvature ? "curvature" : "bootstrap") << '\n';
  for (const auto& w : r.warnings) err << "warning: " << w << '\n';

  std::ostringstream csv;
  csv << "parameter,estimate,uncertainty\n";
  for (std::size_t k = 0; k < r.names.size(); ++k) {
    csv << r.names[k] << ',' << fmt(r.estimates[k]) << ',' << fmt(r.uncertainties[k]) << '\n';
  }
  if (inv.out) {
    Output o(inv, out);
    o.stream() << csv.str();
    o.finish(p, {{"mode", inv.mode},
                 {"floor_sigma", inv.floor_sigma},
                 {"objective", r.objective},
                 {"generations", r.iterations},
                 {"converged", r.converged}});
  } else {
    out << csv.str();
  }
  return kOk;
}

int cmd_optimal_alpha(const Invocation& inv, std::ostream& out) {
  const Quantity q = parse_quantity(inv.quantity.value_or("v2"));
  if (q != Quantity::kV2 && q != Quantity::kV3) throw UsageError("optimal-alpha supports --quantity v2 or v3");
  const TeleportParams p = params_for(inv);
  const double a = optimal_alpha2(q == Quantity::kV2 ? VisibilityKind::kTwoFold : VisibilityKind::kThreeFold, p.hom());
  Output o(inv, out);
  o.stream() << "quantity,alpha2_opt\n" << to_string(q) << ',' << fmt(a) << '\n';
  o.finish(p, {{"quantity", to_string(q)}});
  return kOk;
}

int cmd_oracle_check(const Invocation& inv, std::ostream& out) {
  const TeleportParams p = params_for(inv);
  p.validate();
  OracleOptions opts;
  opts.cutoff = inv.cutoff;
  struct Row {
    std::string name;
    double pipeline, oracle;
  };
  std::vector<Row> rows;
  std::vector<double> zetas{p.zeta};
  for (double z : {0.0, 1.0}) {
    if (std::find(zetas.begin(), zetas.end(), z) == zetas.end()) zetas.push_back(z);
  }
  double deficit = 0.0;
  for (double z : zetas) {
    HomParams h = p.hom();
    h.zeta = z;
    const auto o = oracle_hom(h, opts);
    deficit = std::max(deficit, o.deficit);
    rows.push_back({"p2@zeta=" + fmt(z), p_two_fold_pipeline(h), o.p_two_fold});
    rows.push_back({"p3@zeta=" + fmt(z), p_three_fold_pipeline(h), o.p_three_fold});
  }
  const auto ot = oracle_teleport(p, opts);
  deficit = std::max(deficit, ot.deficit);
  const auto g = bsm_conditional_probs(p);
  rows.push_back({"P_D1D4D6", g.p_d1d4d6, ot.probs.p_d1d4d6});
  rows.push_back({"P_D1D4D5", g.p_d1d4d5, ot.probs.p_d1d4d5});

  double worst = 0.0;
  Output o(inv, out);
  o.stream() << "quantity,pipeline,oracle,abs_diff\n";
  for (const auto& r : rows) {
    const double d = std::abs(r.pipeline - r.oracle);
    worst = std::max(worst, d);
    o.stream() << r.name << ',' << fmt(r.pipeline) << ',' << fmt(r.oracle) << ',' << fmt(d) << '\n';
  }
  o.finish(p, {{"cutoff", inv.cutoff ? json(*inv.cutoff) : json("auto")}, {"deficit", deficit}, {"max_abs_diff", worst}});
  return worst > 1e-5 ? kOracleMismatch : kOk;
}

int cmd_synth(const Invocation& inv, std::ostream& out) {
  const std::string kinds_text = inv.quantity.value_or("two_fold");
  std::vector<DataKind> kinds;
  std::stringstream ks(kinds_text);
  for (std::string k; std::getline(ks, k, ',');) {
    try {
      kinds.push_back(parse_data_kind(trim(k)));
    } catch (const DataError&) {
      throw UsageError("synth --quantity takes two_fold, three_fold and/or fidelity_x");
    }
  }
  if (inv.axes.size() > 1) throw UsageError("synth takes at most one --axis (alpha2)");
  const Axis axis = inv.axes.empty() ? Axis{"alpha2", true, 1e-5, 1e-1, 20} : parse_axis(inv.axes.front());
  if (axis.name != "alpha2") throw UsageError("synth axis must be alpha2");
  if (!(inv.noise >= 0.0)) throw UsageError("--noise must be >= 0");
  const TeleportParams p = params_for(inv);
  p.validate();
  ModelParameters m;
  m.mu = p.mu;
  m.eta_s = p.eta_s;
  m.zeta2 = m.zeta3 = p.zeta;
  m.eta_i2 = m.eta_i3 = p.eta_i;
  std::vector<DataPoint> data;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const auto part = synthesize(kinds[i], m, axis.values(), inv.noise, inv.seed + i);
    data.insert(data.end(), part.begin(), part.end());
  }
  Output o(inv, out);
  write_dataset(o.stream(), data,
                {"synthetic: zeta=" + fmt(p.zeta) + " eta_i=" + fmt(p.eta_i) + " eta_s=" + fmt(p.eta_s) +
                 " mu=" + fmt(p.mu) + " noise=" + fmt(inv.noise) + " seed=" + std::to_string(inv.seed)});
  o.finish(p, {{"kinds", kinds_text}, {"noise", inv.noise}});
  return kOk;
}

}  // namespace

Quantity parse_quantity(const std::string& s) {
  if (s == "v2") return Quantity::kV2;
  if (s == "v3") return Quantity::kV3;
  if (s == "fx") return Quantity::kFx;
  if (s == "fz") return Quantity::kFz;
  if (s == "p2") return Quantity::kP2;
  if (s == "p3") return Quantity::kP3;
  throw UsageError("unknown quantity '" + s + "' (v2, v3, fx, fz, p2, p3)");
}

const char* to_string(Quantity q) {
  switch (q) {
    case Quantity::kV2: return "v2";
    case Quantity::kV3: return "v3";
    case Quantity::kFx: return "fx";
    case Quantity::kFz: return "fz";
    case Quantity::kP2: return "p2";
    case Quantity::kP3: return "p3";
  }
  return "?";
}

std::map<std::string, std::string> parse_config(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw UsageError("config line " + std::to_string(line) + ": expected key=value");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (!is_parameter_key(key)) throw UsageError("config line " + std::to_string(line) + ": unknown key '" + key + "'");
    if (value.empty()) throw UsageError("config line " + std::to_string(line) + ": empty value for " + key);
    out[key] = value;
  }
  return out;
}

void set_parameter(TeleportParams& p, const std::string& name, double value) {
  if (name == "alpha2") p.alpha2 = value;
  else if (name == "mu") p.mu = value;
  else if (name == "zeta") p.zeta = value;
  else if (name == "eta_i") p.eta_i = value;
  else if (name == "eta_s") p.eta_s = value;
  else if (name == "phi") p.phi = value;
  else if (name == "epsilon") p.epsilon = value;
  else if (name == "theta_in") p.theta_in = value;
  else throw UsageError("unknown numeric parameter '" + name + "'");
}

TeleportParams resolve_params(const std::map<std::string, std::string>& config,
                              const std::map<std::string, std::string>& overrides) {
  TeleportParams p;
  p.alpha2 = 1e-3;
  p.mu = 8e-3;
  auto apply = [&](const std::map<std::string, std::string>& kv) {
    for (const auto& [k, v] : kv) {
      if (!is_parameter_key(k)) throw UsageError("unknown parameter '" + k + "'");
      if (k == "basis") p.basis = parse_basis(v);
      else set_parameter(p, k, parse_double(v, k));
    }
  };
  apply(config);
  apply(overrides);
  try {
    p.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  return p;
}

std::vector<double> Axis::values() const {
  return log ? log_grid(min, max, count) : linear_grid(min, max, count);
}

Axis parse_axis(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(trim(part));
  if (parts.size() != 5) throw UsageError("axis must look like name:log|lin:min:max:count, got '" + text + "'");
  Axis a;
  a.name = parts[0];
  if (!is_parameter_key(a.name) || a.name == "basis") throw UsageError("axis: unknown parameter '" + a.name + "'");
  if (parts[1] == "log") a.log = true;
  else if (parts[1] == "lin") a.log = false;
  else throw UsageError("axis scale must be log or lin, got '" + parts[1] + "'");
  a.min = parse_double(parts[2], "axis min");
  a.max = parse_double(parts[3], "axis max");
  const double count = parse_double(parts[4], "axis count");
  if (count != std::floor(count) || count < 2 || count > 1e7) throw UsageError("axis count must be an integer >= 2");
  a.count = static_cast<std::size_t>(count);
  if (!(a.min < a.max)) throw UsageError("axis needs min < max");
  if (a.log && !(a.min > 0.0)) throw UsageError("log axis needs min > 0");
  return a;
}

double evaluate(Quantity q, const TeleportParams& p) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  try {
    switch (q) {
      case Quantity::kP2: return p_two_fold_closed(p.hom());
      case Quantity::kP3: return p_three_fold_closed(p.hom());
      case Quantity::kV2: return v_two_fold(p.hom());
      case Quantity::kV3: return v_three_fold(p.hom());
      case Quantity::kFx:
      case Quantity::kFz: {
        auto t = p;
        t.basis = q == Quantity::kFx ? Basis::X : Basis::Z;
        return fidelity(t).value.value_or(nan);
      }
    }
  } catch (const UndefinedValue&) {
    return nan;
  }
  return nan;
}

int run(const Invocation& inv, std::ostream& out, std::ostream& err) {
  try {
    if (inv.command == "sweep") return cmd_sweep(inv, out);
    if (inv.command == "heatmap") return cmd_heatmap(inv, out);
    if (inv.command == "fit") return cmd_fit(inv, out, err);
    if (inv.command == "optimal-alpha") return cmd_optimal_alpha(inv, out);
    if (inv.command == "oracle-check") return cmd_oracle_check(inv, out);
    if (inv.command == "synth") return cmd_synth(inv, out);
    throw UsageError("unknown command '" + inv.command + "'");
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataFailure;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace qtele::cli
