#include "hdyn/cli.hpp"

#include "hdyn/curve_io.hpp"
#include "hdyn/extadj.hpp"
#include "hdyn/homsim.hpp"
#include "hdyn/rational.hpp"
#include "hdyn/sl2rep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace hdyn::cli {

namespace {

using nlohmann::ordered_json;
using json = nlohmann::json;

const std::vector<std::string> kCommands = {"verify-lemma", "equi", "subsphere", "invariants", "kappa", "goodfn"};

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void require(bool cond, const std::string& message) {
  if (!cond) throw UsageError(message);
}

std::string format_number(double x) {
  if (std::abs(x) < 1e-9) x = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string format_vector(const Eigen::VectorXd& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v(i));
  return s + ")";
}

Model resolve_model(const RunConfig& c, const AnalyticCurve& curve) {
  Model m;
  if (c.model) {
    m = parse_model(*c.model);
  } else {
    require(curve.n() == 2 || curve.n() == 3, "no model for curves with n = " + std::to_string(curve.n()));
    m = curve.n() == 2 ? Model::sl2r : Model::sl2c;
  }
  require(model_dimension(m) == curve.n(),
          "model " + to_string(m) + " needs a curve with n = " + std::to_string(model_dimension(m)));
  return m;
}

std::string curve_label(const RunConfig& c, const AnalyticCurve& curve) {
  if (!curve.id().empty()) return curve.id();
  return std::filesystem::path(*c.curve).stem().string();
}

GradedRep build_rep(const QuadraticSpace& space, const std::string& name, const std::vector<int>& degrees) {
  const GradedRep ad = build_adjoint(space);
  if (name == "adjoint") return ad;
  if (name == "wedge2") return build_exterior(ad, 2);
  if (name == "sum") {
    std::vector<GradedRep> parts;
    for (int d : degrees) parts.push_back(build_exterior(ad, d));
    return direct_sum(parts);
  }
  throw UsageError("unknown representation '" + name + "' (expected adjoint, wedge2 or sum)");
}

// ---- commands ----

int cmd_verify_lemma(const RunConfig& c, std::ostream& out) {
  bool all_ok = true;
  for (int l : c.l) {
    for (const auto& rs : c.r) {
      const Rational r = parse_rational(rs);
      KeyLemmaReport rep;
      if (c.exact) rep = verify_key_lemma<Rational>(l, r);
      else rep = verify_key_lemma<double>(l, to_double(r));
      const bool ok = rep.identity_ok && rep.minus_claim_ok && rep.lemma_dim >= 1;
      all_ok = all_ok && ok;
      ordered_json j;
      j["l"] = l;
      j["r"] = to_string(r);
      j["exact"] = c.exact;
      j["lemma_dim"] = rep.lemma_dim;
      j["identity_ok"] = rep.identity_ok;
      j["minus_kernel_dim"] = rep.minus_kernel_dim;
      j["minus_claim_ok"] = rep.minus_claim_ok;
      j["max_residual"] = rep.max_residual;
      j["pass"] = ok;
      out << j.dump() << '\n';
    }
  }
  return all_ok ? kExitOk : kExitFailure;
}

int cmd_equi(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const AnalyticCurve curve = read_curve_spec(*c.curve);
  const Model m = resolve_model(c, curve);
  const std::string label = curve_label(c, curve);
  const auto suite = standard_suite(m);
  std::vector<double> haar;
  for (const auto& f : suite) haar.push_back(haar_integral(m, f));

  std::vector<MeasureRecord> records;
  std::vector<std::pair<double, double>> summary;
  bool converged = true;
  const double tol = c.assert_converged.value_or(0.0);
  const double t_last = *std::max_element(c.t.begin(), c.t.end());
  for (double t : c.t) {
    const auto est = birkhoff_averages(m, curve, t, Matrix2c::Identity(), suite, c.samples.value_or(100000), *c.seed,
                                       label);
    double worst = 0.0;
    for (std::size_t k = 0; k < suite.size(); ++k) {
      records.push_back({m, est[k], haar[k]});
      const double dev = std::abs(est[k].value - haar[k]);
      worst = std::max(worst, dev);
      if (c.assert_converged && t == t_last && dev > std::max(3.0 * est[k].std_error, tol * haar[k] + 0.1 * tol))
        converged = false;
    }
    summary.emplace_back(t, worst);
  }

  if (c.out) {
    std::ofstream file(*c.out);
    if (!file) throw std::runtime_error("cannot write '" + *c.out + "'");
    write_records(file, records);
    for (const auto& f : suite) {
      std::vector<MeasureRecord> rows;
      for (const auto& r : records)
        if (r.estimate.test_id == f.id) rows.push_back(r);
      std::ofstream plot(*c.out + "." + f.id + ".dat");
      if (!plot) throw std::runtime_error("cannot write plot data next to '" + *c.out + "'");
      write_plot_data(plot, rows);
    }
  } else {
    write_records(out, records);
  }
  for (const auto& [t, worst] : summary) {
    ordered_json j;
    j["summary"] = "max_abs_deviation";
    j["t"] = t;
    j["value"] = worst;
    out << j.dump() << '\n';
  }
  if (c.assert_converged && !converged) {
    err << "assertion failed: estimates at t = " << t_last << " are not within the requested tolerance " << tol
        << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_subsphere(const RunConfig& c, std::ostream& out) {
  const AnalyticCurve curve = read_curve_spec(*c.curve);
  const auto res = subsphere_detect(curve, static_cast<int>(c.samples.value_or(200)));
  ordered_json j;
  j["contained"] = res.contained;
  j["min_singular_value"] = res.min_singular_value;
  j["relative_min_singular_value"] = res.relative_min_singular_value;
  if (res.contained) {
    const auto& w = *res.decoded;
    j["witness"] = std::vector<double>(res.witness.data(), res.witness.data() + res.witness.size());
    if (w.kind == SubsphereWitness::Kind::sphere) {
      out << "contained, witness: sphere center " << format_vector(w.center) << " radius " << format_number(w.radius)
          << '\n';
    } else {
      out << "contained, witness: hyperplane normal " << format_vector(w.normal) << " offset "
          << format_number(w.offset) << '\n';
    }
  } else {
    out << "not contained in any sphere or hyperplane\n";
  }
  out << j.dump() << '\n';
  return kExitOk;
}

int cmd_invariants(const RunConfig& c, std::ostream& out) {
  const AnalyticCurve curve = read_curve_spec(*c.curve);
  const QuadraticSpace space(curve.n());
  const std::vector<int> degrees = c.degrees.empty() ? std::vector<int>{1, 2} : c.degrees;
  const GradedRep rep = build_rep(space, c.rep.value_or("sum"), degrees);
  const auto res = invariant_vector_solver(rep, curve, static_cast<int>(c.samples.value_or(64)));
  out << "excess_dim = " << res.excess_dim << '\n';
  ordered_json j;
  j["representation"] = rep.name;
  j["dim"] = rep.dim();
  j["nullspace_dim"] = res.nullspace_basis.cols();
  j["global_invariant_dim"] = res.global_invariant_basis.cols();
  j["excess_dim"] = res.excess_dim;
  j["threshold"] = res.threshold;
  j["gap"] = std::isfinite(res.gap) ? ordered_json(res.gap) : ordered_json("inf");
  j["threshold_margin"] = res.threshold_margin;
  out << j.dump() << '\n';
  return kExitOk;
}

int cmd_kappa(const RunConfig& c, std::ostream& out) {
  const std::size_t trials = c.samples.value_or(20000);
  bool ok = true;
  for (double t : c.t) {
    Eigen::MatrixXd u;
    Eigen::VectorXd w;
    std::string label;
    if (!c.l.empty()) {
      u = direct_sum_unipotent(c.l, t);
      w = direct_sum_weights(c.l);
      label = "sl2 irreps";
    } else {
      const QuadraticSpace space(model_dimension(parse_model(*c.model)));
      const GradedRep rep = build_rep(space, *c.rep, {1, 2});
      u = rep.act(make_u(space, t * Eigen::VectorXd::Unit(space.n() - 1, 0)));
      w = rep.weights;
      label = rep.name;
    }
    const KappaEstimate est = kappa_estimate(u, w, trials, *c.seed);
    const std::size_t violations = kappa_violations(u, w, 0.5 * est.kappa_hat, trials, *c.seed);
    ok = ok && violations == 0;
    ordered_json j;
    j["representation"] = label;
    j["t"] = t;
    j["kappa_hat"] = est.kappa_hat;
    j["trials"] = trials;
    j["seed"] = *c.seed;
    j["fresh_violations_at_half_kappa"] = violations;
    out << j.dump() << '\n';
  }
  return ok ? kExitOk : kExitFailure;
}

int cmd_goodfn(const RunConfig& c, std::ostream& out) {
  const AnalyticCurve curve = read_curve_spec(*c.curve);
  const QuadraticSpace space(curve.n());
  const GradedRep rep = build_rep(space, c.rep.value_or("adjoint"), c.degrees.empty() ? std::vector<int>{1, 2} : c.degrees);
  require(c.entry[0] >= 0 && c.entry[1] >= 0 && c.entry[0] < rep.dim() && c.entry[1] < rep.dim(),
          "--entry must index the representation matrix (dim " + std::to_string(rep.dim()) + ")");
  const auto xi = upsilon_entry(rep, curve, c.entry[0], c.entry[1]);
  const GoodFnReport r =
      good_function_check(xi, curve.begin(), curve.end(), *c.C, *c.alpha, c.samples.value_or(200), *c.seed);
  ordered_json j;
  j["representation"] = rep.name;
  j["entry"] = c.entry;
  j["C"] = r.C;
  j["alpha"] = r.alpha;
  j["worst_ratio"] = r.worst_ratio;
  j["samples"] = r.samples;
  j["seed"] = r.seed;
  j["worst_J"] = {r.worst_j_begin, r.worst_j_end};
  j["worst_r"] = r.worst_r;
  j["certified_on_samples"] = r.worst_ratio <= 1.0;
  out << j.dump() << '\n';
  return r.worst_ratio <= 1.0 ? kExitOk : kExitFailure;
}

// ---- config (de)serialization ----

template <typename T>
T get_checked(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("config field '" + key + "' has the wrong type");
  }
}

std::uint64_t get_unsigned(const json& v, const std::string& key) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw std::invalid_argument("config field '" + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

double get_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw std::invalid_argument("config field '" + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw std::invalid_argument("config field '" + key + "' must be finite");
  return x;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
  static const std::vector<std::string> known = {"command", "curve", "model", "t", "samples", "seed", "out", "exact",
                                                 "assert_converged", "l", "r", "rep", "degrees", "entry", "C",
                                                 "alpha"};
  for (const auto& [key, value] : doc.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::invalid_argument("config: unknown field '" + key + "'");
  if (!doc.contains("command") || !doc["command"].is_string())
    throw std::invalid_argument("config: 'command' must be a string");

  RunConfig c;
  c.command = doc["command"].get<std::string>();
  auto str = [&](const char* key, std::optional<std::string>& dst) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_string()) throw std::invalid_argument(std::string("config field '") + key + "' must be a string");
    dst = doc[key].get<std::string>();
  };
  str("curve", c.curve);
  str("model", c.model);
  str("out", c.out);
  str("rep", c.rep);
  if (doc.contains("t")) {
    if (!doc["t"].is_array()) throw std::invalid_argument("config field 't' must be a list");
    for (const auto& v : doc["t"]) c.t.push_back(get_number(v, "t"));
  }
  if (doc.contains("samples")) c.samples = get_unsigned(doc["samples"], "samples");
  if (doc.contains("seed")) c.seed = get_unsigned(doc["seed"], "seed");
  if (doc.contains("exact")) {
    if (!doc["exact"].is_boolean()) throw std::invalid_argument("config field 'exact' must be a boolean");
    c.exact = doc["exact"].get<bool>();
  }
  if (doc.contains("assert_converged")) c.assert_converged = get_number(doc["assert_converged"], "assert_converged");
  if (doc.contains("C")) c.C = get_number(doc["C"], "C");
  if (doc.contains("alpha")) c.alpha = get_number(doc["alpha"], "alpha");
  auto ints = [&](const char* key, std::vector<int>& dst) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_array()) throw std::invalid_argument(std::string("config field '") + key + "' must be a list");
    for (const auto& v : doc[key]) {
      if (!v.is_number_integer()) throw std::invalid_argument(std::string("config field '") + key + "' must hold integers");
      dst.push_back(get_checked<int>(v, key));
    }
  };
  ints("l", c.l);
  ints("degrees", c.degrees);
  ints("entry", c.entry);
  if (doc.contains("r")) {
    if (!doc["r"].is_array()) throw std::invalid_argument("config field 'r' must be a list");
    for (const auto& v : doc["r"]) {
      if (!v.is_string()) throw std::invalid_argument("config field 'r' must hold rational strings");
      c.r.push_back(v.get<std::string>());
    }
  }
  validate(c);
  return c;
}

std::string serialize_config(const RunConfig& c) {
  ordered_json j;
  j["command"] = c.command;
  if (c.curve) j["curve"] = *c.curve;
  if (c.model) j["model"] = *c.model;
  if (!c.t.empty()) j["t"] = c.t;
  if (c.samples) j["samples"] = *c.samples;
  if (c.seed) j["seed"] = *c.seed;
  if (c.out) j["out"] = *c.out;
  if (c.exact) j["exact"] = true;
  if (c.assert_converged) j["assert_converged"] = *c.assert_converged;
  if (!c.l.empty()) j["l"] = c.l;
  if (!c.r.empty()) j["r"] = c.r;
  if (c.rep) j["rep"] = *c.rep;
  if (!c.degrees.empty()) j["degrees"] = c.degrees;
  if (!c.entry.empty()) j["entry"] = c.entry;
  if (c.C) j["C"] = *c.C;
  if (c.alpha) j["alpha"] = *c.alpha;
  return j.dump();
}

void validate(const RunConfig& c) {
  require(std::find(kCommands.begin(), kCommands.end(), c.command) != kCommands.end(),
          "unknown command '" + c.command + "'");
  if (c.model) parse_model(*c.model);
  const bool randomized = c.command == "equi" || c.command == "kappa" || c.command == "goodfn";
  if (randomized) require(c.seed.has_value(), c.command + ": --seed is required");
  if (c.command != "verify-lemma" && c.command != "kappa") require(c.curve.has_value(), c.command + ": --curve is required");
  for (int d : c.degrees) require(d >= 1, "degrees must be positive");

  if (c.command == "verify-lemma") {
    require(!c.l.empty(), "verify-lemma: empty l-list");
    for (int l : c.l) require(l >= 2 && l % 2 == 0, "odd highest weight (or l < 2): l = " + std::to_string(l));
    require(!c.r.empty(), "verify-lemma: empty r-list");
    for (const auto& rs : c.r) {
      const Rational r = parse_rational(rs);
      require(r != 0, "verify-lemma: r must be nonzero");
    }
  } else if (c.command == "equi") {
    require(!c.t.empty(), "equi: empty t-sweep");
    for (double t : c.t) require(std::abs(t) <= 60.0, "equi: |t| must not exceed 60");
    require(c.samples.value_or(100000) >= 1000, "equi: at least 1000 samples");
    if (c.assert_converged) require(*c.assert_converged > 0, "--assert-converged needs a positive tolerance");
  } else if (c.command == "kappa") {
    require(!c.t.empty(), "kappa: --t is required");
    for (double t : c.t) require(t != 0.0, "kappa: t = 0 is rejected (the inequality fails on V-)");
    require(!c.l.empty() || c.rep.has_value(), "kappa: give --l or --rep");
    if (c.rep) require(c.model.has_value(), "kappa: --rep needs --model");
    for (int l : c.l) require(l >= 0, "kappa: highest weights must be non-negative");
    require(c.samples.value_or(20000) >= 1, "kappa: need at least one sample");
  } else if (c.command == "goodfn") {
    require(c.C && *c.C > 0, "goodfn: --C must be positive");
    require(c.alpha && *c.alpha > 0, "goodfn: --alpha must be positive");
    require(c.entry.size() == 2, "goodfn: --entry takes two indices i,j");
    require(c.samples.value_or(200) >= 1, "goodfn: need at least one trial");
  } else if (c.command == "subsphere") {
    require(c.samples.value_or(200) >= 3, "subsphere: too few samples");
  }
}

int execute(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    validate(c);
    if (c.command == "verify-lemma") return cmd_verify_lemma(c, out);
    if (c.command == "equi") return cmd_equi(c, out, err);
    if (c.command == "subsphere") return cmd_subsphere(c, out);
    if (c.command == "invariants") return cmd_invariants(c, out);
    if (c.command == "kappa") return cmd_kappa(c, out);
    if (c.command == "goodfn") return cmd_goodfn(c, out);
    err << "error: unknown command\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kExitFailure;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical companion for equidistribution of expanding curves in rank-one homogeneous spaces"};
  app.require_subcommand(1);
  RunConfig c;
  std::optional<std::string> config_path;

  auto common_curve = [&](CLI::App* sub) { sub->add_option("--curve", c.curve, "curve spec file (JSON)"); };
  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", c.seed, "RNG seed (required)"); };
  auto add_samples = [&](CLI::App* sub, const std::string& what) { sub->add_option("--samples", c.samples, what); };

  auto* lemma = app.add_subcommand("verify-lemma", "verify the key lemma on a grid of (l, r)");
  lemma->add_option("--l", c.l, "even highest weights")->delimiter(',')->default_str("2,4,...,16");
  lemma->add_option("--r", c.r, "nonzero rationals, e.g. 1,-1,1/2")->delimiter(',')->allow_extra_args(false);
  lemma->add_flag("--exact", c.exact, "exact rational arithmetic");

  auto* equi = app.add_subcommand("equi", "Birkhoff averages against Haar integrals over a t-sweep");
  common_curve(equi);
  equi->add_option("--model", c.model, "sl2r or sl2c (default from the curve)");
  equi->add_option("--t", c.t, "t values")->delimiter(',');
  add_samples(equi, "Monte Carlo samples per t (default 100000)");
  add_seed(equi);
  equi->add_option("--out", c.out, "record file (JSON lines); plot data goes to <out>.<bump>.dat");
  equi->add_option("--assert-converged", c.assert_converged,
                   "exit 1 unless every estimate at the largest t is within max(3 se, tol*haar + tol/10)");

  auto* sub = app.add_subcommand("subsphere", "detect whether the curve lies in a sphere or hyperplane");
  common_curve(sub);
  add_samples(sub, "sample count (default 200)");

  auto* inv = app.add_subcommand("invariants", "invariant-vector solver on adjoint + wedge powers");
  common_curve(inv);
  add_samples(inv, "curve samples (default 64)");
  inv->add_option("--degrees", c.degrees, "wedge degrees of the sum (default 1,2)")->delimiter(',');
  inv->add_option("--rep", c.rep, "adjoint, wedge2 or sum (default sum)");

  auto* kap = app.add_subcommand("kappa", "estimate kappa in max(|v+|, |(uv)^{+0}|) >= kappa |v|");
  kap->add_option("--t", c.t, "unipotent parameters")->delimiter(',');
  kap->add_option("--l", c.l, "highest weights of sl2 irreducible summands")->delimiter(',');
  kap->add_option("--rep", c.rep, "adjoint or wedge2 of so(n,1) (with --model)");
  kap->add_option("--model", c.model, "sl2r (n = 2) or sl2c (n = 3)");
  add_samples(kap, "random unit vectors (default 20000)");
  add_seed(kap);

  auto* good = app.add_subcommand("goodfn", "(C, alpha)-good check on an entry of the curve-evaluated representation");
  common_curve(good);
  good->add_option("--entry", c.entry, "matrix entry i,j")->delimiter(',');
  good->add_option("--C", c.C, "constant C");
  good->add_option("--alpha", c.alpha, "exponent alpha");
  good->add_option("--rep", c.rep, "adjoint, wedge2 or sum (default adjoint)");
  add_samples(good, "random (J, r) trials (default 200)");
  add_seed(good);

  auto* runcfg = app.add_subcommand("run", "execute a stored JSON run config");
  runcfg->add_option("config", config_path, "config file")->required();

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.emplace_back("hdyn");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (runcfg->parsed()) {
    try {
      std::ifstream in(*config_path);
      if (!in) throw std::invalid_argument("cannot open config '" + *config_path + "'");
      std::ostringstream buf;
      buf << in.rdbuf();
      c = parse_config(buf.str());
    } catch (const std::invalid_argument& e) {
      err << "error: " << e.what() << '\n';
      return kExitUsage;
    }
    return execute(c, out, err);
  }

  c.command = app.get_subcommands().front()->get_name();
  if (c.command == "verify-lemma" && lemma->count("--l") == 0) c.l = {2, 4, 6, 8, 10, 12, 14, 16};
  return execute(c, out, err);
}

}  // namespace hdyn::cli
