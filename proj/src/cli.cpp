#include "switchback/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "switchback/dataset.hpp"
#include "switchback/errors.hpp"
#include "switchback/inference.hpp"
#include "switchback/montecarlo.hpp"

namespace switchback {
namespace cli {

namespace {

using nlohmann::json;

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct ModelSpec {
  std::string type;
  std::vector<double> beta, beta_int, phi, theta;
  double mu1 = 0.0, mu0 = 0.0, eps_sd = 1.0, eps_delta = 0.0;
  std::uint64_t eps_seed = 0;
};

// Everything a handler needs, merged from config file and flags
// (flags win; sentinel values mean "not set anywhere").
struct Resolved {
  std::string name = "experiment";
  bool has_model = false;
  ModelSpec model;
  std::vector<double> p_vector;
  double p_scalar = -1.0;
  double design_eps = 0.01;
  RegressionSpec reg{.K = -1};  // -1 until the config or a flag sets it
  HacConfig hac;
  std::vector<int> T_values;
  int replications = 5000;
  std::uint64_t seed = 1;
  double level = 0.95;
  int threads = 0;
  int frt_draws = 0;
  std::vector<int> joint;
  std::string out, data;
};

std::vector<double> json_doubles(const json& j, const std::string& where) {
  if (!j.is_array()) throw DataError(where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw DataError(where + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

ModelSpec parse_model(const json& j) {
  ModelSpec ms;
  if (!j.contains("type")) throw DataError("config model: missing type");
  ms.type = j.at("type").get<std::string>();
  if (ms.type != "linear" && ms.type != "ar" && ms.type != "ma")
    throw DataError("config model: type must be linear, ar or ma");
  if (j.contains("beta")) ms.beta = json_doubles(j.at("beta"), "model.beta");
  if (j.contains("beta_int")) ms.beta_int = json_doubles(j.at("beta_int"), "model.beta_int");
  if (j.contains("phi")) ms.phi = json_doubles(j.at("phi"), "model.phi");
  if (j.contains("theta")) ms.theta = json_doubles(j.at("theta"), "model.theta");
  if (j.contains("mu1")) ms.mu1 = j.at("mu1").get<double>();
  if (j.contains("mu0")) ms.mu0 = j.at("mu0").get<double>();
  if (j.contains("eps_sd")) ms.eps_sd = j.at("eps_sd").get<double>();
  if (j.contains("eps_delta")) ms.eps_delta = j.at("eps_delta").get<double>();
  if (j.contains("eps_seed")) ms.eps_seed = j.at("eps_seed").get<std::uint64_t>();
  if (ms.type == "linear" && ms.beta.empty()) throw DataError("config model: linear needs beta");
  if (ms.type == "ma" && ms.theta.empty()) throw DataError("config model: ma needs theta");
  return ms;
}

PotentialOutcomeModel build_model(const ModelSpec& ms, int T) {
  std::vector<double> eps = standard_normal_series(T, ms.eps_seed, ms.eps_sd);
  if (ms.type == "linear") {
    LinearPOModel m = LinearPOModel::homogeneous(T, ms.beta, std::move(eps));
    if (!ms.beta_int.empty()) {
      // beta_int[i] multiplies z_{t-(i+1)} z_{t-i}: consecutive pairs from (0,1) up.
      if (ms.beta_int.size() > ms.beta.size() - 1)
        throw SpecError("model: beta_int has more pairs than beta allows");
      m.beta_int = Eigen::MatrixXd::Zero(T, m.band() + 1);
      for (std::size_t i = 0; i < ms.beta_int.size(); ++i)
        m.beta_int.col(static_cast<int>(i) + 1).setConstant(ms.beta_int[i]);
    }
    return m;
  }
  if (ms.type == "ar") return ARPOModel{ms.phi, ms.mu1, ms.mu0, std::move(eps)};
  MAPOModel m;
  m.theta = ms.theta;
  m.mu.assign(T, {ms.mu0, ms.mu1});
  m.epsz.resize(T);
  for (int t = 0; t < T; ++t) m.epsz[t] = {eps[t], eps[t] + ms.eps_delta};
  return m;
}

Variant parse_variant(const std::string& name) {
  if (name == "full") return Variant::full;
  if (name == "marginal") return Variant::marginal;
  if (name == "interaction") return Variant::interaction;
  if (name == "exposure") return Variant::exposure;
  throw SpecError("unknown regression variant '" + name + "'");
}

Kernel parse_kernel(const std::string& name) {
  if (name == "bartlett") return Kernel::bartlett;
  if (name == "truncated") return Kernel::truncated;
  throw SpecError("unknown kernel '" + name + "'");
}

// Flags as the parser captured them; empty strings and -1 mean unset.
struct Flags {
  std::string config, data, out, variant, bandwidth, kernel, joint, T_list;
  int lags = -1, marginal_lag = -1, frt_draws = -1, reps = -1, threads = 0;
  double design_p = -1.0, eps = -1.0, level = -1.0;
  long long seed = -1;
};

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    std::string item = text.substr(pos, comma - pos);
    try {
      std::size_t used = 0;
      int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw SpecError(what + ": cannot parse '" + item + "' as an integer");
    }
    pos = comma + 1;
  }
  if (out.empty()) throw SpecError(what + ": empty list");
  return out;
}

Resolved resolve(const Flags& f) {
  Resolved r;
  json cfg;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw DataError("cannot open config " + f.config);
    try {
      cfg = json::parse(in);
    } catch (const json::exception& e) {
      throw DataError("config " + f.config + ": " + e.what());
    }
  }

  try {
    if (cfg.contains("name")) r.name = cfg.at("name").get<std::string>();
    if (cfg.contains("model")) {
      r.model = parse_model(cfg.at("model"));
      r.has_model = true;
    }
    if (cfg.contains("design")) {
      const json& d = cfg.at("design");
      if (d.contains("p")) {
        if (d.at("p").is_array())
          r.p_vector = json_doubles(d.at("p"), "design.p");
        else
          r.p_scalar = d.at("p").get<double>();
      }
      if (d.contains("eps")) r.design_eps = d.at("eps").get<double>();
    }
    if (cfg.contains("regression")) {
      const json& g = cfg.at("regression");
      if (g.contains("lags")) r.reg.K = g.at("lags").get<int>();
      if (g.contains("variant")) r.reg.variant = parse_variant(g.at("variant").get<std::string>());
      if (g.contains("marginal_lag")) r.reg.marginal_lag = g.at("marginal_lag").get<int>();
      if (g.contains("exposure")) {
        ExposureSpec spec;
        const json& e = g.at("exposure");
        for (int b : e.at("boundaries")) spec.boundaries.push_back(b);
        for (const auto& t : e.at("tables")) spec.tables.emplace_back(t.get<std::vector<int>>());
        r.reg.exposure = std::move(spec);
      }
    }
    if (cfg.contains("hac")) {
      const json& h = cfg.at("hac");
      if (h.contains("bandwidth")) {
        if (h.at("bandwidth").is_string()) {
          if (h.at("bandwidth").get<std::string>() != "rule")
            throw DataError("config hac.bandwidth: a number or \"rule\"");
          r.hac.bandwidth = -1;
        } else {
          r.hac.bandwidth = h.at("bandwidth").get<int>();
        }
      }
      if (h.contains("kernel")) r.hac.kernel = parse_kernel(h.at("kernel").get<std::string>());
    }
    if (cfg.contains("experiment")) {
      const json& e = cfg.at("experiment");
      if (e.contains("T")) {
        if (e.at("T").is_array())
          for (int t : e.at("T")) r.T_values.push_back(t);
        else
          r.T_values.push_back(e.at("T").get<int>());
      }
      if (e.contains("replications")) r.replications = e.at("replications").get<int>();
      if (e.contains("seed")) r.seed = e.at("seed").get<std::uint64_t>();
      if (e.contains("level")) r.level = e.at("level").get<double>();
    }
  } catch (const json::exception& e) {
    throw DataError("config " + f.config + ": " + e.what());
  }

  // Flags override whatever the config said.
  if (!f.data.empty()) r.data = f.data;
  if (!f.out.empty()) r.out = f.out;
  if (f.lags >= 0) r.reg.K = f.lags;
  if (!f.variant.empty()) r.reg.variant = parse_variant(f.variant);
  if (f.marginal_lag >= 0) r.reg.marginal_lag = f.marginal_lag;
  if (f.design_p >= 0.0) {
    r.p_scalar = f.design_p;
    r.p_vector.clear();
  }
  if (f.eps >= 0.0) r.design_eps = f.eps;
  if (f.level >= 0.0) r.level = f.level;
  if (!f.joint.empty()) r.joint = parse_int_list(f.joint, "--joint-lags");
  if (f.frt_draws >= 0) r.frt_draws = f.frt_draws;
  if (!f.bandwidth.empty()) {
    if (f.bandwidth == "rule") {
      r.hac.bandwidth = -1;
    } else {
      try {
        std::size_t used = 0;
        r.hac.bandwidth = std::stoi(f.bandwidth, &used);
        if (used != f.bandwidth.size() || r.hac.bandwidth < 0) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw SpecError("--bandwidth: a nonnegative integer or 'rule'");
      }
    }
  }
  if (!f.kernel.empty()) r.hac.kernel = parse_kernel(f.kernel);
  if (f.seed >= 0) r.seed = static_cast<std::uint64_t>(f.seed);
  if (f.threads > 0) r.threads = f.threads;
  if (f.reps >= 0) r.replications = f.reps;
  if (!f.T_list.empty()) r.T_values = parse_int_list(f.T_list, "--T");
  return r;
}

void require_regression(const Resolved& r) {
  if (r.reg.K < 0) throw SpecError("set --lags (or regression.lags in the config)");
}

std::function<PotentialOutcomeModel(int)> model_factory(const Resolved& r) {
  if (!r.has_model) throw SpecError("this command needs a model section in the config");
  ModelSpec ms = r.model;
  return [ms](int T) { return build_model(ms, T); };
}

std::function<AssignmentDesign(int)> design_factory(const Resolved& r) {
  if (!r.p_vector.empty()) {
    std::vector<double> p = r.p_vector;
    double eps = r.design_eps;
    return [p, eps](int T) {
      if (static_cast<int>(p.size()) != T)
        throw SpecError("design.p array length does not match T");
      return AssignmentDesign::bernoulli(p, eps);
    };
  }
  if (r.p_scalar >= 0.0) {
    double p = r.p_scalar, eps = r.design_eps;
    return [p, eps](int T) { return AssignmentDesign::bernoulli_constant(T, p, eps); };
  }
  throw SpecError("this command needs a design (--design-p or design.p in the config)");
}

ExperimentConfig experiment_config(const Resolved& r) {
  require_regression(r);
  ExperimentConfig cfg;
  cfg.make_model = model_factory(r);
  cfg.make_design = design_factory(r);
  cfg.reg = r.reg;
  cfg.hac = r.hac;
  cfg.T_values = r.T_values;
  cfg.replications = r.replications;
  cfg.root_seed = r.seed;
  cfg.threads = r.threads;
  cfg.name = r.name;
  if (cfg.T_values.empty()) throw SpecError("set --T (or experiment.T in the config)");
  return cfg;
}

std::filesystem::path ensure_out_dir(const Resolved& r) {
  std::filesystem::path dir = std::filesystem::path(r.out) / r.name;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string());
  return dir;
}

json method_block(const Resolved& r) {
  json m;
  m["kernel"] = kernel_name(r.hac.kernel);
  m["bandwidth"] = r.hac.bandwidth < 0 ? json("rule: floor(T^(1/4))") : json(r.hac.bandwidth);
  m["se"] = "sqrt(Vhat_jj / (T-K)), no degrees-of-freedom correction";
  m["ci"] = "normal pivot at the requested level";
  return m;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot open " + path.string() + " for writing");
  f << j.dump(2) << '\n';
}

struct AnalysisInput {
  Dataset ds;
  AssignmentDesign design;
  EstimateResult result;
};

AnalysisInput analysis_input(const Resolved& r) {
  if (r.data.empty()) throw SpecError("this command needs --data <csv>");
  require_regression(r);
  Dataset ds = parse_dataset(r.data);
  AssignmentDesign design =
      !ds.has_p() && !ds.has_moments() && !r.p_vector.empty()
          ? AssignmentDesign::bernoulli(r.p_vector, r.design_eps)
          : design_from_dataset(ds, r.p_scalar, r.design_eps);
  TreatmentPath path{ds.z};
  EstimateResult result = estimate(ds.y, path, design, r.reg);
  attach_hac(result, r.hac);
  return AnalysisInput{std::move(ds), std::move(design), std::move(result)};
}

std::vector<int> effective_subset(const Resolved& r, const EstimateResult& result) {
  if (!r.joint.empty()) return r.joint;
  std::vector<int> all(result.tau_hat.size());
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = static_cast<int>(j);
  return all;
}

json report_json(const AnalysisInput& in, const InferenceReport& rep, const Resolved& r) {
  json j;
  j["length"] = in.result.T;
  j["lags"] = in.result.K;
  j["variant"] = in.result.variant == Variant::full        ? "full"
                 : in.result.variant == Variant::marginal  ? "marginal"
                 : in.result.variant == Variant::interaction ? "interaction"
                                                             : "exposure";
  j["bandwidth"] = in.result.hac_bandwidth;
  j["kernel"] = in.result.hac_kernel;
  j["level"] = rep.level;
  j["gram_condition"] = in.result.gram_condition;
  bool binary = true;
  for (double z : in.ds.z)
    if (z != 0.0 && z != 1.0) binary = false;
  if (binary) {
    double s1 = 0.0, s0 = 0.0;
    int n1 = 0, n0 = 0;
    for (int t = 0; t < in.ds.T(); ++t) {
      if (in.ds.z[t] != 0.0) {
        s1 += in.ds.y[t];
        ++n1;
      } else {
        s0 += in.ds.y[t];
        ++n0;
      }
    }
    if (n1 > 0) j["mean_treated"] = s1 / n1;
    if (n0 > 0) j["mean_control"] = s0 / n0;
  }
  j["joint"] = {{"statistic", rep.joint.statistic},
                {"df", rep.joint.df},
                {"p", rep.joint.p},
                {"lags", rep.joint_subset}};
  json rows = json::array();
  for (const LagInference& li : rep.lags)
    rows.push_back({{"coefficient", li.coefficient},
                    {"estimate", li.estimate},
                    {"se", li.se},
                    {"ci_low", li.ci_low},
                    {"ci_high", li.ci_high},
                    {"p", li.p},
                    {"degenerate", li.degenerate}});
  j["estimates"] = rows;
  j["method"] = method_block(r);
  return j;
}

void print_report(const json& j) {
  std::cout << "length " << j["length"].get<int>() << '\n';
  if (j.contains("mean_treated"))
    std::cout << "mean_treated " << fmt6(j["mean_treated"].get<double>()) << '\n';
  if (j.contains("mean_control"))
    std::cout << "mean_control " << fmt6(j["mean_control"].get<double>()) << '\n';
  std::cout << "bandwidth " << j["bandwidth"].get<int>() << " kernel "
            << j["kernel"].get<std::string>() << '\n';
  const json& joint = j["joint"];
  std::cout << "joint_wald statistic " << fmt6(joint["statistic"].get<double>()) << " df "
            << joint["df"].get<int>() << " p " << fmt6(joint["p"].get<double>()) << '\n';
  std::cout << "coefficient estimate se ci_low ci_high p\n";
  for (const json& row : j["estimates"])
    std::cout << row["coefficient"].get<int>() << ' ' << fmt6(row["estimate"].get<double>())
              << ' ' << fmt6(row["se"].get<double>()) << ' '
              << fmt6(row["ci_low"].get<double>()) << ' ' << fmt6(row["ci_high"].get<double>())
              << ' ' << fmt6(row["p"].get<double>()) << '\n';
}

int cmd_analyze(const Resolved& r) {
  AnalysisInput in = analysis_input(r);
  if (in.result.condition_warning)
    std::cerr << "warning: gram condition " << fmt6(in.result.gram_condition)
              << " exceeds 1e8; estimates may be unstable\n";
  InferenceReport rep = analyze_inference(in.result, r.level, effective_subset(r, in.result));
  json j = report_json(in, rep, r);
  if (r.frt_draws > 0) {
    FrtResult frt = frt_sharp(in.ds.y, TreatmentPath{in.ds.z}, in.design, r.reg, r.hac,
                              rep.joint_subset, r.frt_draws, r.seed);
    j["frt"] = {{"observed", frt.observed},
                {"p", frt.p},
                {"draws", frt.draws},
                {"excluded", frt.excluded}};
  }
  print_report(j);
  if (j.contains("frt"))
    std::cout << "frt draws " << j["frt"]["draws"].get<int>() << " excluded "
              << j["frt"]["excluded"].get<int>() << " p " << fmt6(j["frt"]["p"].get<double>())
              << '\n';
  if (!r.out.empty()) write_json(r.out, j);
  return 0;
}

int cmd_frt(const Resolved& r) {
  AnalysisInput in = analysis_input(r);
  std::vector<int> subset = effective_subset(r, in.result);
  int draws = r.frt_draws > 0 ? r.frt_draws : 999;
  FrtResult frt = frt_sharp(in.ds.y, TreatmentPath{in.ds.z}, in.design, r.reg, r.hac, subset,
                            draws, r.seed);
  std::cout << "frt draws " << frt.draws << " excluded " << frt.excluded << " observed "
            << fmt6(frt.observed) << " p " << fmt6(frt.p) << '\n';
  if (!r.out.empty()) {
    json j;
    j["observed"] = frt.observed;
    j["p"] = frt.p;
    j["draws"] = frt.draws;
    j["excluded"] = frt.excluded;
    j["lags"] = subset;
    j["resampled"] = frt.resampled;
    j["method"] = method_block(r);
    write_json(r.out, j);
  }
  return 0;
}

int cmd_simulate(const Resolved& r) {
  if (r.T_values.size() != 1)
    throw SpecError("simulate needs exactly one T (--T or experiment.T)");
  int T = r.T_values[0];
  PotentialOutcomeModel model = model_factory(r)(T);
  AssignmentDesign design = design_factory(r)(T);
  if (model_length(model) != T) throw SpecError("simulate: model length differs from T");
  TreatmentPath path = draw_assignment(design, r.seed);
  Dataset ds;
  ds.z = path.z;
  ds.y = simulate(model, path);
  if (design.kind() == DesignKind::binary) ds.p = design.means();
  std::string out = r.out.empty() ? "dataset.csv" : r.out;
  write_dataset(out, ds);
  std::cout << "wrote " << out << " (T=" << T << ")\n";
  return 0;
}

int cmd_replicate(const Resolved& r) {
  ExperimentConfig cfg = experiment_config(r);
  json summary;
  summary["name"] = cfg.name;
  summary["command"] = "replicate";
  summary["replications"] = cfg.replications;
  summary["seed"] = cfg.root_seed;
  summary["lags"] = cfg.reg.K;
  summary["T"] = cfg.T_values;
  summary["method"] = method_block(r);
  json per_T = json::object();
  std::optional<std::filesystem::path> dir;
  if (!r.out.empty()) dir = ensure_out_dir(r);
  for (int T : cfg.T_values) {
    ReplicationSet rs = replicate(cfg, T);
    std::cout << "T=" << T << " R=" << rs.R << " K=" << rs.K << '\n';
    std::cout << "coefficient mean_tau sd_tau\n";
    for (int j = 0; j < rs.tau_hat.cols(); ++j)
      std::cout << j << ' ' << fmt6(rs.mean_tau[j]) << ' ' << fmt6(rs.sd_tau[j]) << '\n';
    json block;
    for (int j = 0; j < rs.tau_hat.cols(); ++j) {
      block["mean_tau"].push_back(rs.mean_tau[j]);
      block["sd_tau"].push_back(rs.sd_tau[j]);
    }
    if (dir) {
      std::string file = "replications_T" + std::to_string(T) + ".csv";
      write_replications_csv((*dir / file).string(), rs);
      block["file"] = file;
    }
    per_T[std::to_string(T)] = std::move(block);
  }
  summary["results"] = std::move(per_T);
  if (dir) write_json(*dir / "summary.json", summary);
  return 0;
}

int cmd_coverage(const Resolved& r) {
  ExperimentConfig cfg = experiment_config(r);
  CoverageTable table = coverage_table(cfg, r.level);
  std::cout << "level " << fmt6(table.level) << '\n';
  std::cout << "T";
  for (int j = 0; j < table.coverage.cols(); ++j) std::cout << " lag" << j;
  std::cout << '\n';
  for (std::size_t i = 0; i < table.T_values.size(); ++i) {
    std::cout << table.T_values[i];
    for (int j = 0; j < table.coverage.cols(); ++j)
      std::cout << ' ' << fmt6(table.coverage(i, j));
    std::cout << '\n';
  }
  if (!r.out.empty()) {
    std::filesystem::path dir = ensure_out_dir(r);
    write_coverage_csv((dir / "coverage.csv").string(), table);
    json summary;
    summary["name"] = cfg.name;
    summary["command"] = "coverage";
    summary["replications"] = cfg.replications;
    summary["seed"] = cfg.root_seed;
    summary["lags"] = cfg.reg.K;
    summary["T"] = cfg.T_values;
    summary["level"] = table.level;
    summary["file"] = "coverage.csv";
    summary["method"] = method_block(r);
    for (std::size_t i = 0; i < table.T_values.size(); ++i) {
      json row = json::array();
      for (int j = 0; j < table.coverage.cols(); ++j) row.push_back(table.coverage(i, j));
      summary["coverage"][std::to_string(table.T_values[i])] = std::move(row);
    }
    write_json(dir / "summary.json", summary);
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Design-based estimation and inference for switchback experiments"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&f](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON config file");
    sub->add_option("--out", f.out, "output file or directory");
    sub->add_option("--seed", f.seed, "root seed (nonnegative integer)");
    sub->add_option("--threads", f.threads, "worker threads (default: SWITCHBACK_THREADS or 1)");
    sub->add_option("--lags", f.lags, "number of lags K");
    sub->add_option("--variant", f.variant, "full | marginal | interaction | exposure");
    sub->add_option("--marginal-lag", f.marginal_lag, "lag kept by the marginal variant");
    sub->add_option("--bandwidth", f.bandwidth, "HAC bandwidth, integer or 'rule'");
    sub->add_option("--kernel", f.kernel, "bartlett | truncated");
    sub->add_option("--level", f.level, "confidence level, e.g. 0.95");
    sub->add_option("--joint-lags", f.joint, "comma list of coefficients for the joint test");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "estimate lagged effects from a dataset");
  add_common(analyze);
  analyze->add_option("--data", f.data, "input CSV (time,z,y[,p|mean,var])");
  analyze->add_option("--design-p", f.design_p, "constant treatment probability fallback");
  analyze->add_option("--eps", f.eps, "probability clamp for binary designs");
  analyze->add_option("--frt-draws", f.frt_draws, "also run the randomization test");

  CLI::App* simulate = app.add_subcommand("simulate", "generate a dataset from a model config");
  add_common(simulate);
  simulate->add_option("--T", f.T_list, "series length");
  simulate->add_option("--design-p", f.design_p, "constant treatment probability");
  simulate->add_option("--eps", f.eps, "probability clamp for binary designs");

  CLI::App* replicate = app.add_subcommand("replicate", "redraw assignments and re-estimate");
  add_common(replicate);
  replicate->add_option("--T", f.T_list, "comma list of series lengths");
  replicate->add_option("--reps", f.reps, "replication count");
  replicate->add_option("--design-p", f.design_p, "constant treatment probability");
  replicate->add_option("--eps", f.eps, "probability clamp for binary designs");

  CLI::App* coverage = app.add_subcommand("coverage", "empirical CI coverage table");
  add_common(coverage);
  coverage->add_option("--T", f.T_list, "comma list of series lengths");
  coverage->add_option("--reps", f.reps, "replication count");
  coverage->add_option("--design-p", f.design_p, "constant treatment probability");
  coverage->add_option("--eps", f.eps, "probability clamp for binary designs");

  CLI::App* frt = app.add_subcommand("frt", "randomization test of the sharp null");
  add_common(frt);
  frt->add_option("--data", f.data, "input CSV (time,z,y[,p])");
  frt->add_option("--design-p", f.design_p, "constant treatment probability fallback");
  frt->add_option("--eps", f.eps, "probability clamp for binary designs");
  frt->add_option("--frt-draws", f.frt_draws, "number of redraws (default 999)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    Resolved r = resolve(f);
    if (app.got_subcommand(analyze)) return cmd_analyze(r);
    if (app.got_subcommand(simulate)) return cmd_simulate(r);
    if (app.got_subcommand(replicate)) return cmd_replicate(r);
    if (app.got_subcommand(coverage)) return cmd_coverage(r);
    return cmd_frt(r);
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace cli
}  // namespace switchback
