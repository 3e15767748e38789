// Command-line surface: margin programs over clustered point sets.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "softpd/softpd.hpp"

namespace {

using nlohmann::json;

struct Common {
  std::string train;
  std::string test;
  std::string format = "auto";
  std::string sites = "means";
  std::string mps;
  std::string lp_exec;
  std::string save_model;
  double tol = softpd::kNumTol;
  long seed = 0;
  bool emit_json = false;
};

void add_model_out(CLI::App* sub, Common& c) {
  sub->add_option("--save-model", c.save_model, "write the diagram as model JSON");
}

void add_common(CLI::App* sub, Common& c, bool with_train = true) {
  if (with_train) sub->add_option("--train", c.train, "training data file")->required();
  sub->add_option("--test", c.test, "test data file");
  sub->add_option("--format", c.format, "input format: libsvm|csv|auto")
      ->check(CLI::IsMember({"libsvm", "csv", "auto"}));
  sub->add_option("--sites", c.sites, "sites: 'means' or a CSV site file");
  sub->add_option("--tol", c.tol, "slack tolerance for error/support decisions");
  sub->add_option("--seed", c.seed, "seed echoed into reports");
  sub->add_flag("--json", c.emit_json, "canonical JSON on stdout");
  sub->add_option("--mps", c.mps, "export the active program as fixed MPS");
  sub->add_option("--lp-exec", c.lp_exec,
                  "external LP solver command (gets MPS and output paths)");
}

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fmt_vec(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt6(v[i]);
  }
  return out + "]";
}

template <class T>
std::string fmt_ints(const std::vector<T>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(v[i]);
  }
  return out + "]";
}

std::string fmt_pairs(const std::vector<std::pair<std::size_t, int>>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += "(" + std::to_string(v[i].first) + ", " + std::to_string(v[i].second) + ")";
  }
  return out + "]";
}

softpd::ParsedDataset load_dataset(const std::string& path,
                                   const std::string& format) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string fmt = format;
  if (fmt == "auto")
    fmt = path.size() >= 4 && path.substr(path.size() - 4) == ".csv" ? "csv"
                                                                     : "libsvm";
  return fmt == "csv" ? softpd::parse_csv(in) : softpd::parse_libsvm(in);
}

softpd::SiteSet resolve_sites(const Common& c, const softpd::Dataset& data) {
  if (c.sites == "means") return data.cluster_means();
  std::ifstream in(c.sites);
  if (!in) throw std::runtime_error("cannot open " + c.sites);
  softpd::SiteSet s = softpd::parse_sites_csv(in);
  if (s.size() != data.clusters())
    throw std::invalid_argument("site file has " + std::to_string(s.size()) +
                                " sites for " + std::to_string(data.clusters()) +
                                " clusters");
  if (s.dim() != data.dim())
    throw std::invalid_argument("site file dimension disagrees with data");
  return s;
}

void maybe_export_mps(const Common& c, const softpd::LinearProgram& lp) {
  if (c.mps.empty()) return;
  std::ofstream out(c.mps);
  if (!out) throw std::runtime_error("cannot open " + c.mps);
  softpd::write_mps(out, lp);
}

softpd::Variant soft_variant(const std::string& name) {
  if (name == "mep") return softpd::Variant::PerPoint;
  if (name == "mme") return softpd::Variant::PerPair;
  throw std::invalid_argument("variant must be mep or mme");
}

void maybe_save_model(const std::string& path, const softpd::PowerDiagram& pd,
                      double eps, const std::string& variant, long t) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  softpd::Model m{pd, eps, variant, t};
  softpd::write_model(out, m);
}

void print_json(const json& j) {
  std::cout << softpd::canonical_json(j) << "\n";
}

json sites_json(const softpd::SiteSet& s) {
  json rows = json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    json row = json::array();
    for (double c : s.site(i)) row.push_back(c);
    rows.push_back(row);
  }
  return rows;
}

void run_separate(const Common& c) {
  const auto parsed = load_dataset(c.train, c.format);
  const auto sites = resolve_sites(c, parsed.data);
  const auto lp = softpd::build_hard_margin_lp(softpd::build_sigma(parsed.data, sites));
  maybe_export_mps(c, lp);
  const auto sol = softpd::make_solver(c.lp_exec).solve(lp);
  if (sol.status != softpd::LpStatus::Optimal)
    throw softpd::NumericError("hard-margin program did not solve to optimality");
  const std::size_t k = parsed.data.clusters();
  std::vector<double> gamma(k, 0.0);
  for (std::size_t i = 1; i < k; ++i) gamma[i] = sol.x[i - 1];
  const double eps = sol.x[k - 1];
  maybe_save_model(c.save_model, softpd::PowerDiagram(sites, gamma), eps, "spd", 0);
  if (c.emit_json) {
    json j;
    j["epsilon"] = eps;
    j["gamma"] = gamma;
    j["k"] = k;
    j["d"] = parsed.data.dim();
    j["separable"] = eps >= -c.tol;
    j["seed"] = c.seed;
    print_json(j);
  } else {
    std::cout << "epsilon = " << fmt6(eps) << "\n";
    std::cout << "gamma = " << fmt_vec(gamma) << "\n";
  }
}

void run_soft(const Common& c, const std::string& variant, long t) {
  const auto parsed = load_dataset(c.train, c.format);
  const auto sites = resolve_sites(c, parsed.data);
  const auto v = soft_variant(variant);
  const auto lp = softpd::build_soft_lp(parsed.data, sites, t, v);
  maybe_export_mps(c, lp);
  auto sol = softpd::make_solver(c.lp_exec).solve(lp);
  if (sol.status == softpd::LpStatus::Unbounded)
    throw softpd::UnboundedError(
        "soft program is unbounded at this t; use a smaller error budget");
  auto out = softpd::extract_soft_solution(std::move(sol), parsed.data, sites, t, v);
  const auto& s = *out.solution;
  maybe_save_model(c.save_model, s.diagram, s.epsilon, variant, t);
  const auto rep = softpd::extract_errors(s.diagram, parsed.data, s.epsilon, c.tol);
  if (c.emit_json) {
    json j;
    j["epsilon"] = s.epsilon;
    j["objective"] = s.objective;
    j["gamma"] = s.diagram.gamma;
    j["t"] = t;
    j["variant"] = variant;
    j["margin_errors"] = rep.error_points;
    j["support_points"] = rep.support_points;
    j["seed"] = c.seed;
    print_json(j);
  } else {
    std::cout << "epsilon = " << fmt6(s.epsilon) << "\n";
    std::cout << "objective = " << fmt6(s.objective) << "\n";
    std::cout << "gamma = " << fmt_vec(s.diagram.gamma) << "\n";
    std::cout << "margin_errors = " << fmt_ints(rep.error_points) << "\n";
    std::cout << "support_points = " << fmt_ints(rep.support_points) << "\n";
  }
}

void run_outliers(const Common& c, const std::string& variant, long t) {
  const auto parsed = load_dataset(c.train, c.format);
  const auto sites = resolve_sites(c, parsed.data);
  const auto v = soft_variant(variant);
  maybe_export_mps(c, softpd::build_soft_lp(parsed.data, sites, t, v));
  const auto rep = softpd::detect_outliers(parsed.data, sites, t, v,
                                           softpd::make_solver(c.lp_exec));
  maybe_save_model(c.save_model, rep.solution.diagram, rep.solution.epsilon,
                   variant, t);
  if (c.emit_json) {
    json j;
    j["outliers"] = rep.outliers;
    j["error_pairs"] = json::array();
    for (const auto& [l, r] : rep.error_pairs)
      j["error_pairs"].push_back(json::array({l, r}));
    j["epsilon"] = rep.solution.epsilon;
    j["t"] = t;
    j["variant"] = variant;
    j["seed"] = c.seed;
    print_json(j);
  } else {
    std::cout << "t = " << t << "\n";
    std::cout << "variant = " << variant << "\n";
    std::cout << "epsilon = " << fmt6(rep.solution.epsilon) << "\n";
    std::cout << "outliers = " << fmt_ints(rep.outliers) << "\n";
    if (v == softpd::Variant::PerPair)
      std::cout << "error_pairs = " << fmt_pairs(rep.error_pairs) << "\n";
  }
}

void run_threshold(const Common& c, const std::string& variant, bool cold) {
  const auto parsed = load_dataset(c.train, c.format);
  const auto sites = resolve_sites(c, parsed.data);
  const auto v = soft_variant(variant);
  maybe_export_mps(c, softpd::build_hard_margin_lp(softpd::build_sigma(parsed.data, sites)));
  const auto res = softpd::least_squares_threshold(
      parsed.data, sites, v, softpd::make_solver(c.lp_exec), !cold);
  maybe_save_model(c.save_model, res.diagram, res.epsilon, variant, res.t_min);
  if (c.emit_json) {
    json j;
    j["tau"] = res.tau;
    j["t_min"] = res.t_min;
    j["t_max"] = res.t_max;
    j["lp_solve_count"] = res.lp_solve_count;
    j["epsilon"] = res.epsilon;
    j["hard_epsilon"] = res.hard_epsilon;
    j["variant"] = variant;
    j["gamma"] = res.diagram.gamma;
    j["seed"] = c.seed;
    print_json(j);
  } else {
    std::cout << "tau = " << fmt6(res.tau) << "\n";
    std::cout << "t_min = " << res.t_min << "\n";
    std::cout << "t_max = " << res.t_max << "\n";
    std::cout << "lp_solve_count = " << res.lp_solve_count << "\n";
    std::cout << "epsilon = " << fmt6(res.epsilon) << "\n";
    std::cout << "hard_epsilon = " << fmt6(res.hard_epsilon) << "\n";
  }
}

void run_curve(const Common& c, const std::string& variant,
               const std::string& t_list) {
  const auto parsed = load_dataset(c.train, c.format);
  const auto sites = resolve_sites(c, parsed.data);
  const auto v = soft_variant(variant);
  std::vector<long> ts;
  if (t_list.empty()) {
    const long t_max = softpd::stage_limit(parsed.data, v);
    for (long t = 1; t <= t_max; ++t) ts.push_back(t);
  } else {
    std::istringstream in(t_list);
    std::string tok;
    while (std::getline(in, tok, ',')) ts.push_back(std::stol(tok));
  }
  const auto curve = softpd::epsilon_curve(parsed.data, sites, v, ts,
                                           softpd::make_solver(c.lp_exec));
  if (c.emit_json) {
    json rows = json::array();
    for (const auto& p : curve) {
      json row;
      row["t"] = p.t;
      row["unbounded"] = p.unbounded;
      if (p.unbounded) {
        row["epsilon"] = nullptr;
        row["theta"] = nullptr;
      } else {
        row["epsilon"] = p.epsilon;
        row["theta"] = p.theta;
      }
      rows.push_back(row);
    }
    json j;
    j["curve"] = rows;
    j["variant"] = variant;
    j["seed"] = c.seed;
    print_json(j);
  } else {
    for (const auto& p : curve) {
      if (p.unbounded)
        std::cout << "t=" << p.t << " epsilon=unbounded theta=unbounded\n";
      else
        std::cout << "t=" << p.t << " epsilon=" << fmt6(p.epsilon)
                  << " theta=" << fmt6(p.theta) << "\n";
    }
  }
}

void run_freesites(const Common& c, const std::string& variant, long t) {
  const auto parsed = load_dataset(c.train, c.format);
  softpd::FreeVariant v;
  if (variant == "spd") v = softpd::FreeVariant::Hard;
  else if (variant == "mme") v = softpd::FreeVariant::PerPair;
  else if (variant == "mep") v = softpd::FreeVariant::PerPoint;
  else throw std::invalid_argument("variant must be spd, mep or mme");
  std::optional<softpd::SiteSet> start;
  if (c.sites != "means") start = resolve_sites(c, parsed.data);
  maybe_export_mps(c, softpd::build_site_feasibility_lp(parsed.data));
  const auto rep = softpd::local_optimize(parsed.data, v, t, start,
                                          softpd::make_solver(c.lp_exec));
  maybe_save_model(c.save_model, softpd::PowerDiagram(rep.sites, rep.gamma),
                   rep.epsilon, variant, rep.t);
  if (c.emit_json) {
    json j;
    j["variant"] = variant;
    j["t"] = rep.t;
    j["objective"] = rep.objective;
    j["initial_objective"] = rep.initial_objective;
    j["epsilon"] = rep.epsilon;
    j["iterations"] = rep.iterations;
    j["converged"] = rep.converged;
    j["violation_norm"] = rep.violation_norm;
    j["sites"] = sites_json(rep.sites);
    j["gamma"] = rep.gamma;
    j["seed"] = c.seed;
    print_json(j);
  } else {
    std::cout << "variant = " << variant << "\n";
    std::cout << "t = " << rep.t << "\n";
    std::cout << "initial_objective = " << fmt6(rep.initial_objective) << "\n";
    std::cout << "objective = " << fmt6(rep.objective) << "\n";
    std::cout << "epsilon = " << fmt6(rep.epsilon) << "\n";
    std::cout << "iterations = " << rep.iterations << "\n";
    std::cout << "converged = " << (rep.converged ? "yes" : "no") << "\n";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6e", rep.violation_norm);
    std::cout << "violation_norm = " << buf << "\n";
  }
}

void run_classify(const Common& c, const std::string& model_path,
                  const std::string& input_path) {
  std::ifstream min(model_path);
  if (!min) throw std::runtime_error("cannot open " + model_path);
  const softpd::Model model = softpd::read_model(min);
  const auto parsed = load_dataset(input_path, c.format);
  const auto rep = softpd::evaluate_classifier(model.diagram, parsed.data);
  std::vector<long> preds;
  preds.reserve(parsed.data.size());
  for (std::size_t l = 0; l < parsed.data.size(); ++l)
    preds.push_back(model.diagram.classify(parsed.data.point(l)) + 1);
  if (c.emit_json) {
    json j;
    j["predictions"] = preds;
    j["misclassified"] = rep.misclassified;
    j["total"] = rep.total;
    j["rate"] = rep.rate;
    j["seed"] = c.seed;
    print_json(j);
  } else {
    std::cout << "predictions = " << fmt_ints(preds) << "\n";
    std::cout << "misclassified = " << rep.misclassified << " / " << rep.total
              << "\n";
    std::cout << "rate = " << fmt6(rep.rate) << "\n";
  }
}

void run_eval(const Common& c, const std::string& variant) {
  if (c.test.empty()) throw std::invalid_argument("--test is required for eval");
  const auto train = load_dataset(c.train, c.format);
  const auto test = load_dataset(c.test, c.format);
  const auto sites = resolve_sites(c, train.data);
  const auto v = soft_variant(variant);
  const auto thr = softpd::least_squares_threshold(train.data, sites, v,
                                                   softpd::make_solver(c.lp_exec));
  maybe_save_model(c.save_model, thr.diagram, thr.epsilon, variant, thr.t_min);
  const auto rep = softpd::evaluate_classifier(thr.diagram, test.data);
  json conf = json::array();
  for (std::size_t i = 0; i < rep.k; ++i) {
    json row = json::array();
    for (std::size_t jx = 0; jx < rep.k; ++jx) row.push_back(rep.at(i, jx));
    conf.push_back(row);
  }
  if (c.emit_json) {
    json j;
    j["tau"] = thr.tau;
    j["t_min"] = thr.t_min;
    j["t_max"] = thr.t_max;
    j["lp_solve_count"] = thr.lp_solve_count;
    j["variant"] = variant;
    j["misclassified"] = rep.misclassified;
    j["total"] = rep.total;
    j["rate"] = rep.rate;
    j["confusion"] = conf;
    j["seed"] = c.seed;
    print_json(j);
  } else {
    std::cout << "tau = " << fmt6(thr.tau) << "\n";
    std::cout << "t_min = " << thr.t_min << "\n";
    std::cout << "misclassified = " << rep.misclassified << " / " << rep.total
              << "\n";
    std::cout << "rate = " << fmt6(rep.rate) << "\n";
    std::cout << "confusion = " << conf.dump() << "\n";
  }
}

void run_plot(const Common& c, const std::string& variant, long t,
              const std::string& model_path, const std::string& out_path) {
  const auto parsed = load_dataset(c.train, c.format);
  std::optional<softpd::PowerDiagram> diagram;
  double eps = 0.0;
  if (!model_path.empty()) {
    std::ifstream min(model_path);
    if (!min) throw std::runtime_error("cannot open " + model_path);
    softpd::Model m = softpd::read_model(min);
    eps = m.epsilon;
    diagram.emplace(std::move(m.diagram));
  } else if (variant == "spd") {
    const auto sites = resolve_sites(c, parsed.data);
    const auto lp = softpd::build_hard_margin_lp(softpd::build_sigma(parsed.data, sites));
    const auto sol = softpd::make_solver(c.lp_exec).solve(lp);
    if (sol.status != softpd::LpStatus::Optimal)
      throw softpd::NumericError("hard-margin program did not solve to optimality");
    const std::size_t k = parsed.data.clusters();
    std::vector<double> gamma(k, 0.0);
    for (std::size_t i = 1; i < k; ++i) gamma[i] = sol.x[i - 1];
    eps = sol.x[k - 1];
    diagram.emplace(sites, std::move(gamma));
  } else {
    const auto sites = resolve_sites(c, parsed.data);
    const auto rep = softpd::detect_outliers(parsed.data, sites, t,
                                             soft_variant(variant),
                                             softpd::make_solver(c.lp_exec));
    eps = rep.solution.epsilon;
    diagram.emplace(rep.solution.diagram);
  }
  const std::string svg = softpd::emit_svg(*diagram, parsed.data, eps);
  if (out_path.empty()) {
    std::cout << svg;
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open " + out_path);
    out << svg;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maximum-margin and soft power diagrams over clustered points"};
  app.require_subcommand(1);

  Common c;
  std::string variant = "mep";
  std::string fs_variant = "spd";
  long t = 1;
  std::string t_list;
  std::string model_path, input_path, out_path;
  bool cold = false;

  auto* sep = app.add_subcommand("separate", "largest-margin diagram at fixed sites");
  add_common(sep, c);
  add_model_out(sep, c);
  sep->callback([&] { run_separate(c); });

  auto* soft = app.add_subcommand("soft", "soft-margin diagram at a fixed error budget");
  add_common(soft, c);
  add_model_out(soft, c);
  soft->add_option("--variant", variant, "mep|mme")->check(CLI::IsMember({"mep", "mme"}));
  soft->add_option("--t", t, "error budget")->required();
  soft->callback([&] { run_soft(c, variant, t); });

  auto* outl = app.add_subcommand("outliers", "margin-error points of one soft solve");
  add_common(outl, c);
  add_model_out(outl, c);
  outl->add_option("--variant", variant, "mep|mme")->check(CLI::IsMember({"mep", "mme"}));
  outl->add_option("--t", t, "error budget")->required();
  outl->callback([&] { run_outliers(c, variant, t); });

  auto* thr = app.add_subcommand("threshold", "smallest error budget with nonnegative margin");
  add_common(thr, c);
  add_model_out(thr, c);
  thr->add_option("--variant", variant, "mep|mme")->check(CLI::IsMember({"mep", "mme"}));
  thr->add_flag("--cold", cold, "disable warm starts in the binary search");
  thr->callback([&] { run_threshold(c, variant, cold); });

  auto* cur = app.add_subcommand("curve", "margin and objective per error budget");
  add_common(cur, c);
  cur->add_option("--variant", variant, "mep|mme")->check(CLI::IsMember({"mep", "mme"}));
  cur->add_option("--t-list", t_list, "comma-separated budgets (default: all)");
  cur->callback([&] { run_curve(c, variant, t_list); });

  auto* fs = app.add_subcommand("freesites", "local optimization over free sites");
  add_common(fs, c);
  add_model_out(fs, c);
  fs->add_option("--variant", fs_variant, "spd|mep|mme")
      ->check(CLI::IsMember({"spd", "mep", "mme"}));
  fs->add_option("--t", t, "error budget (ignored for spd)");
  fs->callback([&] { run_freesites(c, fs_variant, t); });

  auto* cls = app.add_subcommand("classify", "classify points with a stored model");
  add_common(cls, c, false);
  cls->add_option("--model", model_path, "model JSON file")->required();
  cls->add_option("--input", input_path, "points to classify")->required();
  cls->callback([&] { run_classify(c, model_path, input_path); });

  auto* ev = app.add_subcommand("eval", "train threshold diagram, score a test set");
  add_common(ev, c);
  add_model_out(ev, c);
  ev->add_option("--variant", variant, "mep|mme")->check(CLI::IsMember({"mep", "mme"}));
  ev->callback([&] { run_eval(c, variant); });

  auto* plot = app.add_subcommand("plot", "SVG rendering (2-D data only)");
  add_common(plot, c);
  plot->add_option("--variant", fs_variant, "spd|mep|mme")
      ->check(CLI::IsMember({"spd", "mep", "mme"}));
  plot->add_option("--t", t, "error budget for soft variants");
  plot->add_option("--model", model_path, "render a stored model instead of solving");
  plot->add_option("--out", out_path, "output file (default stdout)");
  plot->callback([&] { run_plot(c, fs_variant, t, model_path, out_path); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
