#include "flatproc/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "flatproc/errors.hpp"
#include "flatproc/moments.hpp"
#include "flatproc/simulator.hpp"
#include "flatproc/stats.hpp"

namespace flatproc::cli {
namespace {

using nlohmann::json;

struct RunConfig {
  ProcessParams params;
  std::string convention = "invariant";
  int j = 1;
  int max_order = 4;
  std::int64_t reps = 1000;
  std::uint64_t seed = 0;
  int workers = 0;
  std::int64_t block_size = 1024;
  double max_flats = 1e7;
  std::string out;
  std::string format = "csv";
  std::string realizations;
  double threshold = 4.0;
  double perturb_exact = 1.0;
  std::vector<double> rhos;
  double slope_min = -0.65;
  double slope_max = -0.35;
  bool sample_standardize = false;
};

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void add_process_options(CLI::App* app, RunConfig& cfg) {
  app->add_option("--dim", cfg.params.dim, "ambient dimension d")->capture_default_str();
  app->add_option("--k", cfg.params.k, "flat dimension k")->capture_default_str();
  app->add_option("--intensity", cfg.params.intensity, "intensity tau_k")->capture_default_str();
  app->add_option("--radius", cfg.params.radius, "window radius rho")->capture_default_str();
  app->add_option("--convention", cfg.convention, "measure convention")
      ->check(CLI::IsMember({"invariant", "signed-distance"}))
      ->capture_default_str();
  app->add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app->add_option("--out", cfg.out, "output path (default stdout)");
}

void add_run_options(CLI::App* app, RunConfig& cfg) {
  app->add_option("--reps", cfg.reps, "replications")->capture_default_str();
  app->add_option("--seed", cfg.seed, "master seed")->capture_default_str();
  app->add_option("--workers", cfg.workers, "worker threads (never changes results)");
  app->add_option("--block-size", cfg.block_size, "replications per reduction block")->capture_default_str();
  app->add_option("--max-flats", cfg.max_flats, "cap on the expected flat count per realization")
      ->capture_default_str();
}

void finalize(RunConfig& cfg, bool needs_j) {
  cfg.params.convention = parse_convention(cfg.convention);
  cfg.params.validate();
  if (needs_j && (cfg.j < 0 || cfg.j > cfg.params.k)) {
    throw UsageError("--j must satisfy 0 <= j <= k (got j=" + std::to_string(cfg.j) +
                     ", k=" + std::to_string(cfg.params.k) + ")");
  }
}

void check_reps(const RunConfig& cfg) {
  if (cfg.reps < 1) throw UsageError("--reps must be >= 1");
  if (cfg.block_size < 1) throw UsageError("--block-size must be >= 1");
}

MonteCarloOptions mc_options(const RunConfig& cfg) {
  MonteCarloOptions o;
  o.workers = cfg.workers;
  o.block_size = cfg.block_size;
  o.max_mean_flats = cfg.max_flats;
  return o;
}

void write_config_header(std::ostream& os, const std::string& command, const RunConfig& cfg, bool with_run) {
  os << "# flatproc " << command << "\n";
  os << "# dim=" << cfg.params.dim << "\n# k=" << cfg.params.k << "\n";
  os << "# intensity=" << format_double(cfg.params.intensity) << "\n";
  os << "# radius=" << format_double(cfg.params.radius) << "\n";
  os << "# convention=" << to_string(cfg.params.convention) << "\n";
  if (with_run) {
    os << "# reps=" << cfg.reps << "\n# seed=" << cfg.seed << "\n# block_size=" << cfg.block_size << "\n";
  }
}

json config_json(const std::string& command, const RunConfig& cfg, bool with_run) {
  json j;
  j["command"] = command;
  j["dim"] = cfg.params.dim;
  j["k"] = cfg.params.k;
  j["intensity"] = cfg.params.intensity;
  j["radius"] = cfg.params.radius;
  j["convention"] = std::string(to_string(cfg.params.convention));
  if (with_run) {
    j["reps"] = cfg.reps;
    j["seed"] = cfg.seed;
    j["block_size"] = cfg.block_size;
  }
  return j;
}

// --- exact -----------------------------------------------------------------

int cmd_exact(const RunConfig& cfg, std::ostream& os) {
  if (cfg.max_order < 1 || cfg.max_order > kMaxPartitionOrder) {
    throw UsageError("--max-order must be in [1, " + std::to_string(kMaxPartitionOrder) + "]");
  }
  const auto& p = cfg.params;
  const MomentReport report = moment_report(p, cfg.j, cfg.max_order);
  const auto a = functional_table(p, cfg.j, cfg.max_order);
  std::vector<AsymptoticTerm> moment_terms;
  std::vector<AsymptoticTerm> cumulant_terms;
  for (int m = 1; m <= cfg.max_order; ++m) {
    moment_terms.push_back(asymptotic_moment(p, cfg.j, m));
    cumulant_terms.push_back(asymptotic_cumulant(p, cfg.j, m));
  }
  const double bound = berry_esseen_bound(p, cfg.j);
  const Eigen::MatrixXd cov = covariance_matrix(p);

  if (cfg.format == "json") {
    json doc = config_json("exact", cfg, false);
    doc["j"] = cfg.j;
    doc["max_order"] = cfg.max_order;
    doc["mean"] = report.mean;
    json fa = json::array(), mu = json::array(), gamma = json::array(), me = json::array(), mc = json::array(),
         ce = json::array(), cc = json::array(), lim = json::array();
    for (int m = 1; m <= cfg.max_order; ++m) {
      const auto i = static_cast<std::size_t>(m);
      fa.push_back(a[i]);
      mu.push_back(report.central_moments[m]);
      gamma.push_back(report.cumulants[m]);
      me.push_back(moment_terms[i - 1].rho_exponent);
      mc.push_back(moment_terms[i - 1].coefficient);
      ce.push_back(cumulant_terms[i - 1].rho_exponent);
      cc.push_back(cumulant_terms[i - 1].coefficient);
      lim.push_back(normalized_moment_limit(m));
    }
    doc["A"] = fa;
    doc["central_moments"] = mu;
    doc["cumulants"] = gamma;
    doc["moment_rho_exponents"] = me;
    doc["moment_coefficients"] = mc;
    doc["cumulant_rho_exponents"] = ce;
    doc["cumulant_coefficients"] = cc;
    doc["normalized_moment_limits"] = lim;
    doc["berry_esseen_bound"] = bound;
    json rows = json::array();
    for (Eigen::Index r = 0; r < cov.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < cov.cols(); ++c) row.push_back(cov(r, c));
      rows.push_back(row);
    }
    doc["covariance"] = rows;
    os << doc.dump(2) << "\n";
    return kSuccess;
  }

  write_config_header(os, "exact", cfg, false);
  os << "# j=" << cfg.j << "\n# max_order=" << cfg.max_order << "\n";
  os << "quantity,index,value\n";
  os << "mean,1," << format_double(report.mean) << "\n";
  auto per_order = [&](const char* name, auto&& value_at) {
    for (int m = 1; m <= cfg.max_order; ++m) os << name << "," << m << "," << format_double(value_at(m)) << "\n";
  };
  per_order("A", [&](int m) { return a[static_cast<std::size_t>(m)]; });
  per_order("central_moment", [&](int m) { return report.central_moments[m]; });
  per_order("cumulant", [&](int m) { return report.cumulants[m]; });
  per_order("moment_rho_exponent", [&](int m) { return moment_terms[static_cast<std::size_t>(m - 1)].rho_exponent; });
  per_order("moment_coefficient", [&](int m) { return moment_terms[static_cast<std::size_t>(m - 1)].coefficient; });
  per_order("cumulant_rho_exponent",
            [&](int m) { return cumulant_terms[static_cast<std::size_t>(m - 1)].rho_exponent; });
  per_order("cumulant_coefficient",
            [&](int m) { return cumulant_terms[static_cast<std::size_t>(m - 1)].coefficient; });
  per_order("normalized_moment_limit", [&](int m) { return normalized_moment_limit(m); });
  os << "berry_esseen_bound,0," << format_double(bound) << "\n";
  for (Eigen::Index r = 0; r < cov.rows(); ++r) {
    for (Eigen::Index c = 0; c < cov.cols(); ++c) {
      os << "covariance," << r << ":" << c << "," << format_double(cov(r, c)) << "\n";
    }
  }
  return kSuccess;
}

// --- simulate --------------------------------------------------------------

void export_realizations(const RunConfig& cfg) {
  std::ofstream file(cfg.realizations);
  if (!file) throw std::ios_base::failure("cannot open " + cfg.realizations);
  const auto& p = cfg.params;
  write_config_header(file, "simulate realizations", cfg, true);
  file << "rep,flat,distance";
  for (int i = 0; i < p.dim; ++i) file << ",offset" << i;
  for (int a = 0; a < p.k; ++a) {
    for (int i = 0; i < p.dim; ++i) file << ",dir" << a << "_" << i;
  }
  file << "\n";
  for (std::int64_t rep = 0; rep < cfg.reps; ++rep) {
    auto rng = replication_stream(cfg.seed, static_cast<std::uint64_t>(rep));
    const Realization r = sample_realization(p, rng, true);
    for (std::size_t f = 0; f < r.flats.size(); ++f) {
      const auto& flat = r.flats[f];
      file << rep << "," << f << "," << format_double(flat.distance);
      for (int i = 0; i < p.dim; ++i) file << "," << format_double(flat.frame->offset_direction(i));
      for (int a = 0; a < p.k; ++a) {
        for (int i = 0; i < p.dim; ++i) file << "," << format_double(flat.frame->directions(i, a));
      }
      file << "\n";
    }
  }
  if (!file) throw std::ios_base::failure("write failed for " + cfg.realizations);
}

int cmd_simulate(const RunConfig& cfg, std::ostream& os) {
  check_reps(cfg);
  const auto& p = cfg.params;
  const auto values = simulate_intrinsic_volumes(p, cfg.reps, cfg.seed, mc_options(cfg));
  const auto width = static_cast<std::size_t>(p.k) + 1;

  std::vector<double> means(width, 0.0), variances(width, 0.0);
  for (std::size_t c = 0; c < width; ++c) {
    double sum = 0.0;
    for (std::int64_t r = 0; r < cfg.reps; ++r) sum += values[static_cast<std::size_t>(r) * width + c];
    means[c] = sum / static_cast<double>(cfg.reps);
    double ss = 0.0;
    for (std::int64_t r = 0; r < cfg.reps; ++r) {
      const double d = values[static_cast<std::size_t>(r) * width + c] - means[c];
      ss += d * d;
    }
    variances[c] = cfg.reps > 1 ? ss / static_cast<double>(cfg.reps - 1) : 0.0;
  }
  if (!cfg.realizations.empty()) export_realizations(cfg);

  if (cfg.format == "json") {
    json doc = config_json("simulate", cfg, true);
    json rows = json::array();
    for (std::int64_t r = 0; r < cfg.reps; ++r) {
      json row = json::array();
      for (std::size_t c = 0; c < width; ++c) row.push_back(values[static_cast<std::size_t>(r) * width + c]);
      rows.push_back(row);
    }
    doc["samples"] = rows;
    doc["summary"] = {{"count", cfg.reps}, {"means", means}, {"variances", variances}};
    os << doc.dump(2) << "\n";
    return kSuccess;
  }

  write_config_header(os, "simulate", cfg, true);
  os << "rep";
  for (std::size_t c = 0; c < width; ++c) os << ",V" << c;
  os << "\n";
  for (std::int64_t r = 0; r < cfg.reps; ++r) {
    os << r;
    for (std::size_t c = 0; c < width; ++c) os << "," << format_double(values[static_cast<std::size_t>(r) * width + c]);
    os << "\n";
  }
  os << "# summary count=" << cfg.reps << "\n";
  for (std::size_t c = 0; c < width; ++c) {
    os << "# summary V" << c << " mean=" << format_double(means[c]) << " variance=" << format_double(variances[c])
       << "\n";
  }
  return kSuccess;
}

// --- validate --------------------------------------------------------------

int cmd_validate(const RunConfig& cfg, std::ostream& os, std::ostream& err) {
  check_reps(cfg);
  constexpr int kMaxValidatedOrder = kMaxAccumulatedOrder / 2;
  if (cfg.max_order < 2 || cfg.max_order > kMaxValidatedOrder) {
    throw UsageError("--orders must be in [2, " + std::to_string(kMaxValidatedOrder) + "]");
  }
  if (!(cfg.threshold > 0.0)) throw UsageError("--threshold must be positive");
  const auto& p = cfg.params;
  const int accumulated = std::max(2 * cfg.max_order, SampleAccumulator::kCrossOrder);
  const SampleAccumulator acc = run_monte_carlo(p, p.k, cfg.reps, accumulated, cfg.seed, mc_options(cfg));

  std::vector<ValidationRow> rows;
  for (int j = 0; j <= p.k; ++j) {
    const auto moments = sample_central_moments(acc, j, cfg.max_order);
    for (int m = 2; m <= cfg.max_order; ++m) {
      rows.push_back(make_validation_row("central_moment:j=" + std::to_string(j) + ":m=" + std::to_string(m),
                                         central_moment_exact(p, j, m) * cfg.perturb_exact, moments.values[m],
                                         moments.standard_errors[static_cast<std::size_t>(m)]));
    }
    if (cfg.max_order >= 3) {
      const auto cumulants = sample_cumulants(acc, j, cfg.max_order);
      for (int m = 3; m <= cfg.max_order; ++m) {
        rows.push_back(make_validation_row("cumulant:j=" + std::to_string(j) + ":m=" + std::to_string(m),
                                           cumulant_exact(p, j, m) * cfg.perturb_exact, cumulants.values[m],
                                           cumulants.standard_errors[static_cast<std::size_t>(m)]));
      }
    }
  }
  if (p.k >= 1) {
    const auto sample = sample_covariance_matrix(acc);
    const Eigen::MatrixXd exact = covariance_matrix(p);
    for (int a = 0; a <= p.k; ++a) {
      for (int b = a + 1; b <= p.k; ++b) {
        rows.push_back(make_validation_row("correlation:" + std::to_string(a) + "-" + std::to_string(b),
                                           exact(a, b) * cfg.perturb_exact, sample.correlation(a, b),
                                           sample.standard_errors(a, b)));
      }
    }
  }

  bool pass = true;
  for (const auto& row : rows) {
    if (!(std::abs(row.z) <= cfg.threshold)) {
      pass = false;
      err << "validation failed: " << row.quantity << " exact=" << format_double(row.exact)
          << " estimate=" << format_double(row.estimate) << " se=" << format_double(row.standard_error)
          << " z=" << format_double(row.z) << "\n";
    }
  }

  if (cfg.format == "json") {
    json doc = config_json("validate", cfg, true);
    doc["max_order"] = cfg.max_order;
    doc["threshold"] = cfg.threshold;
    json table = json::array();
    for (const auto& row : rows) {
      table.push_back({{"quantity", row.quantity},
                       {"exact", row.exact},
                       {"estimate", row.estimate},
                       {"standard_error", row.standard_error},
                       {"z", row.z}});
    }
    doc["rows"] = table;
    doc["pass"] = pass;
    os << doc.dump(2) << "\n";
  } else {
    write_config_header(os, "validate", cfg, true);
    os << "# max_order=" << cfg.max_order << "\n# threshold=" << format_double(cfg.threshold) << "\n";
    os << "quantity,exact,estimate,standard_error,z\n";
    for (const auto& row : rows) {
      os << row.quantity << "," << format_double(row.exact) << "," << format_double(row.estimate) << ","
         << format_double(row.standard_error) << "," << format_double(row.z) << "\n";
    }
    os << "# pass=" << (pass ? "true" : "false") << "\n";
  }
  return pass ? kSuccess : kValidationFailed;
}

// --- clt -------------------------------------------------------------------

int cmd_clt(const RunConfig& cfg, std::ostream& os, std::ostream& err) {
  check_reps(cfg);
  if (cfg.rhos.size() < 3) throw UsageError("--rhos needs at least three radii");
  if (cfg.slope_min > cfg.slope_max) throw UsageError("--slope-min exceeds --slope-max");
  const RateFit fit =
      clt_rate_fit(cfg.params, cfg.j, cfg.rhos, cfg.reps, cfg.seed, mc_options(cfg), cfg.sample_standardize);

  bool pass = fit.slope >= cfg.slope_min && fit.slope <= cfg.slope_max;
  if (!pass) {
    err << "clt: fitted slope " << format_double(fit.slope) << " outside [" << format_double(cfg.slope_min) << ", "
        << format_double(cfg.slope_max) << "]\n";
  }
  for (std::size_t i = 0; i < fit.rhos.size(); ++i) {
    if (!(fit.distances[i] <= fit.bounds[i])) {
      pass = false;
      err << "clt: distance " << format_double(fit.distances[i]) << " exceeds bound " << format_double(fit.bounds[i])
          << " at rho=" << format_double(fit.rhos[i]) << "\n";
    }
  }

  if (cfg.format == "json") {
    json doc = config_json("clt", cfg, true);
    doc["j"] = cfg.j;
    doc["rhos"] = fit.rhos;
    doc["distances"] = fit.distances;
    doc["bounds"] = fit.bounds;
    doc["slope"] = fit.slope;
    doc["intercept"] = fit.intercept;
    doc["target_slope"] = -0.5 * cfg.params.translation_dim();
    doc["pass"] = pass;
    os << doc.dump(2) << "\n";
  } else {
    write_config_header(os, "clt", cfg, true);
    os << "# j=" << cfg.j << "\n";
    os << "rho,distance,bound\n";
    for (std::size_t i = 0; i < fit.rhos.size(); ++i) {
      os << format_double(fit.rhos[i]) << "," << format_double(fit.distances[i]) << ","
         << format_double(fit.bounds[i]) << "\n";
    }
    os << "# slope=" << format_double(fit.slope) << "\n# intercept=" << format_double(fit.intercept) << "\n";
    os << "# target_slope=" << format_double(-0.5 * cfg.params.translation_dim()) << "\n";
    os << "# pass=" << (pass ? "true" : "false") << "\n";
  }
  return pass ? kSuccess : kValidationFailed;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact moments and Monte Carlo simulation of Poisson k-flat processes in a ball", "flatproc"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* exact = app.add_subcommand("exact", "exact moments, cumulants, asymptotics, bound and covariance");
  add_process_options(exact, cfg);
  exact->add_option("--j", cfg.j, "intrinsic volume index")->capture_default_str();
  exact->add_option("--max-order", cfg.max_order, "highest order")->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "per-replication intrinsic volume vectors");
  add_process_options(simulate, cfg);
  add_run_options(simulate, cfg);
  simulate->add_option("--realizations", cfg.realizations, "also export sampled flats (with frames) as CSV");

  auto* validate = app.add_subcommand("validate", "Monte Carlo vs exact z-score table");
  add_process_options(validate, cfg);
  add_run_options(validate, cfg);
  validate->add_option("--max-order,--orders", cfg.max_order, "highest moment order")->capture_default_str();
  validate->add_option("--threshold", cfg.threshold, "|z| acceptance threshold")->capture_default_str();
  validate->add_option("--perturb-exact", cfg.perturb_exact, "multiply exact targets (harness self-check)")
      ->group("");

  auto* clt = app.add_subcommand("clt", "Kolmogorov distance decay and rate fit");
  add_process_options(clt, cfg);
  add_run_options(clt, cfg);
  clt->add_option("--j", cfg.j, "intrinsic volume index")->capture_default_str();
  clt->add_option("--rhos", cfg.rhos, "comma-separated radii")->delimiter(',')->required();
  clt->add_option("--slope-min", cfg.slope_min)->capture_default_str();
  clt->add_option("--slope-max", cfg.slope_max)->capture_default_str();
  clt->add_flag("--sample-standardize", cfg.sample_standardize, "standardize with sample moments");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  if (validate->parsed() && validate->count("--reps") == 0) cfg.reps = 100000;
  if (clt->parsed() && clt->count("--reps") == 0) cfg.reps = 200000;

  std::ostringstream buffer;
  int code = kSuccess;
  try {
    if (exact->parsed()) {
      finalize(cfg, true);
      code = cmd_exact(cfg, buffer);
    } else if (simulate->parsed()) {
      finalize(cfg, false);
      code = cmd_simulate(cfg, buffer);
    } else if (validate->parsed()) {
      finalize(cfg, false);
      code = cmd_validate(cfg, buffer, err);
    } else if (clt->parsed()) {
      finalize(cfg, true);
      code = cmd_clt(cfg, buffer, err);
    }
  } catch (const BudgetExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kBudgetExceeded;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const DegenerateVariance& e) {
    err << "error: " << e.what() << "\n";
    return kValidationFailed;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  if (cfg.out.empty()) {
    out << buffer.str();
  } else {
    std::ofstream file(cfg.out, std::ios::binary);
    file << buffer.str();
    if (!file) {
      err << "error: cannot write " << cfg.out << "\n";
      return kIoError;
    }
  }
  return code;
}

}  // namespace flatproc::cli
