// quasistat command-line driver. Talks to the library only through the C API.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "quasistat/quasistat.h"

namespace {

constexpr int kOk = 0;
constexpr int kViolated = 1;
constexpr int kInputError = 2;

struct Options {
  std::string model_path;
  double t0 = 0.0;
  double t1 = 1.0;
  std::size_t steps = 200;
  std::string out;
  std::optional<double> tol;
  std::optional<double> ode_tol;
  std::optional<double> hbar;
  std::optional<double> defect_threshold;
  std::optional<std::size_t> level;
};

// Raised to leave a subcommand with exit code 2 and a one-line message.
struct InputError {
  std::string message;
};

void check(qs_status s) {
  if (s != QS_OK) throw InputError{qs_last_error()};
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string complex_str(double re, double im) {
  return num(re) + (im < 0.0 ? "-" : "+") + num(std::abs(im)) + "i";
}

void print_matrix(std::ostream& os, const std::vector<double>& m, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    os << "  [";
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = 2 * (i * n + j);
      os << (j ? ", " : "") << complex_str(m[k], m[k + 1]);
    }
    os << "]\n";
  }
}

class Model {
 public:
  explicit Model(const std::string& path) {
    if (path.empty()) throw InputError{"--model is required"};
    check(qs_model_load(path.c_str(), &m_));
  }
  ~Model() { qs_model_free(m_); }
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  const qs_model* get() const { return m_; }
  std::size_t dim() const { return qs_model_dim(m_); }

 private:
  qs_model* m_ = nullptr;
};

qs_tolerances tolerances(const Options& o) {
  qs_tolerances t = qs_default_tolerances();
  if (o.tol) t.structural_tol = *o.tol;
  if (o.ode_tol) t.ode_tol = *o.ode_tol;
  if (o.hbar) t.hbar = *o.hbar;
  return t;
}

std::vector<double> grid(const Options& o) {
  if (!(o.t1 > o.t0)) throw InputError{"--t1 must be greater than --t0"};
  if (o.steps < 2) throw InputError{"--steps must be at least 2"};
  std::vector<double> g(o.steps + 1);
  const double h = (o.t1 - o.t0) / static_cast<double>(o.steps);
  for (std::size_t i = 0; i <= o.steps; ++i) g[i] = o.t0 + static_cast<double>(i) * h;
  g.back() = o.t1;
  return g;
}

// Opens --out, or stdout when none was given.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw InputError{"cannot open '" + path + "' for writing"};
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

int run_check(const Options& o) {
  const Model model(o.model_path);
  const qs_tolerances tol = tolerances(o);
  const std::size_t n = model.dim();
  Sink sink(o.out);
  auto& os = sink.stream();
  bool all_ok = true;
  std::vector<double> eig(2 * n);
  os << "t,diagonalizable,spectrum_real,eigenvalues\n";
  for (double t : grid(o)) {
    int diag = 0;
    int real = 0;
    check(qs_real_discrete_check(model.get(), t, &tol, &diag, &real, eig.data()));
    all_ok = all_ok && diag && real;
    os << num(t) << ',' << diag << ',' << real << ',';
    for (std::size_t i = 0; i < n; ++i) os << (i ? " " : "") << complex_str(eig[2 * i], eig[2 * i + 1]);
    os << '\n';
  }
  return all_ok ? kOk : kViolated;
}

int run_metric(const Options& o) {
  const Model model(o.model_path);
  const qs_tolerances tol = tolerances(o);
  const std::size_t n = model.dim();
  const std::vector<double> g = grid(o);
  qs_metric_solution* sol = nullptr;
  const qs_status s = qs_solve_constant_metric(model.get(), g.data(), g.size(), &tol, &sol);
  std::vector<double> eta(2 * n * n);
  Sink sink(o.out);
  auto& os = sink.stream();
  int code = kOk;
  if (s == QS_OK) {
    os << "constant metric (solution dimension " << qs_metric_solution_dim(sol) << ")\n";
    qs_metric_solution_witness(sol, eta.data());
    qs_metric_solution_free(sol);
  } else if (s == QS_ERR_NO_SOLUTION || s == QS_ERR_NO_POSITIVE_MEMBER) {
    qs_metric_solution_free(sol);
    std::cerr << "warning: " << qs_last_error() << "; reporting the spectral metric at t0\n";
    check(qs_spectral_metric(model.get(), o.t0, &tol, eta.data()));
    os << "spectral metric at t=" << num(o.t0) << "\n";
    code = kViolated;
  } else {
    check(s);
  }
  print_matrix(os, eta, n);
  return code;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

int run_classify(const Options& o) {
  const Model model(o.model_path);
  const qs_tolerances tol = tolerances(o);
  const std::vector<double> g = grid(o);
  qs_classification* c = nullptr;
  check(qs_classify(model.get(), g.data(), g.size(), &tol, &c));
  const qs_verdict v = qs_classification_verdict(c);
  std::string line = qs_verdict_name(v);
  if (qs_classification_u_fixed(c)) {
    line += ", u=" + num(qs_classification_u(c));
  } else if (v == QS_VERDICT_TRIVIAL_FAMILY) {
    line += ", u free";
  }
  std::cout << line << '\n';
  if (qs_classification_has_metric(c)) {
    std::vector<double> eta(8);
    qs_classification_metric(c, eta.data());
    std::cout << "metric (k=1)\n";
    print_matrix(std::cout, eta, 2);
  }
  if (v == QS_VERDICT_NOT_QUASI_STATIONARY || v == QS_VERDICT_NOT_REAL_DIAGONALIZABLE) {
    const std::string why = qs_classification_failing_condition(c);
    if (!why.empty()) std::cout << "failing condition: " << why << '\n';
  }
  if (!o.out.empty()) {
    Sink sink(o.out);
    if (ends_with(o.out, ".json")) {
      sink.stream() << qs_classification_json(c) << '\n';
    } else {
      sink.stream() << line << '\n';
    }
  }
  const bool qs = v == QS_VERDICT_CASE1 || v == QS_VERDICT_CASE2 || v == QS_VERDICT_TRIVIAL_FAMILY;
  qs_classification_free(c);
  return qs ? kOk : kViolated;
}

std::string defect_path(const std::string& out) {
  const std::filesystem::path p(out);
  std::filesystem::path d = p.parent_path() / (p.stem().string() + "_defect" + p.extension().string());
  return d.string();
}

int run_evolve(const Options& o) {
  const Model model(o.model_path);
  const qs_tolerances tol = tolerances(o);
  const std::size_t n = model.dim();
  const std::vector<double> g = grid(o);

  std::vector<double> eta(2 * n * n);
  qs_metric_solution* sol = nullptr;
  const qs_status s = qs_solve_constant_metric(model.get(), g.data(), g.size(), &tol, &sol);
  if (s == QS_OK) {
    qs_metric_solution_witness(sol, eta.data());
  } else if (s == QS_ERR_NO_SOLUTION || s == QS_ERR_NO_POSITIVE_MEMBER) {
    std::cerr << "warning: no constant metric; using the spectral metric at t0\n";
    check(qs_spectral_metric(model.get(), o.t0, &tol, eta.data()));
  } else {
    check(s);
  }
  qs_metric_solution_free(sol);

  qs_propagation* prop = nullptr;
  check(qs_propagate(model.get(), o.t0, o.t1, o.steps, &tol, &prop));
  const std::size_t len = qs_propagation_length(prop);
  std::vector<double> times(len);
  std::vector<double> defect(len);
  std::vector<double> norms(2 * len);
  std::vector<double> e1(2 * n, 0.0);
  e1[0] = 1.0;
  double max_defect = 0.0;
  qs_propagation_times(prop, times.data());
  const qs_status ds = qs_propagation_defect(prop, eta.data(), defect.data(), &max_defect);
  const qs_status ns = qs_propagation_norm_history(prop, e1.data(), e1.data(), eta.data(), 0, norms.data());
  qs_propagation_free(prop);
  check(ds);
  check(ns);

  if (o.out.empty()) {
    check(qs_write_complex_csv(nullptr, times.data(), norms.data(), len));
    std::cout << '\n';
    check(qs_write_real_csv(nullptr, times.data(), defect.data(), len, "defect"));
  } else {
    check(qs_write_complex_csv(o.out.c_str(), times.data(), norms.data(), len));
    check(qs_write_real_csv(defect_path(o.out).c_str(), times.data(), defect.data(), len, "defect"));
  }
  const double threshold = o.defect_threshold.value_or(100.0 * tol.ode_tol);
  std::cerr << "max unitarity defect " << num(max_defect) << " (threshold " << num(threshold) << ")\n";
  return max_defect > threshold ? kViolated : kOk;
}

int run_phase(const Options& o) {
  const Model model(o.model_path);
  const qs_tolerances tol = tolerances(o);
  if (model.dim() != 2) throw InputError{"phase needs a 2x2 model"};
  const std::vector<double> g = grid(o);

  std::vector<double> eta(8);
  bool have_metric = false;
  qs_metric_solution* sol = nullptr;
  if (qs_solve_constant_metric(model.get(), g.data(), g.size(), &tol, &sol) == QS_OK) {
    qs_metric_solution_witness(sol, eta.data());
    have_metric = true;
  }
  qs_metric_solution_free(sol);

  std::vector<std::size_t> levels = {1, 2};
  if (o.level) {
    if (*o.level < 1 || *o.level > 2) throw InputError{"--level must be 1 or 2"};
    levels = {*o.level};
  }
  Sink sink(o.out);
  auto& os = sink.stream();
  os << "level,re,im\n";
  for (std::size_t level : levels) {
    double re = 0.0;
    double im = 0.0;
    check(qs_geometric_phase(model.get(), o.t0, o.t1, o.steps, level - 1, QS_GAUGE_IMAG_CANCELLING,
                             have_metric ? eta.data() : nullptr, &tol, &re, &im));
    os << level << ',' << num(re) << ',' << num(im) << '\n';
  }
  return kOk;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--model", o.model_path, "Model JSON file")->required();
  sub->add_option("--t0", o.t0, "Start time (dimensionless, hbar = 1 unless --hbar)");
  sub->add_option("--t1", o.t1, "End time");
  sub->add_option("--steps", o.steps, "Number of grid intervals (>= 2)");
  sub->add_option("--out", o.out, "Output file (stdout if omitted)");
  sub->add_option("--tol", o.tol, "Structural tolerance");
  sub->add_option("--ode-tol", o.ode_tol, "Propagator tolerance");
  sub->add_option("--hbar", o.hbar, "Value of hbar");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-stationarity checks for time-dependent pseudo-Hermitian Hamiltonians.\n"
               "Times are dimensionless; hbar = 1 by default."};
  app.require_subcommand(1);
  Options o;
  auto* check_cmd = app.add_subcommand("check", "Per-sample real spectrum and diagonalizability");
  auto* metric_cmd = app.add_subcommand("metric", "Constant metric operator, if any");
  auto* classify_cmd = app.add_subcommand("classify", "Classify a 2x2 model");
  auto* evolve_cmd = app.add_subcommand("evolve", "Propagate and write norm and defect CSV");
  auto* phase_cmd = app.add_subcommand("phase", "Geometric phase around a closed loop");
  for (auto* sub : {check_cmd, metric_cmd, classify_cmd, evolve_cmd, phase_cmd}) add_common(sub, o);
  evolve_cmd->add_option("--defect-threshold", o.defect_threshold, "Defect above which exit code is 1");
  phase_cmd->add_option("--level", o.level, "Level (1 or 2); both if omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }

  try {
    if (*check_cmd) return run_check(o);
    if (*metric_cmd) return run_metric(o);
    if (*classify_cmd) return run_classify(o);
    if (*evolve_cmd) return run_evolve(o);
    if (*phase_cmd) return run_phase(o);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.message << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}
