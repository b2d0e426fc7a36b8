#include "quasistat/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace quasistat {

using nlohmann::json;

Complex TermExpr::value(double t) const {
  switch (kind) {
    case TermKind::Const: return amplitude;
    case TermKind::Poly: return amplitude * std::pow(t, degree);
    case TermKind::Expo: return amplitude * std::exp(rate * t);
    case TermKind::Cos: return amplitude * std::cos(omega * t + delta);
    case TermKind::Sin: return amplitude * std::sin(omega * t + delta);
  }
  return {};
}

Complex TermExpr::derivative(double t) const {
  switch (kind) {
    case TermKind::Const: return {};
    case TermKind::Poly:
      if (degree == 0) return {};
      return amplitude * static_cast<double>(degree) * std::pow(t, degree - 1);
    case TermKind::Expo: return amplitude * rate * std::exp(rate * t);
    case TermKind::Cos: return -amplitude * omega * std::sin(omega * t + delta);
    case TermKind::Sin: return amplitude * omega * std::cos(omega * t + delta);
  }
  return {};
}

std::string_view to_string(TermKind kind) noexcept {
  switch (kind) {
    case TermKind::Const: return "const";
    case TermKind::Poly: return "poly";
    case TermKind::Expo: return "expo";
    case TermKind::Cos: return "cos";
    case TermKind::Sin: return "sin";
  }
  return "const";
}

HamiltonianModel::HamiltonianModel(std::size_t dim, std::vector<EntryTerms> entries, std::string label)
    : dim_(dim), entries_(std::move(entries)), label_(std::move(label)) {
  if (dim_ == 0) throw Error(ErrorKind::DimensionMismatch, "model dimension must be positive");
  if (entries_.size() != dim_ * dim_) {
    throw Error(ErrorKind::DimensionMismatch, "expected dim*dim entries");
  }
}

HamiltonianModel HamiltonianModel::constant(const ComplexMatrix& h, std::string label) {
  if (h.rows() != h.cols() || h.rows() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "constant model needs a non-empty square matrix");
  }
  const auto n = static_cast<std::size_t>(h.rows());
  std::vector<EntryTerms> entries(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Complex v = h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (v != Complex{}) entries[i * n + j].push_back(TermExpr::constant(v));
    }
  }
  return HamiltonianModel(n, std::move(entries), std::move(label));
}

ComplexMatrix HamiltonianModel::eval(double t) const {
  const auto n = static_cast<Eigen::Index>(dim_);
  ComplexMatrix h = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      for (const auto& term : entries_[static_cast<std::size_t>(i * n + j)]) h(i, j) += term.value(t);
    }
  }
  return h;
}

ComplexMatrix HamiltonianModel::eval_dot(double t) const {
  const auto n = static_cast<Eigen::Index>(dim_);
  ComplexMatrix h = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      for (const auto& term : entries_[static_cast<std::size_t>(i * n + j)]) {
        h(i, j) += term.derivative(t);
      }
    }
  }
  return h;
}

namespace {

constexpr const char* kTermFields[] = {"kind", "amp_re", "amp_im", "k_or_alpha_re", "alpha_im", "omega", "delta"};

[[noreturn]] void schema_error(const std::string& path, const std::string& msg) {
  throw Error(ErrorKind::SchemaError, path + ": " + msg);
}

double number_field(const json& obj, const char* key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "." + key, "missing field");
  if (!it->is_number()) schema_error(path + "." + key, "expected a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) schema_error(path + "." + key, "must be finite");
  return v;
}

void require_zero(double v, const char* key, const std::string& path, std::string_view kind) {
  if (v != 0.0) {
    schema_error(path + "." + key, "must be zero for kind '" + std::string(kind) + "'");
  }
}

TermExpr parse_term(const json& obj, const std::string& path) {
  if (!obj.is_object()) schema_error(path, "expected a term object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* f : kTermFields) known = known || key == f;
    if (!known) schema_error(path + "." + key, "unknown field");
  }
  const auto kind_it = obj.find("kind");
  if (kind_it == obj.end() || !kind_it->is_string()) schema_error(path + ".kind", "expected a string");
  const std::string kind = kind_it->get<std::string>();

  const double amp_re = number_field(obj, "amp_re", path);
  const double amp_im = number_field(obj, "amp_im", path);
  const double k_or_alpha_re = number_field(obj, "k_or_alpha_re", path);
  const double alpha_im = number_field(obj, "alpha_im", path);
  const double omega = number_field(obj, "omega", path);
  const double delta = number_field(obj, "delta", path);
  const Complex amp{amp_re, amp_im};

  if (kind == "const") {
    require_zero(k_or_alpha_re, "k_or_alpha_re", path, kind);
    require_zero(alpha_im, "alpha_im", path, kind);
    require_zero(omega, "omega", path, kind);
    require_zero(delta, "delta", path, kind);
    return TermExpr::constant(amp);
  }
  if (kind == "poly") {
    if (k_or_alpha_re < 0.0 || std::floor(k_or_alpha_re) != k_or_alpha_re || k_or_alpha_re > 64.0) {
      schema_error(path + ".k_or_alpha_re", "poly degree must be an integer in [0, 64]");
    }
    require_zero(alpha_im, "alpha_im", path, kind);
    require_zero(omega, "omega", path, kind);
    require_zero(delta, "delta", path, kind);
    return TermExpr::poly(amp, static_cast<int>(k_or_alpha_re));
  }
  if (kind == "expo") {
    require_zero(omega, "omega", path, kind);
    require_zero(delta, "delta", path, kind);
    return TermExpr::expo(amp, {k_or_alpha_re, alpha_im});
  }
  if (kind == "cos" || kind == "sin") {
    require_zero(k_or_alpha_re, "k_or_alpha_re", path, kind);
    require_zero(alpha_im, "alpha_im", path, kind);
    return kind == "cos" ? TermExpr::cos(amp, omega, delta) : TermExpr::sin(amp, omega, delta);
  }
  schema_error(path + ".kind", "unknown kind '" + kind + "'");
}

json term_to_json(const TermExpr& term) {
  json obj;
  obj["kind"] = std::string(to_string(term.kind));
  obj["amp_re"] = term.amplitude.real();
  obj["amp_im"] = term.amplitude.imag();
  obj["k_or_alpha_re"] = 0.0;
  obj["alpha_im"] = 0.0;
  obj["omega"] = 0.0;
  obj["delta"] = 0.0;
  switch (term.kind) {
    case TermKind::Const: break;
    case TermKind::Poly: obj["k_or_alpha_re"] = static_cast<double>(term.degree); break;
    case TermKind::Expo:
      obj["k_or_alpha_re"] = term.rate.real();
      obj["alpha_im"] = term.rate.imag();
      break;
    case TermKind::Cos:
    case TermKind::Sin:
      obj["omega"] = term.omega;
      obj["delta"] = term.delta;
      break;
  }
  return obj;
}

}  // namespace

HamiltonianModel parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    schema_error("$", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) schema_error("$", "expected an object");

  const auto dim_it = doc.find("dim");
  if (dim_it == doc.end() || !dim_it->is_number_integer() || dim_it->get<long long>() < 1) {
    schema_error("$.dim", "expected a positive integer");
  }
  const auto dim = static_cast<std::size_t>(dim_it->get<long long>());

  std::string label;
  if (const auto it = doc.find("label"); it != doc.end()) {
    if (!it->is_string()) schema_error("$.label", "expected a string");
    label = it->get<std::string>();
  } else {
    schema_error("$.label", "missing field");
  }

  const auto entries_it = doc.find("entries");
  if (entries_it == doc.end() || !entries_it->is_array()) schema_error("$.entries", "expected an array");
  const json& rows = *entries_it;
  if (rows.size() != dim) {
    throw Error(ErrorKind::DimensionMismatch,
                "$.entries has " + std::to_string(rows.size()) + " rows, dim is " + std::to_string(dim));
  }

  std::vector<EntryTerms> entries;
  entries.reserve(dim * dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const std::string row_path = "$.entries[" + std::to_string(i) + "]";
    if (!rows[i].is_array()) schema_error(row_path, "expected an array");
    if (rows[i].size() != dim) {
      throw Error(ErrorKind::DimensionMismatch, row_path + " has " + std::to_string(rows[i].size()) +
                                                    " columns, dim is " + std::to_string(dim));
    }
    for (std::size_t j = 0; j < dim; ++j) {
      const std::string cell_path = row_path + "[" + std::to_string(j) + "]";
      const json& cell = rows[i][j];
      if (!cell.is_array()) schema_error(cell_path, "expected an array of terms");
      EntryTerms terms;
      for (std::size_t k = 0; k < cell.size(); ++k) {
        terms.push_back(parse_term(cell[k], cell_path + "[" + std::to_string(k) + "]"));
      }
      entries.push_back(std::move(terms));
    }
  }
  return HamiltonianModel(dim, std::move(entries), std::move(label));
}

HamiltonianModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

std::string serialize_model(const HamiltonianModel& model) {
  json doc;
  doc["dim"] = model.dim();
  doc["label"] = model.label();
  json rows = json::array();
  for (std::size_t i = 0; i < model.dim(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < model.dim(); ++j) {
      json cell = json::array();
      for (const auto& term : model.entry(i, j)) cell.push_back(term_to_json(term));
      row.push_back(std::move(cell));
    }
    rows.push_back(std::move(row));
  }
  doc["entries"] = std::move(rows);
  return doc.dump(2) + "\n";
}

}  // namespace quasistat
