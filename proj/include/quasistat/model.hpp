#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "quasistat/numerics.hpp"

namespace quasistat {

enum class TermKind { Const, Poly, Expo, Cos, Sin };

/// One additive term of a matrix entry.
///
///   Const:  amplitude
///   Poly:   amplitude * t^degree
///   Expo:   amplitude * exp(rate * t)            (rate complex)
///   Cos:    amplitude * cos(omega * t + delta)   (omega, delta real)
///   Sin:    amplitude * sin(omega * t + delta)
///
/// The family is closed under differentiation, so derivatives are exact.
struct TermExpr {
  TermKind kind = TermKind::Const;
  Complex amplitude{0.0, 0.0};
  int degree = 0;
  Complex rate{0.0, 0.0};
  double omega = 0.0;
  double delta = 0.0;

  static TermExpr constant(Complex amp) { return {TermKind::Const, amp, 0, {}, 0.0, 0.0}; }
  static TermExpr poly(Complex amp, int degree) { return {TermKind::Poly, amp, degree, {}, 0.0, 0.0}; }
  static TermExpr expo(Complex amp, Complex rate) { return {TermKind::Expo, amp, 0, rate, 0.0, 0.0}; }
  static TermExpr cos(Complex amp, double omega, double delta = 0.0) {
    return {TermKind::Cos, amp, 0, {}, omega, delta};
  }
  static TermExpr sin(Complex amp, double omega, double delta = 0.0) {
    return {TermKind::Sin, amp, 0, {}, omega, delta};
  }

  Complex value(double t) const;
  Complex derivative(double t) const;

  bool operator==(const TermExpr&) const = default;
};

using EntryTerms = std::vector<TermExpr>;

/// A time-dependent matrix Hamiltonian H(t) whose entries are sums of terms.
class HamiltonianModel {
 public:
  HamiltonianModel() = default;
  /// `entries` is row-major, dim x dim.
  HamiltonianModel(std::size_t dim, std::vector<EntryTerms> entries, std::string label = {});

  /// Time-independent model holding `h` as constant terms.
  static HamiltonianModel constant(const ComplexMatrix& h, std::string label = {});

  std::size_t dim() const noexcept { return dim_; }
  const std::string& label() const noexcept { return label_; }
  const EntryTerms& entry(std::size_t row, std::size_t col) const { return entries_.at(row * dim_ + col); }

  ComplexMatrix eval(double t) const;
  ComplexMatrix eval_dot(double t) const;

  bool operator==(const HamiltonianModel&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<EntryTerms> entries_;
  std::string label_;
};

/// Parses the JSON model document; throws SchemaError (with a field path)
/// or DimensionMismatch.
HamiltonianModel parse_model(std::string_view text);
HamiltonianModel load_model(const std::string& path);
std::string serialize_model(const HamiltonianModel& model);

std::string_view to_string(TermKind kind) noexcept;

}  // namespace quasistat
