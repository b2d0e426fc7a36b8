#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "support.hpp"

#include "quasistat/error.hpp"
#include "quasistat/model.hpp"

using namespace quasistat;
using namespace qs_test;

namespace {

std::string term_json(const std::string& kind, double amp_re, double amp_im, double k = 0.0, double aim = 0.0,
                      double omega = 0.0, double delta = 0.0) {
  return R"({"kind": ")" + kind + R"(", "amp_re": )" + std::to_string(amp_re) + R"(, "amp_im": )" +
         std::to_string(amp_im) + R"(, "k_or_alpha_re": )" + std::to_string(k) + R"(, "alpha_im": )" +
         std::to_string(aim) + R"(, "omega": )" + std::to_string(omega) + R"(, "delta": )" + std::to_string(delta) +
         "}";
}

const std::string kRotating = R"({"dim": 2, "label": "rotating", "entries": [[[], [)" +
                              term_json("expo", 1, 0, 0, 1) + R"(]], [[)" + term_json("expo", 1, 0, 0, -1) +
                              R"(], []]]})";

ErrorKind kind_of(std::string_view text) {
  try {
    parse_model(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

std::string message_of(std::string_view text) {
  try {
    parse_model(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::string single_entry(const std::string& term) {
  return R"({"dim": 1, "label": "x", "entries": [[[)" + term + "]]]}";
}

HamiltonianModel random_model(std::size_t n) {
  std::vector<EntryTerms> entries(n * n);
  for (auto& e : entries) {
    e.push_back(TermExpr::cos(random_complex(), uniform(0.5, 2.0), uniform(0.0, 6.0)));
    switch (std::uniform_int_distribution<int>(0, 3)(rng())) {
      case 0: e.push_back(TermExpr::constant(random_complex())); break;
      case 1: e.push_back(TermExpr::poly(random_complex(), std::uniform_int_distribution<int>(0, 4)(rng()))); break;
      case 2: e.push_back(TermExpr::expo(random_complex(), random_complex(0.8))); break;
      default: e.push_back(TermExpr::sin(random_complex(), uniform(-2.0, 2.0), uniform(0.0, 6.0))); break;
    }
  }
  return HamiltonianModel(n, std::move(entries), "random");
}

}  // namespace

TEST_CASE("rotating document parses to two expo terms") {
  const HamiltonianModel m = parse_model(kRotating);
  CHECK(m.dim() == 2);
  CHECK(m.label() == "rotating");
  CHECK(m.entry(0, 0).empty());
  CHECK(m.entry(1, 1).empty());
  REQUIRE(m.entry(0, 1).size() == 1);
  REQUIRE(m.entry(1, 0).size() == 1);
  CHECK(m.entry(0, 1)[0].kind == TermKind::Expo);
  CHECK(m.entry(1, 0)[0].kind == TermKind::Expo);
  CHECK(m.entry(0, 1)[0].rate == Complex(0.0, 1.0));
  CHECK(m.entry(0, 1) == rotating_model().entry(0, 1));
  CHECK(m.entry(1, 0) == rotating_model().entry(1, 0));
}

TEST_CASE("3x2 entry grid is a dimension mismatch") {
  const std::string doc = R"({"dim": 2, "label": "bad", "entries": [[[], []], [[], []], [[], []]]})";
  CHECK(kind_of(doc) == ErrorKind::DimensionMismatch);
  const std::string cols = R"({"dim": 2, "label": "bad", "entries": [[[], [], []], [[], [], []]]})";
  CHECK(kind_of(cols) == ErrorKind::DimensionMismatch);
}

TEST_CASE("polynomial factor evaluates to twice the base matrix at t = 1") {
  const HamiltonianModel m = trivial_model();
  ComplexMatrix h0(2, 2);
  h0 << 0, 2, 0.5, 0;
  CHECK(max_abs(m.eval(1.0) - 2.0 * h0) < 1e-15);
}

TEST_CASE("eval examples") {
  CHECK(max_abs(rotating_model().eval(0.0) - (ComplexMatrix(2, 2) << 0, 1, 1, 0).finished()) < 1e-15);
  const HamiltonianModel linear(2, {{TermExpr::poly(1.0, 1)}, {}, {}, {TermExpr::poly(1.0, 1)}});
  CHECK(max_abs(linear.eval(2.0) - 2.0 * ComplexMatrix::Identity(2, 2)) < 1e-15);
  const double e = std::exp(1.0);
  ComplexMatrix expected(2, 2);
  expected << 0, 2 * e, 1 / (2 * e), 0;
  CHECK(max_abs(exponential_model().eval(1.0) - expected) < 1e-14);
}

TEST_CASE("eval_dot examples") {
  const HamiltonianModel constant = HamiltonianModel::constant(random_matrix(3));
  CHECK(max_abs(constant.eval_dot(1.7)) == 0.0);
  const HamiltonianModel square(1, {{TermExpr::poly(1.0, 2)}});
  CHECK(square.eval_dot(3.0)(0, 0) == Complex(6.0, 0.0));
  CHECK(std::abs(rotating_model().eval_dot(0.0)(0, 1) - Complex(0.0, 1.0)) < 1e-15);
}

TEST_CASE("every term kind has the documented value and derivative") {
  const Complex a{0.7, -0.2};
  const double t = 0.9;
  CHECK(std::abs(TermExpr::constant(a).value(t) - a) == 0.0);
  CHECK(std::abs(TermExpr::poly(a, 3).value(t) - a * t * t * t) < 1e-15);
  CHECK(std::abs(TermExpr::poly(a, 0).derivative(t)) == 0.0);
  const Complex rate{0.3, 1.1};
  CHECK(std::abs(TermExpr::expo(a, rate).derivative(t) - a * rate * std::exp(rate * t)) < 1e-15);
  CHECK(std::abs(TermExpr::cos(a, 2.0, 0.4).value(t) - a * std::cos(2.0 * t + 0.4)) < 1e-15);
  CHECK(std::abs(TermExpr::cos(a, 2.0, 0.4).derivative(t) + 2.0 * a * std::sin(2.0 * t + 0.4)) < 1e-15);
  CHECK(std::abs(TermExpr::sin(a, 2.0, 0.4).derivative(t) - 2.0 * a * std::cos(2.0 * t + 0.4)) < 1e-15);
}

TEST_CASE("eval_dot agrees with central differences at second order") {
  for (int trial = 0; trial < 1000; ++trial) {
    const HamiltonianModel m = random_model(1 + trial % 3);
    const double t = uniform(-1.5, 1.5);
    const ComplexMatrix exact = m.eval_dot(t);
    auto err = [&](double h) { return max_abs(exact - (m.eval(t + h) - m.eval(t - h)) / (2.0 * h)); };
    const double e1 = err(2e-2);
    const double e2 = err(1e-2);
    if (e1 < 1e-9) continue;  // third derivative vanishes here; nothing to resolve
    CHECK(e1 / e2 >= 3.5);
  }
}

TEST_CASE("eval is linear in the amplitudes") {
  for (int trial = 0; trial < 100; ++trial) {
    const HamiltonianModel a = random_model(2);
    std::vector<EntryTerms> scaled;
    std::vector<EntryTerms> summed;
    const Complex c = random_complex(2.0);
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        EntryTerms s = a.entry(i, j);
        for (auto& term : s) term.amplitude *= c;
        scaled.push_back(s);
        EntryTerms twice = a.entry(i, j);
        twice.insert(twice.end(), s.begin(), s.end());
        summed.push_back(twice);
      }
    }
    const HamiltonianModel ms(2, scaled);
    const HamiltonianModel mt(2, summed);
    const double t = uniform(-1.0, 1.0);
    CHECK(max_abs(ms.eval(t) - c * a.eval(t)) < 1e-12);
    CHECK(max_abs(mt.eval(t) - (1.0 + c) * a.eval(t)) < 1e-12);
  }
}

TEST_CASE("serialization round-trips") {
  for (int trial = 0; trial < 50; ++trial) {
    const HamiltonianModel m = random_model(1 + trial % 3);
    const std::string text = serialize_model(m);
    const HamiltonianModel back = parse_model(text);
    CHECK(back == m);
    CHECK(serialize_model(back) == text);
  }
}

TEST_CASE("schema violations name the offending field") {
  CHECK(kind_of("not json") == ErrorKind::SchemaError);
  CHECK(kind_of(R"({"label": "x", "entries": []})") == ErrorKind::SchemaError);
  CHECK(kind_of(R"({"dim": 0, "label": "x", "entries": []})") == ErrorKind::SchemaError);
  CHECK(kind_of(R"({"dim": 1, "entries": [[[]]]})") == ErrorKind::SchemaError);

  const std::string missing = single_entry(R"({"kind": "const", "amp_re": 1, "amp_im": 0})");
  CHECK(kind_of(missing) == ErrorKind::SchemaError);
  CHECK(message_of(missing).find("$.entries[0][0][0].k_or_alpha_re") != std::string::npos);

  const std::string unknown = single_entry(term_json("const", 1, 0).insert(1, R"("extra": 1, )"));
  CHECK(message_of(unknown).find("$.entries[0][0][0].extra") != std::string::npos);

  const std::string nonzero = single_entry(term_json("const", 1, 0, 0, 0, 2.0));
  CHECK(message_of(nonzero).find("$.entries[0][0][0].omega") != std::string::npos);

  CHECK(kind_of(single_entry(term_json("poly", 1, 0, 1.5))) == ErrorKind::SchemaError);
  CHECK(kind_of(single_entry(term_json("poly", 1, 0, -1))) == ErrorKind::SchemaError);
  CHECK(kind_of(single_entry(term_json("expo", 1, 0, 1, 0, 0, 0.3))) == ErrorKind::SchemaError);
  CHECK(kind_of(single_entry(term_json("sin", 1, 0, 1))) == ErrorKind::SchemaError);
  CHECK(message_of(single_entry(term_json("tan", 1, 0))).find(".kind") != std::string::npos);
}

TEST_CASE("load_model reads files and reports missing ones") {
  const auto path = std::filesystem::temp_directory_path() / "quasistat_model_test.json";
  {
    std::ofstream out(path);
    out << kRotating;
  }
  CHECK(load_model(path.string()).dim() == 2);
  std::filesystem::remove(path);
  try {
    load_model(path.string());
    FAIL("expected Io");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
}

TEST_CASE("sample model files load") {
  const std::string dir = QUASISTAT_MODELS_DIR;
  CHECK(load_model(dir + "/hermitian_rotating.json").dim() == 2);
  const HamiltonianModel nqs = load_model(dir + "/non_quasi_stationary.json");
  CHECK(max_abs(nqs.eval(0.4) - exponential_model().eval(0.4)) < 1e-14);
  const HamiltonianModel triv = load_model(dir + "/trivial_family.json");
  CHECK(max_abs(triv.eval(0.7) - trivial_model().eval(0.7)) < 1e-14);
}
