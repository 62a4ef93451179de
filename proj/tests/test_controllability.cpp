#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "nonholo/controllability/classify.hpp"
#include "nonholo/error.hpp"
#include "nonholo/field/calculus.hpp"
#include "support/generators.hpp"

using namespace nonholo;
using namespace nonholo::controllability;
using field::ComplexFunction;
using field::ExcludedSet;
using field::Point;
using field::VectorField;
using systems::SystemModel;

namespace {

constexpr double kPi = std::numbers::pi;
using cplx = std::complex<double>;

VectorField field2(const std::string& a, const std::string& b, ExcludedSet ex = {}) {
  const std::vector<std::string> c{a, b};
  return VectorField::parse(c, std::move(ex));
}

VectorField swirl34() { return field2("x1/(x1^2+x2^2)", "x2/(x1^2+x2^2)", ExcludedSet::origin()); }
VectorField winding() { return field2("-x2/(x1^2+x2^2)", "x1/(x1^2+x2^2)", ExcludedSet::origin()); }

ExcludedSet pole_at(double a, double b) {
  ExcludedSet s;
  s.points.push_back(field::ExcludedPoint{{a, b, std::nullopt}});
  s.note = "pole";
  return s;
}

// Swap the names x1 and x2 in an expression string.
std::string swap12(std::string s) {
  for (auto& ch : s) {
    if (ch == '1') ch = '#';
  }
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (s[i] == 'x' && s[i + 1] == '2') s[i + 1] = '1';
  }
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (s[i] == 'x' && s[i + 1] == '#') s[i + 1] = '2';
  }
  for (auto& ch : s) {
    if (ch == '#') ch = '1';
  }
  return s;
}

// Polar midpoint rule for the flux of a planar curl over a disk.
double disk_flux_oracle(const VectorField& f, double cx, double cy, double r, int n) {
  const auto& curl = f.curl_components()[0];
  double sum = 0.0;
  const double dr = r / n, dt = 2.0 * kPi / n;
  for (int i = 0; i < n; ++i) {
    const double rho = (i + 0.5) * dr;
    for (int j = 0; j < n; ++j) {
      const double th = (j + 0.5) * dt;
      const double p[2] = {cx + rho * std::cos(th), cy + rho * std::sin(th)};
      sum += curl.evaluate(p) * rho * dr * dt;
    }
  }
  return sum;
}

}  // namespace

TEST_CASE("loop integral examples") {
  const Loop unit(Point{0.0, 0.0}, 1.0);
  CHECK(loop_integral(field2("-x2", "x1"), unit) == doctest::Approx(2.0 * kPi).epsilon(1e-12));
  CHECK(std::fabs(loop_integral(swirl34(), unit)) < 1e-12);
  CHECK(loop_integral(winding(), unit) == doctest::Approx(2.0 * kPi).epsilon(1e-12));
  const auto grad = field::gradient_field(field::parse_expr("x1^2*x2"), 2);
  CHECK(std::fabs(loop_integral(grad, Loop(Point{0.3, -0.7}, 1.3))) < 1e-12);
  CHECK(loop_integral(field2("-x2", "x1"), Loop(Point{0.0, 0.0}, 1.0, -1)) == doctest::Approx(-2.0 * kPi));
  // plane (1,0) reverses the sense of rotation
  CHECK(loop_integral(field2("-x2", "x1"), Loop(Point{0.0, 0.0}, 1.0, 1, {1, 0})) == doctest::Approx(-2.0 * kPi));
  CHECK_THROWS_AS(loop_integral(swirl34(), Loop(Point{1.0, 0.0}, 1.0)), DomainError);
  CHECK_THROWS_AS(Loop(Point{0.0, 0.0}, -1.0), ValidationError);
  CHECK_THROWS_AS(Loop(Point{0.0, 0.0}, 1.0, 2), ValidationError);
  CHECK_THROWS_AS(Loop(Point{0.0, 0.0}, 1.0, 1, {0, 2}), ValidationError);
}

TEST_CASE("loop integral in space") {
  const std::vector<std::string> c{"-x2", "x1", "x1*x3"};
  const auto f = VectorField::parse(c);
  // only the (x1,x2) plane sees the rotation
  CHECK(loop_integral(f, Loop(Point{0.0, 0.0, 1.0}, 1.0, 1, {0, 1})) == doctest::Approx(2.0 * kPi));
  // curl f = (0, -x3, 2); the (x3,x1) plane has normal +x2
  const double flux = -0.5 * kPi * 0.25;
  CHECK(loop_integral(f, Loop(Point{0.2, 0.3, 0.5}, 0.5, 1, {2, 0})) == doctest::Approx(flux).epsilon(1e-10));
}

TEST_CASE("stokes check examples") {
  const auto rot = stokes_check(field2("-x2", "x1"), Loop(Point{0.0, 0.0}, 1.0));
  CHECK(rot.line == doctest::Approx(2.0 * kPi));
  CHECK(rot.surface == doctest::Approx(2.0 * kPi));
  CHECK_FALSE(rot.excluded_inside);

  const auto f = field2("x2^2", "-x1^2");
  const auto s = stokes_check(f, Loop(Point{1.0, 1.0}, 1.0));
  const double oracle = disk_flux_oracle(f, 1.0, 1.0, 1.0, 400);
  CHECK(s.line == doctest::Approx(oracle).epsilon(1e-5));
  CHECK(s.surface == doctest::Approx(oracle).epsilon(1e-5));
  CHECK(s.surface == doctest::Approx(-4.0 * kPi).epsilon(1e-12));

  const auto ex = stokes_check(swirl34(), Loop(Point{0.0, 0.0}, 1.0));
  CHECK(std::fabs(ex.line) < 1e-12);
  CHECK(std::fabs(ex.surface) < 1e-9);
  CHECK(ex.excluded_inside);

  // the winding field: zero flux, nonzero circulation, flagged
  const auto w = stokes_check(winding(), Loop(Point{0.0, 0.0}, 1.0));
  CHECK(w.line == doctest::Approx(2.0 * kPi));
  CHECK(std::fabs(w.surface) < 1e-9);
  CHECK(w.excluded_inside);
}

TEST_CASE("curl scan examples") {
  const auto holo = curl_scan(field2("x1^2 - x2^2", "2*x1*x2"), Box::cube(2, -1.0, 1.0), 21);
  CHECK(holo.max_abs == doctest::Approx(4.0));
  CHECK(std::fabs(holo.argmax[1]) == doctest::Approx(1.0));
  CHECK(holo.probes == 441);

  const auto grad = curl_scan(field::gradient_field(field::parse_expr("x1^3*x2 - x2^4 + x1"), 2),
                              Box::cube(2, -1.0, 1.0), 21);
  CHECK(grad.max_abs < 1e-10);

  // oracle: the symbolic curl -2(x1 + x2) evaluated on the same grid
  const auto f = field2("x2^2", "-x1^2");
  const auto q = curl_scan(f, Box::cube(2, -1.0, 1.0), 21);
  double oracle = 0.0;
  for (int i = 0; i < 21; ++i) {
    for (int j = 0; j < 21; ++j) {
      const double x1 = -1.0 + 0.1 * i, x2 = -1.0 + 0.1 * j;
      oracle = std::max(oracle, std::fabs(-2.0 * (x1 + x2)));
    }
  }
  CHECK(q.max_abs == doctest::Approx(oracle));
  CHECK(q.max_abs == doctest::Approx(4.0));
  CHECK(std::fabs(q.argmax[0]) == doctest::Approx(1.0));
  CHECK(q.argmax[0] == doctest::Approx(q.argmax[1]));

  const auto ex = curl_scan(swirl34(), Box::cube(2, -1.0, 1.0), 21);
  CHECK(ex.skipped == 1);
  CHECK(ex.max_abs < 1e-8);
  CHECK_THROWS_AS(curl_scan(f, Box::cube(2, -1.0, 1.0), 1), ValidationError);
  CHECK_THROWS_AS(curl_scan(f, Box::cube(3, -1.0, 1.0), 5), ValidationError);
}

TEST_CASE("contour integral examples") {
  const Loop unit(Point{0.0, 0.0}, 1.0);
  const auto z2 = ComplexFunction::parse("x1^2 - x2^2", "2*x1*x2");
  CHECK(std::abs(contour_integral(z2, unit)) < 1e-12);

  // 1/(z - a) = conj(z - a) / |z - a|^2
  const auto inv = ComplexFunction::parse("(x1 - 0.3)/((x1 - 0.3)^2 + (x2 + 0.2)^2)",
                                          "-(x2 + 0.2)/((x1 - 0.3)^2 + (x2 + 0.2)^2)", pole_at(0.3, -0.2));
  const auto c = contour_integral(inv, Loop(Point{0.2, 0.0}, 1.0));
  CHECK(std::abs(c - cplx(0.0, 2.0 * kPi)) < 1e-9);
  CHECK_THROWS_AS(contour_integral(inv, Loop(Point{0.3, 0.8}, 1.0)), DomainError);

  const auto zb2 = ComplexFunction::conj_power(2);
  CHECK(std::abs(contour_integral(zb2, Loop(Point{1.0, 0.0}, 1.0)) - cplx(0.0, 4.0 * kPi)) < 1e-9);
  const auto zb3 = ComplexFunction::conj_power(3);
  const cplx a = std::polar(1.0, kPi / 3.0);
  const auto got = contour_integral(zb3, Loop(Point{a.real(), a.imag()}, 1.0));
  CHECK(std::abs(got - 6.0 * kPi * cplx(0.0, 1.0) * std::polar(1.0, -2.0 * kPi / 3.0)) < 1e-9);
}

TEST_CASE("property: residue formula for conjugate powers") {
  for (int n = 1; n <= 4; ++n) {
    const auto F = ComplexFunction::conj_power(n);
    for (const cplx a : {cplx(1.0, 0.0), cplx(0.0, 1.0), std::polar(1.0, kPi / n)}) {
      const cplx expected = 2.0 * kPi * n * cplx(0.0, 1.0) * std::pow(std::conj(a), n - 1);
      const cplx got = contour_integral(F, Loop(Point{a.real(), a.imag()}, 1.0));
      CAPTURE(n);
      CHECK(std::abs(got - expected) < 1e-8);
    }
  }
}

TEST_CASE("holomorphy test examples") {
  const auto box = Box::cube(2, -2.0, 2.0);
  CHECK(holomorphy_test(ComplexFunction::parse("x1^2 - x2^2", "2*x1*x2"), box, 17).holomorphic);
  const auto conj = holomorphy_test(ComplexFunction::parse("x1", "-x2"), box, 17);
  CHECK_FALSE(conj.holomorphic);
  CHECK(conj.max_residual == doctest::Approx(2.0));
  const auto inv = ComplexFunction::parse("x1/(x1^2+x2^2)", "-x2/(x1^2+x2^2)", ExcludedSet::origin());
  const auto h = holomorphy_test(inv, box, 17, Annulus{{0.0, 0.0}, 0.5, 2.0});
  CHECK(h.holomorphic);
  CHECK(h.has_poles);
  CHECK(h.skipped > 0);
}

TEST_CASE("classify examples") {
  const auto classic = classify(SystemModel::classic());
  CHECK(classic.verdict == Verdict::Controllable);
  REQUIRE(classic.witness.has_value());
  REQUIRE(classic.witness->loops.size() == 1);
  CHECK(classic.witness->loops[0].radius() == 1.0);
  CHECK(classic.witness->values[0][0] == doctest::Approx(2.0 * kPi));
  CHECK(classic.has_caveat(kCaveatExistential));

  const auto punctured = classify(SystemModel::general_r2(swirl34()));
  CHECK(punctured.verdict == Verdict::Uncontrollable);
  CHECK(punctured.has_caveat(kCaveatNonSimplyConnected));
  CHECK_FALSE(punctured.witness.has_value());

  CHECK(classify(SystemModel::general_r2(field2("x2^2", "-x1^2"))).verdict == Verdict::Controllable);
  const auto wind = classify(SystemModel::general_r2(winding()));
  CHECK(wind.verdict == Verdict::Controllable);
  CHECK(wind.has_caveat(kCaveatNonSimplyConnected));

  CHECK(classify(SystemModel::complex_plane(ComplexFunction::parse("x1", "-x2"))).verdict == Verdict::Uncontrollable);
  CHECK(classify(SystemModel::general_r2(field2("x1", "x2"))).verdict == Verdict::Uncontrollable);
  CHECK(classify(SystemModel::complex_plane(ComplexFunction::conj_power(2))).verdict == Verdict::Controllable);
  CHECK(classify(SystemModel::generalized_rm(3)).verdict == Verdict::Controllable);
  CHECK(classify(SystemModel::pairwise_rm(3, {field2("-x2", "x1"), field2("x1", "x2"), field2("x2^2", "0")})).verdict ==
        Verdict::Uncontrollable);

  const std::vector<std::string> f3{"x2*x3", "-x1", "x1*x2"};
  CHECK(classify(SystemModel::general_r3(VectorField::parse(f3))).verdict == Verdict::Controllable);
  const auto grad3 = field::gradient_field(field::parse_expr("x1*x2*x3 + x3^2"), 3);
  CHECK(classify(SystemModel::general_r3(grad3)).verdict == Verdict::Uncontrollable);
  const auto drift = classify(SystemModel::drift_r3(field::parse_expr("x1"), grad3));
  CHECK(drift.verdict == Verdict::Uncontrollable);
  CHECK(drift.caveats.size() >= 2);

  // curl-free with no symbolic certificate: sin(x1)*x2 has curl cos... use a
  // field the normal form cannot handle and whose curl vanishes
  const auto opaque = field2("cos(x1)*sin(x2)", "sin(x1)*cos(x2)");
  CHECK(classify(SystemModel::general_r2(opaque)).verdict == Verdict::Inconclusive);
}

TEST_CASE("report json") {
  const auto rep = classify(SystemModel::general_r2(swirl34()));
  const auto j = to_json(rep);
  const auto text = io::dump_json(j);
  CHECK(text.rfind("{\n  \"verdict\": \"uncontrollable\",\n  \"witness\": null,\n  \"caveats\": [", 0) == 0);
  CHECK(text == io::dump_json(to_json(classify(SystemModel::general_r2(swirl34())))));
  ProbeBudget b;
  b.grid = 1;
  CHECK_THROWS_AS(classify(SystemModel::classic(), b), ValidationError);
}

TEST_CASE("property: line and surface integrals agree") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = trial % 2 ? 3 : 2;
    const auto f = testing::random_polynomial_field(rng, dim, 3);
    const auto c = testing::random_point(rng, dim);
    std::array<int, 2> plane{0, 1};
    if (dim == 3) plane = std::array<std::array<int, 2>, 3>{{{0, 1}, {1, 2}, {2, 0}}}[trial % 3];
    const Loop loop(Point(std::span<const double>(c)), 0.2 + std::fabs(u(rng)), u(rng) < 0 ? -1 : 1, plane);
    const auto s = stokes_check(f, loop);
    CHECK(std::fabs(s.line - s.surface) / std::max(1.0, std::fabs(s.line)) < 1e-6);
  }
}

TEST_CASE("property: holomorphic functions have zero loops and are uncontrollable") {
  const std::vector<std::pair<std::string, std::string>> fs{
      {"1", "0"}, {"x1", "x2"}, {"x1^2 - x2^2", "2*x1*x2"}, {"x1^3 - 3*x1*x2^2", "3*x1^2*x2 - x2^3"}};
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (const auto& [re, im] : fs) {
    const auto F = ComplexFunction::parse(re, im);
    for (int k = 0; k < 10; ++k) {
      const Loop loop(Point{u(rng), u(rng)}, 0.1 + std::fabs(u(rng)));
      CHECK(std::abs(contour_integral(F, loop)) < 1e-10);
    }
    CHECK(classify(SystemModel::complex_plane(F)).verdict == Verdict::Uncontrollable);
  }
}

TEST_CASE("property: gradient fields are uncontrollable") {
  std::mt19937_64 rng(43);
  ProbeBudget small;
  small.max_loops = 60;
  small.grid = 17;
  for (int trial = 0; trial < 10; ++trial) {
    const auto phi = testing::random_polynomial(rng, 2, 4);
    CHECK(classify(SystemModel::general_r2(field::gradient_field(phi, 2)), small).verdict == Verdict::Uncontrollable);
  }
}

TEST_CASE("property: verdict ignores channel relabeling and scaling") {
  const std::vector<std::pair<std::string, std::string>> fields{
      {"x2^2", "-x1^2"}, {"x1^2 - x2^2", "2*x1*x2"}, {"2*x1*x2", "x1^2"}, {"-x2", "x1"}, {"x1*x2^2", "x1^2*x2"}};
  ProbeBudget small;
  small.max_loops = 60;
  small.grid = 17;
  for (const auto& [a, b] : fields) {
    const auto base = classify(SystemModel::general_r2(field2(a, b)), small).verdict;
    CAPTURE(a);
    CHECK(classify(SystemModel::general_r2(field2(swap12(b), swap12(a))), small).verdict == base);
    for (double s : {-3.0, 1e-3, 250.0}) {
      CHECK(classify(SystemModel::general_r2(field2(a, b).scaled(s)), small).verdict == base);
    }
  }
}
