#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>
#include <fstream>

#include "petrosem/operator_io.hpp"
#include "petrosem/operator_spec.hpp"

using namespace petrosem;
using namespace std::complex_literals;

namespace {

std::string fixture(const std::string& name) {
    return std::string(PETROSEM_FIXTURE_DIR) + "/" + name;
}

RealVector xi1(double v) {
    RealVector xi(1);
    xi(0) = v;
    return xi;
}

OperatorSpec scalar_op(int d, std::map<int, std::complex<double>> coeffs) {
    std::map<MultiIndex, ComplexMatrix> terms;
    for (auto [order, c] : coeffs) {
        ComplexMatrix A(1, 1);
        A(0, 0) = c;
        terms.emplace(MultiIndex({order}), A);
    }
    return OperatorSpec(1, 1, d, std::move(terms));
}

}  // namespace

TEST_CASE("multi-index ordering and arithmetic") {
    MultiIndex a({1, 2}), b({2, 1}), c({0, 2});
    CHECK(a.order() == 3);
    CHECK(c < a);        // graded first
    CHECK(a < b);        // then lexicographic
    CHECK(a.dominates(c));
    CHECK_FALSE(c.dominates(a));
    CHECK(a.minus(c).entries() == std::vector<int>{1, 0});
    CHECK(binomial(4, 2) == doctest::Approx(6.0));
    CHECK(binomial(a, c) == doctest::Approx(1.0));
    CHECK(binomial(MultiIndex({3, 2}), MultiIndex({1, 1})) == doctest::Approx(6.0));
    CHECK_THROWS_AS(MultiIndex(std::vector<int>{-1}), InputError);
}

TEST_CASE("multi_indices_up_to enumerates the graded simplex") {
    auto idx = multi_indices_up_to(2, 2);
    CHECK(idx.size() == 6);  // C(2+2,2)
    CHECK(idx.front().order() == 0);
    CHECK(idx.back().order() == 2);
    for (size_t i = 1; i < idx.size(); ++i) CHECK(idx[i - 1] < idx[i]);
    CHECK(multi_indices_up_to(3, 1).size() == 4);
}

TEST_CASE("operator validation") {
    ComplexMatrix one = ComplexMatrix::Identity(1, 1);
    SUBCASE("alpha length must equal n") {
        std::map<MultiIndex, ComplexMatrix> t{{MultiIndex({1, 0}), one}};
        CHECK_THROWS_AS(OperatorSpec(1, 1, 1, t), InputError);
    }
    SUBCASE("order above d rejected") {
        std::map<MultiIndex, ComplexMatrix> t{{MultiIndex({3}), one}};
        CHECK_THROWS_AS(OperatorSpec(1, 1, 2, t), InputError);
    }
    SUBCASE("matrix shape must be m x m") {
        std::map<MultiIndex, ComplexMatrix> t{{MultiIndex({1}),
                                               ComplexMatrix::Zero(2, 1)}};
        CHECK_THROWS_AS(OperatorSpec(2, 1, 1, t), InputError);
    }
    SUBCASE("non-finite entries rejected") {
        ComplexMatrix bad(1, 1);
        bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
        std::map<MultiIndex, ComplexMatrix> t{{MultiIndex({1}), bad}};
        CHECK_THROWS_AS(OperatorSpec(1, 1, 1, t), InputError);
    }
    SUBCASE("a term of order exactly d is required") {
        std::map<MultiIndex, ComplexMatrix> t{{MultiIndex({0}), one}};
        CHECK_THROWS_AS(OperatorSpec(1, 1, 2, t), InputError);
        CHECK_NOTHROW(OperatorSpec(1, 1, 0, t));
    }
}

TEST_CASE("symbol evaluation on the bundled operators") {
    auto heat = load_operator_file(fixture("heat.json"));
    CHECK(eval_symbol(heat, xi1(3.0))(0, 0).real() == doctest::Approx(-9.0));

    auto schrod = load_operator_file(fixture("schrodinger.json"));
    std::complex<double> v = eval_symbol(schrod, xi1(2.0))(0, 0);
    CHECK(std::abs(v - (-4.0i)) < 1e-14);

    auto wave = load_operator_file(fixture("wave_system.json"));
    ComplexMatrix W = eval_symbol(wave, xi1(2.0));
    CHECK(std::abs(W(0, 1) - 1.0) < 1e-14);
    CHECK(std::abs(W(1, 0) - (-4.0)) < 1e-14);
    CHECK(std::abs(W(0, 0)) == 0.0);

    auto sq = load_operator_file(fixture("sqrt_system.json"));
    ComplexMatrix S = eval_symbol(sq, xi1(2.0));
    CHECK(std::abs(S(1, 0) - 2.0i) < 1e-14);
    CHECK(std::abs(S(0, 1) - 1.0) < 1e-14);
}

TEST_CASE("symbol evaluation in two dimensions") {
    // Laplacian: terms (2,0) and (0,2), symbol -|xi|^2
    ComplexMatrix one = ComplexMatrix::Identity(1, 1);
    std::map<MultiIndex, ComplexMatrix> t{{MultiIndex({2, 0}), one},
                                          {MultiIndex({0, 2}), one}};
    OperatorSpec lap(1, 2, 2, t);
    RealVector xi(2);
    xi << 1.5, -2.0;
    CHECK(eval_symbol(lap, xi)(0, 0).real() == doctest::Approx(-(1.5 * 1.5 + 4.0)));
    CHECK(eval_symbol(lap, xi)(0, 0).imag() == doctest::Approx(0.0));
}

TEST_CASE("symbol derivative matches analytic formulas") {
    auto heat = load_operator_file(fixture("heat.json"));  // symbol -xi^2
    auto d1 = symbol_derivative(heat, MultiIndex({1}));
    auto d2 = symbol_derivative(heat, MultiIndex({2}));
    auto d3 = symbol_derivative(heat, MultiIndex({3}));
    for (double x : {-2.0, 0.0, 0.7}) {
        CHECK(std::abs(eval_symbol(d1, xi1(x))(0, 0) - (-2.0 * x)) < 1e-14);
        CHECK(std::abs(eval_symbol(d2, xi1(x))(0, 0) - (-2.0)) < 1e-14);
        CHECK(std::abs(eval_symbol(d3, xi1(x))(0, 0)) == 0.0);
    }

    auto sq = load_operator_file(fixture("sqrt_system.json"));
    auto sd = symbol_derivative(sq, MultiIndex({1}));
    ComplexMatrix D = eval_symbol(sd, xi1(5.0));
    CHECK(std::abs(D(1, 0) - 1.0i) < 1e-14);
    CHECK(std::abs(D(0, 1)) == 0.0);
}

TEST_CASE("derivative of a cross term in two variables") {
    // symbol i^3 xi1^2 xi2 = -i xi1^2 xi2; d/dxi1 d/dxi2 -> -2 i xi1
    ComplexMatrix one = ComplexMatrix::Identity(1, 1);
    std::map<MultiIndex, ComplexMatrix> t{{MultiIndex({2, 1}), one}};
    OperatorSpec op(1, 2, 3, t);
    auto d = symbol_derivative(op, MultiIndex({1, 1}));
    RealVector xi(2);
    xi << 1.5, -3.0;
    std::complex<double> expected = -2.0i * 1.5;
    CHECK(std::abs(eval_symbol(d, xi)(0, 0) - expected) < 1e-13);
}

TEST_CASE("operator sum and shift") {
    auto heat = load_operator_file(fixture("heat.json"));
    auto rd = load_operator_file(fixture("reaction_diffusion.json"));
    auto sum = heat.shifted(1.0);
    for (double x : {0.0, 1.0, 2.5}) {
        CHECK(std::abs(eval_symbol(sum, xi1(x))(0, 0) -
                       eval_symbol(rd, xi1(x))(0, 0)) < 1e-14);
    }
    auto twice = heat + heat;
    CHECK(eval_symbol(twice, xi1(2.0))(0, 0).real() == doctest::Approx(-8.0));
}

TEST_CASE("apply_operator_modes multiplies by the symbol") {
    auto wave = load_operator_file(fixture("wave_system.json"));
    ModeCoefficients modes;
    ComplexVector v(2);
    v << 1.0, 2.0i;
    modes[{2.0}] = v;
    auto out = apply_operator_modes(wave, modes);
    ComplexVector expect = eval_symbol(wave, xi1(2.0)) * v;
    CHECK((out.at({2.0}) - expect).norm() < 1e-14);
}

TEST_CASE("operator file parsing") {
    auto heat = load_operator_file(fixture("heat.json"));
    CHECK(heat.m() == 1);
    CHECK(heat.n() == 1);
    CHECK(heat.d() == 2);
    CHECK(heat.terms().size() == 1);

    auto wave = load_operator_file(fixture("wave_system.json"));
    CHECK(wave.m() == 2);
    CHECK(wave.terms().size() == 2);

    SUBCASE("round trip through JSON") {
        auto again = parse_operator_json(operator_to_json(wave));
        for (double x : {0.0, 1.0, 3.0}) {
            CHECK((eval_symbol(again, xi1(x)) - eval_symbol(wave, xi1(x))).norm() <
                  1e-15);
        }
    }
    SUBCASE("shape errors name the offending field") {
        std::string bad = R"({"m":2,"n":1,"d":1,"terms":[
            {"alpha":[1],"matrix":[[[1,0],[0,0]]]}]})";
        try {
            parse_operator_json(bad);
            FAIL("expected InputError");
        } catch (const InputError& e) {
            CHECK(std::string(e.what()).find("terms[0]") != std::string::npos);
        }
    }
    SUBCASE("alpha order above d rejected") {
        std::string bad = R"({"m":1,"n":1,"d":1,"terms":[
            {"alpha":[2],"matrix":[[[1,0]]]}]})";
        CHECK_THROWS_AS(parse_operator_json(bad), InputError);
    }
    SUBCASE("malformed JSON rejected") {
        CHECK_THROWS_AS(parse_operator_json("{"), InputError);
        CHECK_THROWS_AS(parse_operator_json("[1,2]"), InputError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_operator_file("/nonexistent/x.json"), InputError);
    }
}

TEST_CASE("float formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 6.02e23, -1.7976931348623157e308, 0.0}) {
        CHECK(std::stod(format_float(v)) == v);
    }
}

TEST_CASE("operator norm and finiteness") {
    ComplexMatrix M(2, 2);
    M << 3.0, 0.0, 0.0, 4.0i;
    CHECK(operator_norm(M) == doctest::Approx(4.0));
    CHECK(is_finite(M));
    M(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_FALSE(is_finite(M));
}
