#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qflow/builders.hpp"
#include "qflow/evolution.hpp"
#include "qflow/oracles.hpp"
#include "test_support.hpp"

using namespace qflow;

using EC = Element<Complex>;

namespace {

const PhaseAngle kLambdaI{1, 4};

FlowGenerator<Complex> torus00f() {
    return torus_generator<Complex>(0, 0, Complex(1, 0), Complex(1, 0), kLambdaI);
}

FlowGenerator<Complex> walk_plus1f() {
    auto adapter = std::make_shared<GroupAdapter>(1);
    WalkOptions opts;
    opts.transition_sup = 1.0;
    return walk_generator<Complex>(adapter, {group_z(1)},
                                   [](std::size_t, const GroupElem&) { return Complex(1, 0); },
                                   opts);
}

FlowGenerator<Complex> walk_pm1f() {
    auto adapter = std::make_shared<GroupAdapter>(1);
    WalkOptions opts;
    opts.transition_sup = 1.0;
    return walk_generator<Complex>(adapter, {group_z(1), group_z(-1)},
                                   [](std::size_t, const GroupElem&) { return Complex(1, 0); },
                                   opts);
}

FlowGenerator<Complex> exclusion2f() {
    AmplitudeMap<Complex> alpha;
    alpha[{1, 2}] = Complex(1, 0);
    alpha[{2, 1}] = Complex(1, 0);
    return exclusion_generator<Complex>({1, 2}, alpha, {});
}

}  // namespace

TEST_CASE("slice_exp at t = 0 returns the input with zero error") {
    auto phi = torus00f();
    EC U = torus_monomial<Complex>(phi.algebra(), 1, 0);
    auto cert = require_geometric_cert(phi, U);
    auto res = slice_exp(phi, kvec_omega<Complex>(2), kvec_omega<Complex>(2), 0.0, U, 1e-12, cert);
    CHECK(res.value == U);
    CHECK(res.error_bound == 0.0);
}

TEST_CASE("torus vacuum series reproduces the diagonal exponential") {
    auto phi = torus00f();
    EC U = torus_monomial<Complex>(phi.algebra(), 1, 0);
    auto cert = require_geometric_cert(phi, U);
    for (double t : {0.1, 0.5, 1.0}) {
        auto res = vacuum_semigroup(phi, t, U, 1e-12, cert);
        CHECK(res.value.size() == 1);
        Complex c = res.value.coeff(TorusWord{1, 0});
        CHECK(std::abs(c - std::exp(-t / 2.0)) <= res.error_bound + 1e-13);
        CHECK(res.error_bound <= 1e-12);
    }
    // general monomials against the multiplier oracle
    for (std::int64_t m : {0, 1, 2})
        for (std::int64_t n : {-1, 0, 3}) {
            EC x = torus_monomial<Complex>(phi.algebra(), m, n);
            auto res = vacuum_semigroup(phi, 0.7, x, 1e-11, require_geometric_cert(phi, x));
            double expect = torus_multiplier(0.7, m, n, Complex(1, 0), Complex(1, 0));
            CHECK(std::abs(res.value.coeff(TorusWord{m, n}) - expect) <=
                  res.error_bound + 1e-12);
        }
}

TEST_CASE("vacuum semigroup is unital") {
    auto phi = exclusion2f();
    EC one = EC::unit(phi.algebra());
    auto res = vacuum_semigroup(phi, 0.8, one, 1e-12, require_geometric_cert(phi, one));
    CHECK(res.value == one);
    CHECK(res.error_bound == 0.0);
}

TEST_CASE("walk semigroup matches the Poisson kernel") {
    auto phi = walk_plus1f();
    EC e0 = group_indicator<Complex>(phi.algebra(), group_z(0));
    auto cert = require_geometric_cert(phi, e0);
    for (double t : {0.3, 1.0}) {
        auto res = vacuum_semigroup(phi, t, e0, 1e-13, cert);
        // T_t(e_0)(k) = e^{-t} t^{-k} / (-k)! for k <= 0
        double fact = 1.0;
        for (int k = 0; k >= -4; --k) {
            if (k < 0) fact *= (double)(-k);
            double expect = std::exp(-t) * std::pow(t, (double)(-k)) / fact;
            Complex got = res.value.coeff(GroupWord{false, group_z(k)});
            CHECK(std::abs(got - expect) <= res.error_bound + 1e-12);
        }
        CHECK(std::abs(res.value.coeff(GroupWord{false, group_z(1)})) <= res.error_bound);
    }
    auto res1 = vacuum_semigroup(phi, 1.0, e0, 1e-13, cert);
    CHECK(std::abs(res1.value.coeff(GroupWord{false, group_z(-1)}) - std::exp(-1.0)) <= 1e-10);
}

TEST_CASE("uncertified elements are refused") {
    auto phi = torus_generator<Complex>(1, 0, Complex(1, 0), Complex(1, 0), kLambdaI);
    EC U = torus_monomial<Complex>(phi.algebra(), 1, 0);
    CHECK_THROWS_AS(require_geometric_cert(phi, U, GrowthOptions{}), std::domain_error);
}

TEST_CASE("walk semigroup stays a positive contraction pointwise") {
    auto phi = walk_pm1f();
    EC e0 = group_indicator<Complex>(phi.algebra(), group_z(0));
    auto res = vacuum_semigroup(phi, 0.9, e0, 1e-12, require_geometric_cert(phi, e0));
    for (auto& [w, c] : res.value.terms()) {
        CHECK(std::abs(c.imag()) <= 1e-12);
        CHECK(c.real() >= -res.error_bound - 1e-12);
        CHECK(c.real() <= 1.0 + res.error_bound + 1e-12);
    }
}

TEST_CASE("zero test functions reduce the cocycle to the vacuum semigroup") {
    auto phi = torus00f();
    EC U = torus_monomial<Complex>(phi.algebra(), 1, 0);
    auto cert = require_geometric_cert(phi, U);
    StepFunction f = StepFunction::zero(2, 1.0);
    auto a = cocycle_matrix_element(phi, f, f, 0.8, U, 1e-11, cert);
    auto b = vacuum_semigroup(phi, 0.8, U, 1e-11, cert);
    CHECK(norm_bound(a.value - b.value).value <= a.error_bound + b.error_bound + 1e-13);
}

TEST_CASE("single-interval torus cocycle has the scalar closed form") {
    auto phi = torus00f();
    EC U = torus_monomial<Complex>(phi.algebra(), 1, 0);
    auto cert = require_geometric_cert(phi, U);
    std::vector<Complex> xi{Complex(0.4, 0.2), Complex(-0.3, 0.1)};
    std::vector<Complex> eta{Complex(0.1, -0.5), Complex(0.2, 0.0)};
    double t = 0.6;
    auto res = cocycle_matrix_element(phi, StepFunction::constant(xi, 1.0),
                                      StepFunction::constant(eta, 1.0), t, U, 1e-12, cert);
    // mu = <xi-hat, m_U eta-hat> with the literal one-step matrix
    Complex mU[3][3] = {{Complex(-0.5), Complex(-1), Complex(0)},
                        {Complex(1), Complex(0), Complex(0)},
                        {Complex(0), Complex(0), Complex(0)}};
    auto xih = kvec_hat<Complex>(xi);
    auto etah = kvec_hat<Complex>(eta);
    Complex mu = 0.0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) mu += std::conj(xih[r]) * mU[r][c] * etah[c];
    Complex inner = std::conj(xi[0]) * eta[0] + std::conj(xi[1]) * eta[1];
    Complex expect = std::exp(t * (inner + mu));
    CHECK(res.value.size() == 1);
    CHECK(std::abs(res.value.coeff(TorusWord{1, 0}) - expect) <= res.error_bound + 1e-12);
}

TEST_CASE("two equal intervals collapse to one of doubled length") {
    auto phi = walk_pm1f();
    EC e0 = group_indicator<Complex>(phi.algebra(), group_z(0));
    auto cert = require_geometric_cert(phi, e0);
    std::vector<Complex> xi{Complex(0.3, 0.0), Complex(0.0, 0.2)};
    std::vector<Complex> eta{Complex(-0.1, 0.1), Complex(0.4, 0.0)};
    StepFunction split;
    split.horizon = 0.6;
    split.breaks = {0.0, 0.3, 0.6};
    split.values = {xi, xi};
    StepFunction flat = StepFunction::constant(xi, 0.6);
    StepFunction split_g;
    split_g.horizon = 0.6;
    split_g.breaks = {0.0, 0.3, 0.6};
    split_g.values = {eta, eta};
    StepFunction flat_g = StepFunction::constant(eta, 0.6);
    auto a = cocycle_matrix_element(phi, split, split_g, 0.6, e0, 1e-11, cert);
    auto b = cocycle_matrix_element(phi, flat, flat_g, 0.6, e0, 1e-11, cert);
    CHECK(norm_bound(a.value - b.value).value <= a.error_bound + b.error_bound + 1e-12);
}

TEST_CASE("cocycle law: interval composition equals direct evaluation") {
    qflow::testing::Rng rng(111);
    auto phi = torus00f();
    EC U = torus_monomial<Complex>(phi.algebra(), 1, 0);
    auto cert = require_geometric_cert(phi, U);
    for (int trial = 0; trial < 4; ++trial) {
        StepFunction f, g;
        int pieces = rng.uniform(2, 3);
        f.breaks = {0.0};
        g.breaks = {0.0};
        for (int k = 1; k <= pieces; ++k) {
            f.breaks.push_back(f.breaks.back() + rng.real(0.1, 0.4));
            std::vector<Complex> fv{Complex(rng.real(-0.5, 0.5), rng.real(-0.5, 0.5)),
                                    Complex(rng.real(-0.5, 0.5), 0.0)};
            std::vector<Complex> gv{Complex(rng.real(-0.5, 0.5), 0.0),
                                    Complex(0.0, rng.real(-0.5, 0.5))};
            f.values.push_back(fv);
            g.values.push_back(gv);
        }
        g.breaks = f.breaks;
        f.horizon = f.breaks.back();
        g.horizon = g.breaks.back();
        f.validate();
        g.validate();

        double T = f.horizon;
        double s = f.breaks[1];  // split at an existing breakpoint
        auto direct = cocycle_matrix_element(phi, f, g, T, U, 1e-11, cert);
        auto inner = cocycle_matrix_element(phi, f.shift(s), g.shift(s), T - s, U, 1e-11, cert);
        auto outer =
            cocycle_matrix_element(phi, f, g, s, inner.value, 1e-11, inner.value_cert);
        double budget = direct.error_bound + outer.error_bound +
                        inner.error_bound * outer.amplification + 1e-12;
        CHECK(norm_bound(direct.value - outer.value).value <= budget);
    }
}

TEST_CASE("semigroup law holds within certified budgets") {
    qflow::testing::Rng rng(112);
    auto torus = torus00f();
    EC uv = torus_monomial<Complex>(torus.algebra(), 1, 1);
    auto rep = semigroup_check(torus, 0.5, 0.5, uv, 1e-10, require_geometric_cert(torus, uv));
    CHECK(rep.all_pass());
    // both sides concentrate on e^{-1} UV
    auto whole = vacuum_semigroup(torus, 1.0, uv, 1e-12, require_geometric_cert(torus, uv));
    CHECK(std::abs(whole.value.coeff(TorusWord{1, 1}) - std::exp(-1.0)) <= 1e-11);

    auto ex = exclusion2f();
    EC b1 = car_annihilator<Complex>(ex.algebra(), 1);
    auto cert = require_geometric_cert(ex, b1);
    for (int trial = 0; trial < 4; ++trial) {
        double s = rng.real(0.05, 1.0), t = rng.real(0.05, 1.0);
        auto r = semigroup_check(ex, s, t, b1, 1e-9, cert);
        CHECK(r.all_pass());
    }
    auto rw = walk_pm1f();
    EC e0 = group_indicator<Complex>(rw.algebra(), group_z(0));
    auto certw = require_geometric_cert(rw, e0);
    CHECK(semigroup_check(rw, 0.4, 0.6, e0, 1e-9, certw).all_pass());
    CHECK(semigroup_check(rw, 0.0, 0.7, e0, 1e-12, certw).all_pass());
}

TEST_CASE("series truncation is self-consistent when tightened") {
    auto phi = exclusion2f();
    EC x = mul(car_creator<Complex>(phi.algebra(), 1), car_annihilator<Complex>(phi.algebra(), 1));
    auto cert = require_geometric_cert(phi, x);
    auto loose = vacuum_semigroup(phi, 1.0, x, 1e-6, cert);
    auto tight = vacuum_semigroup(phi, 1.0, x, 1e-14, cert);
    CHECK(norm_bound(loose.value - tight.value).value <= loose.error_bound + 1e-14);
    CHECK(tight.error_bound < loose.error_bound);
}

TEST_CASE("commutator probe vanishes for the walk and fires for the torus") {
    auto rw = walk_pm1f();
    EC a = group_indicator<Complex>(rw.algebra(), group_z(0));
    EC b = group_indicator<Complex>(rw.algebra(), group_z(1));
    auto cert_a = require_geometric_cert(rw, a);
    auto cert_b = require_geometric_cert(rw, b);
    std::vector<Complex> xi{Complex(0.3, 0.1), Complex(-0.2, 0.0)};
    std::vector<Complex> eta{Complex(0.1, 0.0), Complex(0.2, -0.3)};
    StepFunction f, g;
    f.horizon = g.horizon = 1.0;
    f.breaks = g.breaks = {0.0, 0.5, 1.0};
    f.values = {xi, eta};
    g.values = {eta, xi};
    auto res = commutator_matrix_element(rw, f, g, 0.4, 0.9, a, b, 1e-9, cert_a, cert_b);
    CHECK(norm_bound(res.value).value <= res.error_bound + 1e-9);

    // unit input: exactly zero
    EC one = EC::unit(rw.algebra());
    auto zero = commutator_matrix_element(rw, f, g, 0.4, 0.9, one, b, 1e-9,
                                          require_geometric_cert(rw, one), cert_b);
    CHECK(zero.value.is_zero());

    // torus negative control: [j_s(U), j_t(V)] is macroscopically non-zero
    auto torus = torus00f();
    EC U = torus_monomial<Complex>(torus.algebra(), 1, 0);
    EC V = torus_monomial<Complex>(torus.algebra(), 0, 1);
    StepFunction zf = StepFunction::zero(2, 1.0);
    auto ctrl = commutator_matrix_element(torus, zf, zf, 0.3, 0.8, U, V, 1e-9,
                                          require_geometric_cert(torus, U),
                                          require_geometric_cert(torus, V));
    CHECK(norm_bound(ctrl.value).value > 1e-3);
}

TEST_CASE("matrix elements satisfy the weak differential identity") {
    // d/dt j-hat_t[f,g](x) = j-hat_t[f,g](phi^{f-hat(t)}_{g-hat(t)}(x))
    //                        + <f(t), g(t)> j-hat_t[f,g](x), checked by a
    // central difference at an interior point of a constant interval
    auto phi = torus00f();
    EC U = torus_monomial<Complex>(phi.algebra(), 1, 0);
    auto cert = require_geometric_cert(phi, U);
    std::vector<Complex> xi{Complex(0.4, 0.1), Complex(-0.2, 0.3)};
    std::vector<Complex> eta{Complex(0.2, -0.1), Complex(0.1, 0.0)};
    StepFunction f = StepFunction::constant(xi, 2.0);
    StepFunction g = StepFunction::constant(eta, 2.0);
    double t0 = 0.7, h = 1e-4;
    auto plus = cocycle_matrix_element(phi, f, g, t0 + h, U, 1e-13, cert);
    auto minus = cocycle_matrix_element(phi, f, g, t0 - h, U, 1e-13, cert);
    Complex dF = (plus.value.coeff(TorusWord{1, 0}) - minus.value.coeff(TorusWord{1, 0})) /
                 (2.0 * h);

    EC integrand = phi.compress(kvec_hat<Complex>(xi), kvec_hat<Complex>(eta), U);
    auto at_t0 = cocycle_matrix_element(phi, f, g, t0, U, 1e-13, cert);
    auto pushed = cocycle_matrix_element(phi, f, g, t0, integrand, 1e-13,
                                         require_geometric_cert(phi, integrand));
    Complex inner = std::conj(xi[0]) * eta[0] + std::conj(xi[1]) * eta[1];
    Complex rhs = pushed.value.coeff(TorusWord{1, 0}) +
                  inner * at_t0.value.coeff(TorusWord{1, 0});
    CHECK(std::abs(dF - rhs) / std::abs(rhs) <= 1e-5);
}

TEST_CASE("mismatched horizons are rejected") {
    auto phi = torus00f();
    EC U = torus_monomial<Complex>(phi.algebra(), 1, 0);
    auto cert = require_geometric_cert(phi, U);
    StepFunction f = StepFunction::zero(2, 1.0);
    StepFunction g = StepFunction::zero(2, 2.0);
    CHECK_THROWS_AS(cocycle_matrix_element(phi, f, g, 0.5, U, 1e-10, cert),
                    std::invalid_argument);
}
