#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qflow/builders.hpp"
#include "qflow/generator.hpp"
#include "test_support.hpp"

using namespace qflow;
using qflow::testing::Rng;

using G = GaussianRational;
using EG = Element<G>;
using TG = scalar_traits<G>;

namespace {

const PhaseAngle kLambdaI{1, 4};

G gr(std::int64_t n) { return G(n); }
G gr(std::int64_t n, std::int64_t d) { return G(Rational(n, d)); }
G gi() { return TG::i(); }

FlowGenerator<G> walk_z_plus1_const() {
    auto adapter = std::make_shared<GroupAdapter>(1);
    return walk_generator<G>(adapter, {group_z(1)},
                             [](std::size_t, const GroupElem&) { return G(1); });
}

FlowGenerator<G> walk_z_pm1_const() {
    auto adapter = std::make_shared<GroupAdapter>(1);
    return walk_generator<G>(adapter, {group_z(1), group_z(-1)},
                             [](std::size_t, const GroupElem&) { return G(1); });
}

FlowGenerator<G> exclusion_2site_sym() {
    AmplitudeMap<G> alpha;
    alpha[{1, 2}] = gr(1);
    alpha[{2, 1}] = gr(1);
    return exclusion_generator<G>({1, 2}, alpha, {});
}

}  // namespace

TEST_CASE("group adapter satisfies the group axioms on random triples") {
    for (int rank : {1, 2}) {
        GroupAdapter ad(rank);
        Rng rng(100 + rank);
        for (int trial = 0; trial < 50; ++trial) {
            GroupElem a(rank), b(rank), c(rank);
            for (int k = 0; k < rank; ++k) {
                a[k] = rng.uniform(-5, 5);
                b[k] = rng.uniform(-5, 5);
                c[k] = rng.uniform(-5, 5);
            }
            CHECK(ad.multiply(ad.multiply(a, b), c) == ad.multiply(a, ad.multiply(b, c)));
            CHECK(ad.multiply(a, ad.identity()) == a);
            CHECK(ad.multiply(a, ad.inverse(a)) == ad.identity());
            CHECK(ad.parse(ad.str(a)) == a);
        }
    }
}

TEST_CASE("from_components with trivial data gives the zero generator") {
    Algebra alg = Algebra::torus(kLambdaI);
    MultiplicityBasis basis{{"f_1"}};
    auto tau = [alg](const BasisWord&) { return Element<G>(alg); };
    auto delta = [alg](const BasisWord&) { return std::vector<EG>{Element<G>(alg)}; };
    auto pi = [alg](const BasisWord& w) {
        return std::vector<std::vector<EG>>{{Element<G>(alg, w, TG::one())}};
    };
    auto phi = from_components<G>(alg, basis, tau, delta, pi,
                                  {TorusWord{1, 0}, TorusWord{0, 1}});
    CHECK(phi.on_word(TorusWord{2, -1}).is_zero());
    CHECK(validate(phi).all_pass());
}

TEST_CASE("bounded-form generator validates on the CAR algebra") {
    Algebra alg = Algebra::car();
    MultiplicityBasis basis{{"f_1"}};
    auto pi = [alg](const BasisWord& w) {
        return std::vector<std::vector<EG>>{{Element<G>(alg, w, TG::one())}};
    };
    std::vector<EG> z{car_annihilator<G>(alg, 1)};
    EG h = mul(car_creator<G>(alg, 1), car_annihilator<G>(alg, 1));
    auto phi = bounded_form_generator<G>(alg, basis, pi, z, h,
                                         {CarWord{{}, {1}}, CarWord{{1}, {}},
                                          CarWord{{}, {2}}, CarWord{{2}, {}}});
    auto rep = validate(phi);
    CHECK(rep.all_pass());
    CHECK(phi.on_word(CarWord{}).is_zero());
}

TEST_CASE("walk generator on Z: tau shifts indicators") {
    auto phi = walk_z_plus1_const();
    // tau(e_g) = e_{g-1} - e_g for H = {+1}, t == 1
    EG e0 = group_indicator<G>(phi.algebra(), group_z(0));
    EG tau = phi.tau(e0);
    CHECK(tau.coeff(GroupWord{false, group_z(-1)}) == gr(1));
    CHECK(tau.coeff(GroupWord{false, group_z(0)}) == gr(-1));
    CHECK(tau.size() == 2);
}

TEST_CASE("walk generator block entries match the one-jump matrices") {
    // m_h(g) = [[|t|^2, conj t], [t, 1]] over the word e_{h^-1 g};
    // m_e(g) = [[-sum |t|^2, -conj t], [-t, -1]] over e_g
    auto adapter = std::make_shared<GroupAdapter>(1);
    auto phi = walk_generator<G>(adapter, {group_z(1)},
                                 [](std::size_t, const GroupElem& g) {
                                     return G(Rational(g[0] >= 0 ? 2 : 1, 1));
                                 });
    auto g = phi.on_word(GroupWord{false, group_z(0)});
    BasisWord e0 = GroupWord{false, group_z(0)};
    BasisWord em1 = GroupWord{false, group_z(-1)};
    // t(0) = 2, t(-1) = 1
    CHECK(g.block(0, 0).coeff(e0) == gr(-4));
    CHECK(g.block(0, 1).coeff(e0) == gr(-2));
    CHECK(g.block(1, 0).coeff(e0) == gr(-2));
    CHECK(g.block(1, 1).coeff(e0) == gr(-1));
    CHECK(g.block(0, 0).coeff(em1) == gr(1));
    CHECK(g.block(0, 1).coeff(em1) == gr(1));
    CHECK(g.block(1, 0).coeff(em1) == gr(1));
    CHECK(g.block(1, 1).coeff(em1) == gr(1));
}

TEST_CASE("walk generators validate exactly") {
    CHECK(validate(walk_z_plus1_const()).all_pass());
    CHECK(validate(walk_z_pm1_const()).all_pass());
    // birth-death rates: t_{+1} = 1{g >= 0}, t_{-1} = 1{g >= 1}
    auto adapter = std::make_shared<GroupAdapter>(1);
    auto bd = walk_generator<G>(adapter, {group_z(1), group_z(-1)},
                                [](std::size_t h, const GroupElem& g) {
                                    if (h == 0) return g[0] >= 0 ? G(1) : G(0);
                                    return g[0] >= 1 ? G(1) : G(0);
                                });
    CHECK(validate(bd).all_pass());
    CHECK(bd.on_word(GroupWord{true, {}}).is_zero());
}

TEST_CASE("walk rejects the identity move") {
    auto adapter = std::make_shared<GroupAdapter>(1);
    CHECK_THROWS_AS(walk_generator<G>(adapter, {group_z(0)},
                                      [](std::size_t, const GroupElem&) { return G(1); }),
                    std::invalid_argument);
}

TEST_CASE("exclusion generator: delta on annihilators picks one hop") {
    auto phi = exclusion_2site_sym();
    // labels sorted: (1,2) then (2,1); delta_{j,k}(b_i) = -1{k=i} alpha_{j,i} b_j
    EG b1 = car_annihilator<G>(phi.algebra(), 1);
    auto g = phi.apply(b1);
    CHECK(g.block(1, 0).is_zero());  // delta_{1,2}(b_1) = 0
    EG want = gr(-1) * car_annihilator<G>(phi.algebra(), 2);
    CHECK(g.block(2, 0) == want);    // delta_{2,1}(b_1) = -alpha_{2,1} b_2
    // delta-dagger_{1,2}(b_1) = conj(alpha_{1,2}) b_2
    CHECK(g.block(0, 1) == car_annihilator<G>(phi.algebra(), 2));
    CHECK(g.block(0, 2).is_zero());
    // gauge part vanishes
    CHECK(g.block(1, 1).is_zero());
    CHECK(g.block(2, 2).is_zero());
    CHECK(g.block(1, 2).is_zero());
}

TEST_CASE("exclusion tau is diagonal on annihilators under symmetry") {
    // lambda_i = -i eta_i - sum_j |alpha_{j,i}|^2 / 2
    AmplitudeMap<G> alpha;
    alpha[{1, 2}] = gr(1);
    alpha[{2, 1}] = gr(1);
    std::map<int, G> eta{{1, gr(3)}};
    auto phi = exclusion_generator<G>({1, 2}, alpha, eta);
    EG b1 = car_annihilator<G>(phi.algebra(), 1);
    EG tau = phi.tau(b1);
    CHECK(tau.size() == 1);
    CHECK(tau.coeff(CarWord{{}, {1}}) == G(Rational(-1, 2), Rational(-3)));
    CHECK(validate(phi).all_pass());
}

TEST_CASE("exclusion matches the one-step branch matrices under symmetry") {
    auto phi = exclusion_2site_sym();
    // phi(b_1) = b_1 (x) B_{1,1} + b_2 (x) B_{1,2}
    auto g = phi.apply(car_annihilator<G>(phi.algebra(), 1));
    BasisWord w1 = CarWord{{}, {1}};
    BasisWord w2 = CarWord{{}, {2}};
    CHECK(g.block(0, 0).coeff(w1) == gr(-1, 2));  // lambda_1 = -1/2
    CHECK(g.block(0, 1).coeff(w2) == gr(1));      // <omega| -> conj(alpha_{1,2}) f_{1,2}
    CHECK(g.block(2, 0).coeff(w2) == gr(-1));     // -alpha_{2,1} |f_{2,1}>
}

TEST_CASE("exclusion without symmetry still validates") {
    AmplitudeMap<G> alpha;
    alpha[{1, 2}] = gr(2);
    alpha[{2, 1}] = gi();  // |alpha_12| != |alpha_21|
    auto phi = exclusion_generator<G>({1, 2}, alpha, {{1, gr(1)}, {2, gr(-1)}});
    CHECK(validate(phi).all_pass());
}

TEST_CASE("exclusion rejects support escaping the working set") {
    auto phi = exclusion_2site_sym();
    CHECK_THROWS_AS((void)phi.on_word(CarWord{{}, {3}}), std::domain_error);
    AmplitudeMap<G> alpha;
    alpha[{1, 5}] = gr(1);
    CHECK_THROWS_AS(exclusion_generator<G>({1, 2}, alpha, {}), std::invalid_argument);
}

TEST_CASE("torus generator a=b=0 reproduces the one-step matrix on U") {
    auto phi = torus_generator<G>(0, 0, gr(1), gr(1), kLambdaI);
    auto g = phi.on_word(TorusWord{1, 0});
    BasisWord u = TorusWord{1, 0};
    // m_U = [[-1/2, -1, 0], [1, 0, 0], [0, 0, 0]]
    CHECK(g.block(0, 0).coeff(u) == gr(-1, 2));
    CHECK(g.block(0, 1).coeff(u) == gr(-1));
    CHECK(g.block(1, 0).coeff(u) == gr(1));
    CHECK(g.block(0, 2).is_zero());
    CHECK(g.block(2, 0).is_zero());
    CHECK(g.block(1, 1).is_zero());
    CHECK(g.block(2, 2).is_zero());
    CHECK(validate(phi).all_pass());
}

TEST_CASE("torus generator with index shift a=1") {
    auto phi = torus_generator<G>(1, 0, gr(1), gr(1), kLambdaI);
    auto g = phi.on_word(TorusWord{1, 0});
    // adelta(U) = U^2, adelta-dagger(U) = -1
    CHECK(g.block(1, 0).coeff(TorusWord{2, 0}) == gr(1));
    CHECK(g.block(0, 1).coeff(TorusWord{0, 0}) == gr(-1));
    CHECK(validate(phi).all_pass());
}

TEST_CASE("torus tau on UV with unit coefficients") {
    auto phi = torus_generator<G>(0, 0, gr(1), gr(1), kLambdaI);
    EG uv = torus_monomial<G>(phi.algebra(), 1, 1);
    CHECK(phi.tau(uv) == gr(-1) * uv);
}

TEST_CASE("carre du champ identities") {
    auto phi = torus_generator<G>(0, 0, gr(1), gr(0), kLambdaI);
    EG one = EG::unit(phi.algebra());
    EG U = torus_monomial<G>(phi.algebra(), 1, 0);
    Rng rng(71);
    CHECK(carre_du_champ(phi, one, rng.element<G>(phi.algebra())).is_zero());
    // 2 Gamma(U*, U) = delta-dagger(U*) delta(U) = 1
    EG g2 = gr(2) * carre_du_champ(phi, star(U), U);
    CHECK(g2 == one);

    auto ex = exclusion_2site_sym();
    EG b1 = car_annihilator<G>(ex.algebra(), 1);
    EG lhs = gr(2) * carre_du_champ(ex, star(b1), b1);
    // brute-force contraction of the delta column against delta-dagger row
    auto gx = ex.apply(star(b1));
    auto gy = ex.apply(b1);
    EG rhs(ex.algebra());
    for (std::size_t k = 1; k < ex.ext_dim(); ++k) rhs += mul(gx.block(0, k), gy.block(k, 0));
    CHECK(lhs == rhs);
}

TEST_CASE("corrupted tau breaks the dissipation identity") {
    auto good = torus_generator<G>(0, 0, gr(1), gr(1), kLambdaI);
    Algebra alg = good.algebra();
    auto rule = [good, alg](const BasisWord& w) {
        GeneratorMatrix<G> g = good.on_word(w);
        const auto& tw = std::get<TorusWord>(w);
        if (tw.m == 1 && tw.n == 0) g.block(0, 0) = gr(2) * g.block(0, 0);
        return g;
    };
    FlowGenerator<G> bad(alg, good.basis(), rule, good.generators(), "torus_corrupted");
    auto rep = validate(bad);
    CHECK(!rep.all_pass());
    bool tau_failed = false;
    for (const auto& c : rep.checks)
        if (c.identity == "tau_dissipation" && !c.pass) tau_failed = true;
    CHECK(tau_failed);
}

TEST_CASE("gauge generator: one-step matrix and validation, mu = i, nu = 1") {
    auto phi = torus_gauge_generator<G>(PhaseAngle{1, 4}, PhaseAngle{0, 1}, kLambdaI);
    BasisWord u = TorusWord{1, 0};
    auto g = phi.on_word(u);
    // delta(U) = U, phi(U) = U (x) [[mu/(1-mu), -mu], [1, mu-1]]
    G mu = gi();
    CHECK(g.block(1, 0).coeff(u) == gr(1));
    CHECK(g.block(0, 1).coeff(u) == -mu);
    CHECK(g.block(0, 0).coeff(u) == mu / (gr(1) - mu));
    CHECK(g.block(1, 1).coeff(u) == mu - gr(1));
    // delta(1) = 0
    CHECK(phi.on_word(TorusWord{0, 0}).is_zero());
    CHECK(validate(phi).all_pass());
    CHECK_THROWS_AS(torus_gauge_generator<G>(PhaseAngle{0, 1}, PhaseAngle{1, 4}, kLambdaI),
                    std::invalid_argument);
}

TEST_CASE("rotation generator: m_Z diagonal and validation") {
    auto phi = rotation_generator<G>(gr(1), gi());
    BasisWord z = RotationWord{0, 0, 1};
    auto g = phi.on_word(z);
    // m_Z = diag(c1 conj(c2) - conj(c1) c2, 0) = diag(-2i, 0)
    CHECK(g.block(0, 0).coeff(z) == gr(-2) * gi());
    CHECK(g.block(1, 0).is_zero());
    CHECK(g.block(0, 1).is_zero());
    CHECK(g.block(1, 1).is_zero());
    CHECK(phi.on_word(RotationWord{0, 0, 0}).is_zero());
    CHECK(validate(phi).all_pass());
}

TEST_CASE("nogo check matches the compatibility condition") {
    CHECK(nogo_check<G>(gr(1), gr(1)).compatible);
    CHECK(!nogo_check<G>(gr(1), gi()).compatible);
    CHECK(nogo_check<G>(gr(0), gi()).compatible);
    CHECK(nogo_check<G>(gr(0), gr(5)).compatible);
}

TEST_CASE("failed nogo breaks the witness validation on (U, V)") {
    auto phi = nogo_witness_generator<G>(gr(1), gi(), kLambdaI);
    ValidateOptions opts;
    opts.sample = std::vector<BasisWord>{TorusWord{1, 0}, TorusWord{0, 1}};
    auto rep = validate(phi, opts);
    CHECK(!rep.all_pass());
    bool tau_failed = false;
    for (const auto& c : rep.checks)
        if (c.identity == "tau_dissipation" && !c.pass) tau_failed = true;
    CHECK(tau_failed);
    // and a compatible pair validates
    auto ok = nogo_witness_generator<G>(gr(1), gr(1), kLambdaI);
    CHECK(validate(ok, opts).all_pass());
}

TEST_CASE("star-linearity holds for every builder on its default sample") {
    std::vector<FlowGenerator<G>> gens;
    gens.push_back(walk_z_pm1_const());
    gens.push_back(exclusion_2site_sym());
    gens.push_back(torus_generator<G>(0, 0, gr(1), gr(1), kLambdaI));
    gens.push_back(torus_generator<G>(1, 2, gi(), gr(1, 2), kLambdaI));
    gens.push_back(torus_gauge_generator<G>(PhaseAngle{1, 4}, PhaseAngle{0, 1}, kLambdaI));
    gens.push_back(rotation_generator<G>(gr(1), gi()));
    for (const auto& phi : gens) {
        auto rep = validate(phi);
        for (const auto& c : rep.checks)
            if (c.identity == "star_linearity" || c.identity == "unit_annihilation")
                CHECK(c.pass);
    }
}

TEST_CASE("all torus variants validate for a spread of shifts") {
    for (std::int64_t a : {-1, 0, 2}) {
        for (std::int64_t b : {0, 1}) {
            auto phi = torus_generator<G>(a, b, gr(1, 2), gi(), kLambdaI);
            CHECK(validate(phi).all_pass());
        }
    }
}
