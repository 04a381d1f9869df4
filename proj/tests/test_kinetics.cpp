#include <doctest.h>

#include "mcrkit/error.hpp"
#include "mcrkit/kinetics.hpp"
#include "mcrkit/random.hpp"

#include <cmath>

using namespace mcr;

namespace {

IntegratorConfig tight(OdeMethod m = OdeMethod::RK89) {
    IntegratorConfig c;
    c.method = m;
    c.abs_tol = 1e-14;
    c.rel_tol = 1e-13;
    return c;
}

Vector eval(const Rhs& f, const Vector& y, double t = 0.0) {
    Vector d;
    f(t, y, d);
    return d;
}

double sigma_ratio(const Matrix& c, int i) {
    const SvdResult s = svd(c);
    return s.s(i) / s.s(0);
}

}  // namespace

TEST_CASE("mass-action rates of the reference systems") {
    const Vector d = eval(mass_action_rhs(bimolecular_system()), Vector{{1.0, 0.7, 0.2}});
    CHECK(d(0) == doctest::Approx(-8.4));
    CHECK(d(1) == doctest::Approx(-8.4));
    CHECK(d(2) == doctest::Approx(8.4));

    const MmClosedFormParams p;
    const Vector m = eval(mass_action_rhs(michaelis_menten_system(p)), Vector{{p.S0, p.K0, 0.0, 0.0}});
    CHECK(m(2) == doctest::Approx(p.k1 * p.S0 * p.K0));
    CHECK(m(3) == 0.0);
}

TEST_CASE("conservation laws are orthogonal to every rate vector") {
    for (const auto& sys : {bimolecular_system(), michaelis_menten_system()}) {
        const auto laws = conservation_laws(sys);
        const Matrix n = stoichiometric_matrix(sys);
        CHECK(laws.size() == 2);
        const Rhs f = mass_action_rhs(sys);
        Xoshiro256 rng(3);
        for (int trial = 0; trial < 20; ++trial) {
            Vector y(n.rows());
            for (auto& v : y) v = rng.uniform();
            const Vector d = eval(f, y);
            for (const auto& law : laws) CHECK(std::abs(law.weights.dot(d)) <= 1e-13);
        }
    }
}

TEST_CASE("paper conservation relations hold on the Michaelis-Menten trajectory") {
    const auto pre = kinetics_preset("mm");
    const Matrix c = simulate(pre.system, parse_grid(pre.grid), tight());
    ConservationLaw enzyme{Vector{{0.0, 1.0, 1.0, 0.0}}, 0.1, LawKind::Affine};
    ConservationLaw linear{Vector{{1.0, -10.0, -9.0, 1.0}}, 0.0, LawKind::Linear};
    const auto r = conservation_residuals(c, {enzyme, linear});
    CHECK(r[0] <= 1e-12);
    CHECK(r[1] <= 1e-12);
    // the computed basis spans the same space
    for (const auto& law : conservation_laws(pre.system)) CHECK(conservation_residuals(c, {law})[0] <= 1e-12);
    CHECK(sigma_ratio(c, 3) <= 1e-12);

    ConservationLaw zero{Vector::Zero(4), 0.0, LawKind::Linear};
    CHECK(conservation_residuals(Matrix::Constant(3, 4, 2.0), {zero})[0] == 0.0);
    CHECK_THROWS_AS(conservation_residuals(c, {ConservationLaw{Vector::Ones(3), 0.0, LawKind::Linear}}), InputError);
}

TEST_CASE("law kinds follow the constant") {
    const ConservationLaw a = make_law(Vector{{0.0, 1.0, 1.0, 0.0}}, Vector{{1.0, 0.1, 0.0, 0.0}});
    CHECK(a.kind == LawKind::Affine);
    CHECK(a.constant == doctest::Approx(0.1));
    const ConservationLaw l = make_law(Vector{{1.0, -10.0, -9.0, 1.0}}, Vector{{1.0, 0.1, 0.0, 0.0}});
    CHECK(l.kind == LawKind::Linear);
    CHECK(l.constant == 0.0);
}

TEST_CASE("dose-free simulations respect every conservation law") {
    for (const std::string name : {"bimolecular", "bimolecular-swapped", "mm", "mm-practical"}) {
        const auto pre = kinetics_preset(name);
        IntegratorConfig cfg;
        cfg.abs_tol = 1e-8;
        cfg.rel_tol = 1e-6;
        const Matrix c = simulate(pre.system, parse_grid(pre.grid), cfg);
        for (double r : conservation_residuals(c, conservation_laws(pre.system)))
            CHECK(r <= 100 * (cfg.abs_tol + cfg.rel_tol));
    }
}

TEST_CASE("dosing breaks the rank deficiency") {
    const auto cont = kinetics_preset("mm-dose-continuous");
    const Matrix cc = simulate(cont.system, parse_grid(cont.grid), tight(), cont.doses);
    CHECK(svd(cc).s(3) > 1e-5);
    const auto disc = kinetics_preset("mm-dose-discrete");
    const Matrix cd = simulate(disc.system, parse_grid(disc.grid), tight(), disc.doses);
    CHECK(svd(cd).s(3) > 1e-4);
}

TEST_CASE("a discrete dose only moves the dosed species") {
    const auto pre = kinetics_preset("mm-dose-discrete");
    const std::vector<double> grid = parse_grid(pre.grid);
    const Matrix c = simulate(pre.system, grid, tight(), pre.doses);
    // S + SK + P = S0 does not involve the enzyme
    ConservationLaw mass{Vector{{1.0, 0.0, 1.0, 1.0}}, pre.system.y0(0), LawKind::Affine};
    CHECK(conservation_residuals(c, {mass})[0] <= 1e-12);
    // and the enzyme total jumps by exactly the dose at t = 3
    size_t i3 = 0;
    while (grid[i3] < 3.0) ++i3;
    REQUIRE(grid[i3] == 3.0);
    CHECK(c(i3, 1) + c(i3, 2) == doctest::Approx(pre.system.y0(1) + 5e-4).epsilon(1e-12));
    CHECK(c(i3 - 1, 1) + c(i3 - 1, 2) == doctest::Approx(pre.system.y0(1)).epsilon(1e-12));
}

TEST_CASE("continuous dose window adds exactly the dosed amount") {
    ReactionSystem sys;
    sys.species = {"A", "B"};
    sys.add_reaction({{"A", 1}}, {{"B", 1}}, 0.7);
    sys.y0 = Vector{{1.0, 0.0}};
    DoseSchedule d;
    d.target = 0;
    d.mode = DoseMode::Continuous;
    d.amount = 0.3;
    d.rate = 0.2;
    d.start = 0.5;
    const Matrix c = simulate(sys, parse_grid("linspace:0:4:9"), tight(), {d});
    CHECK(c.row(8).sum() == doctest::Approx(1.3).epsilon(1e-12));
    CHECK(c.row(1).sum() == doctest::Approx(1.0).epsilon(1e-12));  // t = 0.5, window opens
    CHECK(c.row(4).sum() == doctest::Approx(1.3).epsilon(1e-12));  // t = 2.0, window closed
}

TEST_CASE("dose validation") {
    const ReactionSystem sys = bimolecular_system();
    DoseSchedule d;
    d.target = 5;
    d.amount = 1;
    CHECK_THROWS_AS(validate(d, sys, 0, 1), InputError);
    d.target = 0;
    d.time = 2.0;
    CHECK_THROWS_AS(validate(d, sys, 0, 1), InputError);
    d.mode = DoseMode::Continuous;
    d.rate = 0;
    CHECK_THROWS_AS(validate(d, sys, 0, 1), InputError);
}

TEST_CASE("bimolecular closed form") {
    auto r = bimolecular_closed_form(12, 1, 0.7, 0.2, 0.0);
    CHECK(r[0] == doctest::Approx(1.0));
    CHECK(r[1] == doctest::Approx(0.7));
    CHECK(r[2] == doctest::Approx(0.2));
    r = bimolecular_closed_form(12, 1, 0.7, 0.2, 200.0);
    CHECK(r[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(std::abs(r[1]) <= 1e-12);
    CHECK(r[2] == doctest::Approx(0.9).epsilon(1e-12));
    // equal initials: dX/dt = -X^2 integrates to 1/(1 + t)
    r = bimolecular_closed_form(1, 1, 1, 0, 1.0);
    CHECK(r[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(bimolecular_closed_form(1, 0, 1, 0, 1.0), DomainError);
    CHECK_THROWS_AS(bimolecular_closed_form(1, 1, 1, 0, -1.0), DomainError);
}

TEST_CASE("bimolecular closed form is continuous across the equal-initials switch") {
    const double t = 0.37;
    const double limit = bimolecular_closed_form(2, 1.0, 1.0, 0, t)[0];
    for (double gap : {1e-12, 0.5e-8, 2e-8, 1e-7, 1e-6}) {
        const double x = bimolecular_closed_form(2, 1.0 + gap, 1.0, 0, t)[0];
        // X depends smoothly on X0 with dX/dX0 = O(1)
        CHECK(std::abs(x - limit) <= 2 * gap + 1e-14);
    }
}

TEST_CASE("bimolecular closed form satisfies its ODE") {
    const double k = 12, x0 = 1, y0 = 0.7;
    for (double t : {0.01, 0.1, 0.5, 1.0, 2.0, 3.4}) {
        const double h = 1e-6;
        const double xp = bimolecular_closed_form(k, x0, y0, 0.2, t + h)[0];
        const double xm = bimolecular_closed_form(k, x0, y0, 0.2, t - h)[0];
        const double x = bimolecular_closed_form(k, x0, y0, 0.2, t)[0];
        CHECK((xp - xm) / (2 * h) == doctest::Approx(-k * x * (x - x0 + y0)).epsilon(1e-6));
    }
}

TEST_CASE("Lambert W principal branch") {
    CHECK(lambert_w0(0.0) == 0.0);
    CHECK(lambert_w0(std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-15));
    // oracle: fixed-point iteration w <- exp(-w) converges to the omega constant
    double w = 0.5;
    for (int i = 0; i < 200; ++i) w = std::exp(-w);
    CHECK(std::abs(lambert_w0(1.0) - w) <= 1e-12);
    CHECK(std::abs(lambert_w0(1.0) - 0.567143290409784) <= 1e-12);
    CHECK(lambert_w0(-std::exp(-1.0)) == doctest::Approx(-1.0).epsilon(1e-7));
    CHECK_THROWS_AS(lambert_w0(-0.5), DomainError);
    for (double x : {-0.3678, -0.3, -0.1, 1e-10, 0.3, 2.0, 10.0, 1e3, 1e100, 1e300}) {
        const double v = lambert_w0(x);
        CHECK(std::abs(v * std::exp(v) - x) <= 1e-14 * std::max(1.0, std::abs(x)) * 4);
    }
}

TEST_CASE("Lambert W of exp(u) in the log domain") {
    for (double u : {-5.0, 0.0, 1.0, 50.0, 700.0, 701.0, 1e4, 1e8}) {
        const double w = lambert_w0_exp(u);
        CHECK(w + std::log(w) == doctest::Approx(u).epsilon(1e-14));
    }
    CHECK(lambert_w0_exp(1.0) == doctest::Approx(1.0));
}

TEST_CASE("QSSA closed form") {
    const MmClosedFormParams p;
    auto r = mm_qssa_closed_form(p, 0.0);
    CHECK(r[0] == doctest::Approx(p.S0).epsilon(1e-15));
    CHECK(r[2] == 0.0);
    r = mm_qssa_closed_form(p, 1e4);
    CHECK(r[0] <= 1e-12);
    CHECK(r[3] == doctest::Approx(p.S0));
    const Matrix c = mm_qssa_matrix(p, parse_grid("linspace:0:7.5:181"));
    CHECK(c.minCoeff() >= 0);
    CHECK(sigma_ratio(c, 3) <= 1e-12);
    // very large S0/K_M drives the exponent far past double range
    MmClosedFormParams big = p;
    big.S0 = 1e6;
    const auto rb = mm_qssa_closed_form(big, 10.0);
    CHECK(std::isfinite(rb[0]));
    CHECK(rb[0] == doctest::Approx(big.S0 - big.vmax() * 10.0).epsilon(1e-6));
}

TEST_CASE("QSSA concentrations stay nonnegative over parameter sweeps") {
    for (double s0 : {1e-3, 1.0, 1e3, 1e6})
        for (double k0 : {1e-4, 0.1, 10.0}) {
            MmClosedFormParams p;
            p.S0 = s0;
            p.K0 = k0;
            for (double t : {0.0, 0.1, 1.0, 10.0, 1e3, 1e6}) {
                const auto r = mm_qssa_closed_form(p, t);
                for (double v : r) CHECK(v >= 0);
            }
        }
}

TEST_CASE("two-equation reductions reproduce the full model") {
    const MmClosedFormParams p;
    const std::vector<double> grid = parse_grid("linspace:0:7.5:181");
    const Matrix full = simulate(michaelis_menten_system(p), grid, tight());
    for (MmReduction v : {MmReduction::SP, MmReduction::SK}) {
        const ReducedSystem r = mm_reduced_system(p, v);
        const OdeSolution s = integrate(r.rhs, r.y0, grid, tight());
        const Matrix c = r.reconstruct(s.states);
        CHECK((c - full).cwiseAbs().maxCoeff() <= 1e-8);
        CHECK(sigma_ratio(c, 3) <= 1e-12);
        const Matrix c0 = r.reconstruct(r.y0.transpose());
        CHECK(c0(0, 0) == p.S0);
        CHECK(c0(0, 1) == p.K0);
        CHECK(c0(0, 2) == 0.0);
        CHECK(c0(0, 3) == 0.0);
    }
}

TEST_CASE("model validation") {
    ReactionSystem s;
    s.species = {"A", "B"};
    s.reactions.push_back({{-1, 0}, {0, 1}, 1.0});
    s.y0 = Vector::Ones(2);
    CHECK_THROWS_AS(mass_action_rhs(s), ModelError);
    s.reactions[0].reactants = {0, 0};
    CHECK_THROWS_AS(validate(s), ModelError);
    s.reactions[0].reactants = {1, 0};
    s.reactions[0].k = 0;
    CHECK_THROWS_AS(validate(s), ModelError);
    CHECK_THROWS_AS(s.index_of("C"), ModelError);
}

TEST_CASE("grid specifications") {
    auto g = parse_grid("linspace:0:1:5");
    CHECK(g == std::vector<double>{0, 0.25, 0.5, 0.75, 1});
    g = parse_grid("power:4:3:2");
    CHECK(g == std::vector<double>{0, 1, 4});
    g = parse_grid("list:0;0.5;2");
    CHECK(g.size() == 3);
    CHECK_THROWS_AS(parse_grid("list:0;0"), InputError);
    CHECK_THROWS_AS(parse_grid("linspace:0:1"), InputError);
    CHECK_THROWS_AS(parse_grid("cheb:0:1:4"), InputError);
    CHECK_THROWS_AS(kinetics_preset("nope"), InputError);
}
