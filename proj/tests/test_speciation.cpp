#include <doctest.h>

#include "mcrkit/error.hpp"
#include "mcrkit/speciation.hpp"

#include <cmath>

using namespace mcr;

namespace {

// Components A-, H+; species A-, H+, HA.
EquilibriumModel monoprotic(double log_k) {
    EquilibriumModel m;
    m.model.resize(2, 3);
    m.model << 1, 0, 1, 0, 1, 1;
    m.log_beta = Vector{{0, 0, log_k}};
    m.component_names = {"A", "H"};
    m.species_names = {"A-", "H+", "HA"};
    return m;
}

// [HA] from beta (A - x)(H - x) = x, the root below min(A, H).
double monoprotic_oracle(double beta, double a, double h) {
    const double b = beta * (a + h) + 1.0;
    return 2.0 * beta * a * h / (b + std::sqrt(b * b - 4.0 * beta * beta * a * h));
}

Matrix dye_block(const TitrationResult& r) {
    Matrix out(r.c.rows(), static_cast<Eigen::Index>(kDyeSpeciesColumns.size()));
    for (size_t j = 0; j < kDyeSpeciesColumns.size(); ++j)
        out.col(static_cast<Eigen::Index>(j)) = r.c.col(kDyeSpeciesColumns[j]);
    return out;
}

}  // namespace

TEST_CASE("identity model returns the totals") {
    EquilibriumModel m;
    m.model = Matrix::Identity(1, 1);
    m.log_beta = Vector::Zero(1);
    m.component_names = {"X"};
    m.species_names = {"X"};
    const SpeciationResult r = newton_raphson_speciation(m, Vector{{0.3}}, Vector{{1.0}});
    CHECK(r.converged);
    CHECK(r.iterations == 1);
    CHECK(r.c_spec(0) == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("monoprotic acid matches the quadratic root") {
    for (double log_k : {2.0, 4.75, 9.2}) {
        const EquilibriumModel m = monoprotic(log_k);
        const double beta = std::pow(10.0, log_k);
        for (auto [a, h] : {std::pair{1e-3, 1e-3}, std::pair{1e-2, 1e-4}, std::pair{5e-5, 2e-3}}) {
            const SpeciationResult r = newton_raphson_speciation(m, Vector{{a, h}}, Vector{{a, h}});
            REQUIRE(r.converged);
            const double x = monoprotic_oracle(beta, a, h);
            CHECK(std::abs(r.c_spec(2) - x) <= 1e-12 * std::max(1.0, x));
            CHECK(std::abs(r.c_spec(2) - x) <= 1e-9 * x);
            CHECK(std::abs(r.c_spec(0) - (a - x)) <= 1e-12);
            CHECK((r.c_spec.array() > 0).all());
        }
    }
}

TEST_CASE("jacobian is symmetric and matches finite differences in log coordinates") {
    const EquilibriumModel m = dye_model();
    const Vector c{{2e-5, 3e-5, 1e-5, 3e-4}};
    const Vector spec = species_concentrations(m, c);
    const Matrix j = speciation_jacobian(m, spec);
    CHECK((j - j.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const double h = 1e-6;
    for (Eigen::Index k = 0; k < c.size(); ++k) {
        Vector up = c, dn = c;
        up(k) *= std::exp(h);
        dn(k) *= std::exp(-h);
        const Vector fd = (m.model * species_concentrations(m, up) - m.model * species_concentrations(m, dn)) / (2 * h);
        for (Eigen::Index r = 0; r < c.size(); ++r)
            CHECK(std::abs(fd(r) - j(r, k)) <= 1e-6 * std::max(std::abs(j(r, k)), 1e-300) + 1e-30);
    }
}

TEST_CASE("dilution totals") {
    const Vector c0{{3e-5, 0.001}};
    CHECK((dilution_totals(0.05, c0, 0.0, Vector{{0.0, -0.005}}) - c0).cwiseAbs().maxCoeff() == 0.0);
    const Vector eq = dilution_totals(50, Vector{{0.001}}, 10, Vector{{-0.005}});
    CHECK(std::abs(eq(0)) <= 1e-18);

    // pure titrant dilutes the dye along a strictly convex curve
    double prev_slope = -kInf;
    for (int i = 1; i <= 20; ++i) {
        const double v = 0.5e-3 * i, dv = 0.5e-3;
        const double f0 = dilution_totals(0.05, c0, v - dv, Vector::Zero(2))(0);
        const double f1 = dilution_totals(0.05, c0, v, Vector::Zero(2))(0);
        const double slope = (f1 - f0) / dv;
        CHECK(slope < 0);
        CHECK(slope > prev_slope);
        prev_slope = slope;
    }
    CHECK_THROWS_AS(dilution_totals(0.0, c0, 0.1, c0), InputError);
    CHECK_THROWS_AS(dilution_totals(0.05, c0, -0.1, c0), InputError);
}

TEST_CASE("dye model first point and full titration") {
    const EquilibriumModel m = dye_model();
    const TitrationProtocol p = dye_protocol(0.0);
    CHECK(p.v_added.size() == 60);
    const SpeciationResult first = newton_raphson_speciation(m, p.c0, p.c0);
    CHECK(first.converged);
    CHECK(first.mass_balance_residual < 1e-12);

    const TitrationResult r = titrate(m, p);
    CHECK(r.all_converged());
    CHECK(r.c.rows() == 60);
    CHECK(r.max_residual < 1e-12);
    for (Eigen::Index i = 0; i < r.c.rows(); ++i) {
        const Vector tot = m.model * r.c.row(i).transpose();
        const double scale = std::max(1.0, r.c_tot.row(i).cwiseAbs().maxCoeff());
        CHECK((tot - r.c_tot.row(i).transpose()).cwiseAbs().maxCoeff() < 1e-12 * scale);
        CHECK((r.c.row(i).array() > 0).all());
    }
    for (Eigen::Index i = 1; i < r.c.rows(); ++i) CHECK(r.c(i, 3) < r.c(i - 1, 3));
}

TEST_CASE("warm and cold starts agree") {
    const EquilibriumModel m = dye_model();
    for (double inds : {0.0, 1e-10}) {
        const TitrationProtocol p = dye_protocol(inds);
        const TitrationResult warm = titrate(m, p, true), cold = titrate(m, p, false);
        REQUIRE(cold.all_converged());
        const Matrix rel = (warm.c - cold.c).cwiseQuotient(warm.c.cwiseAbs());
        CHECK(rel.cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("dye species rank depends on indicators in the titrant") {
    const EquilibriumModel m = dye_model();
    SvdResult s = svd(dye_block(titrate(m, dye_protocol(0.0))));
    CHECK(s.s(4) / s.s(0) < 1e-6);

    s = svd(dye_block(titrate(m, dye_protocol(1e-10))));
    const double r5 = s.s(4) / s.s(0), r6 = s.s(5) / s.s(0);
    INFO("sigma5/sigma1 " << r5 << " sigma6/sigma1 " << r6);
    const double p5 = 3.9e-8 / 0.245, p6 = 1.3e-8 / 0.245;
    CHECK(r5 > p5 / 10);
    CHECK(r5 < p5 * 10);
    CHECK(r6 > p6 / 10);
    CHECK(r6 < p6 * 10);
    CHECK(estimate_rank(s.s, 1e-9).estimated_rank == 6);
}

TEST_CASE("as-written composition adds no dye in the first segment") {
    const EquilibriumModel m = dye_model();
    const TitrationResult r = titrate(m, dye_protocol(1e-10, DyeComposition::AsWritten));
    CHECK(r.all_converged());
    // the first segment adds no dye, so dye totals fall by dilution alone
    const double v0 = 0.05;
    for (int i = 0; i <= 15; ++i) {
        const double v = dye_protocol(0.0).v_added(i);
        CHECK(r.c_tot(i, 0) == doctest::Approx(3e-5 * v0 / (v0 + v)).epsilon(1e-14));
    }
}

TEST_CASE("model and protocol validation") {
    EquilibriumModel m = dye_model();
    m.log_beta = Vector::Zero(3);
    CHECK_THROWS_AS(validate(m), ModelError);
    m = dye_model();
    CHECK_THROWS_AS(newton_raphson_speciation(m, Vector::Ones(4), Vector{{1, 1, -1, 1}}), InputError);
    CHECK_THROWS_AS(newton_raphson_speciation(m, Vector::Ones(3), Vector::Ones(4)), InputError);

    TitrationProtocol p = dye_protocol(0.0);
    p.v_added(5) = p.v_added(4) - 1e-6;
    CHECK_THROWS_AS(validate(p, 4), InputError);
    p = dye_protocol(0.0);
    p.segments.pop_back();
    CHECK_THROWS_AS(validate(p, 4), InputError);
}
