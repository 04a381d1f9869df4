#include "mcrkit/speciation.hpp"

#include "mcrkit/error.hpp"

#include <cmath>

namespace mcr {

void validate(const EquilibriumModel& m) {
    const Eigen::Index nc = m.ncomp(), ns = m.nspec();
    if (nc < 1 || ns < nc) throw ModelError("model needs at least as many species as components");
    if (m.log_beta.size() != ns)
        throw ModelError("log_beta has " + std::to_string(m.log_beta.size()) + " entries for " + std::to_string(ns) +
                         " species");
    require_finite(m.model, "model matrix");
    require_finite(m.log_beta, "log_beta");
    for (Eigen::Index j = 0; j < nc; ++j)
        for (Eigen::Index s = 0; s < ns; ++s) {
            if (m.model(j, s) != std::round(m.model(j, s)))
                throw ModelError("model entry (" + std::to_string(j) + ", " + std::to_string(s) + ") is not an integer");
            if (s < nc && m.model(j, s) != (j == s ? 1.0 : 0.0))
                throw ModelError("the first " + std::to_string(nc) + " species must be the free components");
        }
    for (Eigen::Index s = 0; s < nc; ++s)
        if (m.log_beta(s) != 0.0) throw ModelError("free component species must have log beta 0");
    if (!m.component_names.empty() && static_cast<Eigen::Index>(m.component_names.size()) != nc)
        throw ModelError("component name count does not match the model");
    if (!m.species_names.empty() && static_cast<Eigen::Index>(m.species_names.size()) != ns)
        throw ModelError("species name count does not match the model");
}

Vector species_concentrations(const EquilibriumModel& m, const Vector& c) {
    const Vector logc = c.array().log10();
    const Vector lg = m.log_beta + m.model.transpose() * logc;
    return lg.unaryExpr([](double x) { return std::pow(10.0, x); });
}

Matrix speciation_jacobian(const EquilibriumModel& m, const Vector& c_spec) {
    return m.model * c_spec.asDiagonal() * m.model.transpose();
}

SpeciationResult newton_raphson_speciation(const EquilibriumModel& m, const Vector& c_tot_in, const Vector& guess) {
    validate(m);
    const Eigen::Index nc = m.ncomp();
    if (c_tot_in.size() != nc || guess.size() != nc) throw InputError("totals and guess must have one entry per component");
    require_finite(c_tot_in, "c_tot");
    require_finite(guess, "guess");
    for (Eigen::Index j = 0; j < nc; ++j)
        if (!(guess(j) > 0)) throw InputError("guess must be strictly positive");

    Vector c_tot = c_tot_in;
    for (Eigen::Index j = 0; j < nc; ++j)
        if (c_tot(j) == 0.0) c_tot(j) = kZeroTotal;
    const double thresh = kSpeciationTol * std::max(1.0, c_tot_in.cwiseAbs().maxCoeff());

    SpeciationResult best;
    double best_d = kInf;
    Vector c = guess;
    for (int it = 0; it < kSpeciationMaxIter; ++it) {
        const Vector c_spec = species_concentrations(m, c);
        const Vector d = c_tot - m.model * c_spec;
        const double dmax = d.cwiseAbs().maxCoeff();
        if (dmax < best_d) {
            best_d = dmax;
            best.c_spec = c_spec;
            best.iterations = it;
        }
        if (dmax < thresh) {
            best.converged = true;
            break;
        }
        const Matrix js = speciation_jacobian(m, c_spec);
        // row vector d / J with J symmetric
        Vector delta = js.ldlt().solve(d).cwiseProduct(c);
        if (!delta.allFinite()) delta = js.completeOrthogonalDecomposition().solve(d).cwiseProduct(c);
        c += delta;
        while ((c.array() <= 0).any()) {
            delta *= 0.5;
            c -= delta;
            if ((delta.array().abs() < 1e-15).all()) break;
        }
        if (!c.allFinite() || (c.array() <= 0).any()) break;
    }
    best.mass_balance_residual = (m.model * best.c_spec - c_tot_in).cwiseAbs().maxCoeff();
    if (!best.converged) best.iterations = kSpeciationMaxIter;
    return best;
}

Vector dilution_totals(double v0, const Vector& c0, double v_added, const Vector& c_added) {
    if (!(v0 > 0)) throw InputError("initial volume must be positive");
    if (!(v_added >= 0)) throw InputError("added volume must be >= 0");
    if (c0.size() != c_added.size()) throw InputError("c0 and c_added differ in length");
    return (v0 * c0 + v_added * c_added) / (v0 + v_added);
}

void validate(const TitrationProtocol& p, Eigen::Index ncomp) {
    if (!(p.v0 > 0) || !std::isfinite(p.v0)) throw InputError("v0 must be positive");
    if (p.c0.size() != ncomp) throw InputError("c0 must have one entry per component");
    require_finite(p.c0, "c0");
    const Eigen::Index n = p.v_added.size();
    if (n == 0) throw InputError("volume schedule is empty");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::isfinite(p.v_added(i)) || p.v_added(i) < 0) throw InputError("added volumes must be finite and >= 0");
        if (i > 0 && p.v_added(i) < p.v_added(i - 1)) throw InputError("volume schedule must be non-decreasing");
    }
    int expect = 0;
    for (size_t s = 0; s < p.segments.size(); ++s) {
        const auto& seg = p.segments[s];
        const std::string tag = "segment " + std::to_string(s);
        if (seg.first != expect) throw InputError(tag + " must start at index " + std::to_string(expect));
        if (seg.last < seg.first) throw InputError(tag + " is empty");
        if (seg.c_added.size() != ncomp) throw InputError(tag + ": c_added must have one entry per component");
        require_finite(seg.c_added, tag + " c_added");
        expect = seg.last + 1;
    }
    if (expect != n) throw InputError("segments must cover all " + std::to_string(n) + " titration points");
}

TitrationResult titrate(const EquilibriumModel& m, const TitrationProtocol& p, bool warm_start) {
    validate(m);
    validate(p, m.ncomp());
    const Eigen::Index n = p.v_added.size();
    TitrationResult r;
    r.c.resize(n, m.nspec());
    r.c_tot.resize(n, m.ncomp());
    Vector guess = p.c0;
    for (Eigen::Index j = 0; j < guess.size(); ++j)
        if (!(guess(j) > 0)) guess(j) = kZeroTotal;
    const Vector cold = guess;

    for (const auto& seg : p.segments) {
        for (int i = seg.first; i <= seg.last; ++i) {
            const Vector tot = dilution_totals(p.v0, p.c0, p.v_added(i), seg.c_added);
            r.c_tot.row(i) = tot.transpose();
            const SpeciationResult sr = newton_raphson_speciation(m, tot, warm_start ? guess : cold);
            r.c.row(i) = sr.c_spec.transpose();
            r.iterations.push_back(sr.iterations);
            r.converged.push_back(sr.converged);
            if (!sr.converged) r.nonconverged.push_back(i);
            r.max_residual = std::max(r.max_residual, sr.mass_balance_residual);
            guess = sr.c_spec.head(m.ncomp());
        }
    }
    return r;
}

EquilibriumModel dye_model() {
    EquilibriumModel m;
    m.model.resize(4, 8);
    m.model << 1, 0, 0, 0, 1, 0, 0, 0,
               0, 1, 0, 0, 0, 1, 0, 0,
               0, 0, 1, 0, 0, 0, 1, 0,
               0, 0, 0, 1, 1, 1, 1, -1;
    m.log_beta = Vector{{0, 0, 0, 0, 7.66, 3.43, 4.62, -14}};
    m.component_names = {"P", "M", "B", "H"};
    m.species_names = {"P-", "M", "B2-", "H+", "HP", "HM+", "HB-", "OH-"};
    return m;
}

TitrationProtocol dye_protocol(double inds, DyeComposition comp) {
    TitrationProtocol p;
    p.v0 = 0.05;
    p.c0 = Vector{{3e-5, 3e-5, 2e-5, 0.001}};
    std::vector<double> v;
    for (int i = 0; i <= 15; ++i) v.push_back(0.6 * i);
    for (int i = 0; i <= 13; ++i) v.push_back(9.05 + 0.05 * i);
    for (int i = 0; i <= 7; ++i) v.push_back(9.725 + 0.025 * i);
    for (int i = 0; i <= 21; ++i) v.push_back(9.95 + 0.05 * i);
    p.v_added.resize(static_cast<Eigen::Index>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) p.v_added(static_cast<Eigen::Index>(i)) = 1e-3 * v[i];

    const double base = -0.005;
    auto seg = [&](int a, int b, double cp, double cm, double cb) {
        p.segments.push_back({a, b, Vector{{cp, cm, cb, base}}});
    };
    if (comp == DyeComposition::AsExecuted) {
        seg(0, 15, 0, inds, inds);
        seg(16, 29, inds, 0, 0);
        seg(30, 37, 0, inds, 0);
        seg(38, 59, inds, inds, inds);
    } else {
        seg(0, 15, 0, 0, 0);
        seg(16, 29, inds, 0, 0);
        seg(30, 37, 0, inds, 0);
        seg(38, 59, inds, inds, inds);
    }
    return p;
}

}  // namespace mcr
