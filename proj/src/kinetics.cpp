#include "mcrkit/kinetics.hpp"

#include "mcrkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace mcr {

int ReactionSystem::index_of(const std::string& name) const {
    for (size_t i = 0; i < species.size(); ++i)
        if (species[i] == name) return static_cast<int>(i);
    throw ModelError("unknown species '" + name + "'");
}

void ReactionSystem::add_reaction(const std::map<std::string, int>& reactants,
                                  const std::map<std::string, int>& products, double k) {
    Reaction r;
    r.reactants.assign(species.size(), 0);
    r.products.assign(species.size(), 0);
    r.k = k;
    for (const auto& [name, n] : reactants) r.reactants[index_of(name)] += n;
    for (const auto& [name, n] : products) r.products[index_of(name)] += n;
    reactions.push_back(std::move(r));
}

void validate(const ReactionSystem& sys) {
    const size_t ns = sys.species.size();
    if (ns == 0) throw ModelError("reaction system has no species");
    std::set<std::string> seen;
    for (const auto& s : sys.species) {
        if (s.empty()) throw ModelError("empty species name");
        if (!seen.insert(s).second) throw ModelError("duplicate species '" + s + "'");
    }
    for (size_t r = 0; r < sys.reactions.size(); ++r) {
        const Reaction& rx = sys.reactions[r];
        const std::string tag = "reaction " + std::to_string(r);
        if (rx.reactants.size() != ns || rx.products.size() != ns)
            throw ModelError(tag + ": coefficient vectors do not match the species list");
        int order = 0;
        for (size_t i = 0; i < ns; ++i) {
            if (rx.reactants[i] < 0 || rx.products[i] < 0)
                throw ModelError(tag + ": negative stoichiometric coefficient for " + sys.species[i]);
            order += rx.reactants[i];
        }
        if (order == 0) throw ModelError(tag + ": no reactants");
        if (!(rx.k > 0) || !std::isfinite(rx.k)) throw ModelError(tag + ": rate constant must be positive");
    }
    if (sys.y0.size() != static_cast<Eigen::Index>(ns))
        throw ModelError("initial state has " + std::to_string(sys.y0.size()) + " entries for " +
                         std::to_string(ns) + " species");
    for (Eigen::Index i = 0; i < sys.y0.size(); ++i)
        if (!std::isfinite(sys.y0(i)) || sys.y0(i) < 0)
            throw ModelError("initial concentration of " + sys.species[i] + " must be finite and >= 0");
}

Matrix stoichiometric_matrix(const ReactionSystem& sys) {
    validate(sys);
    Matrix n(static_cast<Eigen::Index>(sys.species.size()), static_cast<Eigen::Index>(sys.reactions.size()));
    for (size_t r = 0; r < sys.reactions.size(); ++r)
        for (size_t i = 0; i < sys.species.size(); ++i)
            n(i, r) = sys.reactions[r].products[i] - sys.reactions[r].reactants[i];
    return n;
}

namespace {

struct CompiledReaction {
    double k;
    std::vector<std::pair<int, int>> order;  // species, exponent
    std::vector<std::pair<int, double>> delta;
};

std::vector<CompiledReaction> compile(const ReactionSystem& sys) {
    std::vector<CompiledReaction> out;
    for (const auto& rx : sys.reactions) {
        CompiledReaction c;
        c.k = rx.k;
        for (size_t i = 0; i < sys.species.size(); ++i) {
            if (rx.reactants[i] > 0) c.order.emplace_back(static_cast<int>(i), rx.reactants[i]);
            const int d = rx.products[i] - rx.reactants[i];
            if (d != 0) c.delta.emplace_back(static_cast<int>(i), static_cast<double>(d));
        }
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace

Rhs mass_action_rhs(const ReactionSystem& sys) {
    validate(sys);
    const auto rx = compile(sys);
    const Eigen::Index n = static_cast<Eigen::Index>(sys.species.size());
    return [rx, n](double, const Vector& y, Vector& dydt) {
        if (y.size() != n) throw InputError("state dimension does not match the species count");
        dydt.setZero(n);
        for (const auto& r : rx) {
            double rate = r.k;
            for (const auto& [i, e] : r.order) rate *= e == 1 ? y(i) : std::pow(y(i), e);
            for (const auto& [i, d] : r.delta) dydt(i) += d * rate;
        }
    };
}

ConservationLaw make_law(const Vector& weights, const Vector& y0) {
    ConservationLaw law;
    law.weights = weights;
    const double b = weights.dot(y0);
    const double scale = weights.cwiseAbs().dot(y0.cwiseAbs());
    if (std::abs(b) > 1e-14 * scale && b != 0.0) {
        law.constant = b;
        law.kind = LawKind::Affine;
    }
    return law;
}

std::vector<ConservationLaw> conservation_laws(const ReactionSystem& sys) {
    const Matrix n = stoichiometric_matrix(sys);
    const Eigen::Index ns = n.rows();
    std::vector<ConservationLaw> laws;
    if (n.cols() == 0) {
        for (Eigen::Index i = 0; i < ns; ++i) laws.push_back(make_law(Vector::Unit(ns, i), sys.y0));
        return laws;
    }
    Eigen::JacobiSVD<Matrix> dec(n.transpose(), Eigen::ComputeFullV);
    const Vector s = dec.singularValues();
    const double tol = machine_rel_tolerance(n.rows(), n.cols()) * (s.size() ? s(0) : 0.0);
    Eigen::Index rank = 0;
    while (rank < s.size() && s(rank) > tol) ++rank;
    const Matrix v = dec.matrixV();
    for (Eigen::Index j = rank; j < ns; ++j) {
        Vector w = v.col(j);
        // same deterministic orientation as svd()
        Eigen::Index imax = 0;
        w.cwiseAbs().maxCoeff(&imax);
        if (w(imax) < 0) w = -w;
        laws.push_back(make_law(w, sys.y0));
    }
    return laws;
}

std::vector<double> conservation_residuals(const Matrix& c, const std::vector<ConservationLaw>& laws) {
    std::vector<double> out;
    for (size_t l = 0; l < laws.size(); ++l) {
        if (laws[l].weights.size() != c.cols())
            throw InputError("conservation law " + std::to_string(l) + " has " +
                             std::to_string(laws[l].weights.size()) + " weights for " + std::to_string(c.cols()) +
                             " species");
        const Vector r = c * laws[l].weights;
        out.push_back((r.array() - laws[l].constant).abs().maxCoeff());
    }
    return out;
}

void validate(const DoseSchedule& d, const ReactionSystem& sys, double t0, double t1) {
    if (d.target < 0 || d.target >= static_cast<int>(sys.species.size()))
        throw InputError("dose target index " + std::to_string(d.target) + " out of range");
    if (!(d.amount > 0) || !std::isfinite(d.amount)) throw InputError("dose amount must be positive");
    if (d.mode == DoseMode::Continuous) {
        if (!(d.rate > 0) || !std::isfinite(d.rate)) throw InputError("dose rate must be positive");
        if (!std::isfinite(d.start)) throw InputError("dose start time must be finite");
    } else if (!(d.time >= t0 && d.time <= t1)) {
        std::ostringstream os;
        os << "discrete dose time " << d.time << " outside the simulated span [" << t0 << ", " << t1 << "]";
        throw InputError(os.str());
    }
}

Matrix simulate(const ReactionSystem& sys, const std::vector<double>& grid, const IntegratorConfig& cfg,
                const std::vector<DoseSchedule>& doses, SimulationStats* stats) {
    validate(sys);
    validate(cfg);
    if (grid.empty()) throw InputError("time grid is empty");
    for (size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw InputError("time grid must be strictly increasing");
    const double t0 = grid.front(), t1 = grid.back();
    for (const auto& d : doses) validate(d, sys, t0, t1);

    const Rhs base = mass_action_rhs(sys);
    const Eigen::Index ns = sys.y0.size();

    std::set<double> cuts = {t0, t1};
    for (const auto& d : doses) {
        if (d.mode == DoseMode::Discrete) {
            cuts.insert(d.time);
        } else {
            for (double e : {d.start, d.window_end()})
                if (e > t0 && e < t1) cuts.insert(e);
        }
    }
    std::vector<double> knots(cuts.begin(), cuts.end());

    Matrix out(static_cast<Eigen::Index>(grid.size()), ns);
    Vector y = sys.y0;
    size_t next_out = 0;
    SimulationStats st;

    auto apply_jumps = [&](double t) {
        for (const auto& d : doses)
            if (d.mode == DoseMode::Discrete && d.time == t) y(d.target) += d.amount;
    };

    apply_jumps(t0);
    if (grid.front() == t0) out.row(next_out++) = y.transpose();

    for (size_t s = 0; s + 1 < knots.size(); ++s) {
        const double a = knots[s], b = knots[s + 1];
        const double mid = 0.5 * (a + b);
        Vector feed = Vector::Zero(ns);
        for (const auto& d : doses)
            if (d.mode == DoseMode::Continuous && mid > d.start && mid < d.window_end()) feed(d.target) += d.rate;

        std::vector<double> sub = {a};
        const size_t first_out = next_out;
        while (next_out < grid.size() && grid[next_out] <= b) {
            if (grid[next_out] > a) sub.push_back(grid[next_out]);
            ++next_out;
        }
        const bool ends_on_grid = sub.back() == b;
        if (!ends_on_grid) sub.push_back(b);

        Rhs rhs = base;
        if (feed.cwiseAbs().maxCoeff() > 0) {
            rhs = [base, feed](double t, const Vector& yy, Vector& dy) {
                base(t, yy, dy);
                dy += feed;
            };
        }
        OdeSolution sol;
        try {
            sol = integrate(rhs, y, sub, cfg);
        } catch (const IntegrationError& e) {
            std::ostringstream os;
            os << e.what() << " (dose segment [" << a << ", " << b << "])";
            OdeSolution partial;
            partial.times.assign(grid.begin(), grid.begin() + static_cast<long>(first_out));
            partial.states = out.topRows(static_cast<Eigen::Index>(first_out));
            throw IntegrationError(os.str(), partial);
        } catch (const NumericalError& e) {
            std::ostringstream os;
            os << e.what() << " (dose segment [" << a << ", " << b << "])";
            throw NumericalError(os.str());
        }
        st.steps_accepted += sol.steps_accepted;
        st.steps_rejected += sol.steps_rejected;
        st.rhs_evaluations += sol.rhs_evaluations;
        ++st.segments;

        y = sol.states.bottomRows(1).transpose();
        apply_jumps(b);
        // rows 1.. of the sub-solution that are grid points
        Eigen::Index row = 1;
        for (size_t g = first_out; g < next_out; ++g, ++row) {
            if (grid[g] == b) out.row(static_cast<Eigen::Index>(g)) = y.transpose();
            else out.row(static_cast<Eigen::Index>(g)) = sol.states.row(row);
        }
    }
    if (stats) *stats = st;
    return out;
}

std::array<double, 3> bimolecular_closed_form(double k, double x0, double y0, double z0, double t) {
    if (!(x0 > 0) || !(y0 > 0)) throw DomainError("bimolecular closed form needs positive X0 and Y0");
    if (!(k > 0) || !std::isfinite(k)) throw DomainError("rate constant must be positive");
    if (!(t >= 0) || !std::isfinite(t)) throw DomainError("time must be finite and >= 0");
    double x;
    if (std::abs(x0 - y0) < kEqualInitialsSwitch * std::max(x0, y0)) {
        x = x0 / (1.0 + x0 * k * t);
    } else {
        // X0 (X0-Y0) e^{X0 k t} / (X0 e^{X0 k t} - Y0 e^{Y0 k t}), divided through by e^{X0 k t}
        const double d = (y0 - x0) * k * t;
        const double den = (x0 - y0) - y0 * std::expm1(d);
        x = std::isinf(den) ? 0.0 : x0 * (x0 - y0) / den;
    }
    return {x, x - x0 + y0, z0 + x0 - x};
}

double lambert_w0(double x) {
    constexpr double inv_e = 0.36787944117144232160;
    if (std::isnan(x)) throw DomainError("lambert_w0 of NaN");
    if (x < -inv_e) {
        if (x < -inv_e * (1 + 1e-15)) throw DomainError("lambert_w0 argument below -1/e");
        return -1.0;
    }
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return x;
    if (x > 2.718281828459045) return lambert_w0_exp(std::log(x));

    double w;
    if (x < -0.25) {
        const double p = std::sqrt(2.0 * (2.718281828459045 * x + 1.0));
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    } else {
        w = std::log1p(x);
        if (x > 0.5) w *= 1.0 - std::log1p(w) / (2.0 + w);
    }
    for (int it = 0; it < 60; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double wp1 = w + 1.0;
        if (wp1 == 0.0) break;
        const double dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= dw;
        if (std::abs(dw) <= 1e-16 * (1.0 + std::abs(w))) break;
    }
    return w;
}

double lambert_w0_exp(double u) {
    if (std::isnan(u)) throw DomainError("lambert_w0_exp of NaN");
    if (u < 1.0) return lambert_w0(std::exp(u));
    if (std::isinf(u)) return u;
    // solve w + ln w = u; asymptotic start u - ln u
    double w = u > 3.0 ? u - std::log(u) : 1.0;
    for (int it = 0; it < 60; ++it) {
        const double f = w + std::log(w) - u;
        const double dw = f * w / (w + 1.0);
        w -= dw;
        if (std::abs(dw) <= 1e-16 * w) break;
    }
    return w;
}

void validate(const MmClosedFormParams& p) {
    for (double v : {p.k1, p.k1r, p.k2, p.S0, p.K0})
        if (!std::isfinite(v)) throw DomainError("Michaelis-Menten parameters must be finite");
    if (!(p.k1 > 0) || p.k1r < 0 || !(p.k2 > 0)) throw DomainError("Michaelis-Menten rate constants invalid");
    if (p.S0 < 0 || !(p.K0 > 0)) throw DomainError("Michaelis-Menten initials invalid");
    if (!(p.K_M() > 0) || !(p.vmax() > 0)) throw DomainError("K_M and vmax must be positive");
}

std::array<double, 4> mm_qssa_closed_form(const MmClosedFormParams& p, double t) {
    validate(p);
    if (!(t >= 0) || !std::isfinite(t)) throw DomainError("time must be finite and >= 0");
    const double km = p.K_M();
    double s = 0.0;
    if (p.S0 > 0) {
        const double u = std::log(p.S0 / km) + (p.S0 - p.vmax() * t) / km;
        s = km * lambert_w0_exp(u);
        s = std::min(s, p.S0);
    }
    const double sk = (p.K0 * s / (km + s)) * -std::expm1(-(km + s) * p.k1 * t);
    return {s, p.K0 - sk, sk, p.S0 - s};
}

Matrix mm_qssa_matrix(const MmClosedFormParams& p, const std::vector<double>& grid) {
    Matrix c(static_cast<Eigen::Index>(grid.size()), 4);
    for (size_t i = 0; i < grid.size(); ++i) {
        const auto r = mm_qssa_closed_form(p, grid[i]);
        for (int j = 0; j < 4; ++j) c(static_cast<Eigen::Index>(i), j) = r[j];
    }
    return c;
}

ReducedSystem mm_reduced_system(const MmClosedFormParams& p, MmReduction variant) {
    validate(p);
    ReducedSystem r;
    const double k1 = p.k1, k1r = p.k1r, k2 = p.k2, S0 = p.S0, K0 = p.K0;
    if (variant == MmReduction::SP) {
        r.y0 = Vector{{S0, 0.0}};
        r.rhs = [=](double, const Vector& y, Vector& dy) {
            const double s = y(0), pp = y(1);
            dy.resize(2);
            dy(0) = -k1 * (s + pp + K0 - S0) * s + k1r * (S0 - s - pp);
            dy(1) = k2 * (S0 - s - pp);
        };
        r.reconstruct = [=](const Matrix& y) {
            Matrix c(y.rows(), 4);
            for (Eigen::Index i = 0; i < y.rows(); ++i) {
                const double sk = S0 - y(i, 0) - y(i, 1);
                c.row(i) << y(i, 0), K0 - sk, sk, y(i, 1);
            }
            return c;
        };
    } else {
        r.y0 = Vector{{S0, K0}};
        r.rhs = [=](double, const Vector& y, Vector& dy) {
            const double s = y(0), k = y(1);
            dy.resize(2);
            dy(0) = -k1 * s * k + k1r * (K0 - k);
            dy(1) = -k1 * s * k + (k1r + k2) * (K0 - k);
        };
        r.reconstruct = [=](const Matrix& y) {
            Matrix c(y.rows(), 4);
            for (Eigen::Index i = 0; i < y.rows(); ++i) {
                const double sk = K0 - y(i, 1);
                c.row(i) << y(i, 0), y(i, 1), sk, S0 - sk - y(i, 0);
            }
            return c;
        };
    }
    return r;
}

ReactionSystem bimolecular_system(double k, double x0, double y0, double z0) {
    ReactionSystem s;
    s.species = {"X", "Y", "Z"};
    s.add_reaction({{"X", 1}, {"Y", 1}}, {{"Z", 1}}, k);
    s.y0 = Vector{{x0, y0, z0}};
    return s;
}

ReactionSystem michaelis_menten_system(const MmClosedFormParams& p) {
    ReactionSystem s;
    s.species = {"S", "K", "SK", "P"};
    s.add_reaction({{"S", 1}, {"K", 1}}, {{"SK", 1}}, p.k1);
    s.add_reaction({{"SK", 1}}, {{"S", 1}, {"K", 1}}, p.k1r);
    s.add_reaction({{"SK", 1}}, {{"P", 1}, {"K", 1}}, p.k2);
    s.y0 = Vector{{p.S0, p.K0, 0.0, 0.0}};
    return s;
}

namespace {

constexpr double kEnzymeDoseSupp = 5e-4;
constexpr double kEnzymeDoseText = 5e-3;
constexpr double kMmStop = 7.5;

DoseSchedule enzyme_continuous(double amount, double rate) {
    DoseSchedule d;
    d.target = 1;
    d.mode = DoseMode::Continuous;
    d.amount = amount;
    d.rate = rate;
    d.start = 0.0;
    return d;
}

}  // namespace

std::vector<KineticsPreset> kinetics_presets() {
    std::vector<KineticsPreset> out;
    out.push_back({"bimolecular", "X + Y -> Z, k = 12, (X0, Y0, Z0) = (1, 0.7, 0.2)", bimolecular_system(),
                   {}, "power:3.5:21:1.5"});
    out.push_back({"bimolecular-swapped", "X + Y -> Z with X0 and Y0 exchanged", bimolecular_system(12, 0.7, 1.0, 0.2),
                   {}, "power:3.5:21:1.5"});
    out.push_back({"mm", "S + K <-> SK -> P + K, k1 = 20, k1r = 0.1, k2 = 3, S0 = 1, K0 = 0.1",
                   michaelis_menten_system(), {}, "linspace:0:7.5:181"});

    MmClosedFormParams supp;
    supp.K0 = 0.1 - kEnzymeDoseSupp;
    out.push_back({"mm-dose-continuous", "enzyme fed at a constant rate over the whole run, 5e-4 mol, K0 = 0.0995",
                   michaelis_menten_system(supp), {enzyme_continuous(kEnzymeDoseSupp, kEnzymeDoseSupp / kMmStop)},
                   "linspace:0:7.5:181"});
    DoseSchedule spike;
    spike.target = 1;
    spike.mode = DoseMode::Discrete;
    spike.amount = kEnzymeDoseSupp;
    spike.time = 3.0;
    out.push_back({"mm-dose-discrete", "5e-4 mol enzyme spiked at t = 3 s, K0 = 0.0995", michaelis_menten_system(supp),
                   {spike}, "linspace:0:7.5:181"});

    MmClosedFormParams text;
    text.K0 = 0.1 - kEnzymeDoseText;
    out.push_back({"mm-dose-text", "5e-3 mol enzyme at 5e-3 mol/s from t = 0, K0 = 0.095",
                   michaelis_menten_system(text), {enzyme_continuous(kEnzymeDoseText, kEnzymeDoseText)},
                   "linspace:0:7.5:181"});

    MmClosedFormParams practical;
    practical.k1r = 0.118;
    practical.K0 = 0.001;
    out.push_back({"mm-practical", "S0/K0 = 1000, k1r = 0.118, run to 1000 s", michaelis_menten_system(practical), {},
                   "linspace:0:1000:101"});
    return out;
}

KineticsPreset kinetics_preset(const std::string& name) {
    for (auto& p : kinetics_presets())
        if (p.name == name) return p;
    throw InputError("unknown kinetics preset '" + name + "'");
}

std::vector<double> parse_grid(const std::string& spec) {
    auto fail = [&](const std::string& why) { return InputError("bad grid spec '" + spec + "': " + why); };
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw fail("expected kind:params");
    const std::string kind = spec.substr(0, colon);
    const std::string rest = spec.substr(colon + 1);
    std::vector<double> nums;
    {
        const char sep = kind == "list" ? ';' : ':';
        size_t pos = 0;
        while (pos <= rest.size()) {
            size_t e = rest.find(sep, pos);
            if (e == std::string::npos) e = rest.size();
            const std::string tok = rest.substr(pos, e - pos);
            try {
                size_t used = 0;
                nums.push_back(std::stod(tok, &used));
                if (used != tok.size()) throw fail("trailing characters in '" + tok + "'");
            } catch (const std::logic_error&) {
                throw fail("'" + tok + "' is not a number");
            }
            pos = e + 1;
        }
    }
    std::vector<double> g;
    if (kind == "linspace") {
        if (nums.size() != 3) throw fail("linspace needs t0:t1:n");
        const double n = nums[2];
        if (n < 2 || n != std::floor(n)) throw fail("n must be an integer >= 2");
        const int ni = static_cast<int>(n);
        for (int i = 0; i < ni; ++i) g.push_back(nums[0] + (nums[1] - nums[0]) * i / (ni - 1));
        g.back() = nums[1];
    } else if (kind == "power") {
        if (nums.size() != 3) throw fail("power needs t1:n:p");
        const double n = nums[1];
        if (n < 2 || n != std::floor(n)) throw fail("n must be an integer >= 2");
        if (!(nums[2] > 0)) throw fail("p must be positive");
        const int ni = static_cast<int>(n);
        for (int i = 0; i < ni; ++i) g.push_back(nums[0] * std::pow(static_cast<double>(i) / (ni - 1), nums[2]));
    } else if (kind == "list") {
        g = nums;
    } else {
        throw fail("unknown kind '" + kind + "'");
    }
    for (size_t i = 1; i < g.size(); ++i)
        if (!(g[i] > g[i - 1])) throw fail("times must be strictly increasing");
    return g;
}

}  // namespace mcr
