#include "mcrkit/odeint.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace mcr {

std::string to_string(OdeMethod m) { return m == OdeMethod::RK45 ? "rk45" : "rk89"; }

OdeMethod parse_ode_method(const std::string& name) {
    if (name == "rk45") return OdeMethod::RK45;
    if (name == "rk89") return OdeMethod::RK89;
    throw InputError("unknown integration method '" + name + "' (expected rk45 or rk89)");
}

int nominal_order(OdeMethod m) { return m == OdeMethod::RK45 ? 5 : 8; }

void validate(const IntegratorConfig& cfg) {
    if (!(cfg.abs_tol > 0) || !std::isfinite(cfg.abs_tol)) throw InputError("abs_tol must be positive and finite");
    if (!(cfg.rel_tol > 0) || !std::isfinite(cfg.rel_tol)) throw InputError("rel_tol must be positive and finite");
    if (cfg.max_step && !(*cfg.max_step > 0)) throw InputError("max_step must be positive");
    if (cfg.initial_step && !(*cfg.initial_step > 0)) throw InputError("initial_step must be positive");
    if (cfg.fixed_step && !(*cfg.fixed_step > 0)) throw InputError("fixed_step must be positive");
    if (cfg.max_steps < 1) throw InputError("max_steps must be at least 1");
}

namespace {

// Dormand & Prince (1980), 5(4) pair with FSAL.
namespace dp5 {
constexpr int S = 7;
constexpr std::array<double, S> c = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double a[S][S] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr std::array<double, S> b = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr std::array<double, S> e = {-71.0 / 57600, 0.0, 71.0 / 16695, -71.0 / 1920,
                                     17253.0 / 339200, -22.0 / 525, 1.0 / 40};
}  // namespace dp5

// DOP853 of Hairer, Norsett & Wanner, "Solving ODEs I", 2nd ed.; coefficients
// as distributed with the authors' Fortran code (also scipy's dop853_coefficients).
namespace dop853 {
constexpr int S = 12;
constexpr std::array<double, S> c = {
    0.0,
    0.526001519587677318785587544488e-01,
    0.789002279381515978178381316732e-01,
    0.118350341907227396726757197510,
    0.281649658092772603273242802490,
    0.333333333333333333333333333333,
    0.25,
    0.307692307692307692307692307692,
    0.651282051282051282051282051282,
    0.6,
    0.857142857142857142857142857142,
    1.0};
constexpr double a[S][S] = {
    {},
    {5.26001519587677318785587544488e-2},
    {1.97250569845378994544595329183e-2, 5.91751709536136983633785987549e-2},
    {2.95875854768068491816892993775e-2, 0.0, 8.87627564304205475450678981324e-2},
    {2.41365134159266685502369798665e-1, 0.0, -8.84549479328286085344864962717e-1,
     9.24834003261792003115737966543e-1},
    {3.7037037037037037037037037037e-2, 0.0, 0.0, 1.70828608729473871279604482173e-1,
     1.25467687566822425016691814123e-1},
    {3.7109375e-2, 0.0, 0.0, 1.70252211019544039314978060272e-1, 6.02165389804559606850219397283e-2,
     -1.7578125e-2},
    {3.70920001185047927108779319836e-2, 0.0, 0.0, 1.70383925712239993810214054705e-1,
     1.07262030446373284651809199168e-1, -1.53194377486244017527936158236e-2,
     8.27378916381402288758473766002e-3},
    {6.24110958716075717114429577812e-1, 0.0, 0.0, -3.36089262944694129406857109825,
     -8.68219346841726006818189891453e-1, 2.75920996994467083049415600797e1,
     2.01540675504778934086186788979e1, -4.34898841810699588477366255144e1},
    {4.77662536438264365890433908527e-1, 0.0, 0.0, -2.48811461997166764192642586468,
     -5.90290826836842996371446475743e-1, 2.12300514481811942347288949897e1,
     1.52792336328824235832596922938e1, -3.32882109689848629194453265587e1,
     -2.03312017085086261358222928593e-2},
    {-9.3714243008598732571704021658e-1, 0.0, 0.0, 5.18637242884406370830023853209,
     1.09143734899672957818500254654, -8.14978701074692612513997267357,
     -1.85200656599969598641566180701e1, 2.27394870993505042818970056734e1,
     2.49360555267965238987089396762, -3.0467644718982195003823669022},
    {2.27331014751653820792359768449, 0.0, 0.0, -1.05344954667372501984066689879e1,
     -2.00087205822486249909675718444, -1.79589318631187989172765950534e1,
     2.79488845294199600508499808837e1, -2.85899827713502369474065508674,
     -8.87285693353062954433549289258, 1.23605671757943030647266201528e1,
     6.43392746015763530355970484046e-1},
};
constexpr std::array<double, S> b = {
    5.42937341165687622380535766363e-2, 0.0, 0.0, 0.0, 0.0,
    4.45031289275240888144113950566,   1.89151789931450038304281599044,
    -5.8012039600105847814672114227,   3.1116436695781989440891606237e-1,
    -1.52160949662516078556178806805e-1, 2.01365400804030348374776537501e-1,
    4.47106157277725905176885569043e-2};
// 5th-order and 3rd-order difference weights; combined as in Hairer's DOP853 code.
constexpr std::array<double, S> e5 = {
    0.1312004499419488073250102996e-1, 0.0, 0.0, 0.0, 0.0,
    -0.1225156446376204440720569753e+1, -0.4957589496572501915214079952,
    0.1664377182454986536961530415e+1, -0.3503288487499736816886487290,
    0.3341791187130174790297318841, 0.8192320648511571246570742613e-1,
    -0.2235530786388629525884427845e-1};
constexpr double e3_0 = 0.244094488188976377952755905512;
constexpr double e3_8 = 0.733846688281611857341361741547;
constexpr double e3_11 = 0.220588235294117647058823529412e-1;
}  // namespace dop853

struct Stepper {
    const Rhs& rhs;
    OdeMethod method;
    int dim;
    long evals = 0;
    std::vector<Vector> k;
    Vector ytmp, err;

    Stepper(const Rhs& f, OdeMethod m, int n) : rhs(f), method(m), dim(n) {
        k.assign(13, Vector::Zero(n));
        ytmp = Vector::Zero(n);
        err = Vector::Zero(n);
    }

    void eval(double t, const Vector& y, Vector& out) {
        out.resize(dim);
        rhs(t, y, out);
        ++evals;
        for (int i = 0; i < dim; ++i) {
            if (!std::isfinite(out(i))) {
                std::ostringstream os;
                os.precision(17);
                os << "right-hand side returned a non-finite value in component " << i << " at t = " << t;
                throw NumericalError(os.str());
            }
        }
    }

    // k[0] must hold f(t, y). Fills y_new, err and k_last = f(t + h, y_new).
    void step(double t, const Vector& y, double h, Vector& y_new, Vector& k_last) {
        if (method == OdeMethod::RK45) {
            using namespace dp5;
            for (int s = 1; s < 6; ++s) {
                ytmp = y;
                for (int j = 0; j < s; ++j)
                    if (a[s][j] != 0.0) ytmp.noalias() += (h * a[s][j]) * k[j];
                eval(t + c[s] * h, ytmp, k[s]);
            }
            y_new = y;
            for (int j = 0; j < 6; ++j)
                if (b[j] != 0.0) y_new.noalias() += (h * b[j]) * k[j];
            eval(t + h, y_new, k[6]);
            err.setZero();
            for (int j = 0; j < 7; ++j)
                if (e[j] != 0.0) err.noalias() += (h * e[j]) * k[j];
            k_last = k[6];
        } else {
            using namespace dop853;
            for (int s = 1; s < S; ++s) {
                ytmp = y;
                for (int j = 0; j < s; ++j)
                    if (a[s][j] != 0.0) ytmp.noalias() += (h * a[s][j]) * k[j];
                eval(t + c[s] * h, ytmp, k[s]);
            }
            Vector incr = Vector::Zero(dim);
            Vector er5 = Vector::Zero(dim);
            for (int j = 0; j < S; ++j) {
                if (b[j] != 0.0) incr.noalias() += b[j] * k[j];
                if (e5[j] != 0.0) er5.noalias() += e5[j] * k[j];
            }
            const Vector er3 = incr - e3_0 * k[0] - e3_8 * k[8] - e3_11 * k[11];
            y_new = y + h * incr;
            for (int i = 0; i < dim; ++i) {
                const double den = std::hypot(std::abs(er5(i)), 0.1 * std::abs(er3(i)));
                err(i) = den > 0 ? h * er5(i) * (std::abs(er5(i)) / den) : 0.0;
            }
            eval(t + h, y_new, k[12]);
            k_last = k[12];
        }
    }
};

double scaled_error(const Vector& err, const Vector& y, const Vector& y_new, const IntegratorConfig& cfg) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y(i)), std::abs(y_new(i)));
        worst = std::max(worst, std::abs(err(i)) / sc);
    }
    return worst;
}

double rms_scaled(const Vector& v, const Vector& y, const IntegratorConfig& cfg) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y(i));
        acc += (v(i) / sc) * (v(i) / sc);
    }
    return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(1, v.size())));
}

// Hairer, Norsett & Wanner starting-step heuristic.
double initial_step(Stepper& st, double t0, const Vector& y0, const Vector& f0, double span, int err_order,
                    const IntegratorConfig& cfg) {
    const double d0 = rms_scaled(y0, y0, cfg);
    const double d1 = rms_scaled(f0, y0, cfg);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    const Vector y1 = y0 + h0 * f0;
    Vector f1;
    st.eval(t0 + h0, y1, f1);
    const double d2 = rms_scaled(f1 - f0, y0, cfg) / h0;
    double h1;
    if (d1 <= 1e-15 && d2 <= 1e-15) h1 = std::max(1e-6, h0 * 1e-3);
    else h1 = std::pow(0.01 / std::max(d1, d2), 1.0 / (err_order + 1));
    return std::min(100 * h0, h1);
}

}  // namespace

OdeSolution integrate(const Rhs& rhs, const Vector& y0, const std::vector<double>& grid,
                      const IntegratorConfig& cfg) {
    validate(cfg);
    require_finite(y0, "initial state");
    if (grid.empty()) throw InputError("output grid is empty");
    for (size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i])) throw InputError("output grid has a non-finite time");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw InputError("output grid must be strictly increasing");
    }

    const int n = static_cast<int>(y0.size());
    Stepper st(rhs, cfg.method, n);
    const int err_order = cfg.method == OdeMethod::RK45 ? 4 : 7;
    const double q = err_order + 1.0;
    const double beta = 0.4 / q;
    const double alpha = 1.0 / q - 0.75 * beta;
    constexpr double safety = 0.9, min_factor = 0.2, max_factor = 5.0;

    OdeSolution sol;
    sol.times = grid;
    sol.states.resize(static_cast<Eigen::Index>(grid.size()), n);
    sol.states.row(0) = y0.transpose();

    auto partial = [&](size_t reached) {
        OdeSolution p;
        p.times.assign(grid.begin(), grid.begin() + static_cast<long>(reached));
        p.states = sol.states.topRows(static_cast<Eigen::Index>(reached));
        p.steps_accepted = sol.steps_accepted;
        p.steps_rejected = sol.steps_rejected;
        p.rhs_evaluations = st.evals;
        return p;
    };

    if (grid.size() == 1) {
        sol.rhs_evaluations = 0;
        return sol;
    }

    double t = grid.front();
    Vector y = y0;
    st.eval(t, y, st.k[0]);

    const double span = grid.back() - grid.front();
    const double hmax = cfg.max_step.value_or(kInf);
    double h;
    if (cfg.fixed_step) h = *cfg.fixed_step;
    else if (cfg.initial_step) h = *cfg.initial_step;
    else h = initial_step(st, t, y, st.k[0], span, err_order, cfg);
    h = std::min(h, hmax);

    double err_prev = 1e-4;
    bool last_rejected = false;
    Vector y_new(n), k_last(n);

    for (size_t gi = 1; gi < grid.size(); ++gi) {
        const double tn = grid[gi];
        while (t < tn) {
            if (sol.steps_accepted + sol.steps_rejected >= cfg.max_steps) {
                std::ostringstream os;
                os.precision(17);
                os << "step budget of " << cfg.max_steps << " exhausted at t = " << t;
                throw IntegrationError(os.str(), partial(gi));
            }
            double h_try = std::min(h, hmax);
            bool lands = false;
            if (t + h_try * 1.0000001 >= tn) {
                h_try = tn - t;
                lands = true;
            }
            // a landing step within rounding of the grid point is taken as is
            const bool tiny = !(h_try > std::abs(t) * 4e-16);
            if (tiny && !lands) {
                std::ostringstream os;
                os.precision(17);
                os << "step size underflow at t = " << t;
                throw NumericalError(os.str());
            }

            st.step(t, y, h_try, y_new, k_last);

            if (cfg.fixed_step || tiny) {
                t = lands ? tn : t + h_try;
                y = y_new;
                st.k[0] = k_last;
                ++sol.steps_accepted;
                continue;
            }

            const double en = scaled_error(st.err, y, y_new, cfg);
            if (en <= 1.0) {
                double factor;
                if (en == 0.0) factor = max_factor;
                else factor = safety * std::pow(en, -alpha) * std::pow(err_prev, beta);
                factor = std::clamp(factor, min_factor, max_factor);
                if (last_rejected) factor = std::min(factor, 1.0);
                err_prev = std::max(en, 1e-4);
                last_rejected = false;

                t = lands ? tn : t + h_try;
                y = y_new;
                st.k[0] = k_last;
                ++sol.steps_accepted;
                // a step shortened to land on the grid should not shrink the next one
                h = lands ? std::max(h, h_try * factor) : h_try * factor;
            } else {
                const double factor = std::max(min_factor, safety * std::pow(en, -1.0 / q));
                h = h_try * factor;
                last_rejected = true;
                ++sol.steps_rejected;
            }
        }
        sol.states.row(static_cast<Eigen::Index>(gi)) = y.transpose();
    }
    sol.rhs_evaluations = st.evals;
    return sol;
}

}  // namespace mcr
