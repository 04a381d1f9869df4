// mcrkit: batch front end for the curve-resolution workbench.
#include "mcrkit/bilinear.hpp"
#include "mcrkit/csv.hpp"
#include "mcrkit/error.hpp"
#include "mcrkit/json_io.hpp"
#include "mcrkit/kinetics.hpp"
#include "mcrkit/matcore.hpp"
#include "mcrkit/normalization.hpp"
#include "mcrkit/reducibility.hpp"
#include "mcrkit/scf.hpp"
#include "mcrkit/speciation.hpp"
#include "mcrkit/svg.hpp"
#include "mcrkit/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace mcr;

namespace {

enum Exit { kOk = 0, kNegative = 1, kUsage = 2, kNumerical = 3 };

std::string fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

json to_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json to_json(const Matrix& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Vector(m.row(i).transpose())));
    return a;
}

json to_json(const RankReport& r) {
    return json{{"singular_values", r.singular_values},
                {"elbow_index", r.elbow_index},
                {"estimated_rank", r.estimated_rank},
                {"condition_number", r.condition_number},
                {"rel_tolerance", r.rel_tolerance}};
}

std::vector<std::string> numbered(const std::string& prefix, Eigen::Index n) {
    std::vector<std::string> h;
    for (Eigen::Index i = 0; i < n; ++i) h.push_back(prefix + std::to_string(i + 1));
    return h;
}

// Everything a command reads and writes, for the manifest.
struct Run {
    std::string command;
    std::vector<std::string> argv;  // replayable arguments
    fs::path out_dir = ".";
    std::string format = "csv";
    std::uint64_t seed = 0;
    bool svg = false;
    json params = json::object();
    json inputs = json::array();
    json outputs = json::array();

    std::string read_input(const std::string& path) {
        std::string text = read_text_file(path);
        inputs.push_back({{"path", path}, {"fnv1a64", fnv1a64(text)}});
        return text;
    }

    // A header row is assumed when the first field of the first line is not a number.
    CsvMatrix read_matrix(const std::string& path) {
        const std::string text = read_input(path);
        size_t start = text.find_first_not_of(" \t\r\n");
        bool header = false;
        if (start != std::string::npos) {
            size_t end = text.find_first_of(",\r\n", start);
            std::string first = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
            char* stop = nullptr;
            std::strtod(first.c_str(), &stop);
            header = first.empty() || stop == first.c_str();
        }
        CsvMatrix m = parse_matrix_csv(text, header, path);
        require_finite(m.data, path);
        return m;
    }

    void write(const std::string& name, const std::string& content) {
        fs::create_directories(out_dir);
        write_file_atomic(out_dir / name, content);
        outputs.push_back({{"path", name}, {"fnv1a64", fnv1a64(content)}});
    }

    void write_matrix(const std::string& stem, const Matrix& m, const std::vector<std::string>& header = {}) {
        if (format == "json") {
            json doc{{"header", header}, {"data", to_json(m)}};
            write(stem + ".json", doc.dump(2) + "\n");
        } else {
            write(stem + ".csv", format_matrix_csv(m, header));
        }
    }

    void write_report(const std::string& name, const json& doc) { write(name, doc.dump(2) + "\n"); }

    void write_manifest() {
        json m{{"tool", "mcrkit"},
               {"version", kVersion},
               {"command", command},
               {"argv", argv},
               {"seed", seed},
               {"format", format},
               {"out_dir", out_dir.string()},
               {"params", params},
               {"inputs", inputs},
               {"outputs", outputs}};
        fs::create_directories(out_dir);
        write_file_atomic(out_dir / (command + ".manifest.json"), m.dump(2) + "\n");
    }
};

// ---- argument helpers ----

std::vector<int> parse_index_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size() || v < 0) throw InputError("bad index '" + tok + "' in list '" + s + "'");
        out.push_back(v);
    }
    return out;
}

double parse_number(const std::string& s, const std::string& what) {
    size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || !std::isfinite(v)) throw InputError(what + ": '" + s + "' is not a number");
    return v;
}

int species_index(const ReactionSystem& sys, const std::string& ref) {
    for (size_t i = 0; i < sys.species.size(); ++i)
        if (sys.species[i] == ref) return static_cast<int>(i);
    return sys.index_of(ref);
}

// discrete:SPECIES:AMOUNT@TIME or continuous:SPECIES:AMOUNT[:RATE][@START]
DoseSchedule parse_dose(const std::string& spec, const ReactionSystem& sys, double t1) {
    std::string body = spec, at;
    if (auto p = spec.find('@'); p != std::string::npos) {
        body = spec.substr(0, p);
        at = spec.substr(p + 1);
    }
    std::vector<std::string> f;
    std::stringstream ss(body);
    std::string tok;
    while (std::getline(ss, tok, ':')) f.push_back(tok);
    if (f.size() < 3) throw InputError("dose '" + spec + "': expected MODE:SPECIES:AMOUNT[...]");
    DoseSchedule d;
    d.target = species_index(sys, f[1]);
    d.amount = parse_number(f[2], "dose amount");
    if (f[0] == "discrete") {
        if (f.size() != 3 || at.empty()) throw InputError("dose '" + spec + "': expected discrete:SPECIES:AMOUNT@TIME");
        d.mode = DoseMode::Discrete;
        d.time = parse_number(at, "dose time");
    } else if (f[0] == "continuous") {
        if (f.size() > 4) throw InputError("dose '" + spec + "': too many fields");
        d.mode = DoseMode::Continuous;
        d.start = at.empty() ? 0.0 : parse_number(at, "dose start");
        // default: spread the amount over the rest of the run
        d.rate = f.size() == 4 ? parse_number(f[3], "dose rate") : d.amount / (t1 - d.start);
    } else {
        throw InputError("dose '" + spec + "': mode must be discrete or continuous");
    }
    return d;
}

json dose_json(const DoseSchedule& d, const ReactionSystem& sys) {
    json j{{"target", sys.species[d.target]}, {"amount", d.amount}};
    if (d.mode == DoseMode::Discrete) {
        j["mode"] = "discrete";
        j["time"] = d.time;
    } else {
        j["mode"] = "continuous";
        j["rate"] = d.rate;
        j["start"] = d.start;
    }
    return j;
}

json integrator_json(const IntegratorConfig& c) {
    json j{{"method", to_string(c.method)}, {"abs_tol", c.abs_tol}, {"rel_tol", c.rel_tol}};
    if (c.max_step) j["max_step"] = *c.max_step;
    if (c.initial_step) j["initial_step"] = *c.initial_step;
    return j;
}

// X + Y -> Z with a single reaction gets a closed-form comparison.
std::optional<double> bimolecular_deviation(const ReactionSystem& sys, const std::vector<double>& grid,
                                            const Matrix& c) {
    if (sys.species.size() != 3 || sys.reactions.size() != 1) return std::nullopt;
    const Reaction& r = sys.reactions[0];
    if (r.reactants != std::vector<int>{1, 1, 0} || r.products != std::vector<int>{0, 0, 1}) return std::nullopt;
    double dev = 0.0;
    for (size_t i = 0; i < grid.size(); ++i) {
        const auto cf = bimolecular_closed_form(r.k, sys.y0(0), sys.y0(1), sys.y0(2), grid[i]);
        for (int j = 0; j < 3; ++j) dev = std::max(dev, std::abs(c(static_cast<Eigen::Index>(i), j) - cf[j]));
    }
    return dev;
}

// ---- subcommands ----

struct SimulateOpts {
    std::string preset, system, grid, method = "rk45";
    double abs_tol = 1e-6, rel_tol = 1e-3;
    std::optional<double> max_step, initial_step;
    std::vector<std::string> doses;
    bool no_preset_doses = false;
};

struct Loaded {
    ReactionSystem sys;
    std::vector<DoseSchedule> doses;
    std::string grid;
    std::string source;
};

Loaded load_system(Run& run, const std::string& preset, const std::string& system_file, const std::string& grid,
                   bool keep_preset_doses) {
    if (preset.empty() == system_file.empty()) throw InputError("give exactly one of --preset or --system");
    Loaded l;
    if (!preset.empty()) {
        KineticsPreset p = kinetics_preset(preset);
        l.sys = p.system;
        if (keep_preset_doses) l.doses = p.doses;
        l.grid = p.grid;
        l.source = "preset:" + preset;
    } else {
        ReactionDocument doc = parse_reaction_document(run.read_input(system_file));
        l.sys = doc.system;
        l.doses = doc.doses;
        if (doc.grid) l.grid = *doc.grid;
        l.source = "file:" + system_file;
    }
    if (!grid.empty()) l.grid = grid;
    if (l.grid.empty()) throw InputError("no time grid: pass --grid or put \"grid\" in the system file");
    return l;
}

int cmd_simulate(Run& run, const SimulateOpts& o) {
    Loaded l = load_system(run, o.preset, o.system, o.grid, !o.no_preset_doses);
    const std::vector<double> grid = parse_grid(l.grid);
    for (const auto& s : o.doses) l.doses.push_back(parse_dose(s, l.sys, grid.back()));
    IntegratorConfig cfg;
    cfg.method = parse_ode_method(o.method);
    cfg.abs_tol = o.abs_tol;
    cfg.rel_tol = o.rel_tol;
    cfg.max_step = o.max_step;
    cfg.initial_step = o.initial_step;
    validate(cfg);

    json doses = json::array();
    for (const auto& d : l.doses) doses.push_back(dose_json(d, l.sys));
    run.params = {{"system", l.source}, {"grid", l.grid}, {"integrator", integrator_json(cfg)}, {"doses", doses}};

    SimulationStats stats;
    const Matrix c = simulate(l.sys, grid, cfg, l.doses, &stats);
    Vector t(static_cast<Eigen::Index>(grid.size()));
    for (size_t i = 0; i < grid.size(); ++i) t(static_cast<Eigen::Index>(i)) = grid[i];

    json report;
    report["species"] = l.sys.species;
    report["points"] = grid.size();
    report["stats"] = {{"steps_accepted", stats.steps_accepted},
                       {"steps_rejected", stats.steps_rejected},
                       {"rhs_evaluations", stats.rhs_evaluations},
                       {"segments", stats.segments}};
    const auto laws = conservation_laws(l.sys);
    const auto res = conservation_residuals(c, laws);
    json cons = json::array();
    double worst = 0.0;
    for (size_t i = 0; i < laws.size(); ++i) {
        cons.push_back({{"weights", to_json(laws[i].weights)},
                        {"constant", laws[i].constant},
                        {"kind", laws[i].kind == LawKind::Affine ? "affine" : "linear"},
                        {"residual", res[i]}});
        worst = std::max(worst, res[i]);
    }
    report["conservation"] = cons;
    const RankReport rr = rank_report(c);
    report["rank"] = to_json(rr);
    const ClosureStats cs = closure_stats(c);
    report["closure"] = {{"min", cs.min}, {"max", cs.max}, {"mean", cs.mean}, {"std", cs.std}};
    const auto dev = bimolecular_deviation(l.sys, grid, c);
    if (dev) report["closed_form_max_deviation"] = *dev;

    run.write_matrix("C", c, l.sys.species);
    run.write_matrix("t", t, {"t"});
    run.write_report("simulate.json", report);
    if (run.svg) run.write("C.svg", svg_line_plot(t, c, l.sys.species, "concentrations"));

    std::printf("points %zu, species %zu, estimated rank %d\n", grid.size(), l.sys.species.size(), rr.estimated_rank);
    std::printf("conservation laws %zu, max residual %.3e\n", laws.size(), worst);
    if (dev) std::printf("closed-form max deviation %.3e\n", *dev);
    return kOk;
}

struct RankOpts {
    std::vector<std::string> files;
    std::optional<double> rel_tol;
};

int cmd_rank(Run& run, const RankOpts& o) {
    Matrix stacked;
    for (const auto& f : o.files) {
        Matrix m = run.read_matrix(f).data;
        if (stacked.size() == 0) {
            stacked = m;
        } else {
            if (m.cols() != stacked.cols())
                throw InputError(f + ": has " + std::to_string(m.cols()) + " columns, expected " +
                                 std::to_string(stacked.cols()));
            Matrix next(stacked.rows() + m.rows(), stacked.cols());
            next << stacked, m;
            stacked = next;
        }
    }
    run.params = {{"files", o.files}, {"rows", stacked.rows()}, {"cols", stacked.cols()}};
    if (o.rel_tol) run.params["rel_tol"] = *o.rel_tol;
    const RankReport rr = rank_report(stacked, o.rel_tol);
    run.write_report("rank.json", to_json(rr));
    std::printf("rank %d (elbow %d, tolerance %.3e)\n", rr.estimated_rank, rr.elbow_index, rr.rel_tolerance);
    return kOk;
}

struct NormalizeOpts {
    std::string file, kind = "l1-rows";
    std::optional<int> rank;
    double eps = 1e-15, cycle_tol = 1e-10;
    int max_iter = 100;
    bool history = false;
};

int cmd_normalize(Run& run, const NormalizeOpts& o) {
    const Matrix r = run.read_matrix(o.file).data;
    run.params = {{"file", o.file}, {"kind", o.kind}};
    json report{{"kind", o.kind}};
    auto scores_of = [&](int k) {
        SvdResult s = svd(r, k);
        return Matrix(s.u * s.s.asDiagonal());
    };
    const int k = o.rank.value_or(rank_report(r).estimated_rank);
    if (o.kind == "l1-rows" || o.kind == "abs-rows") {
        const Matrix n = normalize_rows_sum(r, o.kind == "l1-rows" ? RowSumMode::Plain : RowSumMode::Abs);
        const ClosureStats cs = closure_stats(n);
        report["row_sums"] = {{"min", cs.min}, {"max", cs.max}};
        run.write_matrix("normalized", n);
    } else if (o.kind == "internal-sum" || o.kind == "fsvt1n-int") {
        run.params["rank"] = k;
        const Matrix x = scores_of(k);
        const Matrix n = o.kind == "internal-sum" ? internal_normalize_sum(x) : fsvt1n_internal(x);
        report["rank"] = k;
        run.write_matrix("normalized", n, numbered("x", n.cols()));
    } else if (o.kind == "fsvt1n-ext") {
        Fsvt1nOptions opt;
        opt.eps = o.eps;
        opt.max_iter = o.max_iter;
        opt.cycle_tol = o.cycle_tol;
        opt.keep_history = o.history;
        run.params.update({{"rank", k}, {"eps", o.eps}, {"max_iter", o.max_iter}, {"cycle_tol", o.cycle_tol}});
        const Fsvt1nResult res = fsvt1n_external(r, k, opt);
        report.update({{"rank", k},
                       {"iterations", res.iterations},
                       {"converged", res.converged},
                       {"cycle_detected", res.cycle_detected},
                       {"cycle_period", res.cycle_period ? json(*res.cycle_period) : json(nullptr)},
                       {"residual", res.residual}});
        json acc = json::array();
        for (const auto& a : res.accumulation) acc.push_back(to_json(a));
        report["accumulation"] = acc;
        run.write_matrix("normalized", res.normalized);
        run.write_matrix("scores", res.scores, numbered("x", res.scores.cols()));
        if (o.history) {
            const Eigen::Index cols = res.scores.size();
            Matrix h(static_cast<Eigen::Index>(res.history.size()), cols + 1);
            for (size_t i = 0; i < res.history.size(); ++i) {
                const Matrix& x = res.history[i];
                h(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i + 1);
                for (Eigen::Index a = 0; a < x.rows(); ++a)
                    for (Eigen::Index b = 0; b < x.cols(); ++b)
                        h(static_cast<Eigen::Index>(i), 1 + a * x.cols() + b) = x(a, b);
            }
            std::vector<std::string> header{"iteration"};
            for (Eigen::Index a = 0; a < res.scores.rows(); ++a)
                for (Eigen::Index b = 0; b < res.scores.cols(); ++b)
                    header.push_back("x" + std::to_string(a + 1) + "_" + std::to_string(b + 1));
            run.write_matrix("history", h, header);
        }
        std::printf("iterations %d, converged %s, cycle %s\n", res.iterations, res.converged ? "yes" : "no",
                    res.cycle_detected ? "period 2" : "none");
    } else {
        throw InputError("--kind must be l1-rows, abs-rows, internal-sum, fsvt1n-int or fsvt1n-ext");
    }
    run.write_report("normalize.json", report);
    return kOk;
}

struct TitrateOpts {
    std::string preset, model;
    double indicators = 0.0;
    std::string composition = "as-executed";
    double rel_tol = 1e-9;
    bool cold_start = false;
};

int cmd_titrate(Run& run, const TitrateOpts& o) {
    EquilibriumModel model;
    TitrationProtocol proto;
    std::vector<int> cols;
    if (!o.model.empty()) {
        if (!o.preset.empty()) throw InputError("give at most one of --preset or --model");
        EquilibriumDocument doc = parse_equilibrium_document(run.read_input(o.model));
        model = doc.model;
        proto = doc.protocol;
        for (Eigen::Index s = 0; s < model.nspec(); ++s) cols.push_back(static_cast<int>(s));
        run.params = {{"model", o.model}};
    } else {
        const std::string p = o.preset.empty() ? "dye" : o.preset;
        if (p != "dye") throw InputError("unknown titration preset '" + p + "' (available: dye)");
        DyeComposition comp;
        if (o.composition == "as-executed") comp = DyeComposition::AsExecuted;
        else if (o.composition == "as-written") comp = DyeComposition::AsWritten;
        else throw InputError("--composition must be as-executed or as-written");
        model = dye_model();
        proto = dye_protocol(o.indicators, comp);
        cols = kDyeSpeciesColumns;
        run.params = {{"preset", p}, {"indicators_in_titrant", o.indicators}, {"composition", o.composition}};
    }
    run.params["rel_tol"] = o.rel_tol;
    run.params["warm_start"] = !o.cold_start;

    const TitrationResult res = titrate(model, proto, !o.cold_start);
    Matrix sub(res.c.rows(), static_cast<Eigen::Index>(cols.size()));
    std::vector<std::string> sub_names;
    for (size_t j = 0; j < cols.size(); ++j) {
        sub.col(static_cast<Eigen::Index>(j)) = res.c.col(cols[j]);
        sub_names.push_back(model.species_names[cols[j]]);
    }
    const RankReport rr = rank_report(sub, o.rel_tol);
    const bool full = rr.estimated_rank == sub.cols();
    json report{{"verdict", full ? "full rank" : "rank deficient"},
                {"rank_columns", sub_names},
                {"rank", to_json(rr)},
                {"points", res.c.rows()},
                {"all_converged", res.all_converged()},
                {"nonconverged", res.nonconverged},
                {"max_residual", res.max_residual}};

    Matrix sp(res.c.rows(), res.c.cols() + 1);
    sp << proto.v_added, res.c;
    std::vector<std::string> header{"v_added"};
    header.insert(header.end(), model.species_names.begin(), model.species_names.end());
    run.write_matrix("species", sp, header);
    run.write_matrix("totals", res.c_tot, model.component_names);
    run.write_report("titrate.json", report);
    if (run.svg) run.write("species.svg", svg_line_plot(proto.v_added, sub, sub_names, "dye species"));
    std::printf("%s (rank %d of %lld), max residual %.3e\n", full ? "full rank" : "rank deficient",
                rr.estimated_rank, static_cast<long long>(sub.cols()), res.max_residual);
    if (!res.all_converged()) {
        std::printf("%zu points did not converge\n", res.nonconverged.size());
        return kNumerical;
    }
    return kOk;
}

struct ReduceOpts {
    std::string file;
    double threshold = 0.0;
};

int cmd_reduce(Run& run, const ReduceOpts& o) {
    const Matrix m = run.read_matrix(o.file).data;
    run.params = {{"file", o.file}, {"threshold", o.threshold}};
    const IrreducibilityResult r = is_irreducible(m, o.threshold);
    run.write_report("reduce.json", json{{"irreducible", r.irreducible}, {"components", r.components}});
    std::printf("%s\n", r.irreducible ? "irreducible" : "reducible");
    for (const auto& comp : r.components) {
        std::string s;
        for (int v : comp) s += (s.empty() ? "" : " ") + std::to_string(v);
        std::printf("component: %s\n", s.c_str());
    }
    return r.irreducible ? kOk : kNegative;
}

struct ScfOpts {
    std::string file, preset;
    int grid_n = kDefaultScfGrid;
    std::optional<double> rank_tol;
};

int cmd_scf(Run& run, const ScfOpts& o) {
    if (o.file.empty() == o.preset.empty()) throw InputError("give exactly one data file or --preset");
    Matrix d;
    if (!o.preset.empty()) {
        d = two_component_preset(o.preset).d();
        run.params = {{"preset", o.preset}};
    } else {
        d = run.read_matrix(o.file).data;
        run.params = {{"file", o.file}};
    }
    run.params["grid_n"] = o.grid_n;
    const TwoComponentRegion reg = feasible_region_2comp(d, o.rank_tol);
    const ScfGrid g = scf_boundary_study(d, reg, o.grid_n);
    const std::string verdict = g.extrema_on_boundary ? "extrema on boundary" : "extrema not on boundary";
    json report{{"region",
                 {{"alpha", {reg.alpha_min, reg.alpha_max}},
                  {"beta", {reg.beta_min, reg.beta_max}},
                  {"alpha_channel", reg.alpha_channel},
                  {"beta_channel", reg.beta_channel},
                  {"alpha_row", reg.alpha_row},
                  {"beta_row", reg.beta_row}}},
                {"grid_n", o.grid_n},
                {"max", {{"value", g.max}, {"cell", {g.argmax.first, g.argmax.second}},
                         {"alpha", g.alphas(g.argmax.first)}, {"beta", g.betas(g.argmax.second)}}},
                {"min", {{"value", g.min}, {"cell", {g.argmin.first, g.argmin.second}},
                         {"alpha", g.alphas(g.argmin.first)}, {"beta", g.betas(g.argmin.second)}}},
                {"skipped_cells", g.skipped.size()},
                {"verdict", verdict}};
    run.write_matrix("scf_grid", g.values);
    run.write_report("scf.json", report);
    if (run.svg) run.write("scf_grid.svg", svg_heatmap(g.values, "SCF of component 1"));
    std::printf("%s (max %.6f at cell %d,%d; min %.6f at cell %d,%d)\n", verdict.c_str(), g.max, g.argmax.first,
                g.argmax.second, g.min, g.argmin.first, g.argmin.second);
    return g.extrema_on_boundary ? kOk : kNegative;
}

struct RecoverOpts {
    std::string d, c, known, a_known, a_sm;
    std::vector<std::string> pairs;
    bool premix = false;
    double s0 = 0.0, k0 = 0.0;
};

int cmd_recover(Run& run, const RecoverOpts& o) {
    json report;
    if (o.premix) {
        if (o.d.empty() || o.a_sm.empty()) throw InputError("--premix needs --d and --a-sm");
        const Matrix d = run.read_matrix(o.d).data;
        const Matrix asm_ = run.read_matrix(o.a_sm).data;
        if (asm_.cols() != 1 || asm_.rows() != d.cols())
            throw InputError(o.a_sm + ": expected one column with " + std::to_string(d.cols()) + " rows");
        run.params = {{"mode", "premix"}, {"d", o.d}, {"a_sm", o.a_sm}, {"s0", o.s0}, {"k0", o.k0}};
        const auto [a_s, a_k] = premix_recovery(asm_.col(0), d.row(0).transpose(), o.s0, o.k0);
        Matrix a(a_s.size(), 2);
        a << a_s, a_k;
        report = {{"mode", "premix"}};
        run.write_matrix("A_est", a, {"S", "K"});
    } else if (!o.pairs.empty()) {
        std::vector<std::pair<Matrix, Matrix>> pairs;
        for (const auto& p : o.pairs) {
            const auto comma = p.find(',');
            if (comma == std::string::npos) throw InputError("--pair expects D.csv,C.csv, got '" + p + "'");
            pairs.emplace_back(run.read_matrix(p.substr(0, comma)).data, run.read_matrix(p.substr(comma + 1)).data);
        }
        run.params = {{"mode", "augment"}, {"pairs", o.pairs}};
        const AugmentedEstimate e = augmented_estimate(pairs);
        report = {{"mode", "augment"}, {"stacked_rank", to_json(e.stacked_rank)}, {"rank_deficient", e.rank_deficient}};
        run.write_matrix("A_est", e.a, numbered("a", e.a.cols()));
    } else {
        if (o.d.empty() || o.c.empty()) throw InputError("recover needs --d and --c (or --pair, or --premix)");
        const Matrix d = run.read_matrix(o.d).data;
        const CsvMatrix c = run.read_matrix(o.c);
        std::vector<std::string> names = c.header.empty() ? numbered("a", c.data.cols()) : c.header;
        if (!o.known.empty()) {
            if (o.a_known.empty()) throw InputError("--known needs --a-known");
            const std::vector<int> known = parse_index_list(o.known);
            const Matrix ak = run.read_matrix(o.a_known).data;
            run.params = {{"mode", "known"}, {"d", o.d}, {"c", o.c}, {"known", known}, {"a_known", o.a_known}};
            const KnownSpectraEstimate e = estimate_with_known(d, c.data, known, ak);
            std::vector<std::string> un;
            for (int j : e.unknown) un.push_back(names[j]);
            report = {{"mode", "known"},
                      {"unknown", e.unknown},
                      {"rank", e.rank},
                      {"rank_deficient", e.rank_deficient},
                      {"residual_fro", e.residual_fro}};
            run.write_matrix("A_est", e.a_unknown, un);
        } else {
            run.params = {{"mode", "ls"}, {"d", o.d}, {"c", o.c}};
            const SpectraEstimate e = estimate_spectra(d, c.data);
            report = {{"mode", "ls"}, {"rank", e.rank}, {"rank_deficient", e.rank_deficient}};
            run.write_matrix("A_est", e.a, names);
            if (e.rank_deficient) std::printf("warning: C is rank deficient (rank %d)\n", e.rank);
        }
    }
    run.write_report("recover.json", report);
    return kOk;
}

struct SpectraOpts {
    std::string preset, set;
};

SpectrumSet load_spectra(Run& run, const std::string& preset, const std::string& set) {
    if (!preset.empty() && !set.empty()) throw InputError("give at most one of --spectra preset or --set");
    if (!set.empty()) return parse_spectrum_set(run.read_input(set));
    return spectrum_preset(preset);
}

int cmd_spectra(Run& run, const SpectraOpts& o) {
    if (o.preset.empty() == o.set.empty()) throw InputError("give exactly one of --preset or --set");
    const SpectrumSet s = load_spectra(run, o.preset, o.set);
    run.params = {{"spectra", o.preset.empty() ? "file:" + o.set : "preset:" + o.preset}};
    const Matrix a = gaussian_spectra(s);
    run.write_matrix("A", a, s.names);
    run.write_matrix("channels", s.grid, {"channel"});
    if (run.svg) run.write("A.svg", svg_line_plot(s.grid, a, s.names, "spectra"));
    return kOk;
}

struct SynthOpts {
    std::string kinetics, system, spectra, set, grid, two_component;
    std::string method = "rk89";
    double abs_tol = 1e-14, rel_tol = 1e-13, sd = 0.0;
    bool no_preset_doses = false;
};

int cmd_synth(Run& run, const SynthOpts& o) {
    if (!o.two_component.empty()) {
        const TwoComponentPreset p = two_component_preset(o.two_component);
        run.params = {{"two_component", o.two_component}, {"sd", o.sd}};
        const Matrix d = add_noise(p.d(), {o.sd, run.seed});
        run.write_matrix("D", d);
        run.write_matrix("C", p.c, {"c1", "c2"});
        run.write_matrix("S", p.s, {"s1", "s2"});
        run.write_matrix("t", p.times, {"t"});
        return kOk;
    }
    Loaded l = load_system(run, o.kinetics, o.system, o.grid, !o.no_preset_doses);
    const std::vector<double> grid = parse_grid(l.grid);
    IntegratorConfig cfg;
    cfg.method = parse_ode_method(o.method);
    cfg.abs_tol = o.abs_tol;
    cfg.rel_tol = o.rel_tol;
    validate(cfg);
    std::string spectra = o.spectra;
    if (spectra.empty() && o.set.empty()) {
        if (l.sys.species.size() == 3) spectra = "three-component";
        else if (l.sys.species.size() == 4) spectra = "four-component";
        else throw InputError("no spectrum preset matches " + std::to_string(l.sys.species.size()) + " species; pass --set");
    }
    const SpectrumSet set = load_spectra(run, spectra, o.set);
    json doses = json::array();
    for (const auto& d : l.doses) doses.push_back(dose_json(d, l.sys));
    run.params = {{"system", l.source},
                  {"grid", l.grid},
                  {"integrator", integrator_json(cfg)},
                  {"doses", doses},
                  {"spectra", spectra.empty() ? "file:" + o.set : "preset:" + spectra},
                  {"sd", o.sd}};

    const Matrix c = simulate(l.sys, grid, cfg, l.doses);
    const Matrix a = gaussian_spectra(set);
    if (a.cols() != c.cols())
        throw InputError("spectrum set has " + std::to_string(a.cols()) + " components, system has " +
                         std::to_string(c.cols()) + " species");
    const Matrix d = add_noise(bilinear_data(c, a), {o.sd, run.seed});
    Vector t(static_cast<Eigen::Index>(grid.size()));
    for (size_t i = 0; i < grid.size(); ++i) t(static_cast<Eigen::Index>(i)) = grid[i];
    run.write_matrix("D", d);
    run.write_matrix("C", c, l.sys.species);
    run.write_matrix("A", a, set.names);
    run.write_matrix("t", t, {"t"});
    return kOk;
}

void list_presets() {
    std::printf("kinetics presets (simulate --preset, synth --kinetics):\n");
    for (const auto& p : kinetics_presets())
        std::printf("  %-20s %s [grid %s]\n", p.name.c_str(), p.description.c_str(), p.grid.c_str());
    std::printf("spectrum presets (spectra --preset, synth --spectra):\n");
    for (const auto& n : spectrum_preset_names()) std::printf("  %s\n", n.c_str());
    std::printf("two-component presets (scf --preset, synth --two-component):\n");
    for (const auto& p : two_component_presets()) std::printf("  %-20s %s\n", p.name.c_str(), p.description.c_str());
    std::printf("titration presets (titrate --preset):\n");
    std::printf("  %-20s three monoprotic dyes titrated with NaOH, 60 points\n", "dye");
}

// Parses and runs one invocation. `args` excludes the program name.
int run_cli(std::vector<std::string> args, const std::optional<std::string>& out_dir_override,
            const json* replay_inputs) {
    CLI::App app{"mcrkit: curve-resolution numerics workbench", "mcrkit"};
    app.set_version_flag("--version", std::string(kVersion));
    app.fallthrough();
    app.require_subcommand(0, 1);

    Run run;
    std::string out_dir = ".", manifest;
    bool list = false;
    app.add_option("--seed", run.seed, "PRNG seed for noise");
    app.add_option("--out-dir", out_dir, "directory for outputs");
    app.add_option("--format", run.format, "matrix output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--manifest", manifest, "re-run the command recorded in a manifest");
    app.add_flag("--list-presets", list, "list built-in presets");
    app.add_flag("--svg", run.svg, "also write static SVG plots");

    SimulateOpts so;
    auto* sim = app.add_subcommand("simulate", "integrate a reaction system");
    sim->add_option("--preset", so.preset, "kinetics preset name");
    sim->add_option("--system", so.system, "reaction system JSON");
    sim->add_option("--grid", so.grid, "linspace:t0:t1:n, power:t1:n:p or list:a;b;c");
    sim->add_option("--method", so.method)->check(CLI::IsMember({"rk45", "rk89"}));
    sim->add_option("--abs-tol", so.abs_tol, "absolute tolerance");
    sim->add_option("--rel-tol", so.rel_tol, "relative tolerance");
    sim->add_option("--max-step", so.max_step, "largest step (s)");
    sim->add_option("--initial-step", so.initial_step, "first step (s)");
    sim->add_option("--dose", so.doses, "discrete:SPECIES:AMOUNT@TIME or continuous:SPECIES:AMOUNT[:RATE][@START]");
    sim->add_flag("--no-preset-doses", so.no_preset_doses, "drop the doses a preset carries");

    RankOpts ro;
    auto* rank = app.add_subcommand("rank", "rank report of one matrix or of several stacked by rows");
    rank->add_option("files", ro.files, "CSV matrices, stacked by rows")->required();
    rank->add_option("--rel-tol", ro.rel_tol, "relative singular value cutoff");

    NormalizeOpts no;
    auto* norm = app.add_subcommand("normalize", "external or internal normalization");
    norm->add_option("file", no.file, "CSV matrix")->required();
    norm->add_option("--kind", no.kind)
        ->check(CLI::IsMember({"l1-rows", "abs-rows", "internal-sum", "fsvt1n-int", "fsvt1n-ext"}));
    norm->add_option("--rank", no.rank, "number of factors (fsvt1n-ext)");
    norm->add_option("--eps", no.eps, "convergence tolerance (fsvt1n-ext)");
    norm->add_option("--max-iter", no.max_iter, "iteration cap (fsvt1n-ext)");
    norm->add_option("--cycle-tol", no.cycle_tol, "two-step repeat tolerance (fsvt1n-ext)");
    norm->add_flag("--history", no.history, "write every iterate");

    TitrateOpts to;
    auto* tit = app.add_subcommand("titrate", "equilibrium speciation along a titration");
    tit->add_option("--preset", to.preset, "equilibrium preset name");
    tit->add_option("--model", to.model, "model and protocol JSON");
    tit->add_option("--indicators", to.indicators, "dye concentration in the titrant (mol/L)");
    tit->add_option("--composition", to.composition, "as-executed or as-written");
    tit->add_option("--rel-tol", to.rel_tol, "relative tolerance of the rank verdict");
    tit->add_flag("--cold-start", to.cold_start, "start every point from the initial totals");

    ReduceOpts rdo;
    auto* red = app.add_subcommand("reduce", "irreducibility of a square matrix");
    red->add_option("file", rdo.file, "CSV square matrix")->required();
    red->add_option("--threshold", rdo.threshold, "entries at or below this count as zero");

    ScfOpts sco;
    auto* scf = app.add_subcommand("scf", "SCF over a two-component feasible region");
    scf->add_option("file", sco.file, "CSV data matrix");
    scf->add_option("--preset", sco.preset, "two-component preset name");
    scf->add_option("--grid-n", sco.grid_n, "grid points per axis");
    scf->add_option("--rank-tol", sco.rank_tol, "relative rank tolerance");

    RecoverOpts rco;
    auto* rec = app.add_subcommand("recover", "least-squares spectra from D and C");
    rec->add_option("--d", rco.d, "data matrix CSV");
    rec->add_option("--c", rco.c, "concentration matrix CSV");
    rec->add_option("--known", rco.known, "comma-separated 0-based component indices");
    rec->add_option("--a-known", rco.a_known, "known spectra CSV, one column per known index");
    rec->add_option("--pair", rco.pairs, "D.csv,C.csv (repeat to augment)");
    rec->add_flag("--premix", rco.premix, "pre-mix recovery of substrate and enzyme spectra");
    rec->add_option("--a-sm", rco.a_sm, "measured substrate spectrum");
    rec->add_option("--s0", rco.s0, "initial substrate concentration");
    rec->add_option("--k0", rco.k0, "initial enzyme concentration");

    SpectraOpts spo;
    auto* spe = app.add_subcommand("spectra", "Gaussian spectra");
    spe->add_option("--preset", spo.preset, "spectrum preset name");
    spe->add_option("--set", spo.set, "spectrum set JSON");

    SynthOpts syo;
    auto* syn = app.add_subcommand("synth", "synthetic D = C A^T plus noise");
    syn->add_option("--kinetics", syo.kinetics, "kinetics preset name");
    syn->add_option("--system", syo.system, "reaction system JSON");
    syn->add_option("--spectra", syo.spectra, "spectrum preset name");
    syn->add_option("--set", syo.set, "spectrum set JSON");
    syn->add_option("--grid", syo.grid, "time grid spec");
    syn->add_option("--method", syo.method)->check(CLI::IsMember({"rk45", "rk89"}));
    syn->add_option("--abs-tol", syo.abs_tol, "absolute tolerance");
    syn->add_option("--rel-tol", syo.rel_tol, "relative tolerance");
    syn->add_option("--sd", syo.sd, "noise standard deviation");
    syn->add_option("--two-component", syo.two_component, "two-component preset name");
    syn->add_flag("--no-preset-doses", syo.no_preset_doses, "drop the doses a preset carries");

    const std::vector<std::string> original = args;
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    if (list) {
        list_presets();
        return kOk;
    }
    if (!manifest.empty()) {
        if (app.get_subcommands().size() > 0) throw InputError("--manifest replays a recorded command; give no subcommand");
        const json m = json::parse(read_text_file(manifest), nullptr, false);
        if (m.is_discarded() || !m.contains("argv") || !m["argv"].is_array())
            throw InputError(manifest + ": not a run manifest");
        std::optional<std::string> od = out_dir;
        if (app.get_option("--out-dir")->count() == 0) od = m.value("out_dir", std::string("."));
        return run_cli(m["argv"].get<std::vector<std::string>>(), od, &m["inputs"]);
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return kUsage;
    }

    run.out_dir = out_dir_override.value_or(out_dir);
    // argv recorded without --out-dir so a replay can redirect outputs
    for (size_t i = 0; i < original.size(); ++i) {
        if (original[i] == "--out-dir") {
            ++i;
            continue;
        }
        if (original[i].rfind("--out-dir=", 0) == 0) continue;
        run.argv.push_back(original[i]);
    }
    CLI::App* sub = app.get_subcommands().front();
    run.command = sub->get_name();
    if (replay_inputs) {
        for (const auto& in : *replay_inputs) {
            const std::string path = in.at("path").get<std::string>();
            if (fnv1a64(read_text_file(path)) != in.at("fnv1a64").get<std::string>())
                throw InputError(path + ": contents differ from the manifest (FNV-1a hash changed)");
        }
    }

    int code = kOk;
    if (sub == sim) code = cmd_simulate(run, so);
    else if (sub == rank) code = cmd_rank(run, ro);
    else if (sub == norm) code = cmd_normalize(run, no);
    else if (sub == tit) code = cmd_titrate(run, to);
    else if (sub == red) code = cmd_reduce(run, rdo);
    else if (sub == scf) code = cmd_scf(run, sco);
    else if (sub == rec) code = cmd_recover(run, rco);
    else if (sub == spe) code = cmd_spectra(run, spo);
    else if (sub == syn) code = cmd_synth(run, syo);

    run.write_manifest();
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return run_cli(args, std::nullopt, nullptr);
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kNumerical;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    }
}
