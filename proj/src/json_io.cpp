#include "mcrkit/json_io.hpp"

#include "mcrkit/error.hpp"

#include <json.hpp>

#include <cmath>

namespace mcr {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw InputError((path.empty() ? "/" : path) + ": " + what);
}

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        fail("", std::string("malformed JSON (") + e.what() + ")");
    }
}

const json& member(const json& obj, const std::string& path, const char* key) {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path + "/" + key, "missing required field");
    return *it;
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "expected a finite number");
    return x;
}

int integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<int>();
}

std::string text(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

const json& array(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array");
    return v;
}

Vector number_vector(const json& v, const std::string& path) {
    array(v, path);
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = number(v[i], path + "/" + std::to_string(i));
    return out;
}

int species_index(const std::vector<std::string>& species, const std::string& name, const std::string& path) {
    for (size_t i = 0; i < species.size(); ++i)
        if (species[i] == name) return static_cast<int>(i);
    fail(path, "unknown species '" + name + "'");
}

std::vector<int> stoich_map(const json& v, const std::vector<std::string>& species, const std::string& path) {
    if (!v.is_object()) fail(path, "expected an object of species: coefficient");
    std::vector<int> out(species.size(), 0);
    for (auto it = v.begin(); it != v.end(); ++it) {
        const std::string p = path + "/" + it.key();
        const int idx = species_index(species, it.key(), p);
        const int n = integer(it.value(), p);
        if (n < 0) fail(p, "stoichiometric coefficient must be a non-negative integer");
        out[static_cast<size_t>(idx)] += n;
    }
    return out;
}

}  // namespace

ReactionDocument parse_reaction_document(const std::string& src) {
    const json doc = parse(src);
    if (!doc.is_object()) fail("", "expected an object");
    ReactionDocument out;
    ReactionSystem& sys = out.system;

    const json& sp = array(member(doc, "", "species"), "/species");
    if (sp.empty()) fail("/species", "needs at least one species");
    for (size_t i = 0; i < sp.size(); ++i) {
        const std::string p = "/species/" + std::to_string(i);
        const std::string name = text(sp[i], p);
        for (const auto& prev : sys.species)
            if (prev == name) fail(p, "duplicate species '" + name + "'");
        sys.species.push_back(name);
    }

    const json& rx = array(member(doc, "", "reactions"), "/reactions");
    for (size_t r = 0; r < rx.size(); ++r) {
        const std::string p = "/reactions/" + std::to_string(r);
        Reaction reac;
        reac.reactants = stoich_map(member(rx[r], p, "reactants"), sys.species, p + "/reactants");
        reac.products = rx[r].contains("products")
                            ? stoich_map(rx[r]["products"], sys.species, p + "/products")
                            : std::vector<int>(sys.species.size(), 0);
        int order = 0;
        for (int n : reac.reactants) order += n;
        if (order == 0) fail(p + "/reactants", "at least one reactant is required");
        reac.k = number(member(rx[r], p, "k"), p + "/k");
        if (!(reac.k > 0)) fail(p + "/k", "expected a positive number");
        sys.reactions.push_back(std::move(reac));
    }

    const json& y0 = member(doc, "", "y0");
    sys.y0 = Vector::Zero(static_cast<Eigen::Index>(sys.species.size()));
    if (y0.is_array()) {
        if (y0.size() != sys.species.size()) fail("/y0", "expected one value per species");
        sys.y0 = number_vector(y0, "/y0");
    } else if (y0.is_object()) {
        for (auto it = y0.begin(); it != y0.end(); ++it) {
            const std::string p = "/y0/" + it.key();
            sys.y0(species_index(sys.species, it.key(), p)) = number(it.value(), p);
        }
    } else {
        fail("/y0", "expected an array or an object of species: concentration");
    }
    for (Eigen::Index i = 0; i < sys.y0.size(); ++i)
        if (sys.y0(i) < 0) fail("/y0", "concentrations must be >= 0");

    if (doc.contains("doses")) {
        const json& ds = array(doc["doses"], "/doses");
        for (size_t i = 0; i < ds.size(); ++i) {
            const std::string p = "/doses/" + std::to_string(i);
            DoseSchedule d;
            d.target = species_index(sys.species, text(member(ds[i], p, "target"), p + "/target"), p + "/target");
            const std::string mode = text(member(ds[i], p, "mode"), p + "/mode");
            d.amount = number(member(ds[i], p, "amount"), p + "/amount");
            if (!(d.amount > 0)) fail(p + "/amount", "expected a positive number");
            if (mode == "continuous") {
                d.mode = DoseMode::Continuous;
                d.rate = number(member(ds[i], p, "rate"), p + "/rate");
                if (!(d.rate > 0)) fail(p + "/rate", "expected a positive number");
                d.start = ds[i].contains("start") ? number(ds[i]["start"], p + "/start") : 0.0;
            } else if (mode == "discrete") {
                d.mode = DoseMode::Discrete;
                d.time = number(member(ds[i], p, "time"), p + "/time");
            } else {
                fail(p + "/mode", "expected \"continuous\" or \"discrete\"");
            }
            out.doses.push_back(d);
        }
    }
    if (doc.contains("grid")) out.grid = text(doc["grid"], "/grid");
    return out;
}

SpectrumSet parse_spectrum_set(const std::string& src) {
    const json doc = parse(src);
    if (!doc.is_object()) fail("", "expected an object");
    SpectrumSet set;
    const json& g = member(doc, "", "grid");
    if (g.is_array()) {
        set.grid = number_vector(g, "/grid");
    } else if (g.is_object()) {
        const double a = number(member(g, "/grid", "from"), "/grid/from");
        const double b = number(member(g, "/grid", "to"), "/grid/to");
        const int n = integer(member(g, "/grid", "n"), "/grid/n");
        if (n < 1) fail("/grid/n", "expected a positive integer");
        set.grid = n == 1 ? Vector(Vector::Constant(1, a)) : Vector(Vector::LinSpaced(n, a, b));
    } else {
        fail("/grid", "expected an array or {from, to, n}");
    }
    if (set.grid.size() == 0) fail("/grid", "grid is empty");
    const json& comps = array(member(doc, "", "components"), "/components");
    if (comps.empty()) fail("/components", "needs at least one component");
    for (size_t j = 0; j < comps.size(); ++j) {
        const std::string p = "/components/" + std::to_string(j);
        GaussianPeak pk;
        pk.amplitude = number(member(comps[j], p, "amplitude"), p + "/amplitude");
        pk.center = number(member(comps[j], p, "center"), p + "/center");
        pk.width = number(member(comps[j], p, "width"), p + "/width");
        pk.baseline = comps[j].contains("baseline") ? number(comps[j]["baseline"], p + "/baseline") : 0.0;
        if (pk.amplitude < 0) fail(p + "/amplitude", "expected a number >= 0");
        if (!(pk.width > 0)) fail(p + "/width", "expected a positive number");
        if (pk.baseline < 0) fail(p + "/baseline", "expected a number >= 0");
        set.names.push_back(comps[j].contains("name") ? text(comps[j]["name"], p + "/name") : "c" + std::to_string(j + 1));
        set.components.push_back(pk);
    }
    return set;
}

EquilibriumDocument parse_equilibrium_document(const std::string& src) {
    const json doc = parse(src);
    if (!doc.is_object()) fail("", "expected an object");
    EquilibriumDocument out;
    EquilibriumModel& m = out.model;

    const json& rows = array(member(doc, "", "model"), "/model");
    if (rows.empty()) fail("/model", "needs at least one component row");
    size_t ns = 0;
    for (size_t j = 0; j < rows.size(); ++j) {
        const std::string p = "/model/" + std::to_string(j);
        array(rows[j], p);
        if (j == 0) ns = rows[j].size();
        if (rows[j].size() != ns || ns == 0) fail(p, "all rows need the same nonzero length");
    }
    m.model.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ns));
    for (size_t j = 0; j < rows.size(); ++j)
        for (size_t s = 0; s < ns; ++s)
            m.model(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(s)) =
                integer(rows[j][s], "/model/" + std::to_string(j) + "/" + std::to_string(s));

    m.log_beta = number_vector(member(doc, "", "log_beta"), "/log_beta");
    if (m.log_beta.size() != static_cast<Eigen::Index>(ns)) fail("/log_beta", "expected one value per species");
    if (doc.contains("components")) {
        const json& c = array(doc["components"], "/components");
        for (size_t i = 0; i < c.size(); ++i) m.component_names.push_back(text(c[i], "/components/" + std::to_string(i)));
        if (m.component_names.size() != rows.size()) fail("/components", "expected one name per model row");
    }
    if (doc.contains("species")) {
        const json& s = array(doc["species"], "/species");
        for (size_t i = 0; i < s.size(); ++i) m.species_names.push_back(text(s[i], "/species/" + std::to_string(i)));
        if (m.species_names.size() != ns) fail("/species", "expected one name per model column");
    }
    try {
        validate(m);
    } catch (const ModelError& e) {
        fail("/model", e.what());
    }

    const json& pr = member(doc, "", "protocol");
    TitrationProtocol& p = out.protocol;
    p.v0 = number(member(pr, "/protocol", "v0"), "/protocol/v0");
    if (!(p.v0 > 0)) fail("/protocol/v0", "expected a positive number");
    p.c0 = number_vector(member(pr, "/protocol", "c0"), "/protocol/c0");
    if (p.c0.size() != m.ncomp()) fail("/protocol/c0", "expected one value per component");
    p.v_added = number_vector(member(pr, "/protocol", "v_added"), "/protocol/v_added");
    if (p.v_added.size() == 0) fail("/protocol/v_added", "schedule is empty");
    for (Eigen::Index i = 0; i < p.v_added.size(); ++i) {
        if (p.v_added(i) < 0) fail("/protocol/v_added/" + std::to_string(i), "expected a number >= 0");
        if (i > 0 && p.v_added(i) < p.v_added(i - 1))
            fail("/protocol/v_added/" + std::to_string(i), "schedule must be non-decreasing");
    }
    const json& segs = array(member(pr, "/protocol", "segments"), "/protocol/segments");
    int expect = 0;
    for (size_t s = 0; s < segs.size(); ++s) {
        const std::string q = "/protocol/segments/" + std::to_string(s);
        TitrationSegment seg;
        seg.first = integer(member(segs[s], q, "first"), q + "/first");
        seg.last = integer(member(segs[s], q, "last"), q + "/last");
        if (seg.first != expect) fail(q + "/first", "expected " + std::to_string(expect));
        if (seg.last < seg.first) fail(q + "/last", "segment is empty");
        seg.c_added = number_vector(member(segs[s], q, "c_added"), q + "/c_added");
        if (seg.c_added.size() != m.ncomp()) fail(q + "/c_added", "expected one value per component");
        expect = seg.last + 1;
        p.segments.push_back(std::move(seg));
    }
    if (expect != p.v_added.size()) fail("/protocol/segments", "segments must cover every titration point");
    return out;
}

}  // namespace mcr
