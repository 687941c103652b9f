#pragma once

// Run configuration: TOML or JSON documents, validated into typed bundles before any command
// runs. Every rejection names the offending field path.

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>
#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "conexp/bootstrap.hpp"
#include "conexp/coordinates.hpp"
#include "conexp/numeric/verify.hpp"
#include "conexp/serialize.hpp"

namespace conexp::config {

using nlohmann::json;

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string p, const std::string& msg)
        : std::runtime_error((p.empty() ? std::string("config") : p) + ": " + msg), path(std::move(p)) {}
    std::string path;
};

namespace detail {

inline json from_toml(const toml::node& n) {
    if (const auto* t = n.as_table()) {
        json j = json::object();
        for (const auto& [k, v] : *t) j[std::string(k.str())] = from_toml(v);
        return j;
    }
    if (const auto* a = n.as_array()) {
        json j = json::array();
        for (const auto& v : *a) j.push_back(from_toml(v));
        return j;
    }
    if (const auto* v = n.as_integer()) return v->get();
    if (const auto* v = n.as_floating_point()) return v->get();
    if (const auto* v = n.as_boolean()) return v->get();
    if (const auto* v = n.as_string()) return v->get();
    std::ostringstream os;  // dates and times are kept as text
    if (const auto* d = n.as_date()) os << d->get();
    else if (const auto* t = n.as_time()) os << t->get();
    else if (const auto* dt = n.as_date_time()) os << dt->get();
    return os.str();
}

inline std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

/// Typed access to one table; remembers which keys were read so leftovers can be rejected.
class Table {
public:
    Table(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_, "expected a table");
    }

    const std::string& path() const { return path_; }
    std::string at(const std::string& key) const { return join(path_, key); }
    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        used_.insert(key);
        if (!j_.contains(key)) throw ConfigError(at(key), "missing required field");
        return j_.at(key);
    }
    const json* find(const std::string& key) {
        used_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    int integer(const std::string& key, std::optional<int> dflt = std::nullopt) {
        const json* v = find(key);
        if (!v) {
            if (dflt) return *dflt;
            throw ConfigError(at(key), "missing required field");
        }
        if (!v->is_number_integer()) throw ConfigError(at(key), "expected an integer");
        return v->get<int>();
    }
    double number(const std::string& key, std::optional<double> dflt = std::nullopt) {
        const json* v = find(key);
        if (!v) {
            if (dflt) return *dflt;
            throw ConfigError(at(key), "missing required field");
        }
        if (!v->is_number()) throw ConfigError(at(key), "expected a number");
        return v->get<double>();
    }
    bool boolean(const std::string& key, bool dflt) {
        const json* v = find(key);
        if (!v) return dflt;
        if (!v->is_boolean()) throw ConfigError(at(key), "expected true or false");
        return v->get<bool>();
    }
    std::string string(const std::string& key, std::optional<std::string> dflt = std::nullopt) {
        const json* v = find(key);
        if (!v) {
            if (dflt) return *dflt;
            throw ConfigError(at(key), "missing required field");
        }
        if (!v->is_string()) throw ConfigError(at(key), "expected a string");
        return v->get<std::string>();
    }
    std::optional<Table> table(const std::string& key) {
        const json* v = find(key);
        if (!v) return std::nullopt;
        return Table(*v, at(key));
    }

    void reject_unknown() const {
        for (const auto& [k, v] : j_.items())
            if (!used_.count(k)) throw ConfigError(at(k), "unknown field");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

}  // namespace detail

/// Parses TOML text into the same JSON shape a JSON config would have.
inline json parse_toml(std::string_view text, const std::string& source = "config") {
    try {
        return detail::from_toml(toml::parse(text, source));
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << e.description() << " (line " << e.source().begin.line << ", column " << e.source().begin.column << ")";
        throw ConfigError("", os.str());
    }
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("", "cannot open " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

/// `.json` files are JSON, anything else is TOML.
inline json parse_document(const std::string& text, const std::filesystem::path& p) {
    if (p.extension() == ".json") {
        try {
            return json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError("", std::string("invalid JSON: ") + e.what());
        }
    }
    return parse_toml(text, p.string());
}

/// A coefficient as written: rational when the text is exact (integer or "p/q"), always numeric.
struct Value {
    double numeric = 0;
    std::optional<mpq_class> exact;
    std::string text;
};

inline Value parse_value(const json& j, const std::string& path) {
    Value v;
    if (j.is_number_integer()) {
        v.exact = mpq_class(j.get<long>());
        v.numeric = v.exact->get_d();
        v.text = std::to_string(j.get<long>());
    } else if (j.is_number()) {
        v.numeric = j.get<double>();
        v.text = j.dump();
    } else if (j.is_string()) {
        mpq_class q;
        std::string s = j.get<std::string>();
        if (q.set_str(s, 10) != 0 || q.get_den() == 0) throw ConfigError(path, "expected a number or a rational \"p/q\"");
        q.canonicalize();
        v.exact = q;
        v.numeric = q.get_d();
        v.text = s;
    } else {
        throw ConfigError(path, "expected a number or a rational \"p/q\"");
    }
    return v;
}

enum class Mode { Exact, Float };

struct HarmonicEntry {
    int l = 0;
    Parity parity = Parity::Cos;
    Value coeff;
};

struct TaylorEntry {
    int p = 0, q = 0;
    Value re, im;
};

struct ProblemConfig {
    Beta beta{1, 2};
    Mode mode = Mode::Float;
    Value lambda;
    std::vector<TaylorEntry> taylor;
    std::optional<json> h_expansion;  // serialized Expansion, used instead of taylor when present
    std::vector<HarmonicEntry> harmonic;
    Order order = Order::at(7);
};

struct GridConfig {
    int n_rho = 0, n_theta = 0;
    double rho_min = 0, rho_max = 0;
};

struct SolveConfig {
    enum class Boundary { Expansion, Constant } boundary = Boundary::Expansion;
    double boundary_value = 0;
};

struct CheckConfig {
    int max_index = 6;
    int betas = 50;
    int inversions = 1000;
    int inversion_index = 10;
    int log_k_max = 20;
    int bootstrap_problems = 100;
    bool mutate = false;
};

struct TransformConfig {
    Beta beta{1, 2};
    std::optional<double> c_beta;
    PolarPoint base;
    std::vector<PolarPoint> points;
    int random_points = 0;  // extra seeded points inside the chart
};

enum class Command { Expand, Solve, Verify, Check, Transform };

inline std::string to_string(Command c) {
    switch (c) {
        case Command::Expand: return "expand";
        case Command::Solve: return "solve";
        case Command::Verify: return "verify";
        case Command::Check: return "check";
        case Command::Transform: return "transform";
    }
    return "?";
}

struct RunConfig {
    Command command = Command::Expand;
    std::optional<ProblemConfig> problem;
    std::optional<GridConfig> grid;
    numeric::SolverOptions solver;
    SolveConfig solve;
    numeric::VerifyOptions verify;
    CheckConfig check;
    std::optional<TransformConfig> transform;
};

namespace detail {

inline Beta parse_beta(const Table& t, const json& j, const std::string& key) {
    if (!j.is_string()) throw ConfigError(t.at(key), "expected \"p/q\"");
    try {
        return Beta::parse(j.get<std::string>());
    } catch (const InvalidBeta& e) {
        throw ConfigError(t.at(key), e.what());
    }
}

inline Order parse_order(Table& t, const std::string& key, std::optional<Order> dflt) {
    const json* v = t.find(key);
    if (!v) {
        if (dflt) return *dflt;
        throw ConfigError(t.at(key), "missing required field");
    }
    if (v->is_number_integer()) return Order::at(v->get<int>());
    if (v->is_object()) {
        Table o(*v, t.at(key));
        const Order q = Order::at(o.integer("a"), o.integer("k", 0));
        o.reject_unknown();
        return q;
    }
    throw ConfigError(t.at(key), "expected an integer a or a table {a = .., k = ..} meaning a + k/beta");
}

inline Parity parse_parity_field(Table& t, const std::string& key) {
    const std::string s = t.string(key, "cos");
    if (s == "cos") return Parity::Cos;
    if (s == "sin") return Parity::Sin;
    throw ConfigError(t.at(key), "expected \"cos\" or \"sin\"");
}

inline void require_exact(const Value& v, Mode m, const std::string& path) {
    if (m == Mode::Exact && !v.exact)
        throw ConfigError(path, "exact mode needs an integer or a rational string such as \"1/10\"");
}

inline ProblemConfig parse_problem(Table t) {
    ProblemConfig p;
    p.beta = parse_beta(t, t.raw("beta"), "beta");
    const std::string mode = t.string("mode", "float");
    if (mode == "exact") p.mode = Mode::Exact;
    else if (mode != "float") throw ConfigError(t.at("mode"), "expected \"exact\" or \"float\"");
    p.lambda = parse_value(t.raw("lambda"), t.at("lambda"));
    require_exact(p.lambda, p.mode, t.at("lambda"));
    p.order = parse_order(t, "order", Order::at(7));
    if (p.order.e.value(p.beta) <= 0) throw ConfigError(t.at("order"), "target order must be positive");

    if (auto h = t.table("h")) {
        if (h->has("expansion") && h->has("taylor"))
            throw ConfigError(h->path(), "give either expansion or taylor, not both");
        if (const json* e = h->find("expansion")) {
            p.h_expansion = *e;
        } else if (const json* tl = h->find("taylor")) {
            if (!tl->is_array()) throw ConfigError(h->at("taylor"), "expected an array of {p, q, re, im}");
            for (std::size_t i = 0; i < tl->size(); ++i) {
                Table c((*tl)[i], h->at("taylor") + "[" + std::to_string(i) + "]");
                TaylorEntry te;
                te.p = c.integer("p");
                te.q = c.integer("q");
                if (te.p < 0 || te.q < 0) throw ConfigError(c.path(), "p and q must be nonnegative");
                te.re = parse_value(c.find("re") ? *c.find("re") : json(0), c.at("re"));
                te.im = parse_value(c.find("im") ? *c.find("im") : json(0), c.at("im"));
                require_exact(te.re, p.mode, c.at("re"));
                require_exact(te.im, p.mode, c.at("im"));
                c.reject_unknown();
                p.taylor.push_back(te);
            }
        }
        h->reject_unknown();
    }
    if (const json* hd = t.find("harmonic")) {
        if (!hd->is_array()) throw ConfigError(t.at("harmonic"), "expected an array of {l, parity, coeff}");
        for (std::size_t i = 0; i < hd->size(); ++i) {
            Table c((*hd)[i], t.at("harmonic") + "[" + std::to_string(i) + "]");
            HarmonicEntry e;
            e.l = c.integer("l");
            if (e.l < 0) throw ConfigError(c.at("l"), "must be nonnegative");
            e.parity = parse_parity_field(c, "parity");
            if (e.l == 0 && e.parity == Parity::Sin) throw ConfigError(c.at("parity"), "l = 0 has no sin mode");
            e.coeff = parse_value(c.raw("coeff"), c.at("coeff"));
            require_exact(e.coeff, p.mode, c.at("coeff"));
            c.reject_unknown();
            p.harmonic.push_back(e);
        }
    }
    t.reject_unknown();
    return p;
}

inline GridConfig parse_grid(Table t) {
    GridConfig g;
    g.n_rho = t.integer("n_rho");
    g.n_theta = t.integer("n_theta");
    g.rho_min = t.number("rho_min");
    g.rho_max = t.number("rho_max");
    if (g.n_rho < 8) throw ConfigError(t.at("n_rho"), "must be >= 8");
    if (g.n_theta < 8) throw ConfigError(t.at("n_theta"), "must be >= 8");
    if (!(g.rho_min > 0)) throw ConfigError(t.at("rho_min"), "must be positive");
    if (!(g.rho_max > g.rho_min)) throw ConfigError(t.at("rho_max"), "must exceed rho_min");
    if (g.rho_max > 0.5) throw ConfigError(t.at("rho_max"), "must be <= 0.5");
    t.reject_unknown();
    return g;
}

inline void parse_solver(Table t, numeric::SolverOptions& s) {
    const std::string scheme = t.string("theta_scheme", "spectral");
    if (scheme == "spectral") s.theta = numeric::ThetaScheme::Spectral;
    else if (scheme == "central2") s.theta = numeric::ThetaScheme::Central2;
    else throw ConfigError(t.at("theta_scheme"), "expected \"spectral\" or \"central2\"");
    s.newton_tol = t.number("newton_tol", s.newton_tol);
    s.newton_max_iter = t.integer("newton_max_iter", s.newton_max_iter);
    s.max_halvings = t.integer("max_halvings", s.max_halvings);
    s.linear_tol = t.number("linear_tol", s.linear_tol);
    s.refinement_steps = t.integer("refinement_steps", s.refinement_steps);
    if (!(s.newton_tol > 0)) throw ConfigError(t.at("newton_tol"), "must be positive");
    if (s.newton_max_iter < 1) throw ConfigError(t.at("newton_max_iter"), "must be >= 1");
    if (!(s.linear_tol > 0)) throw ConfigError(t.at("linear_tol"), "must be positive");
    t.reject_unknown();
}

inline void parse_verify(Table t, numeric::VerifyOptions& v) {
    v.levels = t.integer("levels", v.levels);
    if (v.levels < 1 || v.levels > 4) throw ConfigError(t.at("levels"), "must be between 1 and 4");
    if (const json* w = t.find("window_lo")) {
        if (!w->is_number()) throw ConfigError(t.at("window_lo"), "expected a number");
        v.window_lo = w->get<double>();
    }
    v.window_hi = t.number("window_hi", v.window_hi);
    v.basis_extra = t.integer("basis_extra", v.basis_extra);
    v.tail_order = t.integer("tail_order", v.tail_order);
    v.l_fit = t.integer("l_fit", v.l_fit);
    if (const json* m = t.find("compared_modes")) {
        if (!m->is_array()) throw ConfigError(t.at("compared_modes"), "expected an array of integers");
        v.compared_modes.clear();
        for (const auto& x : *m) {
            if (!x.is_number_integer() || x.get<int>() < 0)
                throw ConfigError(t.at("compared_modes"), "expected nonnegative integers");
            v.compared_modes.push_back(x.get<int>());
        }
    }
    v.tol_leading = t.number("tol_leading", v.tol_leading);
    v.tol_next = t.number("tol_next", v.tol_next);
    v.slope_margin = t.number("slope_margin", v.slope_margin);
    v.inject_odd = t.boolean("inject_odd", v.inject_odd);
    v.control_sigmas = t.number("control_sigmas", v.control_sigmas);
    v.probe = t.boolean("probe", v.probe);
    if (v.basis_extra < 0) throw ConfigError(t.at("basis_extra"), "must be nonnegative");
    if (v.l_fit < 0) throw ConfigError(t.at("l_fit"), "must be nonnegative");
    if (!(v.window_hi > 0)) throw ConfigError(t.at("window_hi"), "must be positive");
    t.reject_unknown();
}

inline void parse_check(Table t, CheckConfig& c) {
    c.max_index = t.integer("max_index", c.max_index);
    c.betas = t.integer("betas", c.betas);
    c.inversions = t.integer("inversions", c.inversions);
    c.inversion_index = t.integer("inversion_index", c.inversion_index);
    c.log_k_max = t.integer("log_k_max", c.log_k_max);
    c.bootstrap_problems = t.integer("bootstrap_problems", c.bootstrap_problems);
    c.mutate = t.boolean("mutate", c.mutate);
    const std::pair<const char*, int> counts[] = {{"max_index", c.max_index}, {"betas", c.betas},
                                                  {"inversions", c.inversions}, {"inversion_index", c.inversion_index},
                                                  {"log_k_max", c.log_k_max}, {"bootstrap_problems", c.bootstrap_problems}};
    for (const auto& [k, v] : counts)
        if (v < 0) throw ConfigError(t.at(k), "must be nonnegative");
    t.reject_unknown();
}

inline PolarPoint parse_point(Table t) {
    const double rho = t.number("rho");
    if (!(rho >= 0)) throw ConfigError(t.at("rho"), "must be nonnegative");
    std::vector<double> xi;
    if (const json* x = t.find("xi")) {
        if (!x->is_array() || x->size() % 2) throw ConfigError(t.at("xi"), "expected an even-length array of numbers");
        for (const auto& v : *x) {
            if (!v.is_number()) throw ConfigError(t.at("xi"), "expected numbers");
            xi.push_back(v.get<double>());
        }
    }
    PolarPoint p(rho, t.number("theta"), xi);
    t.reject_unknown();
    return p;
}

inline TransformConfig parse_transform(Table t, const std::optional<ProblemConfig>& problem) {
    TransformConfig c;
    if (const json* b = t.find("beta")) c.beta = parse_beta(t, *b, "beta");
    else if (problem) c.beta = problem->beta;
    else throw ConfigError(t.at("beta"), "missing required field (or give problem.beta)");
    if (const json* cb = t.find("c_beta")) {
        if (!cb->is_number() || !(cb->get<double>() > 0 && cb->get<double>() < 1))
            throw ConfigError(t.at("c_beta"), "expected a number in (0, 1)");
        c.c_beta = cb->get<double>();
    }
    auto base = t.table("base");
    if (!base) throw ConfigError(t.at("base"), "missing required field");
    c.base = parse_point(*base);
    if (!(c.base.rho > 0)) throw ConfigError(t.at("base.rho"), "must be positive");
    if (const json* pts = t.find("points")) {
        if (!pts->is_array()) throw ConfigError(t.at("points"), "expected an array of {rho, theta, xi}");
        for (std::size_t i = 0; i < pts->size(); ++i) {
            Table pt((*pts)[i], t.at("points") + "[" + std::to_string(i) + "]");
            c.points.push_back(parse_point(pt));
            if (c.points.back().xi.size() != c.base.xi.size())
                throw ConfigError(pt.at("xi"), "dimension differs from base.xi");
        }
    }
    c.random_points = t.integer("random_points", 0);
    if (c.random_points < 0) throw ConfigError(t.at("random_points"), "must be nonnegative");
    t.reject_unknown();
    return c;
}

}  // namespace detail

/// Validates `doc` for `cmd`. Sections a command does not use are still checked when present.
inline RunConfig parse_run_config(const json& doc, Command cmd) {
    detail::Table root(doc, "");
    RunConfig rc;
    rc.command = cmd;
    if (auto t = root.table("problem")) rc.problem = detail::parse_problem(*t);
    if (auto t = root.table("grid")) rc.grid = detail::parse_grid(*t);
    if (auto t = root.table("solver")) detail::parse_solver(*t, rc.solver);
    if (auto t = root.table("solve")) {
        const std::string b = t->string("boundary", "expansion");
        if (b == "expansion") rc.solve.boundary = SolveConfig::Boundary::Expansion;
        else if (b == "constant") rc.solve.boundary = SolveConfig::Boundary::Constant;
        else throw ConfigError(t->at("boundary"), "expected \"expansion\" or \"constant\"");
        rc.solve.boundary_value = t->number("boundary_value", 0.0);
        t->reject_unknown();
    }
    if (auto t = root.table("verify")) detail::parse_verify(*t, rc.verify);
    if (auto t = root.table("check")) detail::parse_check(*t, rc.check);
    if (auto t = root.table("transform")) rc.transform = detail::parse_transform(*t, rc.problem);
    root.reject_unknown();

    const bool needs_problem = cmd == Command::Expand || cmd == Command::Solve || cmd == Command::Verify;
    if (needs_problem && !rc.problem) throw ConfigError("problem", "missing required section");
    if (cmd == Command::Solve && !rc.grid) throw ConfigError("grid", "missing required section");
    if (cmd == Command::Transform && !rc.transform) throw ConfigError("transform", "missing required section");
    if (rc.problem && rc.problem->order.e.value(rc.problem->beta) <= 0)
        throw ConfigError("problem.order", "target order must be positive");

    rc.verify.q = rc.problem ? rc.problem->order : rc.verify.q;
    rc.verify.solver = rc.solver;
    if (rc.grid) {
        rc.verify.n_rho = rc.grid->n_rho;
        rc.verify.n_theta = rc.grid->n_theta;
        rc.verify.rho_min = rc.grid->rho_min;
        rc.verify.rho_max = rc.grid->rho_max;
    }
    if (cmd == Command::Verify && rc.verify.n_theta % 2)
        throw ConfigError("grid.n_theta", "verification uses the spectral theta scheme and needs an even n_theta");
    return rc;
}

namespace detail {

template <Scalar F>
F scalar_of(const Value& v) {
    if constexpr (ScalarTraits<F>::exact) {
        return RationalFunction(*v.exact);
    } else {
        return v.numeric;
    }
}

}  // namespace detail

/// ModelProblem in the requested scalar. Float problems accept every value; exact ones were
/// checked to be rational during validation.
template <Scalar F>
ModelProblem<F> build_problem(const ProblemConfig& p) {
    Expansion<F> h(p.beta);
    if (p.h_expansion) {
        try {
            h = expansion_from_json<F>(*p.h_expansion);
        } catch (const std::exception& e) {
            throw ConfigError("problem.h.expansion", e.what());
        }
        if (!(h.beta() == p.beta)) throw ConfigError("problem.h.expansion.beta", "differs from problem.beta");
    } else if (!p.taylor.empty()) {
        std::vector<std::pair<std::pair<int, int>, Complex<F>>> taylor;
        for (const auto& t : p.taylor)
            taylor.push_back({{t.p, t.q}, Complex<F>(detail::scalar_of<F>(t.re), detail::scalar_of<F>(t.im))});
        h = smooth_real_function<F>(p.beta, taylor);
    }
    std::vector<HarmonicDatum<F>> data;
    for (const auto& e : p.harmonic) data.push_back({e.l, e.parity, detail::scalar_of<F>(e.coeff)});
    return ModelProblem<F>{p.beta, detail::scalar_of<F>(p.lambda), h, data};
}

}  // namespace conexp::config
