// conexp: expand | solve | verify | check | transform
//
// Exit codes: 0 success or PASS, 1 FAIL or counterexamples found, 2 invalid configuration,
// 3 runtime failure (structure violation, divergence, ill-conditioned fit, solver failure).

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <openssl/evp.h>

#include "conexp/config.hpp"
#include "conexp/coordinates.hpp"
#include "conexp/numeric/verify.hpp"
#include "conexp/properties.hpp"
#include "conexp/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace conexp;
using config::Command;

namespace {

constexpr int kOk = 0, kFail = 1, kConfig = 2, kRuntime = 3;

struct Context {
    config::RunConfig rc;
    std::uint64_t seed = 1;
    int threads = 1;
    fs::path out;
    std::vector<std::string> outputs;

    std::ofstream open(const std::string& name) {
        outputs.push_back(name);
        std::ofstream f(out / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + (out / name).string());
        return f;
    }
    void write_json(const std::string& name, const json& j) { open(name) << j.dump(2) << '\n'; }
};

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

json versions() {
    std::ostringstream eigen, gmp, cli11, toml;
    eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
    gmp << __GNU_MP_VERSION << '.' << __GNU_MP_VERSION_MINOR << '.' << __GNU_MP_VERSION_PATCHLEVEL;
    cli11 << CLI11_VERSION_MAJOR << '.' << CLI11_VERSION_MINOR << '.' << CLI11_VERSION_PATCH;
    toml << TOML_LIB_MAJOR << '.' << TOML_LIB_MINOR << '.' << TOML_LIB_PATCH;
    return json{{"conexp", conexp::version},
                {"compiler", __VERSION__},
                {"eigen", eigen.str()},
                {"gmp", gmp.str()},
                {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                {"cli11", cli11.str()},
                {"tomlplusplus", toml.str()}};
}

std::string num(double v, int digits = 6) {
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    return os.str();
}

/// Console table sorted by mode, then exponent and log power; the CSV keeps storage order.
template <Scalar F>
void print_table(const Expansion<F>& e) {
    const Beta& b = e.beta();
    const double u = std::pow(b.value(), 1.0 / b.value());
    struct Row {
        int l;
        Parity p;
        double sigma;
        int m;
        double c;
    };
    std::vector<Row> rows;
    for (const auto& [key, c] : e.terms())
        rows.push_back({key.term.l, key.term.parity, key.term.exponent().value(b), key.term.m,
                        ScalarTraits<F>::value(c, b).real() * std::pow(u, key.u_power)});
    std::sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) {
        return std::tie(x.l, x.p, x.sigma, x.m) < std::tie(y.l, y.p, y.sigma, y.m);
    });
    std::cout << "exponent        log  l  parity  coefficient\n";
    for (const auto& r : rows)
        std::cout << std::left << std::setw(16) << num(r.sigma, 10) << std::setw(5) << r.m << std::setw(3) << r.l
                  << std::setw(8) << to_string(r.p) << num(r.c, 12) << '\n';
}

template <Scalar F>
int expand_as(Context& ctx) {
    const auto prob = config::build_problem<F>(*ctx.rc.problem);
    try {
        const auto [phi, trace] = run_bootstrap(prob, ctx.rc.problem->order);
        ctx.write_json("expansion.json", to_json(phi));
        auto csv = ctx.open("expansion.csv");
        write_csv_table(csv, phi);
        print_table(phi);
        std::cout << phi.terms().size() << " terms to order " << phi.order().str() << " after " << trace.steps.size()
                  << " bootstrap steps\n";
        return kOk;
    } catch (const RhsStructureViolation& e) {
        std::cerr << "RhsStructureViolation: term (a=" << e.term.a << ",k=" << e.term.k << ",m=" << e.term.m
                  << ",l=" << e.term.l << "," << to_string(e.term.parity) << ") is outside T_rhs\n";
        return kRuntime;
    }
}

int cmd_expand(Context& ctx) {
    return ctx.rc.problem->mode == config::Mode::Exact ? expand_as<RationalFunction>(ctx) : expand_as<double>(ctx);
}

int cmd_solve(Context& ctx) {
    using namespace numeric;
    const auto prob = config::build_problem<double>(*ctx.rc.problem);
    const auto& gc = *ctx.rc.grid;
    const PolarGrid g(prob.beta, gc.n_rho, gc.n_theta, gc.rho_min, gc.rho_max);
    NumericModel model{prob.lambda, sample(g, prob.h), {}};
    std::optional<PolarField> initial;
    std::optional<Expansion<double>> phi;
    if (ctx.rc.solve.boundary == config::SolveConfig::Boundary::Expansion) {
        phi = run_bootstrap(prob, ctx.rc.problem->order).first;
        for (int j = 0; j < g.n_theta(); ++j) model.dirichlet.push_back(phi->evaluate_real(g.rho_max(), g.theta(j)));
        initial = sample(g, *phi);
    } else {
        model.dirichlet.assign(g.n_theta(), ctx.rc.solve.boundary_value);
    }
    NewtonReport rep;
    json log{{"grid", {{"n_rho", gc.n_rho}, {"n_theta", gc.n_theta}, {"rho_min", gc.rho_min}, {"rho_max", gc.rho_max}}}};
    try {
        const PolarField u = solve_model(model, initial, ctx.rc.solver, &rep);
        log["converged"] = true;
        log["iterations"] = rep.iterations;
        log["residuals"] = rep.residuals;
        log["damping"] = rep.steps;
        if (phi)
            log["max_difference_to_expansion"] = max_abs_on(u - sample(g, *phi), 10 * gc.rho_min, gc.rho_max / 2);
        ctx.write_json("convergence.json", log);
        auto csv = ctx.open("field.csv");
        write_csv(csv, u);
        std::cout << "newton converged in " << rep.iterations << " iterations, residual " << rep.residuals.back() << '\n';
        return kOk;
    } catch (const NewtonDivergence& e) {
        log["converged"] = false;
        log["error"] = e.what();
        log["iterations"] = rep.iterations;
        log["residuals"] = rep.residuals;
        ctx.write_json("convergence.json", log);
        std::cerr << "NewtonDivergence: " << e.what() << '\n';
        return kRuntime;
    }
}

int cmd_verify(Context& ctx) {
    using namespace numeric;
    const auto prob = config::build_problem<double>(*ctx.rc.problem);
    VerifyOptions opt = ctx.rc.verify;
    opt.threads = ctx.threads;
    try {
        const VerifyResult r = run_verification(prob, opt);
        ctx.write_json("fit_report.json", to_json(r));
        std::ostringstream s;
        const auto line = [&](const std::string& what, bool ok) { s << (ok ? "PASS " : "FAIL ") << what << '\n'; };
        for (const auto& c : r.comparisons)
            line("coefficient l=" + std::to_string(c.l) + " rho^" + num(c.column.exponent(prob.beta)) + " fitted " +
                     num(c.column.fitted, 8) + " predicted " + num(*c.column.predicted, 8) + " rel.err " +
                     num(c.relative_error, 3) + " (tol " + num(c.tolerance) + ")",
                 c.pass);
        for (const auto& f : r.fits)
            if (f.parity == Parity::Cos &&
                std::find(opt.compared_modes.begin(), opt.compared_modes.end(), f.l) != opt.compared_modes.end())
                line("residual slope l=" + std::to_string(f.l) + " " + num(f.residual_slope, 4) + " (target " +
                         num(r.slope_target) + ")",
                     f.residual_slope >= r.slope_target);
        for (const auto& p : r.probes)
            line("probe k1=" + std::to_string(p.k1) + " k2=" + std::to_string(p.k2) + " slope " + num(p.slope, 4),
                 p.slope >= -0.05);
        for (const auto& c : r.controls)
            s << (c.indistinguishable ? "REJECTED " : "DETECTED ") << "injected odd column l=" << c.l
              << " |c|/SE = " << c.ratio << '\n';
        s << (r.pass ? "PASS" : "FAIL") << '\n';
        ctx.open("summary.txt") << s.str();
        std::cout << s.str();
        return r.pass ? kOk : kFail;
    } catch (const IllConditioned& e) {
        ctx.write_json("fit_report.json", json{{"pass", false}, {"error", "IllConditioned"}, {"message", e.what()},
                                               {"condition", std::isfinite(e.condition) ? json(e.condition) : json("inf")}});
        std::cerr << "IllConditioned: " << e.what() << '\n';
        return kRuntime;
    }
}

json report_json(const properties::SuiteReport& r) {
    json ex = json::array();
    for (const auto& c : r.examples) ex.push_back({{"beta", c.beta}, {"detail", c.detail}});
    return json{{"name", r.name}, {"checked", r.checked}, {"failures", r.failures}, {"counterexamples", ex}};
}

int cmd_check(Context& ctx) {
    const auto& cc = ctx.rc.check;
    const auto pred = cc.mutate ? properties::Predicates::mutated() : properties::Predicates{};
    gen::Rng rng(ctx.seed);
    const auto betas = properties::random_betas(rng, cc.betas);

    // Closure suites split over betas; chunks are merged in beta order.
    const int chunks = std::max(1, std::min<int>(ctx.threads, static_cast<int>(betas.size())));
    std::vector<std::future<std::vector<properties::SuiteReport>>> jobs;
    for (int c = 0; c < chunks; ++c) {
        std::vector<Beta> part;
        for (std::size_t i = c; i < betas.size(); i += chunks) part.push_back(betas[i]);
        jobs.push_back(std::async(chunks > 1 ? std::launch::async : std::launch::deferred,
                                  [part, &cc, &pred] { return properties::closure_suites(part, cc.max_index, pred); }));
    }
    std::vector<std::vector<properties::SuiteReport>> parts;
    for (auto& j : jobs) parts.push_back(j.get());
    // Each chunk keeps its first failures in its own beta order, so the first 20 overall in beta
    // order are among them and the listing does not depend on the thread count.
    std::vector<properties::SuiteReport> suites;
    for (const auto& s : parts.front()) suites.emplace_back(s.name);
    for (std::size_t s = 0; s < suites.size(); ++s) {
        for (const auto& p : parts) {
            suites[s].checked += p[s].checked;
            suites[s].failures += p[s].failures;
        }
        for (std::size_t i = 0; i < betas.size(); ++i)
            for (const auto& c : parts[i % chunks][s].examples)
                if (c.beta == betas[i].str() && suites[s].examples.size() < 20) suites[s].examples.push_back(c);
    }
    suites.push_back(properties::inversion_suite(rng, cc.inversions, cc.inversion_index, pred));
    suites.push_back(properties::log_identity_suite(betas, cc.log_k_max));
    for (auto& r : properties::bootstrap_suites(rng, cc.bootstrap_problems, pred)) suites.push_back(std::move(r));

    json report{{"seed", ctx.seed}, {"betas", json::array()}, {"suites", json::array()}};
    for (const Beta& b : betas) report["betas"].push_back(b.str());
    long long total = 0;
    for (const auto& s : suites) {
        report["suites"].push_back(report_json(s));
        total += s.failures;
        std::cout << (s.pass() ? "PASS " : "FAIL ") << s.name << ": " << s.checked << " checked, " << s.failures
                  << " counterexamples\n";
        for (const auto& c : s.examples) std::cout << "  beta=" << c.beta << " " << c.detail << '\n';
    }
    report["counterexamples"] = total;
    ctx.write_json("check_report.json", report);
    return total == 0 ? kOk : kFail;
}

json complex_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

json matrix_json(const Eigen::MatrixXcd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(complex_json(m(i, j)));
        rows.push_back(r);
    }
    return rows;
}

int cmd_transform(Context& ctx) {
    const auto& tc = *ctx.rc.transform;
    const double b = tc.beta.value();
    const LiftedChart chart = tc.c_beta ? LiftedChart(tc.base, b, *tc.c_beta) : LiftedChart(tc.base, b);
    std::vector<PolarPoint> points = tc.points;
    gen::Rng rng(ctx.seed);
    std::uniform_real_distribution<double> u(-1, 1);
    const PolarPoint& z0 = tc.base;
    for (int i = 0; i < tc.random_points; ++i) {
        std::vector<double> xi(z0.xi.size());
        for (std::size_t k = 0; k < xi.size(); ++k) xi[k] = z0.xi[k] + 0.9 * z0.rho * u(rng) / std::sqrt(double(xi.size()));
        points.emplace_back(z0.rho * std::pow(2.0, 0.95 * u(rng)), z0.theta + 0.095 * u(rng), xi);
    }
    json out{{"beta", tc.beta.str()}, {"chart_radius", chart.radius()}, {"points", json::array()}};
    int outside = 0;
    for (const auto& p : points) {
        const HoloPoint h = holo_from_polar(p, b);
        json j{{"polar", {{"rho", p.rho}, {"theta", p.theta}, {"xi", p.xi}}}, {"z1", complex_json(h.z1)},
               {"cone_distance_to_base", cone_distance(p, z0, b)}};
        if (chart.contains(p)) {
            const auto v = chart.scaled_lifted(p);
            json sv = json::array();
            for (const auto& c : v) sv.push_back(complex_json(c));
            const Eigen::MatrixXcd f = chart.frame_forward(p), g = chart.frame_backward(p);
            const double defect = (f * g - Eigen::MatrixXcd::Identity(f.rows(), f.cols())).cwiseAbs().maxCoeff();
            const auto lv = chart.lifted_vector(p), l0 = chart.lifted_vector(z0);
            double d2 = 0;
            for (std::size_t k = 0; k < lv.size(); ++k) d2 += std::norm(lv[k] - l0[k]);
            j["in_chart"] = true;
            j["lifted_v1"] = complex_json(chart.lifted(p));
            j["scaled_lifted"] = sv;
            j["lifted_euclidean_distance_to_base"] = std::sqrt(d2);
            j["frame_forward"] = matrix_json(f);
            j["frame_backward"] = matrix_json(g);
            j["frame_identity_defect"] = defect;
        } else {
            j["in_chart"] = false;
            ++outside;
        }
        out["points"].push_back(j);
    }
    ctx.write_json("transform.json", out);
    std::cout << points.size() << " points, " << outside << " outside the chart\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Formal expansions and numerical verification for Liouville-type equations on cones"};
    app.require_subcommand(1);
    std::string config_path, out_dir = "out";
    std::uint64_t seed = 1;
    int threads = 1;
    app.add_option("--config", config_path, "TOML or JSON configuration file");
    app.add_option("--seed", seed, "seed for every random choice")->capture_default_str();
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    const std::pair<const char*, const char*> subs[] = {
        {"expand", "bootstrap the formal expansion to the target order"},
        {"solve", "solve the model equation on a polar grid"},
        {"verify", "compare the numeric solution with the expansion"},
        {"check", "run the term-algebra and bootstrap property suites"},
        {"transform", "convert points between coordinate systems of a lifted chart"}};
    for (const auto& [name, help] : subs) app.add_subcommand(name, help)->fallthrough();
    CLI11_PARSE(app, argc, argv);

    Command cmd = Command::Expand;
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "solve") cmd = Command::Solve;
    else if (name == "verify") cmd = Command::Verify;
    else if (name == "check") cmd = Command::Check;
    else if (name == "transform") cmd = Command::Transform;

    Context ctx;
    ctx.seed = seed;
    ctx.threads = threads;
    ctx.out = out_dir;
    std::string text;
    int code = kOk;
    std::string error;
    try {
        json doc = json::object();
        if (!config_path.empty()) {
            text = config::read_file(config_path);
            doc = config::parse_document(text, config_path);
        } else if (cmd != Command::Check) {
            throw config::ConfigError("", "--config is required for " + name);
        }
        ctx.rc = config::parse_run_config(doc, cmd);
        fs::create_directories(ctx.out);
        switch (cmd) {
            case Command::Expand: code = cmd_expand(ctx); break;
            case Command::Solve: code = cmd_solve(ctx); break;
            case Command::Verify: code = cmd_verify(ctx); break;
            case Command::Check: code = cmd_check(ctx); break;
            case Command::Transform: code = cmd_transform(ctx); break;
        }
    } catch (const config::ConfigError& e) {
        error = std::string("config error: ") + e.what();
        code = kConfig;
    } catch (const std::exception& e) {
        error = std::string("error: ") + e.what();
        code = kRuntime;
    }
    if (!error.empty()) std::cerr << error << '\n';

    // Written for every run, including rejected configurations.
    json manifest{{"command", name},
                  {"config", config_path},
                  {"config_sha256", sha256_hex(text)},
                  {"seed", seed},
                  {"threads", threads},
                  {"exit_code", code},
                  {"outputs", ctx.outputs},
                  {"versions", versions()}};
    if (!error.empty()) manifest["error"] = error;
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    std::ofstream(ctx.out / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';
    return code;
}
