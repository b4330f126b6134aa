// Command-line front end: one subcommand per library operation plus the full
// acceptance suite and a CSV grid emitter. Reports are JSON documents with
// one row per check; exit codes are 0 (pass), 1 (check failure), 2 (usage),
// 3 (domain/resolution error).

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "conflab/acceptance.hpp"
#include "conflab/boundary.hpp"
#include "conflab/common.hpp"
#include "conflab/conformal.hpp"
#include "conflab/fields.hpp"
#include "conflab/liouville.hpp"
#include "conflab/mobius.hpp"
#include "conflab/symfun.hpp"
#include "conflab/symmat.hpp"
#include "report.hpp"

namespace {

using json = nlohmann::json;

struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

struct OutputError : std::runtime_error {
    explicit OutputError(const std::string& what) : std::runtime_error(what) {}
};

Eigen::VectorXd parse_vector(const std::string& s) {
    std::vector<double> vals;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw UsageError("cannot parse '" + tok + "' as a number");
        }
        while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
        if (used != tok.size()) throw UsageError("cannot parse '" + tok + "' as a number");
        vals.push_back(v);
    }
    if (vals.empty()) throw UsageError("empty vector literal");
    Eigen::VectorXd out(static_cast<int>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) out[static_cast<int>(i)] = vals[i];
    return out;
}

// Accepts "<c>I" (scaled identity, needs the expected dimension) or a
// comma-separated upper triangle whose length determines the dimension.
conflab::SymMatrix parse_matrix(const std::string& s, int expected_dim) {
    if (!s.empty() && s.back() == 'I') {
        const std::string prefix = s.substr(0, s.size() - 1);
        double c = 1.0;
        if (!prefix.empty()) {
            std::size_t used = 0;
            try {
                c = std::stod(prefix, &used);
            } catch (const std::exception&) {
                throw UsageError("cannot parse matrix shorthand '" + s + "'");
            }
            if (used != prefix.size()) throw UsageError("cannot parse matrix shorthand '" + s + "'");
        }
        if (expected_dim < 1)
            throw UsageError("matrix shorthand '" + s + "' needs a dimension from --n");
        return conflab::SymMatrix::scaled_identity(expected_dim, c);
    }
    const Eigen::VectorXd packed = parse_vector(s);
    const int cnt = static_cast<int>(packed.size());
    int m = 0;
    while (m * (m + 1) / 2 < cnt) ++m;
    if (m * (m + 1) / 2 != cnt)
        throw UsageError("upper-triangle literal has " + std::to_string(cnt) +
                         " entries, not a triangular number");
    if (expected_dim > 0 && m != expected_dim)
        throw UsageError("matrix literal is " + std::to_string(m) + "x" + std::to_string(m) +
                         " but the command expects dimension " + std::to_string(expected_dim));
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(m, m);
    int idx = 0;
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
            dense(i, j) = packed[idx];
            dense(j, i) = packed[idx];
            ++idx;
        }
    return conflab::SymMatrix::from_dense(dense);
}

struct FieldOpts {
    std::string expr;
    double b = std::numeric_limits<double>::quiet_NaN();
    std::string center;
    double cst = std::numeric_limits<double>::quiet_NaN();
};

void add_field_flags(CLI::App* sub, FieldOpts& fo) {
    sub->add_option("--expr", fo.expr, "expression factor in x1..xn (requires --n)");
    sub->add_option("--b", fo.b, "model profile concentration (pairs with --center)");
    sub->add_option("--center", fo.center, "model profile center, comma-separated");
    sub->add_option("--const", fo.cst, "constant factor value (requires --n)");
}

// Builds the field and settles the dimension (inferring it from --center when
// the profile form is used).
conflab::fields::ScalarField make_field(const FieldOpts& fo, int& n) {
    const int modes = static_cast<int>(!fo.expr.empty()) + static_cast<int>(!std::isnan(fo.b)) +
                      static_cast<int>(!std::isnan(fo.cst));
    if (modes != 1)
        throw UsageError("specify exactly one of --expr, --b/--center, --const");
    if (!fo.expr.empty()) {
        if (n < 3) throw UsageError("--expr requires --n >= 3");
        return conflab::fields::parse_field(fo.expr, n);
    }
    if (!std::isnan(fo.b)) {
        if (fo.center.empty()) throw UsageError("--b requires --center");
        const Eigen::VectorXd c = parse_vector(fo.center);
        if (n > 0 && n != static_cast<int>(c.size()))
            throw UsageError("--n disagrees with the --center dimension");
        n = static_cast<int>(c.size());
        return conflab::fields::bubble_field({n, fo.b, c});
    }
    if (n < 3) throw UsageError("--const requires --n >= 3");
    return conflab::fields::constant_field(n, fo.cst);
}

void require_nk(int n, int k) {
    if (k < 1 || n < 2 * k)
        throw UsageError("requires k >= 1 and n >= 2k (got n=" + std::to_string(n) +
                         ", k=" + std::to_string(k) + ")");
}

json field_config(const FieldOpts& fo) {
    json j;
    if (!fo.expr.empty()) j["expr"] = fo.expr;
    if (!std::isnan(fo.b)) {
        j["b"] = fo.b;
        j["center"] = fo.center;
    }
    if (!std::isnan(fo.cst)) j["const"] = fo.cst;
    return j;
}

conflab::CheckReport value_row(const std::string& name, double v, const std::string& note = "") {
    conflab::CheckReport c;
    c.name = name;
    c.values = {v};
    c.informational = true;
    c.pass = true;
    c.note = note;
    return c;
}

std::vector<Eigen::VectorXd> parse_points(const std::vector<std::string>& raw, int n) {
    std::vector<Eigen::VectorXd> pts;
    for (const auto& s : raw) {
        Eigen::VectorXd x = parse_vector(s);
        if (static_cast<int>(x.size()) != n)
            throw UsageError("point '" + s + "' does not have dimension " + std::to_string(n));
        pts.push_back(std::move(x));
    }
    return pts;
}

int emit_document(const json& doc, const std::string& out_path) {
    const std::string text = doc.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
        return 0;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) return -1;
    f << text;
    f.flush();
    return f.good() ? 0 : -1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"verification toolkit for fully nonlinear conformal boundary curvature"};
    app.require_subcommand(1);

    int n = 0, k = 0;
    unsigned seed = 0;
    std::string out_path;
    app.add_option("--out", out_path, "write the JSON report to this path instead of stdout");

    // sigma
    auto* sc_sigma = app.add_subcommand("sigma", "sigma_k of a matrix or of a factor at a point");
    FieldOpts sigma_field;
    std::string sigma_a, sigma_x;
    sc_sigma->add_option("--a", sigma_a, "symmetric matrix ('<c>I' or upper triangle)");
    sc_sigma->add_option("--n", n, "dimension");
    sc_sigma->add_option("--k", k, "degree")->required();
    sc_sigma->add_option("--x", sigma_x, "evaluation point (field form)");
    add_field_flags(sc_sigma, sigma_field);

    // schouten
    auto* sc_schouten = app.add_subcommand("schouten", "curvature tensor of a factor at a point");
    FieldOpts schouten_field;
    std::string schouten_x;
    sc_schouten->add_option("--n", n, "dimension");
    sc_schouten->add_option("--k", k, "highest sigma degree to report")->default_val(1);
    sc_schouten->add_option("--x", schouten_x, "evaluation point")->required();
    add_field_flags(sc_schouten, schouten_field);

    // bk
    auto* sc_bk = app.add_subcommand("bk", "boundary curvature from (A_T, h) or from a factor");
    sc_bk->set_help_flag("--help", "print help");
    FieldOpts bk_field;
    std::string bk_at, bk_x;
    double bk_h = std::numeric_limits<double>::quiet_NaN();
    sc_bk->add_option("--n", n, "dimension")->required();
    sc_bk->add_option("--k", k, "order")->required();
    sc_bk->add_option("--at", bk_at, "tangential tensor ('<c>I' or upper triangle)");
    sc_bk->add_option("--h", bk_h, "mean curvature (with --at)");
    sc_bk->add_option("--x", bk_x, "boundary point (field form)");
    add_field_flags(sc_bk, bk_field);

    // cone
    auto* sc_cone = app.add_subcommand("cone", "cone membership of the curvature along points");
    FieldOpts cone_field;
    std::vector<std::string> cone_x;
    int cone_samples = 20;
    sc_cone->add_option("--n", n, "dimension");
    sc_cone->add_option("--k", k, "cone order")->required();
    sc_cone->add_option("--x", cone_x, "interior points (repeatable)");
    sc_cone->add_option("--samples", cone_samples, "seeded interior samples when no --x given");
    sc_cone->add_option("--seed", seed, "sampling seed");
    add_field_flags(sc_cone, cone_field);

    // bubble-certify
    auto* sc_cert = app.add_subcommand("bubble-certify", "certify a model profile");
    double cert_b = 0.0;
    std::string cert_center;
    int cert_samples = 50;
    sc_cert->add_option("--n", n, "dimension");
    sc_cert->add_option("--k", k, "order")->required();
    sc_cert->add_option("--b", cert_b, "concentration")->required();
    sc_cert->add_option("--center", cert_center, "profile center")->required();
    sc_cert->add_option("--samples", cert_samples, "sample count per region");
    sc_cert->add_option("--seed", seed, "sampling seed");

    // solve-h
    auto* sc_solveh = app.add_subcommand("solve-h", "invert the boundary curvature in h");
    std::string solveh_mode = "tangential", solveh_mat;
    double solveh_c0 = 0.0;
    sc_solveh->add_option("--mode", solveh_mode, "tangential | fixedm")
        ->check(CLI::IsMember({"tangential", "fixedm"}));
    sc_solveh->add_option("--mat", solveh_mat, "A_T (tangential) or M (fixedm)")->required();
    sc_solveh->add_option("--n", n, "dimension")->required();
    sc_solveh->add_option("--k", k, "order")->required();
    sc_solveh->add_option("--c0", solveh_c0, "target boundary constant")->required();

    // solve-family
    auto* sc_family = app.add_subcommand("solve-family", "profile family for a boundary constant");
    double family_c0 = 0.0;
    sc_family->add_option("--n", n, "dimension")->required();
    sc_family->add_option("--k", k, "order")->required();
    sc_family->add_option("--c0", family_c0, "target boundary constant")->required();
    sc_family->add_option("--seed", seed, "round-trip sampling seed");

    // kelvin-check
    auto* sc_kelvin = app.add_subcommand("kelvin-check", "reflection fixed point at a boundary point");
    FieldOpts kelvin_field_opts;
    std::string kelvin_x;
    conflab::mobius::GridSpec grid;
    sc_kelvin->add_option("--n", n, "dimension");
    sc_kelvin->add_option("--x", kelvin_x, "boundary point")->required();
    sc_kelvin->add_option("--shells", grid.shells, "radial shells");
    sc_kelvin->add_option("--r-far-factor", grid.r_far_factor, "far-field factor");
    sc_kelvin->add_option("--angular", grid.angular, "angular samples per axis pair");
    sc_kelvin->add_option("--seed", seed, "direction seed");
    add_field_flags(sc_kelvin, kelvin_field_opts);

    // ball-check
    auto* sc_ball = app.add_subcommand("ball-check", "ball version of a certified profile");
    double ball_b = 0.0, ball_d = 0.5;
    std::string ball_center;
    int ball_samples = 100;
    sc_ball->add_option("--n", n, "dimension");
    sc_ball->add_option("--k", k, "order")->required();
    sc_ball->add_option("--b", ball_b, "concentration")->required();
    sc_ball->add_option("--center", ball_center, "profile center")->required();
    sc_ball->add_option("--d", ball_d, "half distance to the sphere center");
    sc_ball->add_option("--samples", ball_samples, "sample count");
    sc_ball->add_option("--seed", seed, "sampling seed");

    // lambda-bar
    auto* sc_lb = app.add_subcommand("lambda-bar", "moving-spheres critical radius");
    FieldOpts lb_field;
    std::string lb_x;
    sc_lb->add_option("--n", n, "dimension");
    sc_lb->add_option("--x", lb_x, "boundary point")->required();
    sc_lb->add_option("--shells", grid.shells, "radial shells");
    sc_lb->add_option("--r-far-factor", grid.r_far_factor, "far-field factor");
    sc_lb->add_option("--angular", grid.angular, "angular samples per axis pair");
    sc_lb->add_option("--seed", seed, "direction seed");
    add_field_flags(sc_lb, lb_field);

    // lemma41
    auto* sc_lem = app.add_subcommand("lemma41", "radius-mass identity at boundary points");
    FieldOpts lem_field;
    std::vector<std::string> lem_x;
    sc_lem->add_option("--n", n, "dimension");
    sc_lem->add_option("--x", lem_x, "boundary points (repeatable)")->required();
    sc_lem->add_option("--shells", grid.shells, "radial shells");
    sc_lem->add_option("--r-far-factor", grid.r_far_factor, "far-field factor");
    sc_lem->add_option("--angular", grid.angular, "angular samples per axis pair");
    sc_lem->add_option("--seed", seed, "direction seed");
    add_field_flags(sc_lem, lem_field);

    // constraint-report
    auto* sc_cr = app.add_subcommand("constraint-report", "displayed-constraint reconciliation");
    sc_cr->set_help_flag("--help", "print help");
    double cr_h = 0.0;
    sc_cr->add_option("--n", n, "dimension")->required();
    sc_cr->add_option("--k", k, "order")->required();
    sc_cr->add_option("--h", cr_h, "mean curvature")->required();

    // suite
    auto* sc_suite = app.add_subcommand("suite", "run every acceptance criterion");
    sc_suite->add_option("--seed", seed, "suite seed");

    // emit-grid
    auto* sc_grid = app.add_subcommand("emit-grid", "CSV of a quantity over a 2-D slice");
    FieldOpts grid_field;
    std::string grid_quantity, grid_axes, grid_min, grid_max, grid_count, grid_base;
    sc_grid->add_option("--n", n, "dimension");
    sc_grid->add_option("--k", k, "order for sigma-k / bk-boundary");
    sc_grid->add_option("--quantity", grid_quantity, "u | sigma-k | bk-boundary")
        ->required()
        ->check(CLI::IsMember({"u", "sigma-k", "bk-boundary"}));
    sc_grid->add_option("--axes", grid_axes, "two 1-based coordinate axes, e.g. 1,2")->required();
    sc_grid->add_option("--min", grid_min, "axis minima, e.g. -2,-2")->required();
    sc_grid->add_option("--max", grid_max, "axis maxima")->required();
    sc_grid->add_option("--count", grid_count, "axis sample counts, e.g. 101,101")->required();
    sc_grid->add_option("--base", grid_base, "base point for the remaining coordinates");
    add_field_flags(sc_grid, grid_field);

    for (auto* sub : app.get_subcommands(nullptr)) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const auto t0 = std::chrono::steady_clock::now();
    auto wall_ms = [&]() {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    };

    json config;
    conflab::report::ReportDocument doc;
    grid.seed = seed;

    try {
        if (app.got_subcommand(sc_sigma)) {
            config["command"] = "sigma";
            config["k"] = k;
            if (!sigma_a.empty()) {
                config["a"] = sigma_a;
                if (n > 0) config["n"] = n;
                const auto A = parse_matrix(sigma_a, n);
                doc.checks.push_back(value_row("sigma-k", conflab::symfun::sigma(A, k),
                                               "matrix argument"));
            } else {
                if (sigma_x.empty()) throw UsageError("field form needs --x");
                config["n"] = n;
                config.update(field_config(sigma_field));
                const auto u = make_field(sigma_field, n);
                const Eigen::VectorXd x = parse_vector(sigma_x);
                if (static_cast<int>(x.size()) != n) throw UsageError("--x has the wrong dimension");
                config["x"] = sigma_x;
                doc.checks.push_back(
                    value_row("sigma-k", conflab::conformal::sigma_k_curvature(u, x, k)));
            }
        } else if (app.got_subcommand(sc_schouten)) {
            config["command"] = "schouten";
            config.update(field_config(schouten_field));
            const auto u = make_field(schouten_field, n);
            config["n"] = n;
            config["x"] = schouten_x;
            config["k"] = k;
            const Eigen::VectorXd x = parse_vector(schouten_x);
            if (static_cast<int>(x.size()) != n) throw UsageError("--x has the wrong dimension");
            const auto cp = conflab::conformal::curvature_point(u, x, k);
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    std::ostringstream name;
                    name << "A[" << i << "][" << j << "]";
                    doc.checks.push_back(value_row(name.str(), cp.schouten_tensor(i, j)));
                }
            for (std::size_t s = 0; s < cp.sigmas.size(); ++s)
                doc.checks.push_back(
                    value_row("sigma-" + std::to_string(s), cp.sigmas[s]));
            doc.checks.push_back(value_row("cone", static_cast<double>(cp.cone)));
        } else if (app.got_subcommand(sc_bk)) {
            config["command"] = "bk";
            config["n"] = n;
            config["k"] = k;
            require_nk(n, k);
            if (!bk_at.empty()) {
                if (std::isnan(bk_h)) throw UsageError("--at needs --h");
                config["at"] = bk_at;
                config["h"] = bk_h;
                const auto at = parse_matrix(bk_at, n - 1);
                doc.checks.push_back(
                    value_row("bk", conflab::boundary::bk_umbilic(n, k, at, bk_h)));
            } else {
                if (bk_x.empty()) throw UsageError("field form needs --x");
                config.update(field_config(bk_field));
                const auto u = make_field(bk_field, n);
                const Eigen::VectorXd x = parse_vector(bk_x);
                if (static_cast<int>(x.size()) != n) throw UsageError("--x has the wrong dimension");
                config["x"] = bk_x;
                doc.checks.push_back(value_row("bk", conflab::boundary::bk_of_field(u, x, k)));
            }
        } else if (app.got_subcommand(sc_cone)) {
            config["command"] = "cone";
            config["k"] = k;
            config["seed"] = seed;
            config.update(field_config(cone_field));
            const auto u = make_field(cone_field, n);
            config["n"] = n;
            std::vector<Eigen::VectorXd> pts;
            if (!cone_x.empty()) {
                pts = parse_points(cone_x, n);
                config["points"] = cone_x;
            } else {
                std::mt19937 rng(seed);
                std::uniform_real_distribution<double> off(-1.5, 1.5);
                std::uniform_real_distribution<double> depth(0.05, 2.0);
                for (int i = 0; i < cone_samples; ++i) {
                    Eigen::VectorXd x(n);
                    for (int j = 0; j + 1 < n; ++j) x[j] = off(rng);
                    x[n - 1] = depth(rng);
                    pts.push_back(x);
                }
                config["samples"] = cone_samples;
            }
            doc.checks.push_back(conflab::conformal::cone_along(u, pts, k));
        } else if (app.got_subcommand(sc_cert)) {
            config["command"] = "bubble-certify";
            config["k"] = k;
            config["b"] = cert_b;
            config["center"] = cert_center;
            config["samples"] = cert_samples;
            config["seed"] = seed;
            const Eigen::VectorXd center = parse_vector(cert_center);
            const int dim = static_cast<int>(center.size());
            if (n > 0 && n != dim) throw UsageError("--n disagrees with the --center dimension");
            config["n"] = dim;
            require_nk(dim, k);
            const auto cert =
                conflab::liouville::certify_bubble({dim, cert_b, center}, k, cert_samples, seed);
            conflab::CheckReport row;
            row.name = "sigma-err";
            row.values = {cert.sigma_err};
            row.tol = conflab::liouville::kSigmaTol;
            row.abs_err = cert.sigma_err;
            row.pass = cert.sigma_err <= row.tol;
            doc.checks.push_back(row);
            row = {};
            row.name = "tangential-err";
            row.values = {cert.AT_err};
            row.tol = conflab::liouville::kTangentialTol;
            row.abs_err = cert.AT_err;
            row.pass = cert.AT_err <= row.tol;
            doc.checks.push_back(row);
            row = {};
            row.name = "mean-curvature-err";
            row.values = {cert.h_err};
            row.tol = conflab::liouville::kMeanCurvTol;
            row.abs_err = cert.h_err;
            row.pass = cert.h_err <= row.tol;
            doc.checks.push_back(row);
            row = {};
            row.name = "bk-spread";
            row.values = {cert.bk_spread};
            row.tol = conflab::liouville::kSpreadTol;
            row.abs_err = cert.bk_spread;
            row.pass = cert.bk_spread <= row.tol;
            doc.checks.push_back(row);
            doc.checks.push_back(value_row("c0", cert.c0, "mean boundary curvature"));
            doc.checks.push_back(value_row("h", cert.h, "measured mean curvature"));
        } else if (app.got_subcommand(sc_solveh)) {
            config["command"] = "solve-h";
            config["mode"] = solveh_mode;
            config["mat"] = solveh_mat;
            config["n"] = n;
            config["k"] = k;
            config["c0"] = solveh_c0;
            require_nk(n, k);
            const auto mat = parse_matrix(solveh_mat, n - 1);
            const auto mode = solveh_mode == "tangential"
                                  ? conflab::boundary::SolveHMode::FixedTangential
                                  : conflab::boundary::SolveHMode::FixedM;
            doc.checks.push_back(
                value_row("h", conflab::boundary::solve_h(mode, mat, n, k, solveh_c0)));
        } else if (app.got_subcommand(sc_family)) {
            config["command"] = "solve-family";
            config["n"] = n;
            config["k"] = k;
            config["c0"] = family_c0;
            config["seed"] = seed;
            require_nk(n, k);
            const auto fam = conflab::liouville::solve_family_for_c0(n, k, family_c0);
            doc.checks.push_back(value_row("h", fam.h, fam.description));
            doc.checks.push_back(value_row("b", fam.b, "canonical member"));
            doc.checks.push_back(value_row("xbar-n", fam.xbar_n, "canonical member"));
            Eigen::VectorXd center = Eigen::VectorXd::Zero(n);
            center[n - 1] = fam.xbar_n;
            const auto cert = conflab::liouville::certify_bubble({n, fam.b, center}, k, 20, seed);
            conflab::CheckReport rt;
            rt.name = "round-trip-c0";
            rt.values = {cert.c0};
            rt.references = {family_c0};
            rt.abs_err = std::abs(cert.c0 - family_c0);
            rt.tol = 1e-8 * family_c0;
            rt.pass = cert.pass && rt.abs_err <= rt.tol;
            doc.checks.push_back(rt);
        } else if (app.got_subcommand(sc_kelvin)) {
            config["command"] = "kelvin-check";
            config.update(field_config(kelvin_field_opts));
            const auto u = make_field(kelvin_field_opts, n);
            config["n"] = n;
            config["x"] = kelvin_x;
            config["grid"] = {{"shells", grid.shells},
                              {"r_far_factor", grid.r_far_factor},
                              {"angular", grid.angular},
                              {"seed", grid.seed}};
            const Eigen::VectorXd x = parse_vector(kelvin_x);
            if (static_cast<int>(x.size()) != n) throw UsageError("--x has the wrong dimension");
            doc.checks.push_back(conflab::mobius::verify_kelvin_fixed_point(u, x, grid));
        } else if (app.got_subcommand(sc_ball)) {
            config["command"] = "ball-check";
            config["k"] = k;
            config["b"] = ball_b;
            config["center"] = ball_center;
            config["d"] = ball_d;
            config["samples"] = ball_samples;
            config["seed"] = seed;
            const Eigen::VectorXd center = parse_vector(ball_center);
            const int dim = static_cast<int>(center.size());
            if (n > 0 && n != dim) throw UsageError("--n disagrees with the --center dimension");
            config["n"] = dim;
            require_nk(dim, k);
            const auto rep = conflab::liouville::verify_corollary_ball({dim, ball_b, center}, k,
                                                                       ball_d, ball_samples, seed);
            conflab::CheckReport row;
            row.name = "ball-sigma";
            row.values = {rep.values.at(0)};
            row.tol = 1e-6;
            row.abs_err = rep.values.at(0);
            row.pass = rep.values.at(0) <= row.tol;
            row.note = rep.note;
            doc.checks.push_back(row);
            row = {};
            row.name = "ball-boundary-constancy";
            row.values = {rep.values.at(1)};
            row.tol = 1e-8;
            row.abs_err = rep.values.at(1);
            row.pass = rep.values.at(1) <= row.tol;
            doc.checks.push_back(row);
            row = {};
            row.name = "ball-profile-fit";
            row.values = {rep.values.at(2)};
            row.tol = 1e-8;
            row.abs_err = rep.values.at(2);
            row.pass = rep.values.at(2) <= row.tol;
            doc.checks.push_back(row);
        } else if (app.got_subcommand(sc_lb)) {
            config["command"] = "lambda-bar";
            config.update(field_config(lb_field));
            const auto u = make_field(lb_field, n);
            config["n"] = n;
            config["x"] = lb_x;
            config["grid"] = {{"shells", grid.shells},
                              {"r_far_factor", grid.r_far_factor},
                              {"angular", grid.angular},
                              {"seed", grid.seed}};
            const Eigen::VectorXd x = parse_vector(lb_x);
            if (static_cast<int>(x.size()) != n) throw UsageError("--x has the wrong dimension");
            const auto res = conflab::mobius::lambda_bar(u, x, grid);
            std::ostringstream note;
            note << "certified at relative offset " << res.certificate.delta;
            doc.checks.push_back(value_row("lambda-bar", res.lambda_bar, note.str()));
            doc.checks.push_back(value_row("margin-below", res.certificate.margin_below));
            doc.checks.push_back(
                value_row("failure-above", res.certificate.has_failure_above ? 1.0 : 0.0));
        } else if (app.got_subcommand(sc_lem)) {
            config["command"] = "lemma41";
            config.update(field_config(lem_field));
            const auto u = make_field(lem_field, n);
            config["n"] = n;
            config["points"] = lem_x;
            config["grid"] = {{"shells", grid.shells},
                              {"r_far_factor", grid.r_far_factor},
                              {"angular", grid.angular},
                              {"seed", grid.seed}};
            const auto pts = parse_points(lem_x, n);
            doc.checks.push_back(conflab::mobius::verify_lemma41(u, pts, grid));
        } else if (app.got_subcommand(sc_cr)) {
            config["command"] = "constraint-report";
            config["n"] = n;
            config["k"] = k;
            config["h"] = cr_h;
            require_nk(n, k);
            for (auto& c : conflab::liouville::theorem_constraint_report(n, k, cr_h).to_checks())
                doc.checks.push_back(std::move(c));
        } else if (app.got_subcommand(sc_suite)) {
            config["command"] = "suite";
            config["seed"] = seed;
            for (const auto& r : conflab::acceptance::run_all(seed)) {
                conflab::CheckReport c;
                std::ostringstream name;
                name << "criterion-" << (r.index < 10 ? "0" : "") << r.index << "-" << r.name;
                c.name = name.str();
                c.values = {r.worst};
                c.abs_err = r.worst;
                c.tol = r.tol;
                c.pass = r.pass;
                c.note = r.detail;
                doc.checks.push_back(std::move(c));
            }
        } else if (app.got_subcommand(sc_grid)) {
            config["command"] = "emit-grid";
            config["quantity"] = grid_quantity;
            config.update(field_config(grid_field));
            const auto u = make_field(grid_field, n);
            config["n"] = n;
            if (out_path.empty()) throw UsageError("emit-grid requires --out for the CSV path");

            const Eigen::VectorXd axes_v = parse_vector(grid_axes);
            const Eigen::VectorXd min_v = parse_vector(grid_min);
            const Eigen::VectorXd max_v = parse_vector(grid_max);
            const Eigen::VectorXd count_v = parse_vector(grid_count);
            if (axes_v.size() != 2 || min_v.size() != 2 || max_v.size() != 2 ||
                count_v.size() != 2)
                throw UsageError("--axes/--min/--max/--count each take exactly two entries");
            const int a0 = static_cast<int>(axes_v[0]), a1 = static_cast<int>(axes_v[1]);
            if (a0 < 1 || a0 > n || a1 < 1 || a1 > n || a0 == a1)
                throw UsageError("--axes must name two distinct coordinates in 1.." +
                                 std::to_string(n));
            const int c0 = static_cast<int>(count_v[0]), c1 = static_cast<int>(count_v[1]);
            if (c0 < 1 || c1 < 1) throw UsageError("--count entries must be at least 1");
            Eigen::VectorXd base = Eigen::VectorXd::Zero(n);
            if (!grid_base.empty()) {
                base = parse_vector(grid_base);
                if (static_cast<int>(base.size()) != n)
                    throw UsageError("--base has the wrong dimension");
            }
            config["axes"] = grid_axes;
            config["min"] = grid_min;
            config["max"] = grid_max;
            config["count"] = grid_count;
            config["out"] = out_path;

            if (grid_quantity != "u") require_nk(n, k);
            if (grid_quantity == "bk-boundary") {
                if (a0 == n || a1 == n || base[n - 1] != 0.0)
                    throw UsageError("bk-boundary grids must stay on the boundary hyperplane");
            }

            std::FILE* f = std::fopen(out_path.c_str(), "w");
            if (!f) throw OutputError("cannot open '" + out_path + "' for writing");
            for (int i = 0; i < n; ++i) std::fprintf(f, "x%d,", i + 1);
            std::fprintf(f, "value\n");
            long rows = 0;
            for (int i = 0; i < c0; ++i) {
                const double v0 =
                    c0 == 1 ? min_v[0] : min_v[0] + (max_v[0] - min_v[0]) * i / (c0 - 1);
                for (int j = 0; j < c1; ++j) {
                    const double v1 =
                        c1 == 1 ? min_v[1] : min_v[1] + (max_v[1] - min_v[1]) * j / (c1 - 1);
                    Eigen::VectorXd x = base;
                    x[a0 - 1] = v0;
                    x[a1 - 1] = v1;
                    double val = 0.0;
                    if (grid_quantity == "u")
                        val = u.value(x);
                    else if (grid_quantity == "sigma-k")
                        val = conflab::conformal::sigma_k_curvature(u, x, k);
                    else
                        val = conflab::boundary::bk_of_field(u, x, k);
                    for (int c = 0; c < n; ++c) std::fprintf(f, "%.17g,", x[c]);
                    std::fprintf(f, "%.17g\n", val);
                    ++rows;
                }
            }
            const bool bad = std::ferror(f) != 0;
            std::fclose(f);
            if (bad) throw OutputError("short write to '" + out_path + "'");
            doc.checks.push_back(value_row("grid-rows", static_cast<double>(rows), out_path));
            doc.config = config;
            doc.wall_ms = wall_ms();
            std::cout << doc.to_json().dump(2) << "\n";
            return 0;
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const OutputError& e) {
        const json err = conflab::report::error_document(config, "io", e.what(), wall_ms());
        std::cout << err.dump(2) << "\n";
        return 3;
    } catch (const conflab::NoRootError& e) {
        std::ostringstream msg;
        msg << e.what() << " (achieved supremum " << e.supremum << ")";
        const json err = conflab::report::error_document(config, "no-root", msg.str(), wall_ms());
        std::cout << err.dump(2) << "\n";
        return 3;
    } catch (const conflab::ResolutionError& e) {
        const json err =
            conflab::report::error_document(config, "resolution", e.what(), wall_ms());
        std::cout << err.dump(2) << "\n";
        return 3;
    } catch (const conflab::DomainError& e) {
        const json err = conflab::report::error_document(config, "domain", e.what(), wall_ms());
        std::cout << err.dump(2) << "\n";
        return 3;
    }

    doc.config = config;
    doc.wall_ms = wall_ms();
    if (emit_document(doc.to_json(), out_path) != 0) {
        const json err = conflab::report::error_document(
            config, "io", "cannot write report to '" + out_path + "'", wall_ms());
        std::cout << err.dump(2) << "\n";
        return 3;
    }
    return doc.pass() ? 0 : 1;
}
