#include "nonlocal/experiments.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nonlocal/czkit.hpp"
#include "nonlocal/estimates.hpp"
#include "nonlocal/solve.hpp"

namespace nonlocal {

namespace {

using nlohmann::json;

Ball ball_from(const ExperimentConfig& cfg, double r) {
    Ball b;
    b.radius = r;
    if (cfg.raw.contains("sweep") && cfg.raw["sweep"].contains("ball_center")) {
        const json& c = cfg.raw["sweep"]["ball_center"];
        for (std::size_t k = 0; k < c.size() && k < 2; ++k) b.center[k] = c[k].get<double>();
    }
    return b;
}

VerificationReport run_assemble(const ExperimentConfig& cfg) {
    VerificationReport rep;
    rep.experiment = "assemble";
    KernelSpec spec = cfg.make_kernel();
    Grid grid = cfg.make_grid();
    DiscreteOperator op = assemble(spec, grid, {cfg.theta_fraction()});

    rep.params = {{"kernel", spec.name}, {"alpha", spec.order}, {"lambda", spec.lambda},
                  {"n", grid.cells_per_dim}, {"L", grid.half_width},
                  {"boundary", grid.boundary == Boundary::Periodic ? "periodic" : "zero_extension"}};

    // form value on the first-cell indicator
    GridFunction e0(grid);
    e0[0] = cplx{1.0, 0.0};
    const cplx q00 = op.form_value(e0, e0);
    CaseRecord c0;
    c0.id = "form_first_cell_indicator";
    c0.lhs = q00.real();
    c0.rhs = q00.imag();
    c0.ratio = std::abs(q00);
    rep.cases.push_back(c0);

    // constants: in the kernel for periodic grids, tail mass otherwise
    GridFunction ones(grid);
    for (auto& v : ones.values) v = cplx{1.0, 0.0};
    GridFunction Aones = op.apply(ones);
    const double ones_resid = Aones.l2_norm() / ones.l2_norm();
    CaseRecord c1;
    c1.id = "apply_to_constants_l2";
    c1.lhs = ones_resid;
    rep.cases.push_back(c1);
    if (op.periodic() && ones_resid > 1e-12) rep.hard_pass = false;

    // sector containment of the form value on seeded vectors
    Rng rng(cfg.raw.value("seed", 1));
    const double half_angle = pi - op.sector.phi;
    double worst_slack = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 64; ++t) {
        GridFunction u(grid);
        for (auto& v : u.values) v = rng.complex_normal();
        const cplx q = op.form_value(u, u);
        if (std::abs(q) == 0.0) continue;
        worst_slack = std::min(worst_slack, half_angle - std::abs(std::arg(q)));
    }
    CaseRecord c2;
    c2.id = "numerical_range_slack_rad";
    c2.lhs = worst_slack;
    rep.cases.push_back(c2);
    if (worst_slack < -1e-10) rep.hard_pass = false;

    rep.summary = {{"form_first_cell_abs", std::abs(q00)},
                   {"constants_residual", ones_resid},
                   {"numerical_range_slack", worst_slack},
                   {"tail_halfwidth", op.tail_halfwidth()}};
    return rep;
}

VerificationReport run_resolvent_sweep(const ExperimentConfig& cfg) {
    KernelSpec spec = cfg.make_kernel();
    Grid grid = cfg.make_grid();
    DiscreteOperator op = assemble(spec, grid, {cfg.theta_fraction()});
    const std::vector<cplx> lattice = cfg.lambda_lattice(op.sector.theta);
    std::vector<double> ps = cfg.p_list();
    if (ps.empty()) ps = {2.0};

    VerificationReport rep = resolvent_lp_sweep(op, ps, lattice);
    rep.params["theta_fraction"] = cfg.theta_fraction();

    // hard gate at p = 2: the certified sector constant bounds the exact norm
    const double c2 = sector_sum_constant(op.sector.theta, op.sector.phi, 1);
    double sup2 = 0.0;
    for (const cplx& lam : lattice) sup2 = std::max(sup2, resolvent_l2_norm(op, lam));
    rep.summary["l2_sup"] = sup2;
    rep.summary["l2_sector_constant"] = c2;
    if (sup2 > c2) rep.hard_pass = false;
    return rep;
}

VerificationReport run_caccioppoli(const ExperimentConfig& cfg) {
    KernelSpec spec = cfg.make_kernel();
    Grid grid = cfg.make_grid();
    DiscreteOperator op = assemble(spec, grid, {cfg.theta_fraction()});
    const std::vector<cplx> lattice = cfg.lambda_lattice(op.sector.theta);
    std::vector<double> rs = cfg.radii();
    if (rs.empty()) throw std::invalid_argument("config.sweep.radii: required for caccioppoli");

    VerificationReport rep;
    rep.experiment = "caccioppoli";
    rep.params = {{"kernel", spec.name}, {"alpha", spec.order}, {"n", grid.cells_per_dim},
                  {"L", grid.half_width}, {"theta", op.sector.theta}};
    const int threads = static_cast<int>(cfg.raw.value("threads", 1));
    double max_ratio = 0.0;
    std::string argmax;
    for (double r : rs) {
        VerificationReport sub =
            caccioppoli_sweep(op, ball_from(cfg, r), lattice, cfg.seeds(), threads);
        rep.hard_pass = rep.hard_pass && sub.hard_pass;
        for (CaseRecord& c : sub.cases) {
            c.id = "r=" + std::to_string(r) + " " + c.id;
            c.params["r"] = r;
            if (c.ratio > max_ratio) {
                max_ratio = c.ratio;
                argmax = c.id;
            }
            rep.cases.push_back(std::move(c));
        }
        rep.notes = sub.notes;
    }
    rep.summary = {{"max_ratio", max_ratio}, {"argmax", argmax}, {"cases", rep.cases.size()}};
    return rep;
}

VerificationReport run_wrh(const ExperimentConfig& cfg) {
    KernelSpec spec = cfg.make_kernel();
    Grid grid = cfg.make_grid();
    DiscreteOperator op = assemble(spec, grid, {cfg.theta_fraction()});

    std::vector<double> rs = cfg.radii();
    if (rs.empty()) throw std::invalid_argument("config.sweep.radii: required for wrh");
    const double r = rs.front();
    const Ball ball = ball_from(cfg, r);

    double p = 0.0;
    if (!cfg.p_list().empty()) {
        p = cfg.p_list().front();
    } else {
        const PRange range = admissible_p_range(grid.dimension, spec.order);
        const double hi = std::min(range.upper, 6.0);
        p = 0.5 * (2.0 + hi);
    }
    const cplx lambda = cfg.raw.contains("sweep") && cfg.raw["sweep"].contains("lambda")
                            ? cfg.lambda_lattice(op.sector.theta).front()
                            : cplx{1.0, 0.0};

    VerificationReport rep;
    rep.experiment = "wrh";
    rep.params = {{"kernel", spec.name}, {"alpha", spec.order}, {"n", grid.cells_per_dim},
                  {"p", p}, {"iota", cfg.iota()}, {"r", r}};
    double max_ratio = 0.0;
    for (std::uint64_t seed : cfg.seeds()) {
        WrhResult w = wrh_check(op, ball, lambda, p, cfg.iota(), seed);
        CaseRecord c;
        c.id = "seed=" + std::to_string(seed);
        c.params = {{"seed", seed}, {"p", p}};
        c.lhs = w.lhs;
        c.rhs = w.rhs;
        c.ratio = w.ratio;
        max_ratio = std::max(max_ratio, w.ratio);
        rep.cases.push_back(std::move(c));
    }
    // higher-exponent probe: report where the ratio degrades, no assertion
    json probe = json::object();
    for (double bump : {0.01, 0.05, 0.10}) {
        const double pp = p * (1.0 + bump);
        WrhResult w = wrh_check(op, ball, lambda, pp, cfg.iota(), cfg.seeds().front());
        probe[std::to_string(pp)] = w.ratio;
    }
    rep.summary = {{"max_ratio", max_ratio}, {"gehring_probe", probe}};
    rep.notes =
        "the estimate is checked on sampled forcing only; the universal quantifier over all "
        "admissible f is out of reach by sampling";
    return rep;
}

VerificationReport run_cz(const ExperimentConfig& cfg) {
    Grid grid = cfg.make_grid();
    VerificationReport rep;
    rep.experiment = "cz";
    const double delta = cfg.num("cz", "delta", 0.5);
    const int max_level = static_cast<int>(cfg.integer("cz", "max_level", 16));

    std::vector<std::size_t> A;
    if (cfg.raw.contains("cz") && cfg.raw["cz"].contains("set")) {
        for (const json& c : cfg.raw["cz"]["set"]) A.push_back(c.get<std::size_t>());
    } else if (cfg.raw.contains("cz") && cfg.raw["cz"].contains("set_csv")) {
        std::ifstream is(cfg.raw["cz"]["set_csv"].get<std::string>());
        if (!is) throw std::invalid_argument("cz.set_csv: cannot open file");
        std::size_t v;
        while (is >> v) {
            A.push_back(v);
            if (is.peek() == ',') is.get();
        }
    } else {
        throw std::invalid_argument("config.cz: needs 'set' or 'set_csv'");
    }

    CZResult res = cz_decompose(grid, root_cube(grid), A, delta, max_level);
    rep.params = {{"delta", delta}, {"max_level", max_level}, {"n", grid.cells_per_dim},
                  {"set_size", A.size()}};
    json cubes = json::array();
    const double h = grid.h();
    for (std::size_t k = 0; k < res.selected.size(); ++k) {
        const DyadicCube& q = res.selected[k];
        const CZCertificate& cert = res.certificates[k];
        json jq;
        jq["path"] = q.path;
        jq["level"] = q.level;
        jq["origin_cells"] = {q.origin[0], q.origin[1]};
        jq["side_cells"] = q.side_cells;
        jq["x_lo"] = -grid.half_width + q.origin[0] * h;
        jq["x_hi"] = -grid.half_width + (q.origin[0] + q.side_cells) * h;
        jq["count_in_cube"] = cert.count_in_cube;
        jq["cube_cells"] = cert.cube_cells;
        jq["count_in_parent"] = cert.count_in_parent;
        jq["parent_cells"] = cert.parent_cells;
        cubes.push_back(std::move(jq));

        // exact certificate checks (b) and (c)
        if (!(static_cast<double>(cert.count_in_cube) > delta * static_cast<double>(cert.cube_cells)))
            rep.hard_pass = false;
        if (static_cast<double>(cert.count_in_parent) > delta * static_cast<double>(cert.parent_cells))
            rep.hard_pass = false;
    }
    if (res.residual_cells != 0) rep.hard_pass = false;
    rep.summary = {{"selected", res.selected.size()},
                   {"residual_cells", res.residual_cells},
                   {"cubes", cubes}};
    return rep;
}

VerificationReport run_good_lambda(const ExperimentConfig& cfg) {
    KernelSpec spec = cfg.make_kernel();
    Grid grid = cfg.make_grid();
    DiscreteOperator op = assemble(spec, grid, {cfg.theta_fraction()});

    const double q = cfg.num("good_lambda", "q", 3.0);
    const double delta =
        cfg.num("good_lambda", "delta", 0.999 * good_lambda_delta_threshold(q, grid.dimension));
    const double gamma = cfg.num("good_lambda", "gamma", 1.0);
    const cplx lam0{cfg.num("good_lambda", "lambda0", 1.0), 0.0};

    GridFunction f(grid);
    Rng rng(cfg.raw.value("seed", 1));
    for (auto& v : f.values) v = rng.complex_normal();
    GridFunction Tf = resolvent_apply(op, lam0, f);
    GridFunction tf_sq(grid), f_sq(grid);
    for (std::size_t i = 0; i < f.size(); ++i) {
        tf_sq[i] = cplx{std::norm(Tf[i]), 0.0};
        f_sq[i] = cplx{std::norm(f[i]), 0.0};
    }

    std::vector<double> lgrid;
    const double lo = cfg.num("good_lambda", "lambda_decade_lo", -3.0);
    const double hi = cfg.num("good_lambda", "lambda_decade_hi", 3.0);
    const int per = static_cast<int>(cfg.integer("good_lambda", "per_decade", 2));
    for (int s = 0; s <= static_cast<int>((hi - lo) * per); ++s)
        lgrid.push_back(std::pow(10.0, lo + static_cast<double>(s) / per));

    GoodLambdaResult res = good_lambda_check(tf_sq, f_sq, q, delta, gamma, lgrid);

    VerificationReport rep;
    rep.experiment = "good-lambda";
    rep.params = {{"q", q}, {"delta", delta}, {"gamma", gamma}, {"A", res.A},
                  {"n", grid.cells_per_dim}, {"kernel", spec.name}};
    for (const GoodLambdaRow& row : res.rows) {
        CaseRecord c;
        std::ostringstream id;
        id << "lambda=" << row.lambda;
        c.id = id.str();
        c.params = {{"lambda", row.lambda}};
        c.lhs = row.lhs;
        c.rhs = row.rhs;
        c.ratio = row.rhs == 0.0 ? 0.0 : row.lhs / row.rhs;
        c.extra = {{"count_EA", row.count_EA}, {"count_E", row.count_E},
                   {"count_F", row.count_F}, {"pass", row.pass}};
        rep.cases.push_back(std::move(c));
    }
    rep.summary = {{"all_pass", res.all_pass}, {"A", res.A}, {"rows", res.rows.size()}};
    if (cfg.flag("good_lambda", "expect_pass", true) && !res.all_pass) rep.hard_pass = false;
    rep.notes =
        "maximal functions range over grid-aligned cubes inside the box, a subfamily of the "
        "continuum cube family, so the discrete M is a lower bound of the continuum one";
    return rep;
}

VerificationReport run_maxreg(const ExperimentConfig& cfg) {
    KernelSpec spec = cfg.make_kernel();
    Grid grid = cfg.make_grid();
    DiscreteOperator op = assemble(spec, grid, {cfg.theta_fraction()});

    const double T = cfg.num("maxreg", "horizon", 2.0);
    const long M = cfg.integer("maxreg", "steps", 512);
    const double r = cfg.num("maxreg", "r", 2.0);
    const double p = cfg.num("maxreg", "p", 2.0);
    const double tau = T / static_cast<double>(M);

    // forcing: seeded spatial profile with exponential time decay, sampled at
    // panel midpoints
    GridFunction profile(grid);
    Rng rng(cfg.raw.value("seed", 1));
    for (auto& v : profile.values) v = rng.complex_normal();
    std::vector<GridFunction> forcing;
    forcing.reserve(M);
    for (long k = 0; k < M; ++k) {
        const double t = (static_cast<double>(k) + 0.5) * tau;
        GridFunction fk = profile;
        fk *= cplx{std::exp(-t), 0.0};
        forcing.push_back(std::move(fk));
    }
    MildSolutionResult res = mild_solution(op, forcing, tau, r, p);

    VerificationReport rep;
    rep.experiment = "maxreg";
    rep.params = {{"kernel", spec.name}, {"alpha", spec.order}, {"n", grid.cells_per_dim},
                  {"horizon", T}, {"steps", M}, {"r", r}, {"p", p}};
    CaseRecord c;
    c.id = "bochner_norms";
    c.lhs = res.u_prime_norm + res.au_norm;
    c.rhs = res.f_norm;
    c.ratio = res.f_norm == 0.0 ? 0.0 : c.lhs / c.rhs;
    c.extra = {{"u_prime", res.u_prime_norm}, {"au", res.au_norm}, {"f", res.f_norm},
               {"stability_warning", res.stability_warning}};
    rep.cases.push_back(c);
    rep.summary = {{"regularity_ratio", c.ratio}, {"stability_warning", res.stability_warning}};
    return rep;
}

VerificationReport run_square_function(const ExperimentConfig& cfg) {
    KernelSpec spec = cfg.make_kernel();
    Grid grid = cfg.make_grid();
    DiscreteOperator op = assemble(spec, grid, {cfg.theta_fraction()});

    const long n0 = cfg.integer("square_function", "n0", 8);
    const double p = cfg.p_list().empty() ? 2.0 : cfg.p_list().front();
    Rng rng(cfg.raw.value("seed", 1));
    std::vector<cplx> lambdas;
    std::vector<GridFunction> fs;
    for (long t = 0; t < n0; ++t) {
        const double mag = std::pow(10.0, rng.uniform(-1.0, 2.0));
        const double arg = (t % 2 == 0) ? op.sector.theta : -op.sector.theta;
        lambdas.push_back(std::polar(mag, arg));
        GridFunction f(grid);
        for (auto& v : f.values) v = rng.complex_normal();
        fs.push_back(std::move(f));
    }
    const double ratio = square_function_ratio(op, lambdas, fs, p);
    double single_sup = 0.0;
    for (const cplx& lam : lambdas)
        single_sup = std::max(single_sup, resolvent_p_norm(op, lam, p).lower);

    VerificationReport rep;
    rep.experiment = "square-function";
    rep.params = {{"kernel", spec.name}, {"n0", n0}, {"p", p}, {"n", grid.cells_per_dim}};
    CaseRecord c;
    c.id = "ell2_stack";
    c.lhs = ratio;
    c.rhs = single_sup;
    c.ratio = single_sup == 0.0 ? 0.0 : ratio / single_sup;
    rep.cases.push_back(c);
    rep.summary = {{"ratio", ratio}, {"single_resolvent_sup", single_sup}};
    return rep;
}

}  // namespace

VerificationReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    VerificationReport rep;
    const std::string kind = cfg.kind();
    if (kind == "assemble")
        rep = run_assemble(cfg);
    else if (kind == "resolvent-sweep")
        rep = run_resolvent_sweep(cfg);
    else if (kind == "caccioppoli")
        rep = run_caccioppoli(cfg);
    else if (kind == "wrh")
        rep = run_wrh(cfg);
    else if (kind == "cz")
        rep = run_cz(cfg);
    else if (kind == "good-lambda")
        rep = run_good_lambda(cfg);
    else if (kind == "maxreg")
        rep = run_maxreg(cfg);
    else if (kind == "square-function")
        rep = run_square_function(cfg);
    else
        throw std::invalid_argument("run_experiment: unknown kind " + kind);

    rep.config_hash = cfg.hash();
    rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();
    {
        std::time_t now = std::time(nullptr);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        rep.timestamp = buf;
    }
    return rep;
}

RunOutcome run_and_persist(const ExperimentConfig& cfg, const std::string& out_dir,
                           const std::optional<std::string>& baseline_path) {
    RunOutcome out;
    out.report = run_experiment(cfg);

    if (baseline_path && std::filesystem::exists(*baseline_path)) {
        const Baseline base = read_baseline(*baseline_path);
        if (base.config_hash == out.report.config_hash) {
            std::string detail;
            if (!compare_to_baseline(out.report, base, &detail)) {
                out.report.soft_pass = false;
                out.report.summary["baseline_drift"] = detail;
            }
        } else {
            out.report.summary["baseline_skipped"] = "config hash differs from baseline";
        }
    }

    std::filesystem::create_directories(out_dir);
    out.report.write_json(out_dir + "/report.json");
    out.report.write_cases_csv(out_dir + "/cases.csv");
    {
        std::ofstream os(out_dir + "/timings.csv");
        os << "experiment,wall_ms\n" << out.report.experiment << ',' << out.report.wall_ms << "\n";
    }
    out.exit_code = !out.report.hard_pass ? 1 : (!out.report.soft_pass ? 2 : 0);
    return out;
}

void freeze_baseline(const ExperimentConfig& cfg, const std::string& out_dir,
                     const std::string& baseline_path) {
    if (std::filesystem::exists(baseline_path)) {
        const Baseline existing = read_baseline(baseline_path);
        if (existing.config_hash != cfg.hash())
            throw std::runtime_error(
                "freeze_baseline: existing baseline belongs to a different config hash");
    }
    RunOutcome out = run_and_persist(cfg, out_dir, std::nullopt);
    if (out.exit_code == 1) throw std::runtime_error("freeze_baseline: run failed hard assertions");
    write_baseline(baseline_path, out.report);
}

}  // namespace nonlocal
