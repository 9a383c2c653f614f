// Command-line driver: phantom generation, forward simulation, harmonic
// filtering, reconstruction, the microlocal verification suite, and artefact
// metrics.  Exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure.

#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include <spintomo/spintomo.hpp>

namespace {

using namespace spintomo;

struct GridOptions {
    std::string transform = "spindle";
    int n = 64;
    double inner = 0.1;
    double outer = 0.9;
    std::size_t ns = 32;
    int nlat = 26;
    int nlon = 51;
    int quad_phi = 64;
    int quad_z = 128;
    double weight_pow = 0.5;
    int cyl_n = 0;  // 0: 2.5x the volume resolution
    int threads = 0;
};

void add_domain_flags(CLI::App* cmd, GridOptions& g) {
    cmd->add_option("--inner", g.inner, "inner radius of the spindle-domain shell");
    cmd->add_option("--outer", g.outer, "outer radius of the spindle-domain shell (< 1)");
    cmd->add_option("--threads", g.threads, "worker threads (0 = all cores)");
}

void add_operator_flags(CLI::App* cmd, GridOptions& g) {
    cmd->add_option("--transform", g.transform, "spindle or cylinder")
        ->check(CLI::IsMember({"spindle", "cylinder"}));
    cmd->add_option("--quad-phi", g.quad_phi, "azimuthal quadrature nodes");
    cmd->add_option("--quad-z", g.quad_z, "axial quadrature nodes per band");
    cmd->add_option("--weight-pow", g.weight_pow, "exponent on |grad_v h| (0.5 or 1)");
    cmd->add_option("--cyl-n", g.cyl_n,
                    "cylinder-grid voxels per axis (0 = 2.5x the volume resolution)");
}

HollowBall spindle_ball(const GridOptions& g) { return HollowBall::spindle(g.inner, g.outer); }

/// Volume grid a run reconstructs (or generates phantoms) on.
Volume volume_grid(const GridOptions& g) {
    if (g.transform == "cylinder")
        return Volume::centered(g.n, HollowBall::link_radius(g.outer));
    return Volume::centered(g.n, g.outer);
}

/// Internal resample grid of the spindle operator; --cyl-n overrides the
/// resolution-matched default.
Volume resample_grid(const GridOptions& g, const Volume& vol_tmpl) {
    if (g.cyl_n > 0) return Volume::centered(g.cyl_n, HollowBall::link_radius(g.outer));
    return SpindleOperator::default_cylinder_grid(vol_tmpl, spindle_ball(g));
}

std::unique_ptr<TomographicOperator> make_operator(const GridOptions& g, Volume vol_tmpl,
                                                   Sinogram sino_tmpl) {
    OperatorConfig cfg{g.quad_phi, g.quad_z, g.weight_pow, g.threads};
    HollowBall ball = spindle_ball(g);
    if (g.transform == "spindle") {
        Volume cyl = resample_grid(g, vol_tmpl);
        return std::make_unique<SpindleOperator>(std::move(vol_tmpl), std::move(sino_tmpl), ball,
                                                 std::move(cyl), cfg);
    }
    return std::make_unique<CylinderOperator>(std::move(vol_tmpl), std::move(sino_tmpl),
                                              ball.linked_cylinder(), cfg);
}

void echo(const std::map<std::string, std::string>& kv) {
    for (const auto& [k, v] : kv) std::cout << k << " = " << v << '\n';
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

struct MipOptions {
    std::string path;
    std::string axis = "z";
};

struct ProfileOptions {
    std::string path;
    std::vector<double> from{-0.9, 0.0, 0.0};
    std::vector<double> to{0.9, 0.0, 0.0};
    int samples = 256;
};

void add_image_flags(CLI::App* cmd, MipOptions& mip, ProfileOptions& prof) {
    cmd->add_option("--mip", mip.path, "write a 16-bit PGM maximum-intensity projection");
    cmd->add_option("--mip-axis", mip.axis, "projection axis (x, y, z)")
        ->check(CLI::IsMember({"x", "y", "z"}));
    cmd->add_option("--profile", prof.path, "write a max-normalized CSV line profile");
    cmd->add_option("--profile-from", prof.from, "line start (three coordinates)")->expected(3);
    cmd->add_option("--profile-to", prof.to, "line end (three coordinates)")->expected(3);
    cmd->add_option("--profile-samples", prof.samples, "profile sample count");
}

void write_images(const Volume& v, const MipOptions& mip, const ProfileOptions& prof) {
    if (!mip.path.empty()) write_mip(v, parse_axis(mip.axis), mip.path);
    if (!prof.path.empty()) {
        LineSpec line{{prof.from[0], prof.from[1], prof.from[2]},
                      {prof.to[0], prof.to[1], prof.to[2]},
                      prof.samples};
        write_profile(v, line, prof.path);
    }
}

void write_recon_report(const ReconReport& rep, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw io_error(io_error::Kind::open_failure, "cannot write report: " + path);
    os.precision(17);
    os << "iterations = " << rep.iterations << '\n';
    os << "converged = " << (rep.converged ? 1 : 0) << '\n';
    os << "diverged = " << (rep.diverged ? 1 : 0) << '\n';
    if (rep.sigma_max_estimate > 0.0) os << "sigma_max_estimate = " << rep.sigma_max_estimate << '\n';
    if (rep.step > 0.0) os << "step = " << rep.step << '\n';
    os << "tikhonov_mu = " << rep.tikhonov_mu << '\n';
    os << "residuals =";
    for (double r : rep.residuals) os << ' ' << r;
    os << '\n';
}

int run_phantom(const GridOptions& g, const std::string& out, const std::string& spec_path,
                PhantomSpec spec, const std::map<std::string, std::string>& overrides,
                const MipOptions& mip, const ProfileOptions& prof) {
    if (!spec_path.empty()) {
        auto kv = read_config(spec_path);
        for (const auto& [k, v] : overrides) kv[k] = v;  // explicit flags win
        spec = PhantomSpec::from_config(kv);
    }
    HollowBall ball = spindle_ball(g);
    if (g.transform == "cylinder") ball = ball.linked_cylinder();
    Volume tmpl = volume_grid(g);
    auto cfg = spec.to_config();
    cfg["n"] = std::to_string(g.n);
    cfg["transform"] = g.transform;
    cfg["inner"] = fmt(g.inner);
    cfg["outer"] = fmt(g.outer);
    cfg["out"] = out;
    echo(cfg);
    Volume v = make_phantom(spec, tmpl, ball);
    write_volume(v, out);
    write_images(v, mip, prof);
    std::cout << "wrote " << out << '\n';
    return 0;
}

int run_forward(const GridOptions& g, const std::string& vol_path, const std::string& out) {
    Volume f = read_volume(vol_path);
    Sinogram sino = make_sinogram_template(g.ns, g.nlat, g.nlon, spindle_ball(g));
    auto op = make_operator(g, f, sino);
    echo({{"volume", vol_path},
          {"out", out},
          {"transform", g.transform},
          {"ns", std::to_string(g.ns)},
          {"nlat", std::to_string(g.nlat)},
          {"nlon", std::to_string(g.nlon)},
          {"quad_phi", std::to_string(g.quad_phi)},
          {"quad_z", std::to_string(g.quad_z)},
          {"weight_pow", fmt(g.weight_pow)},
          {"inner", fmt(g.inner)},
          {"outer", fmt(g.outer)},
          {"threads", std::to_string(g.threads)}});
    Sinogram b = op->apply(f);
    write_sinogram(b, out);
    std::cout << "wrote " << out << '\n';
    return 0;
}

int run_filter(const std::string& in, const std::string& out, int L, const std::string& mode,
               const std::string& harmonics_out) {
    Sinogram b = read_sinogram(in);
    HarmonicFilterMode m = HarmonicFilterMode::q;
    if (mode == "qsqrt") m = HarmonicFilterMode::q_sqrt;
    else if (mode == "truncate") m = HarmonicFilterMode::truncate;
    else if (mode != "q") throw std::invalid_argument("filter mode must be q, qsqrt or truncate");
    echo({{"in", in}, {"out", out}, {"filter_L", std::to_string(L)}, {"mode", mode}});
    HarmonicStack stack = sinogram_to_stack(b, L);
    switch (m) {
        case HarmonicFilterMode::q: stack = apply_q(stack); break;
        case HarmonicFilterMode::q_sqrt: stack = apply_q_sqrt(stack); break;
        case HarmonicFilterMode::truncate: break;
    }
    if (!harmonics_out.empty()) write_harmonic_stack(stack, harmonics_out);
    write_sinogram(stack_to_sinogram(stack, b), out);
    std::cout << "wrote " << out << '\n';
    return 0;
}

int run_reconstruct(const GridOptions& g, const std::string& sino_path, const std::string& out,
                    const std::string& report_path, const std::string& method, int iters_flag,
                    double tol, const std::string& mu_str, const std::string& step_str,
                    bool precond, int filter_L, double noise, unsigned long long seed,
                    const MipOptions& mip, const ProfileOptions& prof) {
    Sinogram b = read_sinogram(sino_path);
    auto op = make_operator(g, volume_grid(g), b);

    SolverConfig cfg;
    cfg.method = parse_method(method);
    cfg.tol = tol;
    cfg.harmonic_L = filter_L;
    cfg.precondition = precond;
    cfg.seed = seed;
    cfg.max_iters = iters_flag > 0 ? iters_flag
                    : (cfg.method == SolverConfig::Method::landweber ? 2000 : 50);

    if (cfg.method == SolverConfig::Method::cgls) {
        if (mu_str == "auto")
            cfg.tikhonov_mu = 0.01 * estimate_sigma_max(*op, 20, seed);
        else
            cfg.tikhonov_mu = std::stod(mu_str);
        if (cfg.tikhonov_mu < 0.0) throw std::invalid_argument("--tikhonov-mu must be >= 0");
    }
    if (cfg.method == SolverConfig::Method::landweber && step_str != "auto") {
        cfg.landweber_step = std::stod(step_str);
        if (!(cfg.landweber_step > 0.0)) throw std::invalid_argument("--step must be > 0 or auto");
    }

    echo({{"sinogram", sino_path},
          {"out", out},
          {"method", method},
          {"transform", g.transform},
          {"n", std::to_string(g.n)},
          {"iters", std::to_string(cfg.max_iters)},
          {"tol", fmt(cfg.tol)},
          {"tikhonov_mu", fmt(cfg.tikhonov_mu)},
          {"step", step_str},
          {"precondition", precond ? "1" : "0"},
          {"filter_L", std::to_string(filter_L)},
          {"noise", fmt(noise)},
          {"seed", std::to_string(seed)},
          {"quad_phi", std::to_string(g.quad_phi)},
          {"quad_z", std::to_string(g.quad_z)},
          {"weight_pow", fmt(g.weight_pow)},
          {"inner", fmt(g.inner)},
          {"outer", fmt(g.outer)},
          {"threads", std::to_string(g.threads)}});

    if (noise > 0.0) b = add_noise(b, noise, seed);
    ReconReport rep = reconstruct(*op, b, cfg);
    if (rep.diverged) std::cerr << "warning: iteration diverged; returning last iterate\n";

    Volume result = op->volume_template();
    result.values = rep.solution;
    write_volume(result, out);
    if (!report_path.empty()) write_recon_report(rep, report_path);
    write_images(result, mip, prof);
    std::cout << "wrote " << out << " after " << rep.iterations << " iterations, final residual "
              << (rep.residuals.empty() ? 0.0 : rep.residuals.back()) << '\n';
    return 0;
}

int run_verify(int samples, unsigned long long seed, double tol_scale,
               const std::string& report_path) {
    echo({{"samples", std::to_string(samples)},
          {"seed", std::to_string(seed)},
          {"tol_scale", fmt(tol_scale)}});
    VerificationReport rep = run_microlocal_verification({samples, seed, tol_scale});
    std::cout << '\n';
    for (const auto& c : rep.checks) {
        std::ostringstream line;
        line.precision(3);
        line << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << "  (measured " << std::scientific
             << c.measured << ", tolerance " << c.tolerance << ")";
        std::cout << line.str() << '\n';
    }
    if (!report_path.empty()) {
        nlohmann::json j;
        j["all_pass"] = rep.all_pass();
        j["checks"] = nlohmann::json::array();
        for (const auto& c : rep.checks)
            j["checks"].push_back({{"name", c.name},
                                   {"measured", c.measured},
                                   {"tolerance", c.tolerance},
                                   {"pass", c.pass}});
        std::ofstream os(report_path);
        if (!os) throw io_error(io_error::Kind::open_failure, "cannot write " + report_path);
        os << j.dump(2) << '\n';
    }
    std::cout << '\n' << (rep.all_pass() ? "all checks passed" : "CHECKS FAILED") << '\n';
    return rep.all_pass() ? 0 : 3;
}

int run_metrics(const std::string& recon_path, const std::string& spec_path,
                const std::string& out) {
    Volume recon = read_volume(recon_path);
    PhantomSpec spec = PhantomSpec::from_config(read_config(spec_path));
    echo({{"recon", recon_path}, {"spec", spec_path}});
    ArtefactReport rep = artefact_metrics(recon, spec);
    std::map<std::string, std::string> kv{{"mirror_ratio", fmt(rep.mirror_ratio)},
                                          {"smear_ratio", fmt(rep.smear_ratio)},
                                          {"bead_energy", fmt(rep.bead_energy)},
                                          {"mirror_energy", fmt(rep.mirror_energy)},
                                          {"smear_energy", fmt(rep.smear_energy)}};
    echo(kv);
    if (!out.empty()) write_config(kv, out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spintomo: spindle/cylinder transform simulation and reconstruction"};
    app.require_subcommand(1);

    int rc = 0;

    // ---- phantom
    auto* cmd_phantom = app.add_subcommand("phantom", "generate a test density volume");
    GridOptions gp;
    std::string ph_out, ph_spec_path, ph_kind = "bead";
    PhantomSpec ph;
    MipOptions ph_mip;
    ProfileOptions ph_prof;
    std::vector<double> ph_center{0.45, 0.0, 0.0}, ph_cap_axis{1.0, 0.0, 0.0},
        ph_normal{1.0, 0.0, 0.0}, ph_box_center{0.48, 0.0, 0.0}, ph_box_half{0.18, 0.3, 0.3};
    double ph_cap_deg = 40.0;
    cmd_phantom->add_option("--out", ph_out, "output volume file")->required();
    cmd_phantom->add_option("--kind", ph_kind,
                            "bead | spherical_shells | layered_planes | custom_radial | "
                            "random_bandlimited");
    cmd_phantom->add_option("--spec", ph_spec_path, "phantom spec config file");
    cmd_phantom->add_option("--n", gp.n, "voxels per axis");
    cmd_phantom->add_option("--transform", gp.transform, "grid flavor: spindle or cylinder")
        ->check(CLI::IsMember({"spindle", "cylinder"}));
    cmd_phantom->add_option("--cyl-n", gp.cyl_n, "cylinder-grid voxels per axis");
    add_domain_flags(cmd_phantom, gp);
    auto* o_center = cmd_phantom->add_option("--center", ph_center, "bead centre")->expected(3);
    auto* o_radius = cmd_phantom->add_option("--radius", ph.radius, "bead radius");
    auto* o_value = cmd_phantom->add_option("--value", ph.value, "density value");
    auto* o_r0 = cmd_phantom->add_option("--r0", ph.r0, "inner shell radius");
    auto* o_r1 = cmd_phantom->add_option("--r1", ph.r1, "outer shell radius");
    auto* o_layers = cmd_phantom->add_option("--layers", ph.n_layers, "layer count");
    auto* o_vlow = cmd_phantom->add_option("--v-low", ph.v_low, "low layer value");
    auto* o_vhigh = cmd_phantom->add_option("--v-high", ph.v_high, "high layer value");
    auto* o_cap_axis = cmd_phantom->add_option("--cap-axis", ph_cap_axis, "cap axis")->expected(3);
    auto* o_cap = cmd_phantom->add_option("--cap-angle-deg", ph_cap_deg, "cap half-angle");
    auto* o_norm = cmd_phantom->add_option("--normal", ph_normal, "slab normal")->expected(3);
    auto* o_spacing = cmd_phantom->add_option("--spacing", ph.spacing, "slab thickness");
    auto* o_bc = cmd_phantom->add_option("--box-center", ph_box_center, "slab box centre")->expected(3);
    auto* o_bh = cmd_phantom->add_option("--box-half", ph_box_half, "slab box half extents")->expected(3);
    auto* o_pc = cmd_phantom->add_option("--profile-center", ph.profile_center, "radial bump centre");
    auto* o_pw = cmd_phantom->add_option("--profile-width", ph.profile_width, "radial bump width");
    auto* o_bl = cmd_phantom->add_option("--band-limit", ph.band_limit, "random phantom degree");
    auto* o_seed = cmd_phantom->add_option("--seed", ph.seed, "random phantom seed");
    auto* o_amp = cmd_phantom->add_option("--amplitude", ph.amplitude, "random phantom amplitude");
    add_image_flags(cmd_phantom, ph_mip, ph_prof);
    cmd_phantom->callback([&] {
        ph.kind = PhantomSpec::parse_kind(ph_kind);
        ph.center = {ph_center[0], ph_center[1], ph_center[2]};
        ph.cap_direction = {ph_cap_axis[0], ph_cap_axis[1], ph_cap_axis[2]};
        ph.cap_halfangle = ph_cap_deg * pi / 180.0;
        ph.normal = {ph_normal[0], ph_normal[1], ph_normal[2]};
        ph.box_center = {ph_box_center[0], ph_box_center[1], ph_box_center[2]};
        ph.box_half = {ph_box_half[0], ph_box_half[1], ph_box_half[2]};
        // overrides for --spec files: only flags the user actually passed
        std::map<std::string, std::string> ov;
        auto vec_str = [](const std::vector<double>& v) {
            return fmt(v[0]) + " " + fmt(v[1]) + " " + fmt(v[2]);
        };
        if (cmd_phantom->count("--kind")) ov["kind"] = ph_kind;
        if (o_center->count()) ov["center"] = vec_str(ph_center);
        if (o_radius->count()) ov["radius"] = fmt(ph.radius);
        if (o_value->count()) ov["value"] = fmt(ph.value);
        if (o_r0->count()) ov["r0"] = fmt(ph.r0);
        if (o_r1->count()) ov["r1"] = fmt(ph.r1);
        if (o_layers->count()) ov["n_layers"] = std::to_string(ph.n_layers);
        if (o_vlow->count()) ov["v_low"] = fmt(ph.v_low);
        if (o_vhigh->count()) ov["v_high"] = fmt(ph.v_high);
        if (o_cap_axis->count()) ov["cap_direction"] = vec_str(ph_cap_axis);
        if (o_cap->count()) ov["cap_halfangle"] = fmt(ph_cap_deg * pi / 180.0);
        if (o_norm->count()) ov["normal"] = vec_str(ph_normal);
        if (o_spacing->count()) ov["spacing"] = fmt(ph.spacing);
        if (o_bc->count()) ov["box_center"] = vec_str(ph_box_center);
        if (o_bh->count()) ov["box_half"] = vec_str(ph_box_half);
        if (o_pc->count()) ov["profile_center"] = fmt(ph.profile_center);
        if (o_pw->count()) ov["profile_width"] = fmt(ph.profile_width);
        if (o_bl->count()) ov["band_limit"] = std::to_string(ph.band_limit);
        if (o_seed->count()) ov["seed"] = std::to_string(ph.seed);
        if (o_amp->count()) ov["amplitude"] = fmt(ph.amplitude);
        rc = run_phantom(gp, ph_out, ph_spec_path, ph, ov, ph_mip, ph_prof);
    });

    // ---- forward
    auto* cmd_forward = app.add_subcommand("forward", "apply the forward transform to a volume");
    GridOptions gf;
    std::string fw_vol, fw_out;
    cmd_forward->add_option("--volume", fw_vol, "input volume file")->required();
    cmd_forward->add_option("--out", fw_out, "output sinogram file")->required();
    cmd_forward->add_option("--ns", gf.ns, "radial samples");
    cmd_forward->add_option("--nlat", gf.nlat, "latitude samples");
    cmd_forward->add_option("--nlon", gf.nlon, "longitude samples");
    add_operator_flags(cmd_forward, gf);
    add_domain_flags(cmd_forward, gf);
    cmd_forward->callback([&] { rc = run_forward(gf, fw_vol, fw_out); });

    // ---- filter
    auto* cmd_filter = app.add_subcommand("filter", "apply the harmonic filter to a sinogram");
    std::string fl_in, fl_out, fl_mode = "q", fl_harm;
    int fl_L = 25;
    cmd_filter->add_option("--in", fl_in, "input sinogram")->required();
    cmd_filter->add_option("--out", fl_out, "output sinogram")->required();
    cmd_filter->add_option("--filter-L", fl_L, "harmonic band limit");
    cmd_filter->add_option("--mode", fl_mode, "q | qsqrt | truncate")
        ->check(CLI::IsMember({"q", "qsqrt", "truncate"}));
    cmd_filter->add_option("--harmonics-out", fl_harm, "also write the harmonic stack");
    cmd_filter->callback([&] { rc = run_filter(fl_in, fl_out, fl_L, fl_mode, fl_harm); });

    // ---- reconstruct
    auto* cmd_recon = app.add_subcommand("reconstruct", "reconstruct a volume from a sinogram");
    GridOptions gr;
    std::string rc_sino, rc_out, rc_report, rc_method = "cgls", rc_mu = "auto", rc_step = "auto";
    int rc_iters = 0, rc_L = 25;
    double rc_tol = 1e-8, rc_noise = 0.0;
    unsigned long long rc_seed = 0;
    bool rc_precond = false;
    MipOptions rc_mip;
    ProfileOptions rc_prof;
    cmd_recon->add_option("--sinogram", rc_sino, "input sinogram file")->required();
    cmd_recon->add_option("--out", rc_out, "output volume file")->required();
    cmd_recon->add_option("--report", rc_report, "write the solver report here");
    cmd_recon->add_option("--method", rc_method, "bp | fbp | cgls | landweber")
        ->check(CLI::IsMember({"bp", "fbp", "cgls", "landweber"}));
    cmd_recon->add_option("--n", gr.n, "reconstruction voxels per axis");
    cmd_recon->add_option("--iters", rc_iters, "iteration cap (default 50 cgls, 2000 landweber)");
    cmd_recon->add_option("--tol", rc_tol, "relative stopping tolerance");
    cmd_recon->add_option("--tikhonov-mu", rc_mu, "Tikhonov parameter, or auto (cgls only)");
    cmd_recon->add_option("--step", rc_step, "Landweber step, or auto");
    cmd_recon->add_flag("--precondition", rc_precond, "solve Q^(1/2) A x = Q^(1/2) b");
    cmd_recon->add_option("--filter-L", rc_L, "harmonic band limit for fbp / preconditioning");
    cmd_recon->add_option("--noise", rc_noise, "relative Gaussian noise level");
    cmd_recon->add_option("--seed", rc_seed, "noise / estimator seed");
    add_operator_flags(cmd_recon, gr);
    add_domain_flags(cmd_recon, gr);
    add_image_flags(cmd_recon, rc_mip, rc_prof);
    cmd_recon->callback([&] {
        rc = run_reconstruct(gr, rc_sino, rc_out, rc_report, rc_method, rc_iters, rc_tol, rc_mu,
                             rc_step, rc_precond, rc_L, rc_noise, rc_seed, rc_mip, rc_prof);
    });

    // ---- verify-microlocal
    auto* cmd_verify = app.add_subcommand("verify-microlocal",
                                          "check the canonical-relation computations numerically");
    int vf_samples = 20;
    unsigned long long vf_seed = 0;
    double vf_scale = 1.0;
    std::string vf_report;
    cmd_verify->add_option("--samples", vf_samples, "random sample count per check");
    cmd_verify->add_option("--seed", vf_seed, "sampling seed");
    cmd_verify->add_option("--tol-scale", vf_scale, "multiplies every tolerance");
    cmd_verify->add_option("--report", vf_report, "write a JSON report here");
    cmd_verify->callback([&] { rc = run_verify(vf_samples, vf_seed, vf_scale, vf_report); });

    // ---- metrics
    auto* cmd_metrics = app.add_subcommand("metrics", "artefact metrics of a bead reconstruction");
    std::string mt_recon, mt_spec, mt_out;
    cmd_metrics->add_option("--recon", mt_recon, "reconstructed volume file")->required();
    cmd_metrics->add_option("--spec", mt_spec, "bead phantom spec config")->required();
    cmd_metrics->add_option("--out", mt_out, "write the metrics report here");
    cmd_metrics->callback([&] { rc = run_metrics(mt_recon, mt_spec, mt_out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exits 0
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\nRun with --help for usage.\n";
        return 1;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 3;
    }
    return rc;
}
