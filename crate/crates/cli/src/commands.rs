use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use gamma_damage_core::densities::{
    g, h, phi, sqw1d, wbar, wbar_recession, GMode, HMode, Limit, NumericOptions, RegimeParams,
};
use gamma_damage_core::fem::{
    alt_minimize, AltMinOptions, DamageField, Dirichlet, DisplacementField,
};
use gamma_damage_core::mesh::{
    cohesive_mesh, double_stripe_mesh, jump_strip_mesh, mesh_from_json, mesh_to_json, stripe_mesh,
    uniform_mesh, unit_square_frame, validate, AdmissibilityReport, Point2, Triangulation,
};
use gamma_damage_core::oned::{admissible_grid_size, brute_min_1d, recover_affine_1d};
use gamma_damage_core::recovery::VectorField;
use serde_json::json;

use crate::config::{
    load, Boundary, DensityConfig, DensityMode, Generator, MeshClassConfig, MeshGenConfig,
    MeshSource, MeshValidateConfig, OnedConfig, PlotConfig, SolveConfig, SolveInit, SweepConfig,
};
use crate::plot::emit_plot;
use crate::regime::classify_regime;
use crate::sweep::{build, measure, params_at, run_sweep, write_csv, Built};

/// Largest trivial-regime mesh written to disk by `recover`.
const MAX_WRITTEN_TRIANGLES: usize = 2_000_000;

/// Paths in a config are relative to the config file.
fn resolve(config: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        config.parent().unwrap_or(Path::new(".")).join(p)
    }
}

fn write(out: &Path, name: &str, contents: impl AsRef<[u8]>) -> anyhow::Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn fields_json(u: &DisplacementField, chi: &DamageField) -> String {
    let chi: Vec<u8> = chi.chi.iter().map(|&c| c as u8).collect();
    json!({ "displacement": u.values, "chi": chi }).to_string()
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> anyhow::Result<Vec<u8>> {
    w.into_inner().map_err(|e| anyhow::anyhow!("csv: {e}"))
}

fn e(x: f64) -> String {
    format!("{x:e}")
}

pub fn density_eval(config: &Path, out: &Path) -> anyhow::Result<bool> {
    let cfg: DensityConfig = load(config)?;
    cfg.a0.validate()?;
    cfg.a1.validate()?;
    let (gm, hm) = match cfg.mode {
        DensityMode::Closed => (GMode::ClosedForm, HMode::ClosedForm),
        DensityMode::Numeric => {
            let opts = NumericOptions {
                seed: cfg.seed,
                ..Default::default()
            };
            (
                GMode::Numeric {
                    k_samples: opts.k_samples,
                },
                HMode::Numeric(opts),
            )
        }
    };
    let mut w = csv_writer();
    w.write_record([
        "xx",
        "yy",
        "xy",
        "g",
        "h",
        "wbar",
        "tau_xx",
        "tau_yy",
        "tau_xy",
        "recession",
    ])?;
    for xi in &cfg.xi {
        let wb = wbar(&cfg.a0, &cfg.a1, xi, cfg.alpha, cfg.kappa)?;
        w.write_record([
            e(xi.xx),
            e(xi.yy),
            e(xi.xy),
            e(g(&cfg.a0, xi, gm)?),
            e(h(&cfg.a0, xi, hm)?),
            e(wb.value),
            e(wb.tau.xx),
            e(wb.tau.yy),
            e(wb.tau.xy),
            e(wbar_recession(&cfg.a0, xi, cfg.alpha, cfg.kappa)?),
        ])?;
    }
    write(out, "density.csv", finish(w)?)?;
    let mut w = csv_writer();
    w.write_record(["t", "phi"])?;
    for &t in &cfg.t {
        w.write_record([
            e(t),
            e(phi(
                t,
                cfg.alpha,
                cfg.beta,
                cfg.kappa,
                cfg.theta0_deg.to_radians(),
            )?),
        ])?;
    }
    write(out, "phi.csv", finish(w)?)?;
    Ok(true)
}

fn generate(gen: &Generator) -> anyhow::Result<Triangulation> {
    Ok(match gen {
        Generator::Uniform { n, refine } => uniform_mesh(*n, *refine),
        Generator::Stripe {
            b,
            damaged,
            sound,
            cross,
        } => {
            let (_, side) = unit_square_frame(*b);
            stripe_mesh(*b, (*damaged, *sound), *cross, side)?
        }
        Generator::DoubleStripe {
            b,
            damaged,
            sound,
            cross,
        } => {
            let (_, side) = unit_square_frame(*b);
            double_stripe_mesh(
                *b,
                (damaged[0], sound[0]),
                (damaged[1], sound[1]),
                *cross,
                side,
            )?
        }
        Generator::JumpStrip {
            band_halfwidth,
            layer_height,
            n_columns,
            row_height,
        } => jump_strip_mesh(*band_halfwidth, *layer_height, *n_columns, *row_height)?.mesh,
        Generator::Cohesive {
            segment,
            amplitude,
            h,
            theta_deg,
            theta0_deg,
        } => {
            let l = *amplitude;
            cohesive_mesh(
                (segment[0], segment[1]),
                &|_| l,
                *h,
                theta_deg.to_radians(),
                theta0_deg.to_radians(),
            )?
            .mesh
        }
    })
}

fn check(mesh: &Triangulation, class: &MeshClassConfig) -> AdmissibilityReport {
    validate(
        mesh,
        class.h,
        class.omega_factor,
        class.theta0_deg.to_radians(),
    )
}

fn report_json(r: &AdmissibilityReport) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(r)?)
}

pub fn mesh_gen(config: &Path, out: &Path) -> anyhow::Result<bool> {
    let cfg: MeshGenConfig = load(config)?;
    let mesh = generate(&cfg.generator)?;
    write(out, "mesh.json", mesh_to_json(&mesh))?;
    match &cfg.validate {
        Some(class) => {
            let r = check(&mesh, class);
            write(out, "validation.json", report_json(&r)?)?;
            Ok(r.valid)
        }
        None => Ok(true),
    }
}

pub fn mesh_validate(config: &Path, out: &Path) -> anyhow::Result<bool> {
    let cfg: MeshValidateConfig = load(config)?;
    let path = resolve(config, &cfg.mesh);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let mesh = mesh_from_json(&text)?;
    let r = check(&mesh, &cfg.class);
    write(out, "validation.json", report_json(&r)?)?;
    for v in r.violations.iter().take(10) {
        eprintln!("triangle {}: {}", v.triangle, v.reason);
    }
    Ok(r.valid)
}

fn boundary_field(b: &Boundary) -> Box<dyn Fn(Point2) -> [f64; 2] + Sync + '_> {
    match b {
        Boundary::Affine { xi } => Box::new(move |p: Point2| xi.apply([p.x, p.y])),
        Boundary::Step { jump } => {
            Box::new(move |p: Point2| if p.y > 0.5 { *jump } else { [0.0, 0.0] })
        }
        Boundary::Polynomial(v) => Box::new(move |p| v.value(p)),
    }
}

pub fn solve(config: &Path, out: &Path) -> anyhow::Result<bool> {
    let cfg: SolveConfig = load(config)?;
    let mesh = match &cfg.mesh {
        MeshSource::File(p) => {
            let path = resolve(config, p);
            mesh_from_json(
                &fs::read_to_string(&path)
                    .with_context(|| format!("reading {}", path.display()))?,
            )?
        }
        MeshSource::Generator(gen) => generate(gen)?,
    };
    let params: RegimeParams = cfg.params.into();
    params.validate()?;
    let f = boundary_field(&cfg.dirichlet);
    let dirichlet = Dirichlet::from_fn(&mesh, f);
    let chi = match cfg.chi_init {
        SolveInit::Sound => DamageField::sound(mesh.n_triangles()),
        SolveInit::Damaged => DamageField {
            chi: vec![true; mesh.n_triangles()],
        },
        SolveInit::Tags => DamageField::from_tags(&mesh),
    };
    let opts = AltMinOptions {
        max_iters: cfg.max_iters,
        energy_tol: cfg.energy_tol,
        solver: cfg.solver.unwrap_or_default(),
    };
    let res = alt_minimize(&mesh, &dirichlet, &cfg.a0, &cfg.a1, &params, &chi, &opts)?;
    write(out, "mesh.json", mesh_to_json(&mesh))?;
    write(out, "fields.json", fields_json(&res.u, &res.chi))?;
    let mut w = csv_writer();
    w.write_record([
        "step",
        "sound_elastic",
        "damaged_elastic",
        "dissipation",
        "total",
    ])?;
    for (k, b) in res.history.iter().enumerate() {
        w.write_record([
            k.to_string(),
            e(b.sound_elastic),
            e(b.damaged_elastic),
            e(b.dissipation),
            e(b.total),
        ])?;
    }
    write(out, "energy_history.csv", finish(w)?)?;
    println!(
        "iterations: {}  energy: {:e}",
        res.iterations,
        res.history.last().map_or(f64::NAN, |b| b.total)
    );
    Ok(true)
}

pub fn recover(config: &Path, out: &Path) -> anyhow::Result<bool> {
    let cfg: SweepConfig = load(config)?;
    cfg.law.validate()?;
    cfg.a0.validate()?;
    cfg.a1.validate()?;
    let class = classify_regime(&cfg.law, cfg.kappa, cfg.theta0());
    let mut w = csv_writer();
    w.write_record([
        "eps",
        "eta",
        "h",
        "sound_elastic",
        "damaged_elastic",
        "dissipation",
        "total",
        "predicted_limit",
        "valid",
    ])?;
    let mut ok = true;
    for (k, &eps) in cfg.law.eps.iter().enumerate() {
        let params = params_at(&cfg, &class, eps);
        let built = build(&cfg, &class, &params).with_context(|| format!("ε = {eps}"))?;
        let m = measure(&built, &cfg.a0, &cfg.a1, &params)?;
        let (valid, written) = match &built {
            Built::Mesh(o) => (
                o.validate(),
                Some((o.mesh.clone(), o.u.clone(), o.chi.clone())),
            ),
            Built::Trivial(t) => (
                t.validate_patch(),
                t.materialize(MAX_WRITTEN_TRIANGLES)
                    .ok()
                    .map(|o| (o.mesh, o.u, o.chi)),
            ),
        };
        if let Some((mesh, u, chi)) = written {
            write(out, &format!("recover_{k}_mesh.json"), mesh_to_json(&mesh))?;
            write(
                out,
                &format!("recover_{k}_fields.json"),
                fields_json(&u, &chi),
            )?;
        }
        ok &= valid.valid;
        let b = m.breakdown;
        w.write_record([
            e(eps),
            e(params.eta),
            e(params.h),
            e(b.sound_elastic),
            e(b.damaged_elastic),
            e(b.dissipation),
            e(b.total),
            e(m.predicted * m.window),
            valid.valid.to_string(),
        ])?;
    }
    write(out, "recover.csv", finish(w)?)?;
    Ok(ok)
}

pub fn oned(config: &Path, out: &Path) -> anyhow::Result<bool> {
    let cfg: OnedConfig = load(config)?;
    cfg.law.validate()?;
    let mut w = csv_writer();
    w.write_record(["n", "eps", "brute_energy", "sqw_value", "recovery_energy"])?;
    for &eps in &cfg.law.eps {
        let params = RegimeParams {
            kappa: cfg.kappa,
            eps,
            eta: cfg.law.eta(eps),
            h: cfg.law.h(eps),
            omega_factor: cfg.omega_factor,
            theta0: std::f64::consts::FRAC_PI_4,
            alpha: Limit::Finite(cfg.law.eta(eps) / eps),
            beta: Limit::Finite(cfg.law.h(eps) / eps),
        };
        let Some(n) = admissible_grid_size(params.h, cfg.omega_factor, cfg.intervals) else {
            bail!("no admissible uniform grid at ε = {eps}");
        };
        let brute = brute_min_1d(cfg.xi, n, &params, cfg.a0, cfg.a1)?;
        let sqw = sqw1d(cfg.xi, eps, cfg.a0, cfg.a1)?;
        let rec = recover_affine_1d(cfg.xi, &params, cfg.a0, cfg.a1)?;
        w.write_record([
            n.to_string(),
            e(eps),
            e(brute.best_energy),
            e(sqw.value),
            e(rec.energy),
        ])?;
    }
    write(out, "oned.csv", finish(w)?)?;
    Ok(true)
}

pub fn sweep(config: &Path, out: &Path) -> anyhow::Result<bool> {
    let cfg: SweepConfig = load(config)?;
    let report = run_sweep(&cfg)?;
    let mut buf = Vec::new();
    write_csv(&report.rows, &mut buf)?;
    write(out, "sweep.csv", buf)?;
    let c = &report.classification;
    println!(
        "regime: {}  alpha: {:?}  beta: {:?}  theta0_bound_ok: {}",
        c.regime.name(),
        c.alpha,
        c.beta,
        c.theta0_bound_ok
    );
    for r in report.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("ε = {}: {}", r.eps, r.error.as_deref().unwrap_or(""));
    }
    Ok(report.all_ok())
}

pub fn plot(config: &Path, out: &Path) -> anyhow::Result<bool> {
    let cfg: PlotConfig = load(config)?;
    let path = resolve(config, &cfg.csv);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let svg = emit_plot(&text, cfg.title.as_deref()).with_context(|| path.display().to_string())?;
    write(out, "plot.svg", svg)?;
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gamma_damage_core::densities::Sym2;

    #[test]
    fn relative_paths_follow_the_config() {
        assert_eq!(
            resolve(Path::new("/a/b/c.json"), "m.json"),
            PathBuf::from("/a/b/m.json")
        );
        assert_eq!(
            resolve(Path::new("/a/b/c.json"), "/m.json"),
            PathBuf::from("/m.json")
        );
    }

    #[test]
    fn fields_json_encodes_chi_as_bits() {
        let u = DisplacementField {
            values: vec![[0.5, -1.0]],
        };
        let chi = DamageField {
            chi: vec![true, false],
        };
        let v: serde_json::Value = serde_json::from_str(&fields_json(&u, &chi)).unwrap();
        assert_eq!(v["chi"], json!([1, 0]));
        assert_eq!(v["displacement"], json!([[0.5, -1.0]]));
    }

    #[test]
    fn step_boundary_jumps_at_half() {
        let f = boundary_field(&Boundary::Step { jump: [1.0, 2.0] });
        assert_eq!(f(Point2::new(0.3, 0.4)), [0.0, 0.0]);
        assert_eq!(f(Point2::new(0.3, 0.6)), [1.0, 2.0]);
        let xi = Sym2::new(1.0, 2.0, 0.5);
        assert_eq!(
            boundary_field(&Boundary::Affine { xi })(Point2::new(1.0, 0.0)),
            [1.0, 0.5]
        );
    }
}
