use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::causality::{decay_fit, free_commutator, SpacetimePair};
use crate::dynamics::{
    cluster_row, flying_number_conservation, fluorescence_scan, ClusterRow, EvolutionPlan, FluorescencePoint,
    OutputField, ScatterContext, ScatterOptions,
};
use crate::groundstate::{check_lemma1_bound, cloud_profile, solve_lattice, variational_gaps};
use crate::linalg::lanczos::LanczosOptions;
use crate::model::LatticeSpec;
use crate::smatrix::{decay_rates, output_wavefunction, MomentumGrid, PacketPair, TMatrix};
use crate::quadrature::QuadOptions;
use crate::wavepacket::SupportRule;
use crate::Error;

use super::config::*;
use super::output::{plot_script, write_json, Manifest, Table, VERSION};
use super::CliError;

/// Paths written by a run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
}

struct Emitted {
    tables: Vec<Table>,
    summary: serde_json::Value,
}

/// Runs `config` with `threads` workers and writes everything into `dir`.
pub fn execute(config: &RunConfig, dir: &Path, threads: usize) -> Result<RunOutput, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| CliError::Config(Error::Precondition(format!("thread pool: {e}"))))?;
    let emitted = pool.install(|| dispatch(config))?;
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files = Vec::new();
    for t in &emitted.tables {
        files.push(t.write(dir, config.format)?);
    }
    let summary = dir.join("summary.json");
    write_json(&summary, &emitted.summary)?;
    files.push(summary);
    let mut script = plot_script(&emitted.tables.iter().collect::<Vec<_>>());
    if config.format == Format::Json {
        script.insert_str(0, "# the panels below read CSV tables; rerun with \"format\": \"csv\"\n");
    }
    let plots = dir.join("plots.gp");
    fs::write(&plots, script).map_err(|source| CliError::Io {
        path: plots.clone(),
        source,
    })?;
    files.push(plots);
    let manifest = dir.join("manifest.json");
    let names: Vec<String> = files
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    write_json(
        &manifest,
        &Manifest {
            version: VERSION,
            command: config.command(),
            threads: threads.max(1),
            config,
            files: names,
        },
    )?;
    files.push(manifest);
    Ok(RunOutput {
        dir: dir.to_path_buf(),
        files,
    })
}

fn dispatch(config: &RunConfig) -> Result<Emitted, CliError> {
    let seed = config.seed;
    match &config.experiment {
        Experiment::Groundstate(job) => groundstate(job, seed),
        Experiment::Commutator(job) => commutator(job),
        Experiment::Scatter(job) => scatter(job, seed),
        Experiment::FluorescenceScan(job) => fluorescence(job, seed),
        Experiment::ClusterCheck(job) => cluster(job, seed),
        Experiment::Smatrix(job) => smatrix(job),
        Experiment::DecayFit(job) => decay(job),
    }
}

fn context(lattice: &LatticeSpec<f64>, seed: u64, widths: f64) -> Result<ScatterContext<f64>, CliError> {
    let options = ScatterOptions {
        lanczos: LanczosOptions {
            seed,
            ..Default::default()
        },
        support: SupportRule::input().with_widths(widths),
        ..Default::default()
    };
    Ok(ScatterContext::new(lattice, options)?)
}

fn groundstate(job: &GroundstateJob, seed: u64) -> Result<Emitted, CliError> {
    let (basis, h, gs) = solve_lattice(&job.lattice, seed)?;
    let cloud = cloud_profile(&gs.state, &basis)?;
    let mut t = Table::new("cloud", &[("x", "sites"), ("n_x", "photons")]);
    for (x, n) in cloud.sites.iter().zip(&cloud.density) {
        t.push(vec![*x as f64, *n]);
    }
    let gaps = variational_gaps(&gs.state, gs.energy, &h, &basis);
    let mut v = Table::new("variational", &[("k", "1/site"), ("gap", "epsilon")]);
    for (k, g) in &gaps {
        v.push(vec![*k, *g]);
    }
    let lemma = if job.lattice.g != 0.0 {
        Some(check_lemma1_bound(&gs.state, &basis, &job.lattice)?)
    } else {
        None
    };
    let summary = json!({
        "energy": gs.energy,
        "dimension": basis.dim(),
        "total_number": cloud.total_number,
        "qubit_excitation": cloud.qubit_excitation,
        "xi": cloud.xi,
        "fit_r2": cloud.fit_r2,
        "peak_site": cloud.peak_site(),
        "min_variational_gap": gaps.iter().map(|g| g.1).fold(f64::INFINITY, f64::min),
        "lemma1": lemma,
    });
    Ok(Emitted {
        tables: vec![t, v],
        summary,
    })
}

fn commutator(job: &CommutatorJob) -> Result<Emitted, CliError> {
    let c = job.dispersion.max_speed();
    let mut t = Table::new(
        "commutator",
        &[("dx", "length"), ("d_c", "length"), ("re", "1"), ("im", "1"), ("abs", "1"), ("bound", "1")],
    );
    let mut outside = Vec::new();
    for x in job.x.values() {
        let pair = SpacetimePair::new(x, job.t, 0.0, 0.0, c)?;
        let r = free_commutator(&job.first, &job.second, &pair, &job.dispersion)?;
        t.push(vec![x, r.cone_distance, r.value.re, r.value.im, r.value.norm(), r.bound.unwrap_or(f64::NAN)]);
        if r.cone_distance > 0.0 && r.value.norm() > 0.0 {
            outside.push((r.cone_distance, r.value.norm()));
        }
    }
    outside.sort_by(|a, b| a.0.total_cmp(&b.0));
    outside.dedup_by(|a, b| a.0 == b.0);
    let fit = if outside.len() >= 8 { decay_fit(&outside).ok() } else { None };
    Ok(Emitted {
        tables: vec![t],
        summary: json!({ "max_speed": c, "fit_outside_cone": fit }),
    })
}

fn scatter(job: &ScatterJob, seed: u64) -> Result<Emitted, CliError> {
    let ctx = context(&job.lattice, seed, job.support_widths)?;
    let plan = EvolutionPlan {
        t_plus: job.plan.t_plus,
        dt_report: job.plan.dt_report,
        method: job.plan.method,
        tol: job.plan.tol,
    };
    let r = ctx.run(&job.packets, &plan)?;
    let h = (job.lattice.sites as i64 - 1) / 2;
    let mut tables = Vec::new();
    let mut extra = serde_json::Map::new();
    match &r.field {
        OutputField::One(f) => {
            let mut t = Table::new("field", &[("x", "sites"), ("re", "1"), ("im", "1"), ("density", "photons/site")]);
            for (i, v) in f.position.iter().enumerate() {
                t.push(vec![(i as i64 - h) as f64, v.re, v.im, v.norm_sqr()]);
            }
            tables.push(t);
            extra.insert("weight".into(), json!(f.weight()));
        }
        OutputField::Two(f) => {
            let mut t = Table::new("field", &[("x1", "sites"), ("x2", "sites"), ("re", "1"), ("im", "1")]);
            let l = f.sites;
            for a in 0..l {
                for b in 0..l {
                    let v = f.position[a * l + b];
                    t.push(vec![(a as i64 - h) as f64, (b as i64 - h) as f64, v.re, v.im]);
                }
            }
            tables.push(t);
            extra.insert("weight".into(), json!(f.weight()));
            extra.insert("g2_reflected".into(), json!(f.zero_distance_correlation(|x| x < 0)));
            extra.insert("g2_transmitted".into(), json!(f.zero_distance_correlation(|x| x > 0)));
        }
    }
    let d = &r.diagnostics;
    let mut t = Table::new(
        "diagnostics",
        &[("t", "1/epsilon"), ("n_fly", "photons"), ("norm", "1"), ("energy", "epsilon")],
    );
    for i in 0..d.times.len() {
        t.push(vec![d.times[i], d.n_fly[i], d.norm[i], d.energy[i]]);
    }
    tables.push(t);
    extra.insert("flying_number".into(), json!(flying_number_conservation(d)));
    extra.insert("ground_energy".into(), json!(d.ground_energy));
    extra.insert("energy_drift".into(), json!(d.energy_drift()));
    extra.insert("norm_drift".into(), json!(d.norm_drift()));
    Ok(Emitted {
        tables,
        summary: serde_json::Value::Object(extra),
    })
}

fn fluorescence(job: &FluorescenceJob, seed: u64) -> Result<Emitted, CliError> {
    let ctx = context(&job.lattice, seed, job.support_widths)?;
    let points: Vec<FluorescencePoint<f64>> = job
        .ls
        .par_iter()
        .map(|&l| fluorescence_scan(&ctx, &job.geometry, &[l], job.width_factor, job.method).map(|mut v| v.remove(0)))
        .collect::<crate::Result<_>>()?;
    let mut t = Table::new(
        "fluorescence",
        &[("l", "sites"), ("F", "1"), ("shell_weight", "1"), ("dN_fly", "photons")],
    );
    for p in &points {
        t.push(vec![p.l, p.f, p.shell_weight, p.n_fly_change]);
    }
    Ok(Emitted {
        tables: vec![t],
        summary: json!({ "points": points }),
    })
}

fn cluster(job: &ClusterJob, seed: u64) -> Result<Emitted, CliError> {
    let ctx = context(&job.lattice, seed, job.support_widths)?;
    // Every separation uses the same t₊, set by the largest one.
    let l_max = job.ls.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let t_plus = job.geometry.t_plus(l_max, &ctx.dispersion());
    let rows: Vec<ClusterRow<f64>> = job
        .ls
        .par_iter()
        .map(|&l| cluster_row(&ctx, &job.geometry, l, t_plus, job.method))
        .collect::<crate::Result<_>>()?;
    let mut t = Table::new(
        "cluster",
        &[("l", "sites"), ("re_a12", "1"), ("im_a12", "1"), ("abs_a1", "1"), ("abs_a2", "1"), ("deviation", "1")],
    );
    for r in &rows {
        t.push(vec![r.l, r.a12.re, r.a12.im, r.a1.norm(), r.a2.norm(), r.deviation]);
    }
    Ok(Emitted {
        tables: vec![t],
        summary: json!({ "last_deviation": rows.last().map(|r| r.deviation) }),
    })
}

#[derive(Serialize)]
struct PoleInfo {
    re: f64,
    im: f64,
}

fn smatrix(job: &SmatrixJob) -> Result<Emitted, CliError> {
    let tm = TMatrix::new(&job.scatterer)?;
    let m = tm.channels();
    let mut t = Table::new(
        "tmatrix",
        &[("k", "energy"), ("mu", "1"), ("nu", "1"), ("re", "1"), ("im", "1"), ("abs2", "1")],
    );
    let mut worst: f64 = 0.0;
    for k in job.k.values() {
        let mat = tm.matrix(k)?;
        for nu in 0..m {
            for mu in 0..m {
                let v = mat[(mu, nu)];
                t.push(vec![k, mu as f64, nu as f64, v.re, v.im, v.norm_sqr()]);
            }
        }
        worst = worst.max(tm.unitarity_error(k)?);
    }
    let poles: Vec<PoleInfo> = tm.poles.iter().map(|z| PoleInfo { re: z.re, im: z.im }).collect();
    let mut tables = vec![t];
    let mut wave = None;
    if let Some(w) = &job.wavefunction {
        let pair = PacketPair::lorentzian(w.packets.k1, w.packets.k2, w.packets.sigma)?;
        let grid: Vec<(f64, f64)> = w.points.iter().map(|p| (p[0], p[1])).collect();
        let opts = QuadOptions::default().with_abs_tol(1e-10);
        let out = output_wavefunction(&tm, &w.kernel, &pair, w.l, w.mu, w.nu, &grid, &opts)?;
        let mut t = Table::new(
            "wavefunction",
            &[
                ("p1", "energy"),
                ("p2", "energy"),
                ("re_residue", "1/energy"),
                ("im_residue", "1/energy"),
                ("re_quadrature", "1/energy"),
                ("im_quadrature", "1/energy"),
                ("re_elastic", "1/energy"),
                ("im_elastic", "1/energy"),
            ],
        );
        for p in &out.points {
            t.push(vec![
                p.p1,
                p.p2,
                p.residue.re,
                p.residue.im,
                p.quadrature.re,
                p.quadrature.im,
                p.elastic.re,
                p.elastic.im,
            ]);
        }
        tables.push(t);
        wave = Some(out.max_difference);
    }
    Ok(Emitted {
        tables,
        summary: json!({
            "poles": poles,
            "unitarity_error": worst,
            "residue_quadrature_difference": wave,
        }),
    })
}

fn decay(job: &DecayFitJob) -> Result<Emitted, CliError> {
    let tm = TMatrix::new(&job.scatterer)?;
    let pair = PacketPair::lorentzian(job.packets.k1, job.packets.k2, job.packets.sigma)?;
    let grid = MomentumGrid::new(job.grid.center, job.grid.scale, job.grid.nodes);
    let ls = job.ls.values();
    let report = decay_rates(&tm, &job.kernel, &pair, job.mu, job.nu, &ls, &grid)?;
    let mut t = Table::new("continuum_fluorescence", &[("l", "1/c"), ("F", "1")]);
    for (l, f) in report.ls.iter().zip(&report.fluorescence) {
        t.push(vec![*l, *f]);
    }
    let mut r = Table::new("rates", &[("fitted", "c"), ("expected", "c"), ("relative_error", "1")]);
    for m in &report.matches {
        r.push(vec![m.fitted, m.expected, m.relative_error]);
    }
    Ok(Emitted {
        tables: vec![t, r],
        summary: json!({
            "fitted": report.fitted,
            "expected": report.expected,
            "matches": report.matches,
            "all_matched": report.all_matched,
        }),
    })
}
