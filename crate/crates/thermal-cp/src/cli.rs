//! Command line front end: scene runs, sweeps and result tables.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::born_solver::{symmetry_reduction, Discretization, GammaSolver, Kernel, Method, VoxelBody};
use crate::closed_forms::{
    cylinder_trace_gamma0, isotropic_potential, plate_gamma0, sphere_trace_gamma0, CylinderOptions, MSum,
};
use crate::criteria::{criteria_report, delta_gamma_samples, effective_extent, estimate_eta, CriteriaReport};
use crate::scene::{parse_method, Scene};
use crate::table::{Column, Table};
use crate::thermal::{
    linear_t_correction, temperature_independent_potential, total_potential, GammaProvider, Particle, SolverGamma,
    ThermalContext,
};
use crate::units::energy_for_kl;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "thermal-cp", version, about = "Thermal Casimir-Polder potentials near conducting bodies")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Scene file (TOML).
    #[arg(long, global = true)]
    pub scene: Option<PathBuf>,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Relative tolerance of the frequency quadratures.
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    /// Relative tail tolerance of Matsubara sums.
    #[arg(long, global = true)]
    pub matsubara_tail_tol: Option<f64>,
    /// Largest Matsubara index.
    #[arg(long, global = true)]
    pub j_max: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long, global = true, value_enum)]
    pub kernel: Option<KernelArg>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Born,
    Solve,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KernelArg {
    Retarded,
    Nonretarded,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GeometryArg {
    Sphere,
    Plate,
    Cylinder,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Potentials at every evaluation point of the scene.
    Compute {
        /// Overrides the scene temperature (K).
        #[arg(long)]
        temperature: Option<f64>,
    },
    /// Potentials along a temperature, kr or position sweep.
    ///
    /// Without a sweep flag the scene's evaluation points are swept.
    Sweep {
        /// start:stop:step in K.
        #[arg(long, conflicts_with = "kr_sweep")]
        temperature_sweep: Option<String>,
        /// Comma-separated kr values for the first transition.
        #[arg(long, value_delimiter = ',')]
        kr_sweep: Option<Vec<f64>>,
        /// Length L in kL (nm); defaults to the distance of the point from the origin.
        #[arg(long)]
        kr_length: Option<f64>,
        /// Temperature (K) for kr and position sweeps.
        #[arg(long)]
        temperature: Option<f64>,
    },
    /// Perfect-conductor closed forms, one row.
    ClosedForm {
        #[arg(long, value_enum)]
        geometry: GeometryArg,
        /// r/R for the sphere, ρ/R for the cylinder, z/R for the plate.
        #[arg(long)]
        rho_over_r: f64,
        /// Σ|d|² in Debye².
        #[arg(long, default_value_t = 1.0)]
        d2_debye2: f64,
        /// Length scale R (nm).
        #[arg(long, default_value_t = 1000.0)]
        radius_nm: f64,
        /// Cylinder m-sum convention: half, full or symmetric.
        #[arg(long, default_value = "half")]
        m_sum: String,
    },
    /// Validity criteria report for the first evaluation point.
    CheckCriteria {
        /// Overrides the scene temperature (K).
        #[arg(long)]
        temperature: Option<f64>,
        /// Cavity quality factor used in the dominance criterion.
        #[arg(long)]
        q_factor: Option<f64>,
        /// Also fit η on a frequency grid below the smallest transition.
        #[arg(long)]
        eta: bool,
    },
    /// Voxelizes the scene body.
    Voxelize {
        /// Print a summary instead of the cell table.
        #[arg(long)]
        inspect: bool,
    },
}

/// Parses `start:stop:step` into the inclusive grid.
pub fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::validation(format!("range '{spec}': {e}")))?;
    let [start, stop, step] = parts[..] else {
        return Err(Error::validation(format!("range '{spec}' is not start:stop:step")));
    };
    if !(step > 0.0) || stop < start || !start.is_finite() || !stop.is_finite() {
        return Err(Error::validation(format!("range '{spec}' needs start ≤ stop and step > 0")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + step * i as f64).collect())
}

/// What a sweep varies.
#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    Temperature(Vec<f64>),
    /// kL values for the first transition at one point, with L in nm.
    Kr { values: Vec<f64>, length: f64 },
    /// The scene's evaluation points.
    Position,
}

impl Sweep {
    fn tag(&self) -> &'static str {
        match self {
            Sweep::Temperature(_) => "temperature",
            Sweep::Kr { .. } => "kr",
            Sweep::Position => "position",
        }
    }
}

/// Everything shared by the rows of one run.
pub struct Engine {
    pub scene: Scene,
    pub solver: Arc<GammaSolver>,
}

impl Engine {
    pub fn new(scene: Scene) -> Result<Self> {
        let body = scene.voxelize()?;
        let solver = Arc::new(GammaSolver::new(Arc::new(body), scene.solver.clone()));
        Ok(Engine { scene, solver })
    }

    pub fn body(&self) -> &VoxelBody {
        self.solver.body()
    }

    pub fn provider(&self, point: Vector3<f64>, kernel: Kernel) -> Result<SolverGamma> {
        SolverGamma::new(self.solver.clone(), point, kernel, self.scene.method)
    }

    fn metadata(&self, table: &mut Table) {
        let s = &self.scene;
        table
            .meta("scene_hash", &s.hash)
            .meta("body_hash", self.body().hash())
            .meta("cells", self.body().len())
            .meta("material", s.material.tag())
            .meta("kernel", s.kernel.tag())
            .meta("method", method_tag(s.method))
            .meta("discretization", discretization_tag(s.solver.discretization))
            .meta("m_sum", MSum::default().tag())
            .meta("norm", "frobenius")
            .meta("matsubara_rel_tail_tol", format!("{:e}", s.thermal.matsubara.rel_tail_tol))
            .meta("matsubara_j_max", s.thermal.matsubara.j_max)
            .meta("quadrature_rel_tol", format!("{:e}", s.thermal.quadrature.rel_tol));
    }
}

fn method_tag(m: Method) -> String {
    match m {
        Method::DirectSolve => "solve".into(),
        Method::BornSeries { n_max } => format!("born:{n_max}"),
    }
}

fn discretization_tag(d: Discretization) -> &'static str {
    match d {
        Discretization::Collocation => "collocation",
        Discretization::Galerkin => "galerkin",
    }
}

/// One row: (U_total, U_nr, U_r, U₀, U_total/U₀, predicted ΔU/U₀).
pub fn potential_row(p: &Particle, provider: &dyn GammaProvider, ctx: &ThermalContext) -> Result<[f64; 6]> {
    let u = total_potential(p, provider, ctx)?;
    let u0 = temperature_independent_potential(p, &provider.gamma0()?);
    let predicted = linear_t_correction(p, provider, ctx.temperature)? / u0;
    Ok([u.total, u.nonresonant, u.resonant, u0, u.total / u0, predicted])
}

fn potential_columns() -> Vec<Column> {
    vec![
        Column::new("U_total", "eV"),
        Column::new("U_nr", "eV"),
        Column::new("U_r", "eV"),
        Column::new("U0", "eV"),
        Column::new("U_total/U0", "1"),
        Column::new("linear_T_prediction", "1"),
    ]
}

/// Runs a sweep. Rows follow input order; the first failing row becomes a
/// failure marker, later rows are dropped and the error is returned too.
pub fn run_sweep(engine: &Engine, sweep: &Sweep) -> (Table, Option<Error>) {
    let scene = &engine.scene;
    let lead: Vec<Column> = match sweep {
        Sweep::Temperature(_) => vec![Column::new("T", "K")],
        Sweep::Kr { .. } => vec![Column::new("kr", "1"), Column::new("omega", "eV")],
        Sweep::Position => vec![Column::new("x", "nm"), Column::new("y", "nm"), Column::new("z", "nm")],
    };
    let mut table = Table::new(lead.into_iter().chain(potential_columns()).collect());
    engine.metadata(&mut table);
    table.meta("sweep", sweep.tag()).meta("temperature_k", scene.thermal.temperature);

    let rows: Vec<(f64, Result<Vec<f64>>)> = match sweep {
        Sweep::Temperature(ts) => match scene.point().and_then(|r| engine.provider(r, scene.kernel)) {
            Err(e) => vec![(ts.first().copied().unwrap_or(0.0), Err(e))],
            Ok(provider) => ts
                .par_iter()
                .map(|&t| {
                    let mut ctx = scene.thermal.clone();
                    ctx.temperature = t;
                    let row = ctx
                        .validate()
                        .and_then(|_| potential_row(&scene.particle, &provider, &ctx))
                        .map(|v| std::iter::once(t).chain(v).collect());
                    (t, row)
                })
                .collect(),
        },
        Sweep::Kr { values, length } => match scene.point().and_then(|r| engine.provider(r, scene.kernel)) {
            Err(e) => vec![(values.first().copied().unwrap_or(0.0), Err(e))],
            Ok(provider) => values
                .par_iter()
                .map(|&kr| {
                    let row = scaled_particle(&scene.particle, kr, *length).and_then(|(p, w)| {
                        potential_row(&p, &provider, &scene.thermal).map(|v| [kr, w].into_iter().chain(v).collect())
                    });
                    (kr, row)
                })
                .collect(),
        },
        Sweep::Position => scene
            .points
            .par_iter()
            .enumerate()
            .map(|(i, &r)| {
                let row = engine.provider(r, scene.kernel).and_then(|provider| {
                    potential_row(&scene.particle, &provider, &scene.thermal)
                        .map(|v| [r.x, r.y, r.z].into_iter().chain(v).collect())
                });
                (i as f64, row)
            })
            .collect(),
    };
    for (at, row) in rows {
        match row.and_then(|v| table.push(v)) {
            Ok(()) => {}
            Err(e) => {
                table.push_failure(at, &e);
                return (table, Some(e));
            }
        }
    }
    (table, None)
}

/// Rescales all transition frequencies so the first one has k·length = kr.
pub fn scaled_particle(p: &Particle, kr: f64, length: f64) -> Result<(Particle, f64)> {
    if !(kr > 0.0 && length > 0.0) {
        return Err(Error::validation(format!("kr sweep needs kr > 0 and L > 0 (kr = {kr}, L = {length})")));
    }
    let first = p.transitions[0].omega_ev;
    let target = energy_for_kl(kr, length);
    let factor = target / first.abs();
    let mut q = p.clone();
    for t in &mut q.transitions {
        t.omega_ev *= factor;
    }
    Ok((q, target.copysign(first)))
}

/// One-row closed-form table.
pub fn closed_form_table(geometry: GeometryArg, ratio: f64, d2: f64, radius: f64, convention: MSum) -> Result<Table> {
    let (name, trace) = match geometry {
        GeometryArg::Sphere => ("sphere", sphere_trace_gamma0(ratio * radius, radius)?),
        GeometryArg::Plate => ("plate", plate_gamma0(ratio * radius)?.trace().re),
        GeometryArg::Cylinder => {
            let opts = CylinderOptions {
                convention,
                ..Default::default()
            };
            ("cylinder", cylinder_trace_gamma0(ratio * radius, radius, &opts)?)
        }
    };
    let mut table = Table::new(vec![
        Column::new("rho/R", "1"),
        Column::new("R", "nm"),
        Column::new("TrGamma0*R^3", "1"),
        Column::new("U", "eV"),
    ]);
    table
        .meta("geometry", name)
        .meta("m_sum", convention.tag())
        .meta("d2_debye2", d2)
        .meta("norm", "frobenius");
    table.push(vec![ratio, radius, trace * radius.powi(3), isotropic_potential(trace, d2)])?;
    Ok(table)
}

/// Criteria report at the first evaluation point, optionally with an η fit.
pub fn criteria_for_scene(engine: &Engine, temperature: f64, q_factor: Option<f64>, eta: bool) -> Result<CriteriaReport> {
    let scene = &engine.scene;
    let r = scene.point()?;
    let nonret = engine.provider(r, Kernel::Nonretarded)?;
    let strengths = engine.solver.strengths(Complex64::new(0.0, 0.0))?;
    let z_tilde = effective_extent(engine.body(), &r, &strengths, scene.extent_cutoff)?;
    let mut report = criteria_report(&scene.particle, &nonret, z_tilde, temperature, q_factor, scene.thresholds)?;
    if eta {
        let w = scene
            .particle
            .transitions
            .iter()
            .map(|t| t.omega_ev.abs())
            .fold(f64::INFINITY, f64::min);
        let grid: Vec<f64> = (0..7).map(|i| w * 10f64.powf(i as f64 / 3.0 - 2.0)).collect();
        report.eta = Some(estimate_eta(&delta_gamma_samples(&nonret, &grid)?)?);
        let retarded = engine.provider(r, Kernel::Retarded)?;
        report.slope = Some(linear_t_correction(&scene.particle, &retarded, temperature)? / temperature.max(f64::MIN_POSITIVE));
    }
    Ok(report)
}

/// Plain-text rendering of a criteria report.
pub fn render_report(report: &CriteriaReport) -> String {
    let mut out = format!(
        "criteria at T = {} K, z~ = {:.4e} nm, thresholds {}/{}\n{:>4} {:>14} {:>12} {:>9} {:>12} {:>9}\n",
        report.temperature,
        report.z_tilde,
        report.thresholds.pass,
        report.thresholds.marginal,
        "k",
        "omega [eV]",
        "(A) retard",
        "verdict",
        "(B) refl",
        "verdict"
    );
    for (i, t) in report.transitions.iter().enumerate() {
        out += &format!(
            "{i:>4} {:>14.6e} {:>12.4e} {:>9} {:>12.4e} {:>9}\n",
            t.omega_ev, t.retardation, t.retardation_verdict, t.reflectivity, t.reflectivity_verdict
        );
    }
    match &report.dominance {
        Some((k, pairs)) if pairs.is_empty() => out += &format!("(C) dominant transition {k}, no competitors\n"),
        Some((k, pairs)) => {
            for (l, v, verdict) in pairs {
                out += &format!("(C) dominance of {k} over {l}: {v:.4e} {verdict}\n");
            }
        }
        None => out += "(C) no transition passes (A) and (B)\n",
    }
    if let Some(e) = &report.eta {
        out += &format!("eta = {:.4} (case {}), fit residual {:.2e}\n", e.eta, e.class.tag(), e.residual);
    }
    out += &format!("overall: {}\n", report.overall());
    out
}

fn voxel_table(body: &VoxelBody, scene_hash: &str) -> Result<Table> {
    let mut table = Table::new(vec![
        Column::new("x", "nm"),
        Column::new("y", "nm"),
        Column::new("z", "nm"),
        Column::new("volume", "nm^3"),
        Column::new("material", "index"),
    ]);
    table
        .meta("scene_hash", scene_hash)
        .meta("body_hash", body.hash())
        .meta("spacing_nm", body.spacing);
    for c in &body.cells {
        table.push(vec![c.center.x, c.center.y, c.center.z, c.volume, c.material as f64])?;
    }
    Ok(table)
}

fn inspect(engine: &Engine) -> String {
    let body = engine.body();
    let scene = &engine.scene;
    let (lo, hi) = body.bounds();
    let mut out = format!(
        "body {}\nhash {}\ncells {}\nspacing {:.6e} nm\nvolume {:.6e} nm^3",
        body.label,
        body.hash(),
        body.len(),
        body.spacing,
        body.total_volume()
    );
    if let Some(v) = scene.shape.volume() {
        out += &format!(" (exact {v:.6e}, ratio {:.4})", body.total_volume() / v);
    }
    out += &format!(
        "\nbounds [{:.4e}, {:.4e}, {:.4e}] .. [{:.4e}, {:.4e}, {:.4e}] nm\n",
        lo.x, lo.y, lo.z, hi.x, hi.y, hi.z
    );
    for r in &scene.points {
        let red = symmetry_reduction(body, r, scene.solver.use_symmetry);
        let planes = red.planes.iter().filter(|p| p.is_some()).count();
        out += &format!(
            "point ({}, {}, {}) nm: {planes} mirror planes, {} blocks of {} cells\n",
            r.x,
            r.y,
            r.z,
            red.elements.len(),
            red.reps.len()
        );
    }
    out
}

fn load_scene(g: &GlobalArgs) -> Result<Scene> {
    let path = g
        .scene
        .as_deref()
        .ok_or_else(|| Error::validation("this command needs --scene <file>"))?;
    let mut scene = Scene::read(path)?;
    if let Some(v) = g.rel_tol {
        if !(v > 0.0) {
            return Err(Error::validation(format!("--rel-tol must be positive, got {v}")));
        }
        scene.thermal.quadrature.rel_tol = v;
    }
    if let Some(v) = g.matsubara_tail_tol {
        scene.thermal.matsubara.rel_tail_tol = v;
    }
    if let Some(v) = g.j_max {
        scene.thermal.matsubara.j_max = v;
    }
    if let Some(m) = g.method {
        let terms = match scene.method {
            Method::BornSeries { n_max } => Some(n_max),
            Method::DirectSolve => None,
        };
        scene.method = parse_method(
            match m {
                MethodArg::Born => "born",
                MethodArg::Solve => "solve",
            },
            terms,
        )?;
    }
    if let Some(k) = g.kernel {
        scene.kernel = match k {
            KernelArg::Retarded => Kernel::Retarded,
            KernelArg::Nonretarded => Kernel::Nonretarded,
        };
    }
    scene.thermal.validate()?;
    Ok(scene)
}

fn set_temperature(scene: &mut Scene, t: Option<f64>) -> Result<()> {
    if let Some(t) = t {
        scene.thermal.temperature = t;
        scene.thermal.validate()?;
    }
    Ok(())
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_table(table: &Table, output: Option<&Path>) -> Result<()> {
    emit(&table.render(true), output)
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let out = g.output.as_deref();
    match cli.command {
        Command::ClosedForm {
            geometry,
            rho_over_r,
            d2_debye2,
            radius_nm,
            ref m_sum,
        } => {
            let table = closed_form_table(geometry, rho_over_r, d2_debye2, radius_nm, m_sum.parse()?)?;
            emit_table(&table, out)
        }
        Command::Compute { temperature } => {
            let mut scene = load_scene(g)?;
            set_temperature(&mut scene, temperature)?;
            let (table, err) = run_sweep(&Engine::new(scene)?, &Sweep::Position);
            emit_table(&table, out)?;
            err.map_or(Ok(()), Err)
        }
        Command::Sweep {
            ref temperature_sweep,
            ref kr_sweep,
            kr_length,
            temperature,
        } => {
            let mut scene = load_scene(g)?;
            set_temperature(&mut scene, temperature)?;
            let sweep = match (temperature_sweep, kr_sweep) {
                (Some(spec), _) => Sweep::Temperature(parse_range(spec)?),
                (None, Some(values)) => {
                    let length = match kr_length {
                        Some(l) => l,
                        None => scene.point()?.norm(),
                    };
                    Sweep::Kr {
                        values: values.clone(),
                        length,
                    }
                }
                (None, None) => Sweep::Position,
            };
            let (table, err) = run_sweep(&Engine::new(scene)?, &sweep);
            emit_table(&table, out)?;
            err.map_or(Ok(()), Err)
        }
        Command::CheckCriteria {
            temperature,
            q_factor,
            eta,
        } => {
            let mut scene = load_scene(g)?;
            set_temperature(&mut scene, temperature)?;
            let t = scene.thermal.temperature;
            let q = q_factor.or(scene.q_factor);
            let hash = scene.hash.clone();
            let report = criteria_for_scene(&Engine::new(scene)?, t, q, eta)?;
            print!("{}", render_report(&report));
            if let Some(path) = out {
                let mut kv = format!("schema = criteria/1\nscene_hash = {hash}\n");
                for (k, v) in report.key_values() {
                    kv += &format!("{k} = {v}\n");
                }
                emit(&kv, Some(path))?;
            }
            Ok(())
        }
        Command::Voxelize { inspect: summary } => {
            let scene = load_scene(g)?;
            let engine = Engine::new(scene)?;
            if summary {
                emit(&inspect(&engine), out)
            } else {
                emit_table(&voxel_table(engine.body(), &engine.scene.hash)?, out)
            }
        }
    }
}

/// Entry point: parses `args`, runs, and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads.unwrap_or(0))
        .build();
    let result = match pool {
        Ok(pool) => pool.install(|| run(cli)),
        Err(e) => Err(Error::Resource(format!("thread pool: {e}"))),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
