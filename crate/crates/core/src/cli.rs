//! Run configuration, experiment drivers and file outputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::assembly::TOP;
use crate::diagnostics::{observed_order, ErrorReport};
use crate::driver::{simulate, MarchOptions};
use crate::error::{Error, Result};
use crate::geometry::{CrossSection, PointKey};
use crate::linsolve::{SlabSolution, SolveOptions};
use crate::mesh::{BoxDomain, TetMesh, TimeGrid};
use crate::problems::{builtin, ProblemDefinition};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "EVOSURF_THREADS";

/// Settings of a single simulation, read from a flat `key = value` file.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    pub h: f64,
    pub dt: f64,
    pub t_end: f64,
    pub nu_override: Option<f64>,
    pub domain: BoxDomain<f64>,
    pub outputs: PathBuf,
    pub dump_surfaces: bool,
    pub solver_tol: f64,
}

fn parse_scalar(key: &str, s: &str) -> Result<f64> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad_value(key, s))?;
            let b: f64 = b.trim().parse().map_err(|_| bad_value(key, s))?;
            a / b
        }
        None => s.parse().map_err(|_| bad_value(key, s))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad_value(key, s))
    }
}

fn bad_value(key: &str, s: &str) -> Error {
    Error::Config(format!("invalid value '{s}' for '{key}'"))
}

fn parse_bool(key: &str, s: &str) -> Result<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(bad_value(key, s)),
    }
}

impl RunConfig {
    /// Default settings of a built-in problem with the given resolution.
    pub fn new(problem: &str, h: f64, dt: f64) -> Result<Self> {
        let cfg = Self::defaults(problem, h, dt)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn defaults(problem: &str, h: f64, dt: f64) -> Result<Self> {
        let p: ProblemDefinition<f64> = builtin(problem)?;
        Ok(Self {
            problem: problem.to_string(),
            h,
            dt,
            t_end: p.default_t_end,
            nu_override: None,
            domain: p.default_box,
            outputs: PathBuf::from("."),
            dump_surfaces: false,
            solver_tol: 1e-10,
        })
    }

    /// Parses the text of a configuration file. Lines are `key = value`;
    /// `#` starts a comment. Scalars may be written as fractions (`1/8`).
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            let key = k.trim().to_string();
            if map.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key '{key}'", no + 1)));
            }
        }
        let take = |map: &mut BTreeMap<String, String>, k: &str| map.remove(k);
        let problem = take(&mut map, "problem").ok_or_else(|| Error::Config("missing key 'problem'".into()))?;
        let h = parse_scalar("h", &take(&mut map, "h").ok_or_else(|| Error::Config("missing key 'h'".into()))?)?;
        let dt = parse_scalar("dt", &take(&mut map, "dt").ok_or_else(|| Error::Config("missing key 'dt'".into()))?)?;
        let mut cfg = Self::defaults(&problem, h, dt)?;
        if let Some(v) = take(&mut map, "t_end") {
            cfg.t_end = parse_scalar("t_end", &v)?;
        }
        let nu = take(&mut map, "nu");
        let nu_override = take(&mut map, "nu_override");
        if nu.is_some() && nu_override.is_some() {
            return Err(Error::Config("give either 'nu' or 'nu_override', not both".into()));
        }
        if let Some(v) = nu.or(nu_override) {
            cfg.nu_override = Some(parse_scalar("nu", &v)?);
        }
        if let Some(v) = take(&mut map, "box") {
            let vals: Vec<f64> = v
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| parse_scalar("box", s))
                .collect::<Result<_>>()?;
            if vals.len() != 6 {
                return Err(Error::Config(format!(
                    "'box' needs 6 values lo_x,lo_y,lo_z,hi_x,hi_y,hi_z, got {}",
                    vals.len()
                )));
            }
            cfg.domain = BoxDomain::new([vals[0], vals[1], vals[2]], [vals[3], vals[4], vals[5]])?;
        }
        if let Some(v) = take(&mut map, "outputs") {
            cfg.outputs = PathBuf::from(v);
        }
        if let Some(v) = take(&mut map, "dump_surfaces") {
            cfg.dump_surfaces = parse_bool("dump_surfaces", &v)?;
        }
        if let Some(v) = take(&mut map, "solver_tol") {
            cfg.solver_tol = parse_scalar("solver_tol", &v)?;
        }
        if let Some(k) = map.keys().next() {
            return Err(Error::Config(format!("unknown key '{k}'")));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::from(e).context(format!("reading {}", path.display())))?;
        Self::parse(&text).map_err(|e| e.context(format!("config {}", path.display())))
    }

    /// Text form accepted by [`RunConfig::parse`].
    pub fn to_config_string(&self) -> String {
        let d = &self.domain;
        let mut s = format!(
            "problem = {}\nh = {}\ndt = {}\nt_end = {}\nbox = {},{},{},{},{},{}\noutputs = {}\ndump_surfaces = {}\nsolver_tol = {}\n",
            self.problem,
            self.h,
            self.dt,
            self.t_end,
            d.lo[0],
            d.lo[1],
            d.lo[2],
            d.hi[0],
            d.hi[1],
            d.hi[2],
            self.outputs.display(),
            self.dump_surfaces,
            self.solver_tol
        );
        if let Some(nu) = self.nu_override {
            let _ = writeln!(s, "nu = {nu}");
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        for (k, v) in [("h", self.h), ("dt", self.dt), ("t_end", self.t_end), ("solver_tol", self.solver_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("'{k}' must be positive, got {v}")));
            }
        }
        if let Some(nu) = self.nu_override {
            if !(nu > 0.0 && nu.is_finite()) {
                return Err(Error::Config(format!("'nu' must be positive, got {nu}")));
            }
        }
        self.time_grid()?;
        Ok(())
    }

    pub fn time_grid(&self) -> Result<TimeGrid<f64>> {
        TimeGrid::new(self.t_end, self.dt)
    }

    pub fn problem_definition(&self) -> Result<ProblemDefinition<f64>> {
        let p = builtin(&self.problem)?;
        Ok(match self.nu_override {
            Some(nu) => p.with_nu(nu),
            None => p,
        })
    }
}

/// Result of [`run`].
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub report: ErrorReport<f64>,
    pub nu: f64,
    pub wall_seconds: f64,
    pub max_residual: f64,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NaN".to_string(), |x| format!("{x:e}"))
}

pub const RUN_SUMMARY_HEADER: &str = "problem,h,dt,t_end,nu,err_l2_final,err_l2h1,mass_abs_err,wall_seconds";

fn summary_row(o: &RunOutcome) -> String {
    format!(
        "{},{},{},{},{},{},{},{:e},{:.3}",
        o.config.problem,
        o.config.h,
        o.config.dt,
        o.config.t_end,
        o.nu,
        fmt_opt(o.report.err_l2_final),
        fmt_opt(o.report.err_l2h1),
        o.report.mass_abs_err,
        o.wall_seconds
    )
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::from(e).context(format!("creating {}", dir.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::from(e).context(format!("writing {}", path.display())))
}

/// Runs one simulation and writes `run_summary.csv` and `mass.csv` into `config.outputs`.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let start = Instant::now();
    let p = config.problem_definition()?;
    let grid = config.time_grid()?;
    create_dir(&config.outputs)?;
    let opts = MarchOptions {
        solve: SolveOptions {
            tol: config.solver_tol,
            ..SolveOptions::default()
        },
        keep_solutions: false,
    };
    let dump_dir = config.outputs.clone();
    let sim = simulate(&p, config.domain, config.h, grid, &opts, |stm, sol, top| {
        if config.dump_surfaces {
            let path = dump_dir.join(format!("surface_{:04}.vtk", sol.slab));
            dump_surface(&stm.coarse, top, sol, &path)?;
        }
        Ok(())
    })?;
    let outcome = RunOutcome {
        config: config.clone(),
        report: sim.report,
        nu: p.nu_d,
        wall_seconds: start.elapsed().as_secs_f64(),
        max_residual: sim.max_residual,
    };
    write_file(
        &config.outputs.join("run_summary.csv"),
        &format!("{RUN_SUMMARY_HEADER}\n{}\n", summary_row(&outcome)),
    )?;
    let mut mass = String::from("t,M_h\n");
    for (t, m) in &outcome.report.mass {
        let _ = writeln!(mass, "{t},{m:e}");
    }
    write_file(&config.outputs.join("mass.csv"), &mass)?;
    Ok(outcome)
}

/// Refinement direction of a study.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    /// halve `h`, keep `dt`
    Space,
    /// halve `dt`, keep `h`
    Time,
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "space" | "h" => Ok(Axis::Space),
            "time" | "dt" => Ok(Axis::Time),
            _ => Err(Error::Config(format!("unknown axis '{s}', expected space|time"))),
        }
    }
}

/// Configurations of a study: level 0 is `base`, each further level halves one step size.
pub fn study_configs(base: &RunConfig, axis: Axis, levels: usize) -> Result<Vec<RunConfig>> {
    if levels < 2 {
        return Err(Error::Config(format!("a study needs at least 2 levels, got {levels}")));
    }
    let mut out = Vec::with_capacity(levels);
    let mut cfg = base.clone();
    for level in 0..levels {
        cfg.outputs = base.outputs.join(format!("level_{level}"));
        cfg.validate()?;
        out.push(cfg.clone());
        match axis {
            Axis::Space => cfg.h *= 0.5,
            Axis::Time => cfg.dt *= 0.5,
        }
    }
    Ok(out)
}

pub const CONVERGENCE_HEADER: &str =
    "level,h,dt,err_l2_final,err_l2h1,mass_abs_err,order_l2_final,order_l2h1,order_mass";
pub const MASS_STUDY_HEADER: &str = "level,h,dt,mass_initial,mass_avg,mass_abs_err,reduction";

fn study<F>(base: &RunConfig, axis: Axis, levels: usize, file: &str, header: &str, row: F) -> Result<Vec<RunOutcome>>
where
    F: Fn(usize, &[RunOutcome]) -> String,
{
    let configs = study_configs(base, axis, levels)?;
    create_dir(&base.outputs)?;
    let path = base.outputs.join(file);
    let mut table = format!("{header}\n");
    write_file(&path, &table)?;
    let mut done: Vec<RunOutcome> = Vec::new();
    for (level, cfg) in configs.iter().enumerate() {
        match run(cfg) {
            Ok(o) => {
                done.push(o);
                table.push_str(&row(level, &done));
                table.push('\n');
                write_file(&path, &table)?;
            }
            Err(e) => {
                let _ = writeln!(table, "FAILED,{},{},{}", cfg.h, cfg.dt, e.class());
                write_file(&path, &table)?;
                return Err(e.context(format!("study level {level} (h = {}, dt = {})", cfg.h, cfg.dt)));
            }
        }
    }
    Ok(done)
}

fn last_order(values: &[Option<f64>]) -> String {
    match values {
        [.., Some(a), Some(b)] => format!("{}", observed_order(&[*a, *b])[0]),
        _ => String::new(),
    }
}

/// Convergence study writing `convergence.csv` with observed orders.
pub fn convergence_study(base: &RunConfig, axis: Axis, levels: usize) -> Result<Vec<RunOutcome>> {
    study(base, axis, levels, "convergence.csv", CONVERGENCE_HEADER, |level, done| {
        let o = done.last().expect("at least one finished level");
        let (l2, h1, m): (Vec<_>, Vec<_>, Vec<_>) = done
            .iter()
            .map(|o| (o.report.err_l2_final, o.report.err_l2h1, Some(o.report.mass_abs_err)))
            .fold((vec![], vec![], vec![]), |(mut a, mut b, mut c), (x, y, z)| {
                a.push(x);
                b.push(y);
                c.push(z);
                (a, b, c)
            });
        format!(
            "{level},{},{},{},{},{:e},{},{},{}",
            o.config.h,
            o.config.dt,
            fmt_opt(o.report.err_l2_final),
            fmt_opt(o.report.err_l2h1),
            o.report.mass_abs_err,
            last_order(&l2),
            last_order(&h1),
            last_order(&m)
        )
    })
}

/// Mass conservation study writing `mass_study.csv` with per-level reduction factors.
pub fn mass_study(base: &RunConfig, axis: Axis, levels: usize) -> Result<Vec<RunOutcome>> {
    study(base, axis, levels, "mass_study.csv", MASS_STUDY_HEADER, |level, done| {
        let o = done.last().expect("at least one finished level");
        let reduction = match done {
            [.., a, b] => format!("{}", a.report.mass_abs_err / b.report.mass_abs_err),
            _ => String::new(),
        };
        format!(
            "{level},{},{},{},{},{:e},{reduction}",
            o.config.h, o.config.dt, o.report.mass_initial, o.report.mass_avg, o.report.mass_abs_err
        )
    })
}

/// Writes a cross section with the values of `sol` at its upper end as legacy
/// ASCII VTK poly data. Shared vertices are merged.
pub fn dump_surface(mesh: &TetMesh<f64>, cross: &CrossSection<f64>, sol: &SlabSolution<f64>, path: &Path) -> Result<()> {
    dump_cross_section(mesh, cross, |tet, lam| sol.eval_layer(mesh, tet, lam, TOP).unwrap_or(0.0), path)
}

/// As [`dump_surface`] with an arbitrary point-value function of `(coarse tet, barycentric)`.
pub fn dump_cross_section(
    mesh: &TetMesh<f64>,
    cross: &CrossSection<f64>,
    value: impl Fn(usize, &[f64; 4]) -> f64,
    path: &Path,
) -> Result<()> {
    if cross.is_empty() {
        return Err(Error::Geometry(format!("refusing to dump an empty cross section at t = {}", cross.time)));
    }
    let mut index: BTreeMap<PointKey, usize> = BTreeMap::new();
    let mut points: Vec<([f64; 3], f64)> = Vec::new();
    let mut tris: Vec<[usize; 3]> = Vec::with_capacity(cross.elements.len());
    for e in &cross.elements {
        let mut tri = [0; 3];
        for k in 0..3 {
            tri[k] = *index.entry(e.keys[k]).or_insert_with(|| {
                let x = e.vertices[k];
                let lam = mesh.barycentric(e.parent as usize, &x);
                points.push((x, value(e.parent as usize, &lam)));
                points.len() - 1
            });
        }
        tris.push(tri);
    }
    let mut s = String::with_capacity(64 * points.len() + 32 * tris.len());
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "evosurf cross section t={}", cross.time);
    let _ = writeln!(s, "ASCII\nDATASET POLYDATA");
    let _ = writeln!(s, "POINTS {} double", points.len());
    for (x, _) in &points {
        let _ = writeln!(s, "{:.12e} {:.12e} {:.12e}", x[0], x[1], x[2]);
    }
    let _ = writeln!(s, "POLYGONS {} {}", tris.len(), 4 * tris.len());
    for t in &tris {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "POINT_DATA {}\nSCALARS u double 1\nLOOKUP_TABLE default", points.len());
    for (_, v) in &points {
        let _ = writeln!(s, "{v:.12e}");
    }
    write_file(path, &s)
}

/// Number of worker threads requested through [`THREADS_ENV`], if any.
pub fn requested_threads() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}
