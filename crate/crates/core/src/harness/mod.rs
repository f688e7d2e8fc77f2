//! Verification suites over configured states, and the reports they produce.

mod config;
mod report;

pub use config::{AsymptoticsConfig, DslConfig, OutputConfig, RunConfig, DEFAULT_TOLERANCES, SCHEMA_VERSION};
pub use report::{write_csv, write_json, write_reports, CheckReport, Params, ReportFormat};

use std::io;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsl::{self, sample};
use crate::error::{Error, Result};
use crate::evolution::asymptotic_scan;
use crate::family::{domain_compliance, synthesize_state, ComplianceReport};
use crate::grid::{Axis, GridSpec};
use crate::ops::{apply, build, OpKind};
use crate::state::WaveFunction;
use crate::stats::{x_abs_p_residual, TimeEnergyCell, UncertaintyResult};
use crate::symbolic::{build_time_energy_ops, commutator, nc_mul, sum_over_axes, NCPoly, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Commutators,
    Uncertainty,
    Asymptotics,
    Symbolic,
    Dsl,
    All,
}

impl Suite {
    /// Every concrete suite, in report order.
    pub const ORDER: [Suite; 5] = [Suite::Commutators, Suite::Uncertainty, Suite::Asymptotics, Suite::Symbolic, Suite::Dsl];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Commutators => "commutators",
            Suite::Uncertainty => "uncertainty",
            Suite::Asymptotics => "asymptotics",
            Suite::Symbolic => "symbolic",
            Suite::Dsl => "dsl",
            Suite::All => "all",
        }
    }

    fn expand(list: &[Suite]) -> Vec<Suite> {
        Suite::ORDER.into_iter().filter(|s| list.contains(s) || list.contains(&Suite::All)).collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Record `wall_ms`; when false every report carries `null` there.
    pub timings: bool,
    /// Print a line to stderr as each unit of work completes.
    pub progress: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { timings: true, progress: false }
    }
}

pub fn run_suite(cfg: &RunConfig, suite: Suite) -> Result<Vec<CheckReport>> {
    run_suites(cfg, &[suite], &RunOptions::default())
}

/// Runs the requested suites and returns their reports in a fixed order:
/// suite, then state, then t, then check.
pub fn run_suites(cfg: &RunConfig, suites: &[Suite], opts: &RunOptions) -> Result<Vec<CheckReport>> {
    cfg.validate()?;
    let suites = Suite::expand(suites);
    let want = |s: Suite| suites.contains(&s);
    let mut out = Vec::new();

    if want(Suite::Commutators) || want(Suite::Uncertainty) {
        let primary = sweep_grid(cfg, cfg.grid, want(Suite::Commutators), opts)?;
        if want(Suite::Commutators) {
            out.extend(commutator_reports(cfg, &primary));
        }
        if want(Suite::Uncertainty) {
            out.extend(uncertainty_reports(cfg, &primary));
            for &h in &cfg.extra_hbar {
                let grid = cfg.grid.with_hbar_same_momenta(h).map_err(|e| Error::Config(e.to_string()))?;
                out.extend(uncertainty_reports(cfg, &sweep_grid(cfg, grid, false, opts)?));
            }
        }
    }
    if want(Suite::Asymptotics) {
        out.extend(asymptotics_reports(cfg, opts)?);
    }
    if want(Suite::Symbolic) {
        out.extend(symbolic_reports(cfg));
    }
    if want(Suite::Dsl) {
        out.extend(dsl_reports(cfg, opts)?);
    }
    if !opts.timings {
        for r in &mut out {
            r.wall_ms = None;
        }
    }
    Ok(out)
}

pub fn all_pass(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.pass)
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

struct Progress {
    done: AtomicUsize,
    total: usize,
    label: String,
    enabled: bool,
}

impl Progress {
    fn new(label: impl Into<String>, total: usize, opts: &RunOptions) -> Progress {
        Progress { done: AtomicUsize::new(0), total, label: label.into(), enabled: opts.progress }
    }

    fn tick(&self, what: impl FnOnce() -> String) {
        let k = self.done.fetch_add(1, Ordering::Relaxed) + 1;
        if self.enabled {
            eprintln!("[{} {k}/{}] {}", self.label, self.total, what());
        }
    }
}

struct StateData {
    label: String,
    compliance: ComplianceReport,
    /// `[x_j,|p|]` residuals on the run grid and on the coarse companion grid.
    x_abs_p: Option<([f64; 3], Option<[f64; 3]>)>,
    wall_ms: f64,
}

struct CellResiduals {
    time_norm: f64,
    component: [f64; 3],
    sum: f64,
    schwarz: f64,
}

struct CellSummary {
    uncertainty: UncertaintyResult,
    residuals: Option<CellResiduals>,
    wall_ms: f64,
}

/// All (state, t) cells on one grid; `cells[s * n_t + k]` belongs to state `s`
/// and `t_values[k]`.
struct Sweep {
    hbar: f64,
    states: Vec<StateData>,
    cells: Vec<CellSummary>,
}

impl Sweep {
    fn cell(&self, s: usize, k: usize) -> &CellSummary {
        &self.cells[s * self.cells.len() / self.states.len() + k]
    }
}

/// Half the points on half the box: the same position spacing with a coarser
/// momentum lattice.
fn coarse_companion(g: &GridSpec) -> Option<GridSpec> {
    GridSpec::new(g.n / 2, g.box_length / 2.0, g.hbar).ok()
}

fn x_abs_p_all(f: &WaveFunction) -> Result<[f64; 3]> {
    let mut r = [0.0; 3];
    for axis in Axis::ALL {
        r[axis.index()] = x_abs_p_residual(f, axis)?;
    }
    Ok(r)
}

fn sweep_grid(cfg: &RunConfig, grid: GridSpec, residuals: bool, opts: &RunOptions) -> Result<Sweep> {
    let states: Vec<WaveFunction> =
        cfg.states.par_iter().map(|spec| synthesize_state(&grid, spec)).collect::<Result<_>>()?;
    let coarse = if residuals && cfg.convergence_check { coarse_companion(&grid) } else { None };

    let progress = Progress::new(format!("states hbar={}", grid.hbar), states.len(), opts);
    let data = states
        .par_iter()
        .zip(&cfg.states)
        .map(|(f, spec)| {
            let start = Instant::now();
            let compliance = domain_compliance(f, cfg.compliance.p_min, cfg.compliance.tol);
            let x_abs_p = if residuals {
                let fine = x_abs_p_all(f)?;
                let coarse = match &coarse {
                    Some(g) => Some(x_abs_p_all(&synthesize_state(g, spec)?)?),
                    None => None,
                };
                Some((fine, coarse))
            } else {
                None
            };
            progress.tick(|| spec.to_string());
            Ok(StateData { label: spec.to_string(), compliance, x_abs_p, wall_ms: elapsed_ms(start) })
        })
        .collect::<Result<Vec<_>>>()?;

    let n_t = cfg.t_values.len();
    let progress = Progress::new(format!("cells hbar={}", grid.hbar), states.len() * n_t, opts);
    let cells = (0..states.len() * n_t)
        .into_par_iter()
        .map(|idx| {
            let (s, t) = (idx / n_t, cfg.t_values[idx % n_t]);
            let start = Instant::now();
            let cell = TimeEnergyCell::new(&states[s], t)?;
            let uncertainty = cell.uncertainty(data[s].compliance.compliant)?;
            let residuals = if residuals {
                let mut component = [0.0; 3];
                for axis in Axis::ALL {
                    component[axis.index()] = cell.component_commutator_residual(axis)?;
                }
                Some(CellResiduals {
                    time_norm: cell.time_norm_residual()?,
                    component,
                    sum: cell.sum_commutator_residual()?,
                    schwarz: cell.schwarz_residual()?,
                })
            } else {
                None
            };
            progress.tick(|| format!("{} t={t}", data[s].label));
            Ok(CellSummary { uncertainty, residuals, wall_ms: elapsed_ms(start) })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Sweep { hbar: grid.hbar, states: data, cells })
}

fn flag(r: CheckReport, compliant: bool) -> CheckReport {
    if compliant {
        r
    } else {
        r.flag_noncompliant()
    }
}

fn commutator_reports(cfg: &RunConfig, sweep: &Sweep) -> Vec<CheckReport> {
    const SUITE: &str = "commutators";
    let mut out = Vec::new();
    for (s, st) in sweep.states.iter().enumerate() {
        let ok = st.compliance.compliant;
        let c = &st.compliance;
        let mut r = CheckReport::at_most(
            SUITE,
            "domain_compliance",
            &st.label,
            Params::new()
                .with("p_min", cfg.compliance.p_min)
                .with("mass_near_zero", c.mass_near_zero)
                .with("mass_at_edges", c.mass_at_edges),
            c.mass_near_zero.max(c.mass_at_edges),
            cfg.compliance.tol,
        );
        r.pass = ok;
        out.push(r.timed(Some(st.wall_ms)));

        if let Some((fine, coarse)) = &st.x_abs_p {
            for axis in Axis::ALL {
                let j = axis.index();
                let params = Params::new().j(axis.label()).hbar(sweep.hbar);
                let r = CheckReport::at_most(SUITE, "eq9_x_absp", &st.label, params, fine[j], cfg.tolerance("eq9_x_absp"));
                out.push(flag(r.timed(Some(st.wall_ms)), ok));
            }
            if let Some(coarse) = coarse {
                for axis in Axis::ALL {
                    let j = axis.index();
                    let params = Params::new().j(axis.label()).with("fine", fine[j]).with("coarse", coarse[j]);
                    let ratio = fine[j] / coarse[j];
                    let r = CheckReport::at_most(SUITE, "eq9_convergence", &st.label, params, ratio, cfg.tolerance("eq9_convergence"));
                    out.push(flag(r.timed(Some(st.wall_ms)), ok));
                }
            }
        }

        for (k, &t) in cfg.t_values.iter().enumerate() {
            let cell = sweep.cell(s, k);
            let Some(res) = &cell.residuals else { continue };
            let wall = Some(cell.wall_ms);
            let mut push = |check: &str, params: Params, value: f64| {
                let r = CheckReport::at_most(SUITE, check, &st.label, params, value, cfg.tolerance(check));
                out.push(flag(r.timed(wall), ok));
            };
            push("eq5_time_norm", Params::new().t(t), res.time_norm);
            for axis in Axis::ALL {
                push("component_commutator", Params::new().t(t).j(axis.label()), res.component[axis.index()]);
            }
            push("sum_commutator", Params::new().t(t), res.sum);
            push("schwarz_chain", Params::new().t(t), res.schwarz);
        }
    }
    out
}

fn uncertainty_reports(cfg: &RunConfig, sweep: &Sweep) -> Vec<CheckReport> {
    const SUITE: &str = "uncertainty";
    let tol = cfg.tolerance("uncertainty_product");
    let mut out = Vec::new();
    for (s, st) in sweep.states.iter().enumerate() {
        let ok = st.compliance.compliant;
        let mut products = Vec::with_capacity(cfg.t_values.len());
        let mut wall = 0.0;
        for (k, &t) in cfg.t_values.iter().enumerate() {
            let cell = sweep.cell(s, k);
            let u = &cell.uncertainty;
            products.push(u.product);
            wall += cell.wall_ms;
            let params = Params::new()
                .t(t)
                .hbar(sweep.hbar)
                .with("delta_t", u.delta_t)
                .with("delta_e", u.delta_e)
                .with("bound", u.bound);
            let r = CheckReport::at_least(SUITE, "uncertainty_product", &st.label, params, u.product, u.bound * (1.0 - tol));
            out.push(flag(r.timed(Some(cell.wall_ms)), ok));
            let params = Params::new().t(t).hbar(sweep.hbar);
            let r = CheckReport::at_most(SUITE, "imaginary_leak", &st.label, params, u.imaginary_leak, cfg.tolerance("imaginary_leak"));
            out.push(flag(r.timed(Some(cell.wall_ms)), ok));
        }
        let hi = products.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = products.iter().copied().fold(f64::INFINITY, f64::min);
        let r = CheckReport::at_most(
            SUITE,
            "product_t_invariance",
            &st.label,
            Params::new().hbar(sweep.hbar),
            hi - lo,
            cfg.tolerance("product_t_invariance"),
        );
        out.push(flag(r.timed(Some(wall)), ok));
    }
    out
}

fn asymptotics_reports(cfg: &RunConfig, opts: &RunOptions) -> Result<Vec<CheckReport>> {
    const SUITE: &str = "asymptotics";
    let a = &cfg.asymptotics;
    let grid = a.grid.unwrap_or(cfg.grid);
    let label = a.state.to_string();
    let start = Instant::now();
    let f = synthesize_state(&grid, &a.state)?;
    let scan = asymptotic_scan(&f, &a.t_values, cfg.mass)?;
    let wall = Some(elapsed_ms(start));
    if opts.progress {
        eprintln!("[asymptotics] {label} done");
    }

    let mut out = Vec::new();
    let mut prev: Option<f64> = None;
    for row in &scan.rows {
        for axis in Axis::ALL {
            let j = axis.index();
            let (v, c) = (row.velocity_residual[j], row.closed_form_velocity[j]);
            let rel = if c != 0.0 { (v - c).abs() / c.abs() } else { (v - c).abs() };
            let params = Params::new().t(row.t).j(axis.label()).m(cfg.mass).with("residual", v).with("closed_form", c);
            out.push(CheckReport::at_most(SUITE, "velocity_closed_form", &label, params, rel, cfg.tolerance("velocity_closed_form")).timed(wall));
        }
        if let Some(p) = prev {
            let params = Params::new().t(row.t).m(cfg.mass).with("residual", row.energy_sq_residual);
            let ratio = row.energy_sq_residual / p;
            let threshold = 1.0 + cfg.tolerance("energy_monotone");
            out.push(CheckReport::at_most(SUITE, "energy_monotone", &label, params, ratio, threshold).timed(wall));
        }
        prev = Some(row.energy_sq_residual);
    }

    let mut params = Params::new().m(cfg.mass);
    if let Some(slope) = scan.slope {
        params = params.with("slope", slope);
    }
    let dev = scan.slope.map_or(f64::INFINITY, |s| (s + 1.0).abs());
    out.push(CheckReport::at_most(SUITE, "energy_slope", &label, params, dev, cfg.tolerance("energy_slope")).timed(wall));

    if let Some(last) = scan.rows.last() {
        let gap = (last.energy_sq_expectation - last.hamiltonian_sq_expectation).abs() / last.hamiltonian_sq_expectation;
        let params = Params::new()
            .t(last.t)
            .m(cfg.mass)
            .with("energy_sq", last.energy_sq_expectation)
            .with("hamiltonian_sq", last.hamiltonian_sq_expectation);
        out.push(CheckReport::at_most(SUITE, "energy_expectation", &label, params, gap, cfg.tolerance("energy_expectation")).timed(wall));
    }
    Ok(out)
}

/// Number of monomials in `lhs − rhs`; zero exactly when they are equal.
fn term_mismatch(lhs: &NCPoly, rhs: &NCPoly) -> f64 {
    (lhs - rhs).len() as f64
}

fn symbolic_reports(cfg: &RunConfig) -> Vec<CheckReport> {
    const SUITE: &str = "symbolic";
    const STATE: &str = "-";
    let tol = cfg.tolerance("symbolic_exact");
    let mut out = Vec::new();
    let hbar_i = |num: i64| NCPoly::hbar().scale(&Scalar::imag(num, 1));

    let start = Instant::now();
    let sum = sum_over_axes(|j| {
        let (t, e) = build_time_energy_ops(j);
        commutator(&t, &e)
    });
    let value = term_mismatch(&sum, &hbar_i(-1));
    let r = CheckReport::at_most(SUITE, "sum_commutator_exact", STATE, Params::new().with("normal_form", sum.to_string()), value, tol);
    out.push(r.timed(Some(elapsed_ms(start))));

    for axis in Axis::ALL {
        let start = Instant::now();
        let (t, e) = build_time_energy_ops(axis);
        let lhs = commutator(&t, &e).scale(&Scalar::int(4));
        let ratio = nc_mul(&NCPoly::p(axis).pow(2), &NCPoly::abs_p_pow(-2));
        let rhs = &hbar_i(-2) + &nc_mul(&hbar_i(2), &ratio);
        let r = CheckReport::at_most(SUITE, "component_commutator_exact", STATE, Params::new().j(axis.label()), term_mismatch(&lhs, &rhs), tol);
        out.push(r.timed(Some(elapsed_ms(start))));
    }

    for axis in Axis::ALL {
        let start = Instant::now();
        let lhs = commutator(&NCPoly::x(axis), &NCPoly::abs_p_pow(1));
        let rhs = nc_mul(&hbar_i(1), &nc_mul(&NCPoly::p(axis), &NCPoly::abs_p_pow(-1)));
        let r = CheckReport::at_most(SUITE, "eq9_exact", STATE, Params::new().j(axis.label()), term_mismatch(&lhs, &rhs), tol);
        out.push(r.timed(Some(elapsed_ms(start))));
    }

    let start = Instant::now();
    let norm = sum_over_axes(|j| build_time_energy_ops(j).0.pow(2));
    let r = CheckReport::at_most(SUITE, "time_norm_exact", STATE, Params::new(), term_mismatch(&norm, &NCPoly::t_pow(2)), tol);
    out.push(r.timed(Some(elapsed_ms(start))));
    out
}

fn time_text(j: usize) -> String {
    format!("t * p{j} * |p|^-1")
}

fn energy_text(j: usize) -> String {
    format!("1/4 * t^-1 * (|p|*x{j} + x{j}*|p|)")
}

/// `‖a − b‖ / max(‖a‖, ‖f‖)`; the second scale keeps operators that vanish
/// on `f` from dividing by zero.
fn relative_gap(a: &WaveFunction, b: &WaveFunction, f: &WaveFunction) -> Result<f64> {
    Ok(a.distance(b)? / a.norm().max(f.norm()))
}

fn dsl_reports(cfg: &RunConfig, opts: &RunOptions) -> Result<Vec<CheckReport>> {
    const SUITE: &str = "dsl";
    let d = &cfg.dsl;
    let mut out = Vec::new();

    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(d.seed);
    let failures = (0..d.round_trip_cases)
        .filter(|_| {
            let ast = sample::random_ast(&mut rng, d.round_trip_depth);
            dsl::parse(&dsl::format(&ast)).ok() != Some(ast)
        })
        .count();
    let params = Params::new().with("cases", d.round_trip_cases).with("seed", d.seed);
    out.push(
        CheckReport::at_most(SUITE, "dsl_round_trip", "-", params, failures as f64, cfg.tolerance("dsl_round_trip"))
            .timed(Some(elapsed_ms(start))),
    );

    let f = synthesize_state(&d.grid, &d.state)?;
    let label = d.state.to_string();
    for axis in Axis::ALL {
        let j = axis.label();
        let (t_poly, e_poly) = build_time_energy_ops(axis);
        let cases = [
            ("time", time_text(j), t_poly, OpKind::Time { axis, t: d.t }),
            ("energy", energy_text(j), e_poly, OpKind::Energy { axis, t: d.t }),
        ];
        for (name, text, poly, kind) in cases {
            let start = Instant::now();
            let ast = dsl::parse(&text).map_err(|e| Error::Lowering(e.to_string()))?;
            let exact = term_mismatch(&dsl::lower(&ast)?, &poly);
            let params = Params::new().j(j).with("operator", name);
            out.push(
                CheckReport::at_most(SUITE, "dsl_lowering", "-", params.clone(), exact, cfg.tolerance("dsl_lowering"))
                    .timed(Some(elapsed_ms(start))),
            );
            let start = Instant::now();
            let a = apply(&dsl::compile(&ast, &d.grid, d.t)?, &f)?;
            let b = apply(&build(kind)?, &f)?;
            let gap = relative_gap(&a, &b, &f)?;
            out.push(
                CheckReport::at_most(SUITE, "dsl_lowering_numeric", &label, params.t(d.t), gap, cfg.tolerance("dsl_symbolic_numeric"))
                    .timed(Some(elapsed_ms(start))),
            );
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(d.seed.wrapping_add(1));
    let asts: Vec<dsl::Ast> =
        (0..d.numeric_cases).map(|_| sample::random_numeric_ast(&mut rng, d.numeric_depth, d.numeric_max_terms)).collect();
    let progress = Progress::new("dsl numeric", asts.len(), opts);
    let numeric = asts
        .par_iter()
        .enumerate()
        .map(|(case, ast)| {
            let start = Instant::now();
            let normal = dsl::parse(&dsl::lower(ast)?.to_string()).map_err(|e| Error::Lowering(e.to_string()))?;
            let a = apply(&dsl::compile(ast, &d.grid, d.t)?, &f)?;
            let b = apply(&dsl::compile(&normal, &d.grid, d.t)?, &f)?;
            let gap = relative_gap(&a, &b, &f)?;
            progress.tick(|| format!("case {case}"));
            let params = Params::new().t(d.t).with("case", case).with("expr", dsl::format(ast));
            Ok(CheckReport::at_most(SUITE, "dsl_symbolic_numeric", &label, params, gap, cfg.tolerance("dsl_symbolic_numeric"))
                .timed(Some(elapsed_ms(start))))
        })
        .collect::<Result<Vec<_>>>()?;
    out.extend(numeric);
    Ok(out)
}

/// One row of the `sweep` table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub state: String,
    pub hbar: f64,
    pub t: f64,
    pub delta_t: f64,
    pub delta_e: f64,
    pub product: f64,
    pub bound: f64,
    pub margin: f64,
    pub imaginary_leak: f64,
    pub compliant: bool,
}

/// Uncertainty quantities over states × t, at the run ħ and every extra ħ.
pub fn sweep_table(cfg: &RunConfig, opts: &RunOptions) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut grids = vec![cfg.grid];
    for &h in &cfg.extra_hbar {
        grids.push(cfg.grid.with_hbar_same_momenta(h).map_err(|e| Error::Config(e.to_string()))?);
    }
    let mut rows = Vec::new();
    for grid in grids {
        let sweep = sweep_grid(cfg, grid, false, opts)?;
        for (s, st) in sweep.states.iter().enumerate() {
            for (k, &t) in cfg.t_values.iter().enumerate() {
                let u = &sweep.cell(s, k).uncertainty;
                rows.push(SweepRow {
                    state: st.label.clone(),
                    hbar: sweep.hbar,
                    t,
                    delta_t: u.delta_t,
                    delta_e: u.delta_e,
                    product: u.product,
                    bound: u.bound,
                    margin: u.margin,
                    imaginary_leak: u.imaginary_leak,
                    compliant: u.compliant,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: io::Write>(rows: &[SweepRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Expectation, variance and imaginary leak of an operator on a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalResult {
    pub expectation: f64,
    pub variance: f64,
    pub imaginary_leak: f64,
}

pub fn eval_expression(text: &str, spec: &crate::family::StateSpec, grid: &GridSpec, t: f64) -> Result<EvalResult> {
    if t == 0.0 {
        return Err(Error::ZeroTime);
    }
    let ast = dsl::parse(text).map_err(|e| Error::Lowering(e.to_string()))?;
    let op = dsl::compile(&ast, grid, t)?;
    let f = synthesize_state(grid, spec)?;
    let e = crate::stats::expectation(&op, &f)?;
    let af = apply(&op, &f)?;
    let centered = af.lin_comb(Complex64::new(1.0, 0.0), &f, Complex64::new(-e.value, 0.0))?;
    Ok(EvalResult { expectation: e.value, variance: centered.norm_sqr(), imaginary_leak: e.imaginary_leak })
}
