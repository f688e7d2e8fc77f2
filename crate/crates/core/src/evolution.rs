//! Free propagation `exp(-itH)`, `H = |p|²/(2m)`, and the large-time checks on
//! evolved states.

use std::io;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Axis, Representation};
use crate::ops::{apply, build, OpKind, OperatorExpr};
use crate::state::{inner_product, WaveFunction};

fn check_mass(m: f64) -> Result<()> {
    if m > 0.0 && m.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveMass(m))
    }
}

fn check_time(t: f64) -> Result<()> {
    if t == 0.0 || !t.is_finite() {
        Err(Error::ZeroTime)
    } else {
        Ok(())
    }
}

/// `exp(-itH) f`, returned in momentum representation.
///
/// The phase `exp(-i·t·|p|²/(2mħ))` is carried analytically, so the result is
/// exact for arbitrarily large `|t|`.
pub fn propagate_free(f: &WaveFunction, t: f64, m: f64) -> Result<WaveFunction> {
    check_mass(m)?;
    if t == 0.0 {
        return Ok(f.clone());
    }
    let psi = f.clone().into_rep(Representation::Momentum);
    let chirp = psi.chirp() + t / m;
    Ok(psi.with_chirp(chirp))
}

/// `‖(x_j/t − p_j/m) exp(-itH) f‖`.
pub fn velocity_residual(axis: Axis, f: &WaveFunction, t: f64, m: f64) -> Result<f64> {
    check_time(t)?;
    let psi = propagate_free(f, t, m)?;
    let op = OperatorExpr::Sum(vec![
        build(OpKind::Position(axis))?.then_scaled(Complex64::new(1.0 / t, 0.0)),
        build(OpKind::Momentum(axis))?.then_scaled(Complex64::new(-1.0 / m, 0.0)),
    ]);
    Ok(apply(&op, &psi)?.norm())
}

/// `‖x_j f‖/|t|`, the exact value of [`velocity_residual`].
pub fn closed_form_velocity(axis: Axis, f: &WaveFunction, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(apply(&build(OpKind::Position(axis))?, f)?.norm() / t.abs())
}

/// `Σ_j e_j²` with `e_j` at time `t`.
fn energy_square_sum(t: f64) -> Result<OperatorExpr> {
    let terms = Axis::ALL
        .iter()
        .map(|&axis| {
            let e = build(OpKind::Energy { axis, t })?;
            Ok(e.clone().after(e))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OperatorExpr::Sum(terms))
}

fn hamiltonian_squared(m: f64) -> Result<OperatorExpr> {
    let h = build(OpKind::FreeHamiltonian { mass: m })?;
    Ok(h.clone().after(h))
}

/// Both sides of the squared energy relation on `ψ_t = exp(-itH) f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyComparison {
    pub t: f64,
    /// `‖(Σ_j e_j² − H²)ψ_t‖ / ‖H²ψ_t‖`.
    pub residual: f64,
    /// `⟨Σ_j e_j² ψ_t, ψ_t⟩`.
    pub energy_sq_expectation: f64,
    /// `⟨H² ψ_0, ψ_0⟩`, by direct momentum quadrature.
    pub hamiltonian_sq_expectation: f64,
}

impl EnergyComparison {
    pub fn relative_expectation_gap(&self) -> f64 {
        (self.energy_sq_expectation - self.hamiltonian_sq_expectation).abs() / self.hamiltonian_sq_expectation
    }
}

/// `Σ |p|⁴/(4m²)·|f(p)|²` over the momentum lattice, divided by `‖f‖²`.
fn hamiltonian_sq_quadrature(f: &WaveFunction, m: f64) -> f64 {
    let mom = f.envelope_transform(Representation::Momentum);
    let g = *f.grid();
    let sum: f64 = mom
        .envelope()
        .iter()
        .enumerate()
        .map(|(idx, z)| {
            let p = g.momentum_vector(idx);
            let p2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
            p2 * p2 * z.norm_sqr()
        })
        .sum();
    sum * mom.cell_volume() / (4.0 * m * m) / f.norm_sqr()
}

pub fn energy_comparison(f: &WaveFunction, t: f64, m: f64) -> Result<EnergyComparison> {
    check_time(t)?;
    let psi = propagate_free(f, t, m)?;
    let lhs = apply(&energy_square_sum(t)?, &psi)?;
    let rhs = apply(&hamiltonian_squared(m)?, &psi)?;
    let norm2 = psi.norm_sqr();
    Ok(EnergyComparison {
        t,
        residual: lhs.distance(&rhs)? / rhs.norm(),
        energy_sq_expectation: inner_product(&lhs, &psi)?.re / norm2,
        hamiltonian_sq_expectation: hamiltonian_sq_quadrature(f, m),
    })
}

/// `‖(Σ_j e_j² − H²)ψ_t‖ / ‖H²ψ_t‖` with `ψ_t = exp(-itH) f`.
pub fn energy_sq_residual(f: &WaveFunction, t: f64, m: f64) -> Result<f64> {
    Ok(energy_comparison(f, t, m)?.residual)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticsRow {
    pub t: f64,
    pub velocity_residual: [f64; 3],
    pub energy_sq_residual: f64,
    pub closed_form_velocity: [f64; 3],
    pub energy_sq_expectation: f64,
    pub hamiltonian_sq_expectation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub rows: Vec<AsymptoticsRow>,
    /// Least-squares slope of `ln(energy_sq_residual)` against `ln|t|`;
    /// absent for fewer than two rows.
    pub slope: Option<f64>,
}

fn check_time_list(ts: &[f64]) -> Result<()> {
    if ts.is_empty() {
        return Err(Error::InvalidTimes("empty".into()));
    }
    if ts.iter().any(|&t| t == 0.0 || !t.is_finite()) {
        return Err(Error::InvalidTimes("entries must be finite and nonzero".into()));
    }
    let positive = ts[0] > 0.0;
    if ts.iter().any(|&t| (t > 0.0) != positive) {
        return Err(Error::InvalidTimes("entries must share one sign".into()));
    }
    if ts.windows(2).any(|w| w[1].abs() <= w[0].abs()) {
        return Err(Error::InvalidTimes("magnitudes must be strictly increasing".into()));
    }
    Ok(())
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn asymptotic_scan(f: &WaveFunction, ts: &[f64], m: f64) -> Result<ScanResult> {
    check_mass(m)?;
    check_time_list(ts)?;
    let rows = ts
        .iter()
        .map(|&t| {
            let energy = energy_comparison(f, t, m)?;
            let mut velocity_residual = [0.0; 3];
            let mut closed_form = [0.0; 3];
            for axis in Axis::ALL {
                velocity_residual[axis.index()] = self::velocity_residual(axis, f, t, m)?;
                closed_form[axis.index()] = closed_form_velocity(axis, f, t)?;
            }
            Ok(AsymptoticsRow {
                t,
                velocity_residual,
                energy_sq_residual: energy.residual,
                closed_form_velocity: closed_form,
                energy_sq_expectation: energy.energy_sq_expectation,
                hamiltonian_sq_expectation: energy.hamiltonian_sq_expectation,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let slope = if rows.iter().all(|r| r.energy_sq_residual > 0.0) {
        let xs: Vec<f64> = rows.iter().map(|r| r.t.abs().ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.energy_sq_residual.ln()).collect();
        fit_slope(&xs, &ys)
    } else {
        None
    };
    Ok(ScanResult { rows, slope })
}

impl ScanResult {
    /// CSV with columns `t, vres_1..3, closed_form_1..3, eres`.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "vres_1", "vres_2", "vres_3", "closed_form_1", "closed_form_2", "closed_form_3", "eres"])?;
        for r in &self.rows {
            let mut rec = vec![r.t];
            rec.extend(r.velocity_residual);
            rec.extend(r.closed_form_velocity);
            rec.push(r.energy_sq_residual);
            w.write_record(rec.iter().map(|v| format!("{v:e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{synthesize_state, StateSpec};
    use crate::grid::GridSpec;

    fn grid() -> GridSpec {
        GridSpec::new(64, 32.0, 1.0).unwrap()
    }

    fn reference() -> WaveFunction {
        synthesize_state(&grid(), &StateSpec::gaussian([3.0, 0.0, 0.0], 0.5)).unwrap()
    }

    fn seeded(seed: u64) -> WaveFunction {
        synthesize_state(&grid(), &StateSpec::gaussian([2.0, -1.5, 1.0], 0.5).with_seed(seed)).unwrap()
    }

    #[test]
    fn propagation_is_unitary_group() {
        let f = seeded(4);
        assert_eq!(propagate_free(&f, 0.0, 1.0).unwrap(), f);
        for t in [0.3, -2.0, 40.0] {
            let psi = propagate_free(&f, t, 1.3).unwrap();
            assert!((psi.norm() - f.norm()).abs() <= 1e-13);
        }
        let two_step = propagate_free(&propagate_free(&f, 0.4, 1.0).unwrap(), 0.7, 1.0).unwrap();
        let one_step = propagate_free(&f, 1.1, 1.0).unwrap();
        assert!(two_step.distance(&one_step).unwrap() <= 1e-12);
        let back = propagate_free(&one_step, -1.1, 1.0).unwrap();
        assert!(back.distance(&f).unwrap() <= 1e-12);
        assert!(matches!(propagate_free(&f, 1.0, 0.0), Err(Error::NonPositiveMass(_))));
    }

    #[test]
    fn velocity_matches_closed_form() {
        let f = reference();
        for t in [4.0, 8.0, 64.0] {
            for axis in Axis::ALL {
                let v = velocity_residual(axis, &f, t, 1.0).unwrap();
                let c = closed_form_velocity(axis, &f, t).unwrap();
                assert!((v - c).abs() <= 1e-6 * c, "t={t} axis={axis}: {v} vs {c}");
            }
        }
        // ‖x_j ψ₀‖ = ħ/(σ√2) for this unphased Gaussian.
        let c = closed_form_velocity(Axis::Y, &f, 1.0).unwrap();
        assert!((c - 1.0 / (0.5 * 2f64.sqrt())).abs() <= 1e-8);
        let a = velocity_residual(Axis::X, &f, 8.0, 1.0).unwrap();
        let b = velocity_residual(Axis::X, &f, 16.0, 1.0).unwrap();
        assert!((a - 2.0 * b).abs() <= 1e-6 * a);
        assert_eq!(velocity_residual(Axis::X, &f, 0.0, 1.0), Err(Error::ZeroTime));
    }

    #[test]
    fn energy_relation_decays() {
        let f = reference();
        let scan = asymptotic_scan(&f, &[4.0, 8.0, 16.0, 32.0, 64.0], 1.0).unwrap();
        let slope = scan.slope.unwrap();
        assert!((slope + 1.0).abs() <= 0.15, "{slope}");
        for w in scan.rows.windows(2) {
            assert!(w[1].energy_sq_residual <= 1.01 * w[0].energy_sq_residual);
        }
        let last = scan.rows.last().unwrap();
        let gap = (last.energy_sq_expectation - last.hamiltonian_sq_expectation).abs() / last.hamiltonian_sq_expectation;
        assert!(gap <= 0.01, "{gap}");
        assert!(scan.rows[3].energy_sq_residual < scan.rows[0].energy_sq_residual);
    }

    #[test]
    fn time_reversal_mirror() {
        let f = seeded(9);
        let ts = [4.0, 8.0];
        let fwd = asymptotic_scan(&f, &ts, 1.0).unwrap();
        let back = asymptotic_scan(&f.time_reversed(), &ts.map(|t| -t), 1.0).unwrap();
        for (a, b) in fwd.rows.iter().zip(&back.rows) {
            assert!((a.energy_sq_residual - b.energy_sq_residual).abs() <= 1e-8);
            for j in 0..3 {
                assert!((a.velocity_residual[j] - b.velocity_residual[j]).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn scan_edge_cases() {
        let f = reference();
        assert_eq!(asymptotic_scan(&f, &[8.0], 1.0).unwrap().slope, None);
        for bad in [&[][..], &[4.0, -8.0], &[8.0, 4.0], &[0.0, 1.0], &[-4.0, -2.0]] {
            assert!(matches!(asymptotic_scan(&f, bad, 1.0), Err(Error::InvalidTimes(_))), "{bad:?}");
        }
        assert!(asymptotic_scan(&f, &[-2.0, -4.0], 1.0).is_ok());
    }

    #[test]
    fn slope_fit() {
        let xs = [0.0, 1.0, 2.0];
        assert_eq!(fit_slope(&xs, &[1.0, -1.0, -3.0]), Some(-2.0));
        assert_eq!(fit_slope(&[1.0], &[2.0]), None);
        assert_eq!(fit_slope(&[1.0, 1.0], &[2.0, 3.0]), None);
    }

    #[test]
    fn csv_layout() {
        let f = reference();
        let scan = asymptotic_scan(&f, &[4.0, 8.0], 1.0).unwrap();
        let mut buf = Vec::new();
        scan.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,vres_1,vres_2,vres_3,closed_form_1,closed_form_2,closed_form_3,eres"));
        assert_eq!(lines.count(), 2);
    }
}
