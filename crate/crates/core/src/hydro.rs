//! Method-of-lines integration of hydrodynamic-type systems
//! `u_t = K(u) u_x` on a periodic grid, with conservation and
//! flow-commutation diagnostics.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::certifier::{HaantjesCandidate, PotentialIntegrator};
use crate::error::{Error, Result};
use crate::geom::{ChartBox, TensorField, Valence};

pub const MIN_POINTS: usize = 16;
pub const CFL_LIMIT: f64 = 0.5;
/// `max |u_x|` beyond which integration stops with [`Error::Blowup`].
pub const BLOWUP_GRADIENT: f64 = 1e6;

/// Spatial derivative on the periodic grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Scheme {
    /// Fourth-order central differences.
    Central4,
    /// Fourier differentiation; exact on trigonometric polynomials below
    /// the Nyquist mode, so it obeys the chain rule up to aliasing.
    Spectral,
}

#[derive(Clone)]
pub struct Grid {
    pub points: usize,
    pub length: f64,
    pub scheme: Scheme,
    fft: Option<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid").field("points", &self.points).field("length", &self.length).field("scheme", &self.scheme).finish()
    }
}

impl Grid {
    pub fn new(points: usize, length: f64, scheme: Scheme) -> Result<Grid> {
        if points < MIN_POINTS {
            return Err(Error::Schema(format!("grid needs at least {MIN_POINTS} points, got {points}")));
        }
        if !(length > 0.0) {
            return Err(Error::Schema("grid length must be positive".into()));
        }
        let fft = match scheme {
            Scheme::Central4 => None,
            Scheme::Spectral => {
                let mut planner = FftPlanner::new();
                Some((planner.plan_fft_forward(points), planner.plan_fft_inverse(points)))
            }
        };
        Ok(Grid { points, length, scheme, fft })
    }

    pub fn dx(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    /// Derivative of one periodic component.
    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        let n = self.points;
        match &self.fft {
            None => {
                let h = self.dx();
                (0..n)
                    .map(|i| {
                        let at = |k: isize| f[((i as isize + k).rem_euclid(n as isize)) as usize];
                        (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h)
                    })
                    .collect()
            }
            Some((fwd, inv)) => {
                let mut buf: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                fwd.process(&mut buf);
                let base = 2.0 * std::f64::consts::PI / self.length;
                for (k, c) in buf.iter_mut().enumerate() {
                    let wave = if k < n / 2 {
                        k as f64
                    } else if k == n / 2 && n % 2 == 0 {
                        0.0
                    } else {
                        k as f64 - n as f64
                    };
                    *c *= Complex64::new(0.0, base * wave);
                }
                inv.process(&mut buf);
                buf.iter().map(|c| c.re / n as f64).collect()
            }
        }
    }
}

/// Field values `u[i*n + c]` on the grid plus elapsed time per flow.
#[derive(Clone, Debug, Serialize)]
pub struct GridState {
    pub n: usize,
    pub u: Vec<f64>,
    /// Elapsed time of flow `j` at index `j`.
    pub t: Vec<f64>,
}

impl GridState {
    pub fn point(&self, i: usize) -> &[f64] {
        &self.u[i * self.n..(i + 1) * self.n]
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        self.u.iter().skip(c).step_by(self.n).copied().collect()
    }

    /// Discrete `L²` distance on the period.
    pub fn l2_distance(&self, other: &GridState, grid: &Grid) -> f64 {
        let s: f64 = self.u.iter().zip(&other.u).map(|(a, b)| (a - b).powi(2)).sum();
        (s * grid.dx()).sqrt()
    }
}

/// Smooth periodic data `u_c = base_c + amplitude sin(2πx/L + cπ/2)`.
pub fn initial_state(chart: &ChartBox, grid: &Grid, amplitude: f64, flows: usize) -> Result<GridState> {
    let n = chart.dim();
    let k = 2.0 * std::f64::consts::PI / grid.length;
    let mut u = Vec::with_capacity(grid.points * n);
    for i in 0..grid.points {
        for c in 0..n {
            u.push(chart.base[c] + amplitude * (k * grid.x(i) + c as f64 * std::f64::consts::FRAC_PI_2).sin());
        }
    }
    let state = GridState { n, u, t: vec![0.0; flows] };
    for i in 0..grid.points {
        chart.check(state.point(i)).map_err(|_| Error::ChartExit { time: 0.0 })?;
    }
    Ok(state)
}

/// `RHS(u)_j = Σ_l K^j_l(u) ∂_x u^l`; also returns `max_i ‖K(u_i)‖_∞`.
pub fn build_rhs(k: &TensorField, grid: &Grid, u: &[f64], time: f64) -> Result<(Vec<f64>, f64)> {
    k.expect(Valence::Endomorphism)?;
    let n = k.dim();
    let derivs: Vec<Vec<f64>> = (0..n)
        .map(|c| grid.derivative(&u.iter().skip(c).step_by(n).copied().collect::<Vec<_>>()))
        .collect();
    let rows: Vec<(Vec<f64>, f64)> = (0..grid.points)
        .into_par_iter()
        .map(|i| {
            let kv = k.values(&u[i * n..(i + 1) * n]).map_err(|e| match e {
                Error::Domain { .. } => Error::ChartExit { time },
                e => e,
            })?;
            let norm = (0..n).map(|r| (0..n).map(|c| kv[r * n + c].abs()).sum::<f64>()).fold(0.0, f64::max);
            let out = (0..n).map(|r| (0..n).map(|c| kv[r * n + c] * derivs[c][i]).sum()).collect();
            Ok((out, norm))
        })
        .collect::<Result<_>>()?;
    let norm = rows.iter().fold(0.0f64, |m, r| m.max(r.1));
    Ok((rows.into_iter().flat_map(|r| r.0).collect(), norm))
}

fn max_gradient(grid: &Grid, state: &GridState) -> f64 {
    (0..state.n).map(|c| grid.derivative(&state.component(c)).iter().fold(0.0f64, |m, v| m.max(v.abs()))).fold(0.0, f64::max)
}

/// RK4 for `steps` steps of size `dt` along the flow with index `flow`.
pub fn integrate_flow(state: &GridState, k: &TensorField, flow: usize, grid: &Grid, dt: f64, steps: usize) -> Result<GridState> {
    let mut s = state.clone();
    let axpy = |u: &[f64], d: &[f64], h: f64| -> Vec<f64> { u.iter().zip(d).map(|(a, b)| a + h * b).collect() };
    for _ in 0..steps {
        let time = s.t[flow];
        let (k1, norm) = build_rhs(k, grid, &s.u, time)?;
        let ratio = dt * norm / grid.dx();
        if ratio > CFL_LIMIT {
            return Err(Error::CflViolation { ratio });
        }
        let (k2, _) = build_rhs(k, grid, &axpy(&s.u, &k1, dt / 2.0), time)?;
        let (k3, _) = build_rhs(k, grid, &axpy(&s.u, &k2, dt / 2.0), time)?;
        let (k4, _) = build_rhs(k, grid, &axpy(&s.u, &k3, dt), time)?;
        for i in 0..s.u.len() {
            s.u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        s.t[flow] += dt;
        if !s.u.iter().all(|v| v.is_finite()) || max_gradient(grid, &s) > BLOWUP_GRADIENT {
            return Err(Error::Blowup { time: s.t[flow] });
        }
    }
    Ok(s)
}

/// Means `(1/L)∮ A_m(u) dx` of scalar densities over the period.
pub fn period_means<F>(state: &GridState, grid: &Grid, densities: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let rows: Vec<Vec<f64>> = (0..grid.points).into_par_iter().map(|i| densities(state.point(i))).collect::<Result<_>>()?;
    let m = rows.first().map_or(0, |r| r.len());
    Ok((0..m).map(|c| rows.iter().map(|r| r[c]).sum::<f64>() / grid.points as f64).collect())
}

/// Relative drift `|I(t) - I(0)| / (1 + |I(0)|)` per density.
pub fn drift(initial: &[f64], now: &[f64]) -> Vec<f64> {
    initial.iter().zip(now).map(|(a, b)| (b - a).abs() / (1.0 + a.abs())).collect()
}

/// One row of a simulation record.
#[derive(Clone, Debug, Serialize)]
pub struct SeriesRow {
    pub t: f64,
    pub drift: Vec<f64>,
    /// `L²` error against exact translation when `K = Id`.
    pub translation_error: Option<f64>,
}

/// Integrate `flow` with snapshots every `every` steps, tracking the
/// conservation drift of the given densities.
#[allow(clippy::too_many_arguments)]
pub fn simulate<F>(
    chart: &ChartBox,
    k: &TensorField,
    grid: &Grid,
    amplitude: f64,
    dt: f64,
    steps: usize,
    every: usize,
    densities: F,
) -> Result<Vec<SeriesRow>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let mut state = initial_state(chart, grid, amplitude, 1)?;
    let identity = is_identity(k, chart)?;
    let i0 = period_means(&state, grid, &densities)?;
    let mut rows = vec![SeriesRow { t: 0.0, drift: vec![0.0; i0.len()], translation_error: identity.then_some(0.0) }];
    let every = every.max(1);
    let mut done = 0;
    while done < steps {
        let chunk = every.min(steps - done);
        state = integrate_flow(&state, k, 0, grid, dt, chunk)?;
        done += chunk;
        let now = period_means(&state, grid, &densities)?;
        let translation_error = if identity { Some(translation_error(chart, grid, amplitude, &state)?) } else { None };
        rows.push(SeriesRow { t: state.t[0], drift: drift(&i0, &now), translation_error });
    }
    Ok(rows)
}

fn is_identity(k: &TensorField, chart: &ChartBox) -> Result<bool> {
    let id = crate::geom::algebra::identity(chart.dim());
    for p in crate::manifest::probe_points(chart) {
        if k.values(&p)? != id {
            return Ok(false);
        }
    }
    Ok(true)
}

/// For `u_t = u_x` the exact solution is `u_0(x + t)`.
pub fn translation_error(chart: &ChartBox, grid: &Grid, amplitude: f64, state: &GridState) -> Result<f64> {
    let t = state.t[0];
    let k = 2.0 * std::f64::consts::PI / grid.length;
    let n = chart.dim();
    let mut exact = state.clone();
    for i in 0..grid.points {
        for c in 0..n {
            exact.u[i * n + c] = chart.base[c] + amplitude * (k * (grid.x(i) + t) + c as f64 * std::f64::consts::FRAC_PI_2).sin();
        }
    }
    Ok(state.l2_distance(&exact, grid))
}

/// A pre-shock study: grid, data amplitude and time stepping.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Window {
    pub points: usize,
    pub length: f64,
    pub amplitude: f64,
    pub dt: f64,
    pub steps: usize,
}

/// Window for conservation studies on the packaged three-dimensional
/// scenarios: long enough for a broken conservation law to drift by more
/// than `1e-3`, short enough that the data stays smooth and inside the chart.
pub const CONSERVATION_WINDOW: Window = Window { points: 256, length: 2.0, amplitude: 0.15, dt: 1e-3, steps: 1000 };

/// Densities `A_m` with `dA_m = K_m dA`, by line integration from the base
/// point; requires `K_1 = Id`.
pub fn potential_densities(cand: &HaantjesCandidate) -> impl Fn(&[f64]) -> Result<Vec<f64>> + Sync + '_ {
    let integ = PotentialIntegrator::new(cand);
    let m = cand.k.len();
    move |p: &[f64]| Ok(integ.at(p)?[..m].to_vec())
}

/// Worst drift of each `∮A_m dx` along flow `flow` over the window.
pub fn conservation_drift(cand: &HaantjesCandidate, flow: usize, window: &Window) -> Result<Vec<f64>> {
    cand.require_unit()?;
    let grid = Grid::new(window.points, window.length, Scheme::Central4)?;
    let every = (window.steps / 20).max(1);
    let rows = simulate(&cand.chart, &cand.k[flow], &grid, window.amplitude, window.dt, window.steps, every, potential_densities(cand))?;
    let m = cand.k.len();
    Ok((0..m).map(|c| rows.iter().fold(0.0f64, |a, r| a.max(r.drift[c]))).collect())
}

/// Discrepancy of `Φ_l^h ∘ Φ_j^h` against `Φ_j^h ∘ Φ_l^h` at each step size.
#[derive(Clone, Debug, Serialize)]
pub struct CommutationStudy {
    pub dts: Vec<f64>,
    pub discrepancy: Vec<f64>,
    /// `log2` ratios of successive discrepancies (halved steps).
    pub orders: Vec<f64>,
}

impl CommutationStudy {
    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn commuting_flows_check(u0: &GridState, kj: &TensorField, kl: &TensorField, grid: &Grid, dts: &[f64]) -> Result<CommutationStudy> {
    let mut discrepancy = Vec::with_capacity(dts.len());
    for &h in dts {
        let mut a = u0.clone();
        a.t = vec![0.0; 2];
        let b = a.clone();
        let jl = integrate_flow(&integrate_flow(&a, kj, 0, grid, h, 1)?, kl, 1, grid, h, 1)?;
        let lj = integrate_flow(&integrate_flow(&b, kl, 1, grid, h, 1)?, kj, 0, grid, h, 1)?;
        discrepancy.push(jl.l2_distance(&lj, grid));
    }
    let orders = discrepancy
        .windows(2)
        .zip(dts.windows(2))
        .map(|(d, h)| (d[0] / d[1]).ln() / (h[0] / h[1]).ln())
        .collect();
    Ok(CommutationStudy { dts: dts.to_vec(), discrepancy, orders })
}

/// Observed RK4 order: errors at `dt` and `dt/2` against a `dt/8`
/// reference over the same time window.
pub fn temporal_order(u0: &GridState, k: &TensorField, grid: &Grid, dt: f64, steps: usize) -> Result<f64> {
    let run = |h: f64, m: usize| integrate_flow(u0, k, 0, grid, h, m);
    let reference = run(dt / 8.0, steps * 8)?;
    let e1 = run(dt, steps)?.l2_distance(&reference, grid);
    let e2 = run(dt / 2.0, steps * 2)?.l2_distance(&reference, grid);
    Ok((e1 / e2).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, VarScope};

    fn field(chart: &Arc<ChartBox>, src: &[&str]) -> TensorField {
        let scope = VarScope::chart(chart.dim(), "u");
        TensorField::new("K", Valence::Endomorphism, chart.clone(), src.iter().map(|s| parse_expr(s, &scope).unwrap()).collect()).unwrap()
    }

    #[test]
    fn derivative_schemes() {
        for scheme in [Scheme::Central4, Scheme::Spectral] {
            let grid = Grid::new(64, 2.0, scheme).unwrap();
            let k = std::f64::consts::PI;
            let f: Vec<f64> = (0..64).map(|i| (k * grid.x(i)).sin()).collect();
            let d = grid.derivative(&f);
            let err = (0..64).fold(0.0f64, |m, i| m.max((d[i] - k * (k * grid.x(i)).cos()).abs()));
            assert!(err < if scheme == Scheme::Spectral { 1e-12 } else { 1e-4 }, "{scheme:?} {err}");
        }
    }

    #[test]
    fn rhs_examples() {
        let chart = Arc::new(ChartBox::new("u", vec![0.0, 0.0], vec![2.0, 2.0], vec![1.0, 1.0]).unwrap());
        let grid = Grid::new(32, 1.0, Scheme::Central4).unwrap();
        let s = initial_state(&chart, &grid, 0.1, 1).unwrap();
        let id = TensorField::identity(chart.clone());
        let (r, _) = build_rhs(&id, &grid, &s.u, 0.0).unwrap();
        let ux = grid.derivative(&s.component(0));
        assert!((0..32).all(|i| (r[i * 2] - ux[i]).abs() < 1e-14));
        let hopf = field(&chart, &["u1", "0", "0", "u2"]);
        let (r, _) = build_rhs(&hopf, &grid, &s.u, 0.0).unwrap();
        assert!((0..32).all(|i| (r[i * 2] - s.u[i * 2] * ux[i]).abs() < 1e-14));
        let flat = initial_state(&chart, &grid, 0.0, 1).unwrap();
        assert!(build_rhs(&hopf, &grid, &flat.u, 0.0).unwrap().0.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn cfl_guard() {
        let chart = Arc::new(ChartBox::new("u", vec![0.0], vec![2.0], vec![1.0]).unwrap());
        let grid = Grid::new(64, 1.0, Scheme::Central4).unwrap();
        let s = initial_state(&chart, &grid, 0.05, 1).unwrap();
        let id = TensorField::identity(chart.clone());
        assert!(matches!(integrate_flow(&s, &id, 0, &grid, 0.1, 1), Err(Error::CflViolation { .. })));
    }
}
