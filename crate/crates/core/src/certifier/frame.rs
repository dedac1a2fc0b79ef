//! Distinguished coordinates `t_j` of a Lenard frame `ξ_j = K_j ξ`: the
//! point with coordinates `t_origin + τ` is reached from the base point by
//! flowing along `ξ_1` for time `τ_1`, then `ξ_2` for `τ_2`, and so on.

use super::HaantjesCandidate;
use crate::error::{Error, Result};
use crate::geom::TensorField;
use crate::linalg;

/// Local error target of the adaptive flow integrator.
pub const FRAME_TOL: f64 = 1e-10;
const MAX_FLOW_STEPS: usize = 100_000;
const MAX_NEWTON: usize = 40;

pub struct TCoordinates<'a> {
    cand: &'a HaantjesCandidate,
    xi: &'a TensorField,
    origin: Vec<f64>,
}

impl<'a> TCoordinates<'a> {
    pub fn new(cand: &'a HaantjesCandidate, xi: &'a TensorField) -> Self {
        let origin = cand.t_origin.clone().unwrap_or_else(|| vec![0.0; cand.n()]);
        TCoordinates { cand, xi, origin }
    }

    fn field(&self, j: usize, x: &[f64]) -> Result<Vec<f64>> {
        let k = self.cand.k[j].values(x)?;
        let v = self.xi.values(x)?;
        Ok(crate::geom::algebra::apply_vector(&k, &v, x.len()))
    }

    fn rk4(&self, j: usize, x: &[f64], h: f64) -> Result<Vec<f64>> {
        let axpy = |x: &[f64], k: &[f64], s: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + s * b).collect() };
        let k1 = self.field(j, x)?;
        let k2 = self.field(j, &axpy(x, &k1, h / 2.0))?;
        let k3 = self.field(j, &axpy(x, &k2, h / 2.0))?;
        let k4 = self.field(j, &axpy(x, &k3, h))?;
        Ok((0..x.len()).map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
    }

    /// Flow of `ξ_j` for time `tau`, step-doubling RK4.
    pub fn flow(&self, j: usize, start: &[f64], tau: f64) -> Result<Vec<f64>> {
        let fail = |why: String| Error::FrameIntegrationFailure(why);
        let mut x = start.to_vec();
        if tau == 0.0 {
            return Ok(x);
        }
        let mut t = 0.0;
        let mut h = tau;
        for _ in 0..MAX_FLOW_STEPS {
            if (tau - t).abs() <= 1e-15 * tau.abs() {
                return Ok(x);
            }
            if (t + h - tau) * tau.signum() > 0.0 {
                h = tau - t;
            }
            let attempt = self.rk4(j, &x, h).and_then(|full| {
                let half = self.rk4(j, &x, h / 2.0)?;
                let two = self.rk4(j, &half, h / 2.0)?;
                Ok((full, two))
            });
            match attempt {
                Ok((full, two)) => {
                    let err = full.iter().zip(&two).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / 15.0;
                    let scale = 1.0 + two.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    if err <= FRAME_TOL * scale {
                        t += h;
                        // Richardson correction of the doubled step
                        x = two.iter().zip(&full).map(|(b, a)| b + (b - a) / 15.0).collect();
                        if err < 0.1 * FRAME_TOL * scale {
                            h *= 2.0;
                        }
                    } else {
                        h /= 2.0;
                    }
                }
                Err(Error::Domain { .. }) => h /= 2.0,
                Err(e) => return Err(e),
            }
            if h.abs() < 1e-14 * tau.abs().max(1.0) {
                return Err(fail(format!("flow of xi_{} leaves the chart or stalls near {x:?}", j + 1)));
            }
        }
        Err(fail(format!("flow of xi_{} needs more than {MAX_FLOW_STEPS} steps", j + 1)))
    }

    /// Chart point with flow times `tau`.
    pub fn point(&self, tau: &[f64]) -> Result<Vec<f64>> {
        let mut x = self.cand.chart.base.clone();
        for (j, &s) in tau.iter().enumerate() {
            x = self.flow(j, &x, s)?;
        }
        Ok(x)
    }

    fn frame_matrix(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = x.len();
        let mut m = vec![0.0; n * n];
        for j in 0..n {
            for (i, v) in self.field(j, x)?.into_iter().enumerate() {
                m[i * n + j] = v;
            }
        }
        Ok(m)
    }

    /// Distinguished coordinates of `p`: Newton on the flow map, whose
    /// Jacobian is the frame matrix when the frame commutes.
    pub fn coordinates(&self, p: &[f64]) -> Result<Vec<f64>> {
        let n = p.len();
        let mut tau = vec![0.0; n];
        let mut x = self.cand.chart.base.clone();
        for _ in 0..MAX_NEWTON {
            let r: Vec<f64> = p.iter().zip(&x).map(|(a, b)| a - b).collect();
            let scale = 1.0 + p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if r.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= 1e-12 * scale {
                return Ok(tau.iter().zip(&self.origin).map(|(a, b)| a + b).collect());
            }
            let step = linalg::solve(&self.frame_matrix(&x)?, &r, n)
                .ok_or_else(|| Error::FrameIntegrationFailure(format!("frame is singular at {x:?}")))?;
            for (t, s) in tau.iter_mut().zip(step) {
                *t += s;
            }
            x = self.point(&tau)?;
        }
        Err(Error::FrameIntegrationFailure(format!("no distinguished coordinates found for {p:?}")))
    }
}
