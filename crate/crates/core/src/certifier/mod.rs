//! Certification of a candidate bundle `(dA, K_1..K_n, ξ)`: commutation,
//! closedness of the doubly iterated 1-forms, potentials, structure
//! constants, weak-Haantjes conditions, Lenard generators and the WDVV
//! system.

mod checks;
mod frame;
mod potentials;

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geom::algebra::{apply_form, apply_vector};
use crate::geom::{ChartBox, TensorField, Valence};
use crate::jet::{Jet1, Jet2};
use crate::manifest::Manifest;

pub use checks::{
    check_commuting, check_compatibility_identity, check_lenard_generator, check_square_closed,
    check_structure_constants, check_weak_haantjes, hessian_round_trip, multiplication_tensor_jets, structure_constants,
    structure_constants_jets, wdvv_check, wdvv_check_with, LenardResult, PairTable, RoundTrip,
    StructureCheck, StructureConstants, WdvvResult, WeakHaantjes,
};
pub use frame::{TCoordinates, FRAME_TOL};
pub use potentials::{PotentialIntegrator, PotentialSquare, QUADRATURE_MAX_LEVELS, QUADRATURE_TOL};

/// The data to certify. `da` is the symbolic differential of `a`, kept so
/// that `dA` can be evaluated to second order.
#[derive(Clone, Debug)]
pub struct HaantjesCandidate {
    pub chart: Arc<ChartBox>,
    pub a: TensorField,
    pub da: TensorField,
    pub k: Vec<TensorField>,
    pub generator: Option<TensorField>,
    pub symmetry: Option<TensorField>,
    pub f: Option<Expr>,
    pub t_origin: Option<Vec<f64>>,
}

impl HaantjesCandidate {
    pub fn new(a: TensorField, k: Vec<TensorField>) -> Result<Self> {
        a.expect(Valence::Scalar)?;
        for kj in &k {
            kj.expect(Valence::Endomorphism)?;
            if kj.dim() != a.dim() {
                return Err(Error::DimensionMismatch { expected: a.dim(), got: kj.dim() });
            }
        }
        Ok(HaantjesCandidate {
            chart: a.chart.clone(),
            da: a.gradient()?,
            a,
            k,
            generator: None,
            symmetry: None,
            f: None,
            t_origin: None,
        })
    }

    pub fn with_generator(mut self, xi: TensorField) -> Result<Self> {
        xi.expect(Valence::Vector)?;
        self.generator = Some(xi);
        Ok(self)
    }

    pub fn with_symmetry(mut self, xi: TensorField) -> Result<Self> {
        xi.expect(Valence::Vector)?;
        self.symmetry = Some(xi);
        Ok(self)
    }

    pub fn from_manifest(m: &Manifest) -> Result<Self> {
        let spec = m.candidate.as_ref().ok_or_else(|| Error::Schema("manifest has no [candidate] section".into()))?;
        let k = spec.k.iter().map(|name| m.field(name).cloned()).collect::<Result<Vec<_>>>()?;
        let mut c = HaantjesCandidate::new(m.field(&spec.a)?.clone(), k)?;
        if let Some(g) = &spec.generator {
            c = c.with_generator(m.field(g)?.clone())?;
        }
        if let Some(s) = &spec.symmetry {
            c = c.with_symmetry(m.field(s)?.clone())?;
        }
        c.f = spec.f.clone();
        c.t_origin = spec.t_origin.clone();
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.chart.dim()
    }

    /// Requirements of a full Haantjes certification: `n` operators with
    /// `K_1 = Id`.
    pub fn require_unit(&self) -> Result<()> {
        let n = self.n();
        if self.k.len() != n {
            return Err(Error::Schema(format!("candidate.K: expected {n} operators, got {}", self.k.len())));
        }
        let id = crate::geom::algebra::identity(n);
        for p in crate::manifest::probe_points(&self.chart) {
            if self.k[0].values(&p)? != id {
                return Err(Error::Schema("candidate.K: the first operator must be the identity".into()));
            }
        }
        Ok(())
    }

    pub fn k_values(&self, p: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.k.iter().map(|k| k.values(p)).collect()
    }

    pub fn k_jets(&self, p: &[f64]) -> Result<Vec<Vec<Jet1>>> {
        self.k.iter().map(|k| k.jet1s(p)).collect()
    }

    pub fn k_jet2s(&self, p: &[f64]) -> Result<Vec<Vec<Jet2>>> {
        self.k.iter().map(|k| k.jets(p)).collect()
    }

    pub fn da_values(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.da.values(p)
    }

    pub fn da_jets(&self, p: &[f64]) -> Result<Vec<Jet1>> {
        self.da.jet1s(p)
    }

    /// `β_{jl} = K_j K_l dA` at `p`, indexed `j*m + l` for `m` operators.
    pub fn beta_values(&self, p: &[f64]) -> Result<Vec<Vec<f64>>> {
        let n = self.n();
        let k = self.k_values(p)?;
        let da = self.da_values(p)?;
        let kda: Vec<Vec<f64>> = k.iter().map(|kl| apply_form(kl, &da, n)).collect();
        Ok(iproduct(k.len()).map(|(j, l)| apply_form(&k[j], &kda[l], n)).collect())
    }

    pub fn beta_jets(&self, p: &[f64]) -> Result<Vec<Vec<Jet1>>> {
        let n = self.n();
        let k = self.k_jets(p)?;
        let da = self.da_jets(p)?;
        let kda: Vec<Vec<Jet1>> = k.iter().map(|kl| apply_form(kl, &da, n)).collect();
        Ok(iproduct(k.len()).map(|(j, l)| apply_form(&k[j], &kda[l], n)).collect())
    }

    pub fn beta_jet2s(&self, p: &[f64]) -> Result<Vec<Vec<Jet2>>> {
        let n = self.n();
        let k = self.k_jet2s(p)?;
        let da = self.da.jets(p)?;
        let kda: Vec<Vec<Jet2>> = k.iter().map(|kl| apply_form(kl, &da, n)).collect();
        Ok(iproduct(k.len()).map(|(j, l)| apply_form(&k[j], &kda[l], n)).collect())
    }

    /// Frame `ξ_j = K_j ξ` as first-order jets.
    pub fn frame_jets(&self, xi: &TensorField, p: &[f64]) -> Result<Vec<Vec<Jet1>>> {
        let x = xi.jet1s(p)?;
        Ok(self.k_jets(p)?.iter().map(|k| apply_vector(k, &x, self.n())).collect())
    }

    pub fn frame_values(&self, xi: &TensorField, p: &[f64]) -> Result<Vec<Vec<f64>>> {
        let x = xi.values(p)?;
        Ok(self.k_values(p)?.iter().map(|k| apply_vector(k, &x, self.n())).collect())
    }
}

/// All ordered index pairs `(j, l)` in row-major order.
pub fn iproduct(m: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..m).flat_map(move |j| (0..m).map(move |l| (j, l)))
}

/// Evaluate `f` at every point in parallel, keeping point order.
pub fn per_point<T, F>(points: &[Vec<f64>], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[f64]) -> Result<T> + Sync,
{
    points.par_iter().map(|p| f(p)).collect()
}

pub fn rel(diff: f64, scale: f64) -> f64 {
    diff / (1.0 + scale)
}
