use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geom::ChartBox;
use crate::jet::{Jet1, Jet2};

/// Tensor type of a field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Valence {
    Scalar,
    Vector,
    OneForm,
    /// Type (1,1); component `i*n + j` is `K^i_j`.
    Endomorphism,
    /// Type (1,2); component `(m*n + j)*n + l` is `C^m_{jl}`.
    Tensor12,
}

impl Valence {
    pub fn rank(self) -> u32 {
        match self {
            Valence::Scalar => 0,
            Valence::Vector | Valence::OneForm => 1,
            Valence::Endomorphism => 2,
            Valence::Tensor12 => 3,
        }
    }

    pub fn count(self, n: usize) -> usize {
        n.pow(self.rank())
    }

    pub fn parse(s: &str) -> Option<Valence> {
        Some(match s.trim() {
            "scalar" | "(0,0)" => Valence::Scalar,
            "vector" | "(1,0)" => Valence::Vector,
            "oneform" | "1-form" | "(0,1)" => Valence::OneForm,
            "(1,1)" | "endomorphism" => Valence::Endomorphism,
            "(1,2)" => Valence::Tensor12,
            _ => return None,
        })
    }
}

impl fmt::Display for Valence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Valence::Scalar => "scalar",
            Valence::Vector => "vector",
            Valence::OneForm => "oneform",
            Valence::Endomorphism => "(1,1)",
            Valence::Tensor12 => "(1,2)",
        })
    }
}

/// A tensor field given by one expression per component on a chart.
#[derive(Clone, Debug)]
pub struct TensorField {
    pub name: String,
    pub valence: Valence,
    pub chart: Arc<ChartBox>,
    pub comps: Vec<Expr>,
}

impl TensorField {
    pub fn new(name: &str, valence: Valence, chart: Arc<ChartBox>, comps: Vec<Expr>) -> Result<Self> {
        let n = chart.dim();
        let want = valence.count(n);
        if comps.len() != want {
            return Err(Error::Schema(format!(
                "field '{name}': expected {want} components, got {}",
                comps.len()
            )));
        }
        if let Some(bad) = comps.iter().find(|e| e.arity() > n) {
            return Err(Error::Schema(format!(
                "field '{name}': component '{bad}' uses a variable beyond dimension {n}"
            )));
        }
        Ok(TensorField { name: name.to_string(), valence, chart, comps })
    }

    pub fn scalar(name: &str, chart: Arc<ChartBox>, e: Expr) -> Result<Self> {
        TensorField::new(name, Valence::Scalar, chart, vec![e])
    }

    pub fn identity(chart: Arc<ChartBox>) -> Self {
        let n = chart.dim();
        let comps = (0..n * n).map(|k| Expr::num(if k / n == k % n { 1.0 } else { 0.0 })).collect();
        TensorField { name: "Id".into(), valence: Valence::Endomorphism, chart, comps }
    }

    /// Coordinate vector field `∂/∂x_i`.
    pub fn coordinate_vector(chart: Arc<ChartBox>, i: usize) -> Self {
        let n = chart.dim();
        let comps = (0..n).map(|k| Expr::num(if k == i { 1.0 } else { 0.0 })).collect();
        TensorField { name: format!("d{}", i + 1), valence: Valence::Vector, chart, comps }
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn expect(&self, v: Valence) -> Result<()> {
        if self.valence != v {
            return Err(Error::ValenceMismatch { expected: v.to_string(), got: self.valence.to_string() });
        }
        Ok(())
    }

    fn eval_err(p: &[f64]) -> impl Fn(crate::error::EvalError) -> Error + '_ {
        move |source| Error::Eval { point: p.to_vec(), source }
    }

    pub fn values(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.chart.check(p)?;
        self.comps.iter().map(|e| e.eval_f64(p).map_err(Self::eval_err(p))).collect()
    }

    pub fn jets(&self, p: &[f64]) -> Result<Vec<Jet2>> {
        self.chart.check(p)?;
        let seed = Jet2::seed(p);
        self.comps.iter().map(|e| e.eval(&seed).map_err(Self::eval_err(p))).collect()
    }

    pub fn jet1s(&self, p: &[f64]) -> Result<Vec<Jet1>> {
        self.chart.check(p)?;
        let seed: Vec<Jet1> = (0..p.len()).map(|i| Jet1::variable(p[i], i, p.len())).collect();
        self.comps.iter().map(|e| e.eval(&seed).map_err(Self::eval_err(p))).collect()
    }

    /// Exterior derivative of a scalar field as a symbolic 1-form field.
    pub fn gradient(&self) -> Result<TensorField> {
        self.expect(Valence::Scalar)?;
        let comps = (0..self.dim()).map(|k| self.comps[0].diff(k)).collect();
        Ok(TensorField {
            name: format!("d{}", self.name),
            valence: Valence::OneForm,
            chart: self.chart.clone(),
            comps,
        })
    }

    /// Matrix of a (1,1) field's component expressions, for building
    /// derived fields symbolically.
    pub fn with_comps(&self, name: &str, valence: Valence, comps: Vec<Expr>) -> Result<TensorField> {
        TensorField::new(name, valence, self.chart.clone(), comps)
    }
}
