//! JSON instance files. Matrices are arrays of rows.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use sdnop_core::problem::{Dims, KktPoint, MultiplierTriple, QuadraticForm, QuadraticMatrixMap, QuadraticProblem};
use sdnop_core::SymMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub type Rows = Vec<Vec<f64>>;

/// `c0 + b^T x + x^T H x / 2`. `H` may be omitted for affine rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFormJson {
    #[serde(default)]
    pub c0: f64,
    pub b: Vec<f64>,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Rows>,
}

/// `A0 + sum_i x_i Ai[i] + 1/2 sum_ij x_i x_j Aij[i][j]`. `Aij` may be omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixMapJson {
    #[serde(rename = "A0")]
    pub a0: Rows,
    #[serde(rename = "Ai")]
    pub ai: Vec<Rows>,
    #[serde(rename = "Aij", default, skip_serializing_if = "Vec::is_empty")]
    pub aij: Vec<Vec<Rows>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktJson {
    pub x: Vec<f64>,
    #[serde(rename = "Y")]
    pub y: Rows,
    pub mu: Vec<f64>,
    #[serde(rename = "Gamma")]
    pub gamma: Rows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceJson {
    pub n: usize,
    pub q: usize,
    pub m: usize,
    pub p: usize,
    pub f: QuadraticFormJson,
    #[serde(rename = "F")]
    pub big_f: MatrixMapJson,
    pub h: Vec<QuadraticFormJson>,
    pub g: MatrixMapJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_kkt: Option<KktJson>,
}

/// A validated instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub problem: QuadraticProblem,
    pub reference: Option<KktPoint>,
}

fn dense(rows: &Rows, r: usize, c: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != r || rows.iter().any(|row| row.len() != c) {
        return Err(CliError::input(format!("{what}: expected a {r}x{c} array of rows")));
    }
    let m = DMatrix::from_fn(r, c, |i, j| rows[i][j]);
    if m.iter().any(|v| !v.is_finite()) {
        return Err(CliError::input(format!("{what}: non-finite entry")));
    }
    Ok(m)
}

fn symmetric(rows: &Rows, k: usize, what: &str) -> Result<SymMatrix> {
    let m = dense(rows, k, k, what)?;
    if (&m - m.transpose()).amax() > 1e-10 * (1.0 + m.amax()) {
        return Err(CliError::input(format!("{what}: matrix is not symmetric")));
    }
    Ok(SymMatrix::new(m)?)
}

fn vector(v: &[f64], n: usize, what: &str) -> Result<DVector<f64>> {
    if v.len() != n {
        return Err(CliError::input(format!("{what}: expected length {n}, found {}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(CliError::input(format!("{what}: non-finite entry")));
    }
    Ok(DVector::from_column_slice(v))
}

fn quad_form(j: &QuadraticFormJson, n: usize, what: &str) -> Result<QuadraticForm> {
    let b = vector(&j.b, n, &format!("{what}.b"))?;
    let h = match &j.h {
        Some(rows) => symmetric(rows, n, &format!("{what}.H"))?.into_matrix(),
        None => DMatrix::zeros(n, n),
    };
    Ok(QuadraticForm::new(j.c0, b, h)?)
}

fn matrix_map(j: &MatrixMapJson, n: usize, k: usize, what: &str) -> Result<QuadraticMatrixMap> {
    let a0 = symmetric(&j.a0, k, &format!("{what}.A0"))?;
    if j.ai.len() != n {
        return Err(CliError::input(format!("{what}.Ai: expected {n} matrices, found {}", j.ai.len())));
    }
    let linear = j
        .ai
        .iter()
        .enumerate()
        .map(|(i, a)| symmetric(a, k, &format!("{what}.Ai[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let mut quadratic = Vec::new();
    if !j.aij.is_empty() {
        if j.aij.len() != n || j.aij.iter().any(|r| r.len() != n) {
            return Err(CliError::input(format!("{what}.Aij: expected an {n}x{n} array of matrices")));
        }
        for (i, row) in j.aij.iter().enumerate() {
            for (l, a) in row.iter().enumerate() {
                quadratic.push(symmetric(a, k, &format!("{what}.Aij[{i}][{l}]"))?);
            }
        }
    }
    QuadraticMatrixMap::new(a0, linear, quadratic).map_err(|e| CliError::input(format!("{what}: {e}")))
}

impl InstanceJson {
    pub fn dims(&self) -> Dims {
        Dims { n: self.n, q: self.q, m: self.m, p: self.p }
    }

    pub fn to_instance(&self) -> Result<Instance> {
        let (n, q, m, p) = (self.n, self.q, self.m, self.p);
        if n == 0 {
            return Err(CliError::input("n must be positive"));
        }
        let f = quad_form(&self.f, n, "f")?;
        let big_f = matrix_map(&self.big_f, n, q, "F")?;
        if self.h.len() != m {
            return Err(CliError::input(format!("h: expected {m} rows, found {}", self.h.len())));
        }
        let h = self
            .h
            .iter()
            .enumerate()
            .map(|(i, r)| quad_form(r, n, &format!("h[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let g = matrix_map(&self.g, n, p, "g")?;
        let problem = QuadraticProblem::new(f, big_f, h, g)?;
        let reference = match &self.reference_kkt {
            None => None,
            Some(k) => {
                let x = vector(&k.x, n, "reference_kkt.x")?;
                let y = MultiplierTriple {
                    y: symmetric(&k.y, q, "reference_kkt.Y")?,
                    mu: vector(&k.mu, m, "reference_kkt.mu")?,
                    gamma: symmetric(&k.gamma, p, "reference_kkt.Gamma")?,
                };
                Some(KktPoint::evaluate(&problem, x, y)?)
            }
        };
        Ok(Instance { problem, reference })
    }

    pub fn from_problem(problem: &QuadraticProblem, reference: Option<(&DVector<f64>, &MultiplierTriple)>) -> Self {
        let d = sdnop_core::problem::ProblemOracle::dims(problem);
        let form = |f: &QuadraticForm, always_h: bool| QuadraticFormJson {
            c0: f.c0,
            b: f.b.iter().copied().collect(),
            h: (always_h || f.h.amax() > 0.0).then(|| rows(&f.h)),
        };
        let map = |mm: &QuadraticMatrixMap| MatrixMapJson {
            a0: rows(mm.a0.as_matrix()),
            ai: mm.linear.iter().map(|a| rows(a.as_matrix())).collect(),
            aij: if mm.quadratic.iter().all(|a| a.max_abs() == 0.0) {
                Vec::new()
            } else {
                let n = mm.n();
                (0..n).map(|i| (0..n).map(|j| rows(mm.quadratic[i * n + j].as_matrix())).collect()).collect()
            },
        };
        InstanceJson {
            n: d.n,
            q: d.q,
            m: d.m,
            p: d.p,
            f: form(&problem.f, true),
            big_f: map(&problem.big_f),
            h: problem.h.iter().map(|r| form(r, false)).collect(),
            g: map(&problem.g),
            reference_kkt: reference.map(|(x, y)| KktJson {
                x: x.iter().copied().collect(),
                y: rows(y.y.as_matrix()),
                mu: y.mu.iter().copied().collect(),
                gamma: rows(y.gamma.as_matrix()),
            }),
        }
    }
}

pub fn rows(m: &DMatrix<f64>) -> Rows {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.to_path_buf(), source })
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let json: InstanceJson = read_json(path)?;
    json.to_instance().map_err(|e| match e {
        CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
        other => other,
    })
}
