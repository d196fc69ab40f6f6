//! Stochastic quadratic objective F(w; xi) = (w - xi)^T A (w - xi) on a ball.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kv::Section;
use crate::mixing::{StreamKind, StreamSpec};

/// Stationary law of the samples, as far as the objective needs it.
#[derive(Debug, Clone, PartialEq)]
pub enum StationaryLaw {
    /// uniform on [0,1]^d
    UniformCube,
    /// finitely supported law
    Discrete { points: Vec<Vec<f64>>, weights: Vec<f64> },
    /// only the support is known
    Unspecified { support: Vec<Vec<f64>> },
}

impl StationaryLaw {
    /// Law matching a stream's stationary marginal.
    pub fn for_stream(spec: &StreamSpec) -> Result<Self> {
        match spec.kind.base() {
            StreamKind::IidUniform { .. } | StreamKind::HoldTimeUniform { .. } => Ok(StationaryLaw::UniformCube),
            StreamKind::FiniteChain(c) => Ok(StationaryLaw::Discrete {
                points: c.emission.clone(),
                weights: c.transition.stationary()?,
            }),
            StreamKind::Wrapped { .. } => unreachable!("base() strips wrappers"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProblem {
    d: usize,
    // row-major
    a: Vec<f64>,
    diagonal: bool,
    center: Vec<f64>,
    radius: f64,
    init: Vec<f64>,
    law: StationaryLaw,
    a_norm: f64,
    g: f64,
    moments: Option<(Vec<f64>, f64)>,
}

impl QuadraticProblem {
    pub fn new(a: DMatrix<f64>, center: Vec<f64>, radius: f64, law: StationaryLaw) -> Result<Self> {
        let d = a.nrows();
        if d == 0 || a.ncols() != d {
            return Err(Error::param("A must be a non-empty square matrix"));
        }
        if center.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: center.len(),
            });
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::param("domain radius must be positive"));
        }
        for i in 0..d {
            for j in 0..i {
                if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 {
                    return Err(Error::param(format!("A is not symmetric at ({i},{j})")));
                }
            }
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("A has non-finite entries"));
        }
        let eig = SymmetricEigen::new(a.clone()).eigenvalues;
        let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(Error::param(format!("A is not positive semidefinite (eigenvalue {min})")));
        }
        let a_norm = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let support_dist = match &law {
            StationaryLaw::UniformCube => center
                .iter()
                .map(|c| c.abs().max((1.0 - c).abs()).powi(2))
                .sum::<f64>()
                .sqrt(),
            StationaryLaw::Discrete { points, .. } | StationaryLaw::Unspecified { support: points } => {
                if points.iter().any(|p| p.len() != d) {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: points.iter().map(Vec::len).find(|&l| l != d).unwrap_or(d),
                    });
                }
                points.iter().map(|p| dist(p, &center)).fold(0.0, f64::max)
            }
        };
        if let StationaryLaw::Discrete { points, weights } = &law {
            if weights.len() != points.len() || weights.iter().any(|w| *w < 0.0) {
                return Err(Error::param("discrete law needs one nonnegative weight per point"));
            }
        }
        let mut diagonal = true;
        let mut flat = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                flat.push(a[(i, j)]);
                if i != j && a[(i, j)] != 0.0 {
                    diagonal = false;
                }
            }
        }
        let mut p = Self {
            d,
            a: flat,
            diagonal,
            center,
            radius,
            init: vec![0.0; d],
            law,
            a_norm,
            g: 2.0 * a_norm * (radius + support_dist),
            moments: None,
        };
        p.moments = p.compute_moments();
        let init = p.project(&vec![0.0; d]);
        p.init = init;
        Ok(p)
    }

    /// Sets w(1); the point is projected onto the domain.
    pub fn with_init_point(mut self, w: Vec<f64>) -> Result<Self> {
        self.check(&w)?;
        self.init = self.project(&w);
        Ok(self)
    }

    /// The default experiment instance: A = diag(1..d)/d, ball of radius 5
    /// about the cube centre, w(1) = 0.
    pub fn default_for(d: usize, law: StationaryLaw) -> Result<Self> {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |i, _| (i + 1) as f64 / d as f64));
        Self::new(a, vec![0.5; d], 5.0, law)
    }

    fn compute_moments(&self) -> Option<(Vec<f64>, f64)> {
        match &self.law {
            StationaryLaw::UniformCube => {
                let tr: f64 = (0..self.d).map(|i| self.a[i * self.d + i]).sum();
                Some((vec![0.5; self.d], tr / 12.0))
            }
            StationaryLaw::Discrete { points, weights } => {
                let total: f64 = weights.iter().sum();
                let mut mean = vec![0.0; self.d];
                for (p, w) in points.iter().zip(weights) {
                    for (m, v) in mean.iter_mut().zip(p) {
                        *m += w / total * v;
                    }
                }
                let trace = points
                    .iter()
                    .zip(weights)
                    .map(|(p, w)| w / total * self.quad_form_diff(p, &mean))
                    .sum();
                Some((mean, trace))
            }
            StationaryLaw::Unspecified { .. } => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.d, self.d, &self.a)
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Domain diameter R.
    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn init_point(&self) -> &[f64] {
        &self.init
    }

    pub fn law(&self) -> &StationaryLaw {
        &self.law
    }

    /// Gradient bound over domain x support.
    pub fn g_bound(&self) -> f64 {
        self.g
    }

    /// Smoothness constant 2 ||A||_2.
    pub fn smoothness(&self) -> f64 {
        2.0 * self.a_norm
    }

    pub fn constants(&self) -> ProblemConstants {
        ProblemConstants {
            g: self.g_bound(),
            r: self.diameter(),
            l: self.smoothness(),
        }
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: v.len(),
            });
        }
        Ok(())
    }

    /// (u - v)^T A (u - v) without dimension checks.
    pub(crate) fn quad_form_diff(&self, u: &[f64], v: &[f64]) -> f64 {
        let d = self.d;
        if self.diagonal {
            return (0..d).map(|i| self.a[i * d + i] * (u[i] - v[i]).powi(2)).sum();
        }
        let mut s = 0.0;
        for i in 0..d {
            let di = u[i] - v[i];
            let row = &self.a[i * d..(i + 1) * d];
            let mut r = 0.0;
            for j in 0..d {
                r += row[j] * (u[j] - v[j]);
            }
            s += di * r;
        }
        s
    }

    /// Writes 2A(w - xi) into `out` without dimension checks.
    pub(crate) fn grad_into(&self, w: &[f64], xi: &[f64], out: &mut [f64]) {
        let d = self.d;
        if self.diagonal {
            for i in 0..d {
                out[i] = 2.0 * self.a[i * d + i] * (w[i] - xi[i]);
            }
            return;
        }
        for i in 0..d {
            let row = &self.a[i * d..(i + 1) * d];
            let mut r = 0.0;
            for j in 0..d {
                r += row[j] * (w[j] - xi[j]);
            }
            out[i] = 2.0 * r;
        }
    }

    pub fn sample_loss(&self, w: &[f64], xi: &[f64]) -> Result<f64> {
        self.check(w)?;
        self.check(xi)?;
        Ok(self.quad_form_diff(w, xi))
    }

    pub fn sample_grad(&self, w: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
        self.check(w)?;
        self.check(xi)?;
        let mut g = vec![0.0; self.d];
        self.grad_into(w, xi, &mut g);
        Ok(g)
    }

    /// Stationary mean and E[(xi - mean)^T A (xi - mean)].
    pub fn stationary_moments(&self) -> Result<(&[f64], f64)> {
        self.moments
            .as_ref()
            .map(|(m, t)| (m.as_slice(), *t))
            .ok_or(Error::MissingStationaryMoments)
    }

    pub fn population_loss(&self, w: &[f64]) -> Result<f64> {
        self.check(w)?;
        let (mean, trace) = self.stationary_moments()?;
        Ok(self.quad_form_diff(w, mean) + trace)
    }

    /// (w*, f*). The stationary mean must lie in the domain.
    pub fn minimizer(&self) -> Result<(Vec<f64>, f64)> {
        let (mean, trace) = self.stationary_moments()?;
        let dc = dist(mean, &self.center);
        if dc > self.radius * (1.0 + 1e-12) {
            return Err(Error::MeanOutsideDomain {
                distance: dc,
                radius: self.radius,
            });
        }
        Ok((mean.to_vec(), trace))
    }

    pub fn project(&self, w: &[f64]) -> Vec<f64> {
        let mut out = w.to_vec();
        self.project_in_place(&mut out);
        out
    }

    pub fn project_in_place(&self, w: &mut [f64]) {
        let dc = dist(w, &self.center);
        // the tolerance keeps projection idempotent under rounding
        if dc > self.radius * (1.0 + 4.0 * f64::EPSILON) {
            let s = self.radius / dc;
            for (x, c) in w.iter_mut().zip(&self.center) {
                *x = c + (*x - c) * s;
            }
        }
    }

    pub fn contains(&self, w: &[f64], tol: f64) -> bool {
        dist(w, &self.center) <= self.radius + tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProblemConstants {
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "L")]
    pub l: f64,
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// A problem together with the stream that feeds it.
#[derive(Debug, Clone)]
pub struct ProblemBundle {
    pub problem: QuadraticProblem,
    pub stream: StreamSpec,
}

impl ProblemBundle {
    pub fn new(problem: QuadraticProblem, stream: StreamSpec) -> Result<Self> {
        if stream.dim() != problem.dim() {
            return Err(Error::DimensionMismatch {
                expected: problem.dim(),
                got: stream.dim(),
            });
        }
        stream.validate()?;
        Ok(Self { problem, stream })
    }

    /// Builds the problem from its config block with the stream's stationary law.
    pub fn from_config(problem: &ProblemConfig, stream: StreamSpec) -> Result<Self> {
        let law = StationaryLaw::for_stream(&stream)?;
        Self::new(problem.build(law)?, stream)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSpec {
    Diag(Vec<f64>),
    Dense(Vec<f64>),
}

/// Problem config block: `d`, `A`, `domain_center`, `domain_radius`, `init_point`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub d: usize,
    pub a: MatrixSpec,
    pub center: Vec<f64>,
    pub radius: f64,
    pub init: Vec<f64>,
}

impl ProblemConfig {
    pub fn default_for(d: usize) -> Self {
        Self {
            d,
            a: MatrixSpec::Diag((1..=d).map(|i| i as f64 / d as f64).collect()),
            center: vec![0.5; d],
            radius: 5.0,
            init: vec![0.0; d],
        }
    }

    pub fn build(&self, law: StationaryLaw) -> Result<QuadraticProblem> {
        let d = self.d;
        let a = match &self.a {
            MatrixSpec::Diag(v) if v.len() == d => DMatrix::from_diagonal(&nalgebra::DVector::from_vec(v.clone())),
            MatrixSpec::Dense(v) if v.len() == d * d => DMatrix::from_row_slice(d, d, v),
            MatrixSpec::Diag(v) | MatrixSpec::Dense(v) => {
                return Err(Error::config(format!("[problem] A has {} entries for d = {d}", v.len())))
            }
        };
        QuadraticProblem::new(a, self.center.clone(), self.radius, law)?.with_init_point(self.init.clone())
    }

    pub fn from_section(s: &Section) -> Result<Self> {
        let d: usize = s.parse_or("d", 10)?;
        if d == 0 {
            return Err(s.err("d", "must be positive"));
        }
        let mut cfg = Self::default_for(d);
        if let Some(a) = s.get("A") {
            cfg.a = match a.trim().strip_prefix("diag:") {
                Some(rest) => MatrixSpec::Diag(crate::kv::parse_list(rest).map_err(|e| s.err("A", e))?),
                None => MatrixSpec::Dense(crate::kv::parse_list(a).map_err(|e| s.err("A", e))?),
            };
        }
        let vector = |key: &str, default: Vec<f64>| -> Result<Vec<f64>> {
            match s.list::<f64>(key)? {
                None => Ok(default),
                Some(v) if v.len() == 1 => Ok(vec![v[0]; d]),
                Some(v) if v.len() == d => Ok(v),
                Some(v) => Err(s.err(key, format!("expected 1 or {d} values, got {}", v.len()))),
            }
        };
        cfg.center = vector("domain_center", cfg.center)?;
        cfg.init = vector("init_point", cfg.init)?;
        cfg.radius = s.parse_or("domain_radius", cfg.radius)?;
        if !(cfg.radius > 0.0) {
            return Err(s.err("domain_radius", "must be positive"));
        }
        Ok(cfg)
    }

    pub fn to_section(&self) -> Section {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut s = Section::new("problem");
        s.insert("d", self.d);
        match &self.a {
            MatrixSpec::Diag(v) => s.insert("A", format!("diag:{}", join(v))),
            MatrixSpec::Dense(v) => s.insert("A", join(v)),
        }
        s.insert("domain_center", join(&self.center));
        s.insert("domain_radius", self.radius);
        s.insert("init_point", join(&self.init));
        s
    }
}
