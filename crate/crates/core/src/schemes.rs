//! The sixteen-scheme catalog.
//!
//! Every scheme is an instance of
//!
//! ```text
//! x ← x + Z (YᵀAZ)† Yᵀ (b − Ax)
//! ```
//!
//! with `(Y, Z)` fixed by the scheme and the random draw. [`Scheme::update`]
//! evaluates the step through a per-scheme fast path that never forms the
//! `n x m` operator `Ξ = Z(YᵀAZ)†Yᵀ`; [`Scheme::update_generic`] builds `Ξ`
//! explicitly from [`realize_y_z`] and is the reference the fast paths are
//! tested against.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{pseudoinverse, DenseMatrix, DenseVector, SpdMatrix};
use crate::sketch::{
    realize_y_z, Distribution, Sample, Sampler, Side, SketchDraw, SketchKind, SketchSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SchemeId {
    K1,
    K2,
    K3,
    K4,
    K5,
    K6,
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
    S1,
    S2,
    S3,
    S4,
}

/// Row-action (`Z = GAᵀY`), column-action (`Y = GAZ`) or symmetric (`Y = Z`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    K,
    C,
    S,
}

impl SchemeId {
    pub const ALL: [SchemeId; 16] = {
        use SchemeId::*;
        [K1, K2, K3, K4, K5, K6, C1, C2, C3, C4, C5, C6, S1, S2, S3, S4]
    };

    pub fn family(self) -> Family {
        use SchemeId::*;
        match self {
            K1 | K2 | K3 | K4 | K5 | K6 => Family::K,
            C1 | C2 | C3 | C4 | C5 | C6 => Family::C,
            S1 | S2 | S3 | S4 => Family::S,
        }
    }

    pub fn sketch_kind(self) -> SketchKind {
        use SchemeId::*;
        match self {
            K1 | S1 => SketchKind::CoordRow,
            C1 => SketchKind::CoordCol,
            K2 | C2 | S2 => SketchKind::GaussVector,
            K3 | K5 => SketchKind::RowSubset,
            C3 | C5 | S3 => SketchKind::ColSubset,
            K4 | K6 | C4 | C6 | S4 => SketchKind::GaussMatrix,
        }
    }

    /// K5, K6, C5 and C6 carry a user-supplied SPD weight `G`.
    pub fn requires_g(self) -> bool {
        use SchemeId::*;
        matches!(self, K5 | K6 | C5 | C6)
    }

    /// Whether the scheme samples more than one direction per step.
    pub fn is_block(self) -> bool {
        !self.sketch_kind().is_scalar()
    }

    pub fn as_str(self) -> &'static str {
        use SchemeId::*;
        match self {
            K1 => "K1",
            K2 => "K2",
            K3 => "K3",
            K4 => "K4",
            K5 => "K5",
            K6 => "K6",
            C1 => "C1",
            C2 => "C2",
            C3 => "C3",
            C4 => "C4",
            C5 => "C5",
            C6 => "C6",
            S1 => "S1",
            S2 => "S2",
            S3 => "S3",
            S4 => "S4",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::InvalidScheme(format!("unknown scheme identifier {s:?}")))
    }
}

/// Cached `r = b − Ax`. Column and symmetric schemes that already form
/// `A·(step direction)` keep it current for O(m·l) per step; everything else
/// marks it stale and recomputes when needed.
#[derive(Debug, Clone)]
pub(crate) struct Residual {
    r: DenseVector,
    fresh: bool,
}

impl Residual {
    pub(crate) fn stale(m: usize) -> Self {
        Self {
            r: DenseVector::zeros(m),
            fresh: false,
        }
    }

    pub(crate) fn refresh(&mut self, a: &DenseMatrix, b: &DenseVector, x: &DenseVector) {
        self.r.copy_from(b);
        self.r.gemv(-1.0, a, x, 1.0);
        self.fresh = true;
    }

    pub(crate) fn norm(&self) -> f64 {
        self.r.norm()
    }

    fn current(&mut self, a: &DenseMatrix, b: &DenseVector, x: &DenseVector) -> &DenseVector {
        if !self.fresh {
            self.refresh(a, b, x);
        }
        &self.r
    }

    /// `r ← r − A·δ`, given the already-formed image `A·δ`.
    fn subtract(&mut self, a_delta: &DenseVector) {
        if self.fresh {
            self.r -= a_delta;
        }
    }

    fn invalidate(&mut self) {
        self.fresh = false;
    }
}

/// A catalog entry bound to its sketch distribution and optional weight `G`.
///
/// For type-K schemes `G` is `n x n`; for type-C schemes it is `m x m`.
#[derive(Debug, Clone)]
pub struct Scheme {
    id: SchemeId,
    sketch: SketchSpec,
    g: Option<SpdMatrix>,
}

fn default_side(id: SchemeId) -> Side {
    match id.family() {
        Family::K => Side::Rows,
        Family::C | Family::S => Side::Cols,
    }
}

impl Scheme {
    /// Block size 1, uniform sampling, no weight matrix.
    pub fn new(id: SchemeId) -> Result<Self> {
        if id.requires_g() {
            return Err(Error::InvalidScheme(format!(
                "{id} requires an SPD weight matrix G; use Scheme::with_weight"
            )));
        }
        Self::build(id, None)
    }

    pub fn with_weight(id: SchemeId, g: SpdMatrix) -> Result<Self> {
        if !id.requires_g() {
            return Err(Error::InvalidScheme(format!(
                "{id} does not take a weight matrix G"
            )));
        }
        Self::build(id, Some(g))
    }

    fn build(id: SchemeId, g: Option<SpdMatrix>) -> Result<Self> {
        let sketch = SketchSpec::new(id.sketch_kind(), 1, Distribution::Uniform, default_side(id))?;
        Ok(Self { id, sketch, g })
    }

    pub fn with_block_size(mut self, l: usize) -> Result<Self> {
        self.sketch = SketchSpec::new(self.sketch.kind, l, self.sketch.distribution, self.sketch.side)?;
        Ok(self)
    }

    pub fn with_distribution(mut self, d: Distribution) -> Result<Self> {
        self.sketch = SketchSpec::new(self.sketch.kind, self.sketch.block_size, d, self.sketch.side)?;
        Ok(self)
    }

    pub fn id(&self) -> SchemeId {
        self.id
    }

    pub fn sketch(&self) -> &SketchSpec {
        &self.sketch
    }

    pub fn g(&self) -> Option<&SpdMatrix> {
        self.g.as_ref()
    }

    /// Setup-time compatibility check against a coefficient matrix: weight
    /// shape, SPD requirement for type-S and trace-proportional sampling,
    /// block size bounds.
    pub fn check_problem(&self, a: &DenseMatrix) -> Result<()> {
        let (m, n) = a.shape();
        if let Some(g) = &self.g {
            let expect = match self.id.family() {
                Family::K | Family::S => n,
                Family::C => m,
            };
            if g.dim() != expect {
                return Err(Error::dims(
                    "Scheme::check_problem",
                    format!("{expect}x{expect} weight G for {}", self.id),
                    format!("{0}x{0}", g.dim()),
                ));
            }
        }
        let needs_spd = self.id.family() == Family::S
            || self.sketch.distribution == Distribution::TraceProportional;
        if needs_spd {
            if m != n {
                return Err(Error::InvalidScheme(format!(
                    "{} needs a square SPD matrix, got {m}x{n}",
                    self.id
                )));
            }
            SpdMatrix::new(a.clone()).map_err(|e| {
                Error::InvalidScheme(format!("{} needs an SPD matrix: {e}", self.id))
            })?;
        }
        let dim = self.sketch.dim((m, n));
        if self.sketch.block_size > dim {
            return Err(Error::InvalidScheme(format!(
                "{}: block size {} exceeds dimension {dim}",
                self.id, self.sketch.block_size
            )));
        }
        Ok(())
    }

    /// Weights for the non-uniform distributions: squared row norms for
    /// row coordinates, squared column norms for column coordinates, the
    /// diagonal for trace-proportional sampling.
    pub fn sampling_weights(&self, a: &DenseMatrix) -> Option<Vec<f64>> {
        match (self.sketch.distribution, self.sketch.kind) {
            (Distribution::Uniform, _) => None,
            (Distribution::TraceProportional, _) => Some(a.diagonal().iter().copied().collect()),
            (Distribution::NormProportional, SketchKind::CoordCol) => {
                Some(a.column_iter().map(|c| c.norm_squared()).collect())
            }
            (Distribution::NormProportional, _) => {
                Some(a.row_iter().map(|r| r.norm_squared()).collect())
            }
        }
    }

    pub fn sampler(&self, a: &DenseMatrix) -> Result<Sampler> {
        let w = self.sampling_weights(a);
        Sampler::new(self.sketch, a.shape(), w.as_deref())
    }

    fn check_shapes(&self, a: &DenseMatrix, b: Option<&DenseVector>, x: &DenseVector) -> Result<()> {
        let (m, n) = a.shape();
        if x.len() != n {
            return Err(Error::dims("Scheme::update", format!("x of length {n}"), format!("{}", x.len())));
        }
        if let Some(b) = b {
            if b.len() != m {
                return Err(Error::dims("Scheme::update", format!("b of length {m}"), format!("{}", b.len())));
            }
        }
        Ok(())
    }

    fn check_draw(&self, draw: &SketchDraw, dims: (usize, usize)) -> Result<()> {
        if draw.kind != self.sketch.kind {
            return Err(Error::InvalidSketch(format!(
                "{} expects a {:?} draw, got {:?}",
                self.id, self.sketch.kind, draw.kind
            )));
        }
        let dim = self.sketch.dim(dims);
        let ok = match &draw.sample {
            Sample::Index(i) => matches!(draw.kind, SketchKind::CoordRow | SketchKind::CoordCol) && *i < dim,
            Sample::Subset(ix) => {
                matches!(draw.kind, SketchKind::RowSubset | SketchKind::ColSubset)
                    && !ix.is_empty()
                    && ix.iter().all(|&i| i < dim)
            }
            Sample::Gaussian(g) => draw.kind.is_gaussian() && g.nrows() == dim && g.ncols() >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSketch(format!(
                "{} draw does not fit a {dim}-dimensional sketch space",
                self.id
            )))
        }
    }

    fn degenerate(&self, reason: impl Into<String>) -> Error {
        Error::DegenerateStep {
            scheme: self.id,
            reason: reason.into(),
        }
    }

    fn weight(&self) -> &DenseMatrix {
        self.g
            .as_ref()
            .map(SpdMatrix::as_matrix)
            .expect("weighted schemes are constructed with G")
    }

    /// One step through the scheme's fast path. Returns the next iterate.
    ///
    /// A zero or non-positive scalar denominator yields
    /// [`Error::DegenerateStep`]; the caller keeps the current iterate.
    pub fn update(
        &self,
        a: &DenseMatrix,
        b: &DenseVector,
        x: &DenseVector,
        draw: &SketchDraw,
    ) -> Result<DenseVector> {
        self.check_shapes(a, Some(b), x)?;
        let mut next = x.clone();
        let mut res = Residual::stale(a.nrows());
        self.step(a, b, &mut next, &mut res, draw)?;
        Ok(next)
    }

    /// In-place fast-path step. `x` is untouched on error.
    pub(crate) fn step(
        &self,
        a: &DenseMatrix,
        b: &DenseVector,
        x: &mut DenseVector,
        res: &mut Residual,
        draw: &SketchDraw,
    ) -> Result<()> {
        use SchemeId::*;
        self.check_draw(draw, a.shape())?;
        match (self.id, &draw.sample) {
            (K1, Sample::Index(i)) => {
                let row = a.row(*i);
                let denom = row.norm_squared();
                if denom == 0.0 {
                    return Err(self.degenerate(format!("row {i} is zero")));
                }
                let coef = (b[*i] - row.dot(&x.transpose())) / denom;
                x.axpy(coef, &row.transpose(), 1.0);
                res.invalidate();
            }
            (K2, Sample::Gaussian(omega)) => {
                let omega = omega.column(0);
                let z = a.tr_mul(&omega);
                let denom = z.norm_squared();
                if denom == 0.0 {
                    return Err(self.degenerate("Aᵀω vanishes"));
                }
                let coef = omega.dot(res.current(a, b, x)) / denom;
                x.axpy(coef, &z, 1.0);
                res.invalidate();
            }
            (K3, Sample::Subset(rows)) => {
                // A_Rᵀ(A_R A_Rᵀ)† = A_R†, without squaring κ(A_R).
                let a_r = a.select_rows(rows.iter());
                let rhs = DenseVector::from_iterator(rows.len(), rows.iter().map(|&i| b[i])) - &a_r * &*x;
                x.gemv(1.0, &pseudoinverse(&a_r), &rhs, 1.0);
                res.invalidate();
            }
            (K4, Sample::Gaussian(omega)) => {
                let z = a.tr_mul(omega);
                let y = omega.tr_mul(res.current(a, b, x));
                x.gemv(1.0, &pseudoinverse(&z.transpose()), &y, 1.0);
                res.invalidate();
            }
            (K5, Sample::Subset(rows)) => {
                let a_r = a.select_rows(rows.iter());
                let z = self.weight() * a_r.transpose();
                let e = &a_r * &z;
                let rhs = DenseVector::from_iterator(rows.len(), rows.iter().map(|&i| b[i])) - &a_r * &*x;
                let y = pseudoinverse(&e) * rhs;
                x.gemv(1.0, &z, &y, 1.0);
                res.invalidate();
            }
            (K6, Sample::Gaussian(omega)) => {
                let at_omega = a.tr_mul(omega);
                let z = self.weight() * &at_omega;
                let e = at_omega.tr_mul(&z);
                let y = pseudoinverse(&e) * omega.tr_mul(res.current(a, b, x));
                x.gemv(1.0, &z, &y, 1.0);
                res.invalidate();
            }
            (C1, Sample::Index(j)) => {
                let col = a.column(*j);
                let denom = col.norm_squared();
                if denom == 0.0 {
                    return Err(self.degenerate(format!("column {j} is zero")));
                }
                let delta = col.dot(res.current(a, b, x)) / denom;
                x[*j] += delta;
                res.subtract(&(col * delta));
            }
            (C2, Sample::Gaussian(omega)) => {
                let omega = omega.column(0);
                let a_omega = a * omega;
                let denom = a_omega.norm_squared();
                if denom == 0.0 {
                    return Err(self.degenerate("Aω vanishes"));
                }
                let delta = a_omega.dot(res.current(a, b, x)) / denom;
                x.axpy(delta, &omega, 1.0);
                res.subtract(&(a_omega * delta));
            }
            (C3, Sample::Subset(cols)) => {
                let a_c = a.select_columns(cols.iter());
                let y = pseudoinverse(&a_c) * res.current(a, b, x);
                for (&j, dy) in cols.iter().zip(y.iter()) {
                    x[j] += dy;
                }
                res.subtract(&(a_c * y));
            }
            (C4, Sample::Gaussian(omega)) => {
                let a_omega = a * omega;
                let y = pseudoinverse(&a_omega) * res.current(a, b, x);
                x.gemv(1.0, omega, &y, 1.0);
                res.subtract(&(a_omega * y));
            }
            (C5, Sample::Subset(cols)) => {
                let a_c = a.select_columns(cols.iter());
                let y_mat = self.weight() * &a_c;
                let e = a_c.tr_mul(&y_mat);
                let y = pseudoinverse(&e) * y_mat.tr_mul(res.current(a, b, x));
                for (&j, dy) in cols.iter().zip(y.iter()) {
                    x[j] += dy;
                }
                res.subtract(&(a_c * y));
            }
            (C6, Sample::Gaussian(omega)) => {
                let a_omega = a * omega;
                let y_mat = self.weight() * &a_omega;
                let e = a_omega.tr_mul(&y_mat);
                let y = pseudoinverse(&e) * y_mat.tr_mul(res.current(a, b, x));
                x.gemv(1.0, omega, &y, 1.0);
                res.subtract(&(a_omega * y));
            }
            (S1, Sample::Index(i)) => {
                let diag = a[(*i, *i)];
                if diag <= 0.0 {
                    return Err(self.degenerate(format!("diagonal entry {i} is {diag}")));
                }
                let delta = (b[*i] - a.row(*i).dot(&x.transpose())) / diag;
                x[*i] += delta;
                res.invalidate();
            }
            (S2, Sample::Gaussian(omega)) => {
                let omega = omega.column(0);
                let a_omega = a * omega;
                let denom = omega.dot(&a_omega);
                if denom <= 0.0 {
                    return Err(self.degenerate(format!("ωᵀAω = {denom}")));
                }
                let delta = omega.dot(res.current(a, b, x)) / denom;
                x.axpy(delta, &omega, 1.0);
                res.subtract(&(a_omega * delta));
            }
            (S3, Sample::Subset(cols)) => {
                let a_rows = a.select_rows(cols.iter());
                let e = a_rows.select_columns(cols.iter());
                let rhs = DenseVector::from_iterator(cols.len(), cols.iter().map(|&i| b[i])) - &a_rows * &*x;
                let y = pseudoinverse(&e) * rhs;
                for (&j, dy) in cols.iter().zip(y.iter()) {
                    x[j] += dy;
                }
                res.invalidate();
            }
            (S4, Sample::Gaussian(omega)) => {
                let a_omega = a * omega;
                let e = omega.tr_mul(&a_omega);
                let y = pseudoinverse(&e) * omega.tr_mul(res.current(a, b, x));
                x.gemv(1.0, omega, &y, 1.0);
                res.subtract(&(a_omega * y));
            }
            _ => {
                return Err(Error::InvalidSketch(format!(
                    "{} cannot use a {:?} draw",
                    self.id, draw.kind
                )))
            }
        }
        Ok(())
    }

    /// `Ξ = Z (YᵀAZ)† Yᵀ` assembled from the explicit `(Y, Z)`.
    pub fn xi(&self, a: &DenseMatrix, draw: &SketchDraw) -> Result<DenseMatrix> {
        self.check_draw(draw, a.shape())?;
        let (y, z) = realize_y_z(self, draw, a)?;
        let e = y.tr_mul(&(a * &z));
        Ok(&z * pseudoinverse(&e) * y.transpose())
    }

    /// Error propagator `T = I − ΞA` for one draw.
    pub fn projector_t(&self, a: &DenseMatrix, draw: &SketchDraw) -> Result<DenseMatrix> {
        let n = a.ncols();
        Ok(DenseMatrix::identity(n, n) - self.xi(a, draw)? * a)
    }

    /// Reference step `x + Ξ(b − Ax)` through the explicit operator.
    pub fn update_generic(
        &self,
        a: &DenseMatrix,
        b: &DenseVector,
        x: &DenseVector,
        draw: &SketchDraw,
    ) -> Result<DenseVector> {
        self.check_shapes(a, Some(b), x)?;
        let xi = self.xi(a, draw)?;
        Ok(x + xi * (b - a * x))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionReport {
    /// The (type-K, type-C, type-S) triple that was compared.
    pub schemes: [SchemeId; 3],
    /// Largest entrywise difference between any two of the three updates.
    pub max_discrepancy: f64,
}

/// Compares K5/C5/S3 (subset draws) or K6/C6/S4 (Gaussian draws) on an SPD
/// system with a shared draw. With `G = A⁻¹` (the default when `g` is
/// `None`) the three updates coincide.
pub fn reduce_check(
    a: &SpdMatrix,
    b: &DenseVector,
    x: &DenseVector,
    draw: &SketchDraw,
    g: Option<&SpdMatrix>,
) -> Result<ReductionReport> {
    use SchemeId::*;
    let g = match g {
        Some(g) => g.clone(),
        None => a.inverse(),
    };
    let (triple, kinds) = match &draw.sample {
        Sample::Subset(_) => (
            [K5, C5, S3],
            [SketchKind::RowSubset, SketchKind::ColSubset, SketchKind::ColSubset],
        ),
        Sample::Gaussian(_) => ([K6, C6, S4], [SketchKind::GaussMatrix; 3]),
        Sample::Index(_) => {
            return Err(Error::InvalidSketch(
                "reduction check needs a subset or Gaussian matrix draw".into(),
            ))
        }
    };
    let am = a.as_matrix();
    let mut updates = Vec::with_capacity(3);
    for (id, kind) in triple.into_iter().zip(kinds) {
        let scheme = if id.requires_g() {
            Scheme::with_weight(id, g.clone())?
        } else {
            Scheme::new(id)?
        };
        let shared = SketchDraw {
            kind,
            sample: draw.sample.clone(),
        };
        updates.push(scheme.update(am, b, x, &shared)?);
    }
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in (i + 1)..3 {
            worst = worst.max((&updates[i] - &updates[j]).amax());
        }
    }
    Ok(ReductionReport {
        schemes: triple,
        max_discrepancy: worst,
    })
}
