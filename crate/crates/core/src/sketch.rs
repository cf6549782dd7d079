//! Random draws that define one sketch-and-project step.
//!
//! A [`SketchSpec`] describes the family of random test matrices a scheme
//! samples from; a [`SketchDraw`] is one realization. Draws are made from a
//! [`RngState`], which wraps ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded from
//! a `u64`. Gaussian entries use the ziggurat `StandardNormal` sampler from
//! `rand_distr`, and uniform subsets use Floyd's algorithm from
//! `rand::seq::index::sample`. With the dependency versions pinned by
//! `Cargo.lock`, a seed fixes the whole draw sequence.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SpdMatrix};
use crate::schemes::{Family, Scheme, SchemeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SketchKind {
    /// One coordinate `e_i` of the sketch space.
    CoordRow,
    /// One coordinate `e_j` of the column space.
    CoordCol,
    /// `I_R`: columns of the identity indexed by a random row subset.
    RowSubset,
    /// `I_C`: columns of the identity indexed by a random column subset.
    ColSubset,
    /// A standard Gaussian vector `ω`.
    GaussVector,
    /// A standard Gaussian matrix `Ω` with i.i.d. entries.
    GaussMatrix,
}

impl SketchKind {
    pub fn is_gaussian(self) -> bool {
        matches!(self, SketchKind::GaussVector | SketchKind::GaussMatrix)
    }

    pub fn is_scalar(self) -> bool {
        matches!(
            self,
            SketchKind::CoordRow | SketchKind::CoordCol | SketchKind::GaussVector
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Distribution {
    #[default]
    Uniform,
    /// Index `i` with probability proportional to the supplied weight
    /// (squared row or column norms when chosen by a scheme).
    NormProportional,
    /// Index `i` with probability `A_ii / trace(A)`.
    TraceProportional,
}

/// Which space the sketch lives in: `R^m` (rows of `A`) or `R^n` (columns).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Rows,
    Cols,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SketchSpec {
    pub kind: SketchKind,
    pub block_size: usize,
    pub distribution: Distribution,
    pub side: Side,
}

impl SketchSpec {
    /// Builds a spec, checking the kind/distribution/side combination.
    /// Coordinate and subset kinds fix their own side; `side` only matters
    /// for the Gaussian kinds.
    pub fn new(
        kind: SketchKind,
        block_size: usize,
        distribution: Distribution,
        side: Side,
    ) -> Result<Self> {
        let side = match kind {
            SketchKind::CoordRow | SketchKind::RowSubset => Side::Rows,
            SketchKind::CoordCol | SketchKind::ColSubset => Side::Cols,
            SketchKind::GaussVector | SketchKind::GaussMatrix => side,
        };
        if block_size == 0 {
            return Err(Error::InvalidSketch("block size must be at least 1".into()));
        }
        if kind.is_scalar() && block_size != 1 {
            return Err(Error::InvalidSketch(format!(
                "{kind:?} draws a single vector; block size {block_size} is not allowed"
            )));
        }
        match distribution {
            Distribution::Uniform => {}
            Distribution::NormProportional
                if matches!(kind, SketchKind::CoordRow | SketchKind::CoordCol) => {}
            Distribution::TraceProportional if kind == SketchKind::CoordRow => {}
            _ => {
                return Err(Error::InvalidSketch(format!(
                    "{distribution:?} sampling is not defined for {kind:?}"
                )))
            }
        }
        Ok(Self {
            kind,
            block_size,
            distribution,
            side,
        })
    }

    /// Length of the sketched space for an `m x n` system.
    pub fn dim(&self, (m, n): (usize, usize)) -> usize {
        match self.side {
            Side::Rows => m,
            Side::Cols => n,
        }
    }
}

/// Seeded, reproducible random stream.
#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    stream: u64,
    rng: ChaCha20Rng,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Independent stream `stream` under master seed `seed`. Used to give each
    /// trial or benchmark cell its own generator.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform on the open interval (0, 1).
    pub fn open01(&mut self) -> f64 {
        self.rng.sample(rand::distr::Open01)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |_, _| self.standard_normal())
    }

    pub(crate) fn inner(&mut self) -> &mut ChaCha20Rng {
        &mut self.rng
    }
}

/// The random part of one realized draw.
#[derive(Debug, Clone, PartialEq)]
pub enum Sample {
    Index(usize),
    /// Distinct indices in increasing order.
    Subset(Vec<usize>),
    /// `dim x l` Gaussian matrix (`l = 1` for `GaussVector`).
    Gaussian(DenseMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SketchDraw {
    pub kind: SketchKind,
    pub sample: Sample,
}

impl SketchDraw {
    pub fn index(kind: SketchKind, i: usize) -> Self {
        Self {
            kind,
            sample: Sample::Index(i),
        }
    }

    pub fn subset(kind: SketchKind, mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        Self {
            kind,
            sample: Sample::Subset(indices),
        }
    }

    pub fn gaussian(kind: SketchKind, omega: DenseMatrix) -> Self {
        Self {
            kind,
            sample: Sample::Gaussian(omega),
        }
    }

    /// Number of columns `l` of the realized `Y`/`Z`.
    pub fn width(&self) -> usize {
        match &self.sample {
            Sample::Index(_) => 1,
            Sample::Subset(ix) => ix.len(),
            Sample::Gaussian(g) => g.ncols(),
        }
    }
}

/// A [`SketchSpec`] bound to problem dimensions, with any weighted distribution
/// precomputed so repeated draws are cheap.
#[derive(Debug, Clone)]
pub struct Sampler {
    spec: SketchSpec,
    dim: usize,
    weighted: Option<WeightedIndex<f64>>,
}

impl Sampler {
    pub fn new(spec: SketchSpec, dims: (usize, usize), weights: Option<&[f64]>) -> Result<Self> {
        let dim = spec.dim(dims);
        if spec.block_size > dim {
            return Err(Error::InvalidSketch(format!(
                "block size {} exceeds dimension {dim}",
                spec.block_size
            )));
        }
        let weighted = match spec.distribution {
            Distribution::Uniform => None,
            Distribution::NormProportional | Distribution::TraceProportional => {
                let w = weights.ok_or_else(|| {
                    Error::InvalidSketch(format!("{:?} sampling needs weights", spec.distribution))
                })?;
                if w.len() != dim {
                    return Err(Error::dims(
                        "Sampler::new",
                        format!("{dim} weights"),
                        format!("{}", w.len()),
                    ));
                }
                if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::InvalidSketch(
                        "weights must be finite and nonnegative".into(),
                    ));
                }
                if w.iter().sum::<f64>() <= 0.0 {
                    return Err(Error::InvalidSketch("zero total weight".into()));
                }
                Some(
                    WeightedIndex::new(w)
                        .map_err(|e| Error::InvalidSketch(format!("weights: {e}")))?,
                )
            }
        };
        Ok(Self { spec, dim, weighted })
    }

    pub fn spec(&self) -> &SketchSpec {
        &self.spec
    }

    pub fn draw(&self, rng: &mut RngState) -> SketchDraw {
        let kind = self.spec.kind;
        match kind {
            SketchKind::CoordRow | SketchKind::CoordCol => {
                let i = match &self.weighted {
                    Some(w) => w.sample(rng.inner()),
                    None => rng.index(self.dim),
                };
                SketchDraw::index(kind, i)
            }
            SketchKind::RowSubset | SketchKind::ColSubset => {
                let ix = rand::seq::index::sample(rng.inner(), self.dim, self.spec.block_size);
                SketchDraw::subset(kind, ix.into_vec())
            }
            SketchKind::GaussVector => SketchDraw::gaussian(kind, rng.gaussian_matrix(self.dim, 1)),
            SketchKind::GaussMatrix => SketchDraw::gaussian(
                kind,
                rng.gaussian_matrix(self.dim, self.spec.block_size),
            ),
        }
    }
}

/// One-off draw. Prefer [`Sampler`] inside loops.
pub fn draw(
    spec: &SketchSpec,
    dims: (usize, usize),
    weights: Option<&[f64]>,
    rng: &mut RngState,
) -> Result<SketchDraw> {
    Ok(Sampler::new(*spec, dims, weights)?.draw(rng))
}

fn identity_columns(dim: usize, indices: &[usize]) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(dim, indices.len());
    for (c, &i) in indices.iter().enumerate() {
        out[(i, c)] = 1.0;
    }
    out
}

/// The explicit test matrix (`e_i`, `I_R`, `ω`, `Ω`, ...) of a draw.
pub(crate) fn test_matrix(draw: &SketchDraw, dim: usize) -> Result<DenseMatrix> {
    match &draw.sample {
        Sample::Index(i) => {
            if *i >= dim {
                return Err(Error::InvalidSketch(format!("index {i} out of range {dim}")));
            }
            Ok(identity_columns(dim, &[*i]))
        }
        Sample::Subset(ix) => {
            if let Some(bad) = ix.iter().find(|&&i| i >= dim) {
                return Err(Error::InvalidSketch(format!("index {bad} out of range {dim}")));
            }
            Ok(identity_columns(dim, ix))
        }
        Sample::Gaussian(g) => {
            if g.nrows() != dim {
                return Err(Error::dims(
                    "test_matrix",
                    format!("{dim} rows"),
                    format!("{}", g.nrows()),
                ));
            }
            Ok(g.clone())
        }
    }
}

fn g_matrix<'a>(id: SchemeId, g: Option<&'a SpdMatrix>) -> Result<&'a DenseMatrix> {
    g.map(SpdMatrix::as_matrix)
        .ok_or_else(|| Error::InvalidScheme(format!("{id} requires a weight matrix G")))
}

/// Explicit `(Y, Z)` for a scheme and draw, exactly as the catalog defines
/// them: type-K fixes `Y` and sets `Z = G Aᵀ Y`, type-C fixes `Z` and sets
/// `Y = G A Z`, type-S uses `Y = Z`. `G` defaults to the identity for the
/// schemes that do not take one.
pub fn realize_y_z(
    scheme: &Scheme,
    draw: &SketchDraw,
    a: &DenseMatrix,
) -> Result<(DenseMatrix, DenseMatrix)> {
    let id = scheme.id();
    if draw.kind != id.sketch_kind() {
        return Err(Error::InvalidSketch(format!(
            "{id} expects a {:?} draw, got {:?}",
            id.sketch_kind(),
            draw.kind
        )));
    }
    let (m, n) = a.shape();
    let weighted = id.requires_g();
    match id.family() {
        Family::K => {
            let y = test_matrix(draw, m)?;
            let at_y = a.tr_mul(&y);
            let z = if weighted {
                g_matrix(id, scheme.g())? * at_y
            } else {
                at_y
            };
            Ok((y, z))
        }
        Family::C => {
            let z = test_matrix(draw, n)?;
            let a_z = a * &z;
            let y = if weighted {
                g_matrix(id, scheme.g())? * a_z
            } else {
                a_z
            };
            Ok((y, z))
        }
        Family::S => {
            let z = test_matrix(draw, n)?;
            Ok((z.clone(), z))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: SketchKind, l: usize, d: Distribution) -> SketchSpec {
        SketchSpec::new(kind, l, d, Side::Rows).unwrap()
    }

    #[test]
    fn single_row_always_index_zero() {
        let mut rng = RngState::new(3);
        for d in [Distribution::Uniform, Distribution::NormProportional] {
            let s = spec(SketchKind::CoordRow, 1, d);
            for _ in 0..20 {
                let dr = draw(&s, (1, 4), Some(&[2.0]), &mut rng).unwrap();
                assert_eq!(dr.sample, Sample::Index(0));
            }
        }
    }

    #[test]
    fn full_subset_is_everything() {
        let mut rng = RngState::new(9);
        let s = spec(SketchKind::RowSubset, 6, Distribution::Uniform);
        let dr = draw(&s, (6, 2), None, &mut rng).unwrap();
        assert_eq!(dr.sample, Sample::Subset((0..6).collect()));
    }

    #[test]
    fn norm_proportional_frequency() {
        let mut rng = RngState::new(2024);
        let s = spec(SketchKind::CoordRow, 1, Distribution::NormProportional);
        let sampler = Sampler::new(s, (2, 1), Some(&[1.0, 3.0])).unwrap();
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| sampler.draw(&mut rng).sample == Sample::Index(1))
            .count();
        let freq = hits as f64 / trials as f64;
        assert!((freq - 0.75).abs() <= 0.01, "frequency {freq}");
    }

    #[test]
    fn weight_errors() {
        let mut rng = RngState::new(1);
        let s = spec(SketchKind::CoordRow, 1, Distribution::NormProportional);
        assert!(draw(&s, (2, 1), Some(&[0.0, 0.0]), &mut rng).is_err());
        assert!(draw(&s, (2, 1), None, &mut rng).is_err());
        assert!(draw(&s, (2, 1), Some(&[1.0]), &mut rng).is_err());
        assert!(draw(&s, (2, 1), Some(&[1.0, -1.0]), &mut rng).is_err());
    }

    #[test]
    fn block_size_bounds() {
        let mut rng = RngState::new(1);
        let s = spec(SketchKind::ColSubset, 5, Distribution::Uniform);
        assert!(draw(&s, (10, 4), None, &mut rng).is_err());
        assert!(SketchSpec::new(SketchKind::ColSubset, 0, Distribution::Uniform, Side::Cols).is_err());
        assert!(SketchSpec::new(SketchKind::GaussVector, 2, Distribution::Uniform, Side::Cols).is_err());
    }

    #[test]
    fn distribution_restrictions() {
        use Distribution::*;
        assert!(SketchSpec::new(SketchKind::RowSubset, 2, NormProportional, Side::Rows).is_err());
        assert!(SketchSpec::new(SketchKind::CoordCol, 1, TraceProportional, Side::Cols).is_err());
        assert!(SketchSpec::new(SketchKind::GaussMatrix, 2, NormProportional, Side::Rows).is_err());
        assert!(SketchSpec::new(SketchKind::CoordRow, 1, TraceProportional, Side::Rows).is_ok());
    }

    #[test]
    fn gaussian_shapes_follow_side() {
        let mut rng = RngState::new(5);
        let rows = SketchSpec::new(SketchKind::GaussMatrix, 3, Distribution::Uniform, Side::Rows).unwrap();
        let cols = SketchSpec::new(SketchKind::GaussMatrix, 3, Distribution::Uniform, Side::Cols).unwrap();
        match draw(&rows, (7, 4), None, &mut rng).unwrap().sample {
            Sample::Gaussian(g) => assert_eq!(g.shape(), (7, 3)),
            other => panic!("unexpected {other:?}"),
        }
        match draw(&cols, (7, 4), None, &mut rng).unwrap().sample {
            Sample::Gaussian(g) => assert_eq!(g.shape(), (4, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = RngState::new(77);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() <= 0.02, "mean {mean}");
        assert!((var - 1.0).abs() <= 0.05, "var {var}");
    }

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let mut a = RngState::with_stream(11, 0);
        let mut b = RngState::with_stream(11, 1);
        let mut a2 = RngState::with_stream(11, 0);
        let xa: Vec<f64> = (0..8).map(|_| a.standard_normal()).collect();
        let xb: Vec<f64> = (0..8).map(|_| b.standard_normal()).collect();
        let xa2: Vec<f64> = (0..8).map(|_| a2.standard_normal()).collect();
        assert_eq!(xa, xa2);
        assert_ne!(xa, xb);
    }
}
