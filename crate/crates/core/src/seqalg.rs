//! Bounded sequences in a normed *-algebra modulo null sequences.
//!
//! The lim sup that defines the quotient norm is replaced by a finite tail
//! window ([`TailPolicy`]); everything built on it is a sampled surrogate.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::weyl::WeylElement;

/// A normed, associative, unital algebra with involution.
pub trait StarAlgebra: Clone + Send + Sync + 'static {
    fn add(&self, other: &Self) -> Result<Self>;
    fn mul(&self, other: &Self) -> Result<Self>;
    fn scale(&self, c: Complex64) -> Self;
    fn star(&self) -> Self;
    fn norm(&self) -> f64;
    /// The unit of the algebra `self` lives in.
    fn unit_like(&self) -> Self;

    fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }
}

/// Largest supported matrix dimension.
pub const MAX_MATRIX_DIM: usize = 8;

/// A square complex matrix of dimension at most [`MAX_MATRIX_DIM`] with the spectral norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix(DMatrix<Complex64>);

impl Matrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 || m.nrows() > MAX_MATRIX_DIM {
            return Err(Error::Usage(format!(
                "matrices must be square with dimension 1..={MAX_MATRIX_DIM}, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Matrix(m))
    }

    /// Row-major real entries.
    pub fn from_real(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Usage(format!(
                "expected {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_iterator(
            n,
            n,
            entries.iter().map(|&x| Complex64::new(x, 0.0)),
        ))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n))
    }

    pub fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::Usage(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }

    /// `max(‖U*U - 1‖, ‖UU* - 1‖)`.
    pub fn unitarity_defect(&self) -> f64 {
        let one = DMatrix::identity(self.dim(), self.dim());
        let a = &self.0.adjoint() * &self.0 - &one;
        let b = &self.0 * self.0.adjoint() - one;
        spectral_norm(&a).max(spectral_norm(&b))
    }
}

fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

impl StarAlgebra for Matrix {
    fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Matrix(&self.0 + &other.0))
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Matrix(&self.0 * &other.0))
    }

    fn scale(&self, c: Complex64) -> Self {
        Matrix(self.0.map(|x| x * c))
    }

    fn star(&self) -> Self {
        Matrix(self.0.adjoint())
    }

    fn norm(&self) -> f64 {
        spectral_norm(&self.0)
    }

    fn unit_like(&self) -> Self {
        Matrix(DMatrix::identity(self.dim(), self.dim()))
    }
}

/// Weyl polynomials with the coefficient norm `Σ|c|`, which is exact on
/// multiples of a single generator.
impl StarAlgebra for WeylElement {
    fn add(&self, other: &Self) -> Result<Self> {
        WeylElement::add(self, other)
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        WeylElement::mul(self, other)
    }

    fn scale(&self, c: Complex64) -> Self {
        WeylElement::scale(self, c)
    }

    fn star(&self) -> Self {
        WeylElement::star(self)
    }

    fn norm(&self) -> f64 {
        WeylElement::norm(self)
    }

    fn unit_like(&self) -> Self {
        WeylElement::identity(self.grid().clone())
    }
}

/// Finite surrogate for `lim sup`: the maximum over `K` sample indices `≥ N₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPolicy {
    window_start: u64,
    sample_count: usize,
    tolerance: f64,
}

impl Default for TailPolicy {
    fn default() -> Self {
        TailPolicy {
            window_start: 32,
            sample_count: 16,
            tolerance: 1e-6,
        }
    }
}

impl TailPolicy {
    pub fn new(window_start: u64, sample_count: usize, tolerance: f64) -> Result<Self> {
        if window_start < 1 || sample_count < 8 || !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(Error::Config(format!(
                "tail policy needs N0 ≥ 1, K ≥ 8, τ > 0; got ({window_start}, {sample_count}, {tolerance})"
            )));
        }
        if window_start
            .checked_shl(sample_count.div_ceil(2) as u32)
            .is_none_or(|m| m >= u64::MAX / 4)
        {
            return Err(Error::Config(
                "tail policy samples overflow the index range".into(),
            ));
        }
        Ok(TailPolicy {
            window_start,
            sample_count,
            tolerance,
        })
    }

    pub fn window_start(&self) -> u64 {
        self.window_start
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// `N₀·2^j` and `N₀·2^j + 1` for `j = 0, 1, …`, truncated to `K` indices.
    pub fn indices(&self) -> Vec<u64> {
        (0..self.sample_count as u64)
            .map(|k| (self.window_start << (k / 2)) + (k % 2))
            .collect()
    }
}

type Generator<A> = Arc<dyn Fn(u64) -> Result<A> + Send + Sync>;

/// A bounded sequence `n ↦ B_n`, `n ≥ 1`, evaluated lazily and memoized.
#[derive(Clone)]
pub struct SequenceElement<A: StarAlgebra> {
    generator: Generator<A>,
    bound: f64,
    memo: Arc<Mutex<HashMap<u64, A>>>,
}

impl<A: StarAlgebra> fmt::Debug for SequenceElement<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SequenceElement")
            .field("bound", &self.bound)
            .finish_non_exhaustive()
    }
}

impl<A: StarAlgebra> SequenceElement<A> {
    /// `generator` must be pure; `bound` must dominate every `‖B_n‖`.
    pub fn new<F>(bound: f64, generator: F) -> Self
    where
        F: Fn(u64) -> Result<A> + Send + Sync + 'static,
    {
        SequenceElement {
            generator: Arc::new(generator),
            bound,
            memo: Arc::new(Mutex::new(HashMap::new())),
        }
    }

    pub fn constant(a: A) -> Self {
        let bound = a.norm();
        Self::new(bound, move |_| Ok(a.clone()))
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// `B_n`; errors if the entry exceeds the declared bound.
    pub fn at(&self, n: u64) -> Result<A> {
        if n == 0 {
            return Err(Error::Usage("sequences are indexed from 1".into()));
        }
        if let Some(a) = self.memo.lock().expect("memo lock").get(&n) {
            return Ok(a.clone());
        }
        let a = (self.generator)(n)?;
        let norm = a.norm();
        if norm > self.bound * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::Domain(format!(
                "entry {n} has norm {norm} above the declared bound {}",
                self.bound
            )));
        }
        self.memo
            .lock()
            .expect("memo lock")
            .entry(n)
            .or_insert_with(|| a.clone());
        Ok(a)
    }

    fn pointwise<F>(&self, other: &Self, bound: f64, op: F) -> Self
    where
        F: Fn(&A, &A) -> Result<A> + Send + Sync + 'static,
    {
        let (x, y) = (self.clone(), other.clone());
        Self::new(bound, move |n| op(&x.at(n)?, &y.at(n)?))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.pointwise(other, self.bound + other.bound, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.pointwise(other, self.bound + other.bound, |a, b| a.sub(b))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.pointwise(other, self.bound * other.bound, |a, b| a.mul(b))
    }

    pub fn star(&self) -> Self {
        let x = self.clone();
        Self::new(self.bound, move |n| Ok(x.at(n)?.star()))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let x = self.clone();
        Self::new(self.bound * c.norm(), move |n| Ok(x.at(n)?.scale(c)))
    }

    /// `s - 1` pointwise.
    pub fn sub_unit(&self) -> Self {
        let x = self.clone();
        Self::new(self.bound + 1.0, move |n| {
            let a = x.at(n)?;
            a.sub(&a.unit_like())
        })
    }
}

/// Max of `‖B_n‖` over the policy's sample indices.
pub fn limsup_norm<A: StarAlgebra>(s: &SequenceElement<A>, policy: &TailPolicy) -> Result<f64> {
    policy
        .indices()
        .into_iter()
        .try_fold(0.0f64, |m, n| Ok(m.max(s.at(n)?.norm())))
}

/// `limsup_norm ≤ τ`.
pub fn is_null<A: StarAlgebra>(s: &SequenceElement<A>, policy: &TailPolicy) -> Result<bool> {
    Ok(limsup_norm(s, policy)? <= policy.tolerance())
}

/// Equality in the quotient.
pub fn equivalent<A: StarAlgebra>(
    s: &SequenceElement<A>,
    t: &SequenceElement<A>,
    policy: &TailPolicy,
) -> Result<bool> {
    is_null(&s.sub(t), policy)
}

/// Prefix on which index maps are checked for strict monotonicity.
pub const MONOTONE_PREFIX: u64 = 1 << 14;

/// A map `ℕ → ℕ` used to select subsequences.
pub type IndexMap = Arc<dyn Fn(u64) -> u64 + Send + Sync>;

/// `n ↦ B_{k(n)}`. The map must satisfy `k(1) ≥ 1` and increase strictly;
/// this is checked on `1..=MONOTONE_PREFIX`.
pub fn subsequence<A: StarAlgebra>(
    s: &SequenceElement<A>,
    index_map: IndexMap,
) -> Result<SequenceElement<A>> {
    let mut prev = 0;
    for n in 1..=MONOTONE_PREFIX {
        let k = index_map(n);
        if k <= prev {
            return Err(Error::Usage(format!(
                "index map is not strictly increasing at n = {n}"
            )));
        }
        prev = k;
    }
    let x = s.clone();
    Ok(SequenceElement::new(s.bound, move |n| x.at(index_map(n))))
}

/// `n ↦ a n + b + r_n` with `r_n ∈ [0, a)` drawn from a seeded stream, which
/// is strictly increasing for every draw.
pub fn random_index_map(seed: u64) -> IndexMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: u64 = rng.random_range(1..=4);
    let b: u64 = rng.random_range(0..=16);
    let salt: u64 = rng.random();
    Arc::new(move |n| {
        let jitter = if a == 1 {
            0
        } else {
            ChaCha8Rng::seed_from_u64(salt ^ n).random_range(0..a)
        };
        a * n + b + jitter
    })
}

/// Outcome of a subsequence stability probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeReport {
    pub maps_tested: usize,
    pub failures: usize,
}

impl ProbeReport {
    pub fn stable(&self) -> bool {
        self.failures == 0
    }
}

/// Re-tests `member` on `maps` seeded random subsequences of `s`.
pub fn stability_probe<A, P>(
    s: &SequenceElement<A>,
    member: P,
    maps: usize,
    seed: u64,
) -> Result<ProbeReport>
where
    A: StarAlgebra,
    P: Fn(&SequenceElement<A>) -> Result<bool>,
{
    let mut failures = 0;
    for k in 0..maps {
        let sub = subsequence(s, random_index_map(seed.wrapping_add(k as u64)))?;
        if !member(&sub)? {
            failures += 1;
        }
    }
    Ok(ProbeReport {
        maps_tested: maps,
        failures,
    })
}

/// Entries whose smallest singular value falls below this are replaced by 1.
pub const SINGULAR_CUTOFF: f64 = 1e-8;

/// `U_n = B_n |B_n|^{-1}` for an almost-unitary sequence.
pub fn polar_unitarize(
    s: &SequenceElement<Matrix>,
    policy: &TailPolicy,
) -> Result<SequenceElement<Matrix>> {
    let left = s.star().mul(s).sub_unit();
    let right = s.mul(&s.star()).sub_unit();
    if !is_null(&left, policy)? || !is_null(&right, policy)? {
        return Err(Error::Domain(
            "polar_unitarize needs s*s - 1 and ss* - 1 to be null".into(),
        ));
    }
    let x = s.clone();
    Ok(SequenceElement::new(1.0, move |n| {
        let b = x.at(n)?;
        let svd = b.inner().clone().svd(true, true);
        let smallest = svd
            .singular_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if smallest < SINGULAR_CUTOFF {
            return Ok(b.unit_like());
        }
        let (u, v_t) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
        Matrix::new(u * v_t)
    }))
}

/// Unitarity tolerance for [`adjoint_morphism`].
pub const UNITARY_TOL: f64 = 1e-10;

/// `n ↦ u_n* A u_n`; entries of `u` that are not unitary produce a domain error.
pub fn adjoint_morphism(
    u: &SequenceElement<Matrix>,
    a: &Matrix,
) -> Result<SequenceElement<Matrix>> {
    let (x, a) = (u.clone(), a.clone());
    let bound = a.norm();
    Ok(SequenceElement::new(bound, move |n| {
        let un = x.at(n)?;
        let defect = un.unitarity_defect();
        if defect > UNITARY_TOL {
            return Err(Error::Domain(format!(
                "entry {n} is not unitary (defect {defect:e})"
            )));
        }
        un.star().mul(&a)?.mul(&un)
    }))
}
