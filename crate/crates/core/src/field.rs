//! Test functions and charge functions of the free massless scalar field.
//!
//! An element `γ = iω^{-3/2} g + ω^{-1/2} h` is described by the momentum-space
//! pair `(g̃, h̃)`. Every vector here is a finite real combination of *modes*:
//! a named radial profile pair evolved freely in time, optionally multiplied by
//! the complex structure `i`, and translated in space. Because the profiles are
//! radial, the angular integral of a product of two translated modes reduces
//! to `4π j0(|p| |a - a'|)` and only a radial quadrature remains.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Neg};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{radial_fourier_at, MomentumGrid, RadialRule, MIN_FOURIER_PANELS};

/// Spherically symmetric momentum-space profile.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialProfile {
    /// `amplitude · exp(-p² width² / 2)`.
    Gaussian { amplitude: f64, width: f64 },
    /// Fourier transform of `amplitude · b(r) / ∫b d³x` with the standard
    /// bump `b(r) = exp(-1 / (1 - (r/R)²))` supported in `r < R`.
    Bump {
        amplitude: f64,
        support: f64,
        panels: usize,
        volume: f64,
    },
}

fn bump_shape(r: f64, support: f64) -> f64 {
    let x = r / support;
    if x < 1.0 {
        (-1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

impl RadialProfile {
    pub fn gaussian(amplitude: f64, width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) || !amplitude.is_finite() {
            return Err(Error::Config(format!(
                "gaussian profile needs finite amplitude and width > 0, got ({amplitude}, {width})"
            )));
        }
        Ok(RadialProfile::Gaussian { amplitude, width })
    }

    /// A compactly supported bump whose position-space integral is `amplitude`.
    pub fn bump(amplitude: f64, support: f64, panels: usize) -> Result<Self> {
        if !(support.is_finite() && support > 0.0) || !amplitude.is_finite() {
            return Err(Error::Config(format!(
                "bump profile needs finite amplitude and support > 0, got ({amplitude}, {support})"
            )));
        }
        if panels < MIN_FOURIER_PANELS {
            return Err(Error::Config(format!(
                "bump profile needs at least {MIN_FOURIER_PANELS} panels, got {panels}"
            )));
        }
        let rule = RadialRule::composite(support, panels, 8);
        let volume = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&r, &w)| w * 4.0 * PI * r * r * bump_shape(r, support))
            .sum();
        Ok(RadialProfile::Bump {
            amplitude,
            support,
            panels,
            volume,
        })
    }

    /// Value at momentum magnitude `p`.
    pub fn eval(&self, p: f64) -> f64 {
        match *self {
            RadialProfile::Gaussian { amplitude, width } => {
                amplitude * (-0.5 * p * p * width * width).exp()
            }
            RadialProfile::Bump {
                amplitude,
                support,
                panels,
                volume,
            } => {
                let scale = amplitude / volume;
                radial_fourier_at(&|r| scale * bump_shape(r, support), support, p, panels)
            }
        }
    }

    fn key(&self) -> String {
        match self {
            RadialProfile::Gaussian { amplitude, width } => {
                format!("gauss({amplitude:?},{width:?})")
            }
            RadialProfile::Bump {
                amplitude,
                support,
                panels,
                ..
            } => format!("bump({amplitude:?},{support:?},{panels})"),
        }
    }
}

/// A named pair of radial profiles `(g̃, h̃)`; either channel may be absent.
#[derive(Debug, PartialEq)]
pub struct Source {
    name: String,
    g: Option<RadialProfile>,
    h: Option<RadialProfile>,
    key: String,
}

impl Source {
    pub fn new(
        name: impl Into<String>,
        g: Option<RadialProfile>,
        h: Option<RadialProfile>,
    ) -> Arc<Self> {
        let name = name.into();
        let show = |c: &Option<RadialProfile>| {
            c.as_ref()
                .map_or_else(|| "0".to_string(), RadialProfile::key)
        };
        let key = format!("{name}[g={};h={}]", show(&g), show(&h));
        Arc::new(Source { name, g, h, key })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Symbolic identity: the name together with the exact profile parameters.
    pub fn key(&self) -> &str {
        &self.key
    }

    fn eval(&self, r: f64) -> (f64, f64) {
        (
            self.g.as_ref().map_or(0.0, |p| p.eval(r)),
            self.h.as_ref().map_or(0.0, |p| p.eval(r)),
        )
    }
}

/// A spacetime translation `(a0, a⃗)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Translation {
    pub time: f64,
    pub space: [f64; 3],
}

impl Translation {
    pub fn new(time: f64, space: [f64; 3]) -> Self {
        Translation { time, space }
    }

    pub fn spatial(space: [f64; 3]) -> Self {
        Translation { time: 0.0, space }
    }

    pub fn spatial_norm(&self) -> f64 {
        norm3(self.space)
    }
}

impl Add for Translation {
    type Output = Translation;
    fn add(self, o: Translation) -> Translation {
        Translation {
            time: self.time + o.time,
            space: [
                self.space[0] + o.space[0],
                self.space[1] + o.space[1],
                self.space[2] + o.space[2],
            ],
        }
    }
}

impl Neg for Translation {
    type Output = Translation;
    fn neg(self) -> Translation {
        Translation {
            time: -self.time,
            space: [-self.space[0], -self.space[1], -self.space[2]],
        }
    }
}

pub(crate) fn norm3(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// `sin(x)/x`.
pub fn j0(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// One term of a [`FieldVector`]: `coeff · S_a J^quarter T_t (source)`.
#[derive(Debug, Clone)]
pub struct Mode {
    source: Arc<Source>,
    offset: [f64; 3],
    time: f64,
    quarter: bool,
    coeff: f64,
}

/// Ordering key of a mode, excluding its coefficient.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeKey {
    pub source: String,
    pub offset: [u64; 3],
    pub time: u64,
    pub quarter: bool,
}

fn canonical_bits(x: f64) -> u64 {
    // folds -0.0 into 0.0
    (x + 0.0).to_bits()
}

impl Mode {
    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn offset(&self) -> [f64; 3] {
        self.offset
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    pub fn key(&self) -> ModeKey {
        ModeKey {
            source: self.source.key.clone(),
            offset: self.offset.map(canonical_bits),
            time: canonical_bits(self.time),
            quarter: self.quarter,
        }
    }

    /// Radial parts `(G, H)` at `|p| = r`, without the coefficient and the
    /// translation phase `e^{-ip·a}`.
    pub fn radial(&self, r: f64) -> (f64, f64) {
        let (mut g, mut h) = self.source.eval(r);
        if self.time != 0.0 {
            let (s, c) = (r * self.time).sin_cos();
            (g, h) = (c * g + r * s * h, c * h - s * g / r);
        }
        if self.quarter {
            (g, h) = (r * h, -g / r);
        }
        (g, h)
    }
}

/// Membership class: `Test` vectors lie in the test-function space, `Charge`
/// vectors only in the larger charge space (their norm diverges).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Klass {
    Test,
    Charge,
}

/// An element of the charge space in momentum representation.
#[derive(Clone)]
pub struct FieldVector {
    grid: Arc<MomentumGrid>,
    modes: Vec<Mode>,
    charge: f64,
    klass: Klass,
}

impl fmt::Debug for FieldVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .modes
            .iter()
            .map(|m| {
                format!(
                    "{}*{}{}@({},{:?})",
                    m.coeff,
                    if m.quarter { "i*" } else { "" },
                    m.source.name,
                    m.time,
                    m.offset
                )
            })
            .collect();
        f.debug_struct("FieldVector")
            .field("terms", &terms)
            .field("charge", &self.charge)
            .field("klass", &self.klass)
            .finish()
    }
}

pub(crate) fn ensure_same_grid(a: &Arc<MomentumGrid>, b: &Arc<MomentumGrid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::Usage(
            "vectors live on different momentum grids".into(),
        ))
    }
}

impl FieldVector {
    pub fn zero(grid: Arc<MomentumGrid>) -> Self {
        FieldVector {
            grid,
            modes: Vec::new(),
            charge: 0.0,
            klass: Klass::Test,
        }
    }

    /// Charge function with `g̃(p) = q (2π)^{-3/2} exp(-p² s² / 2)`, `h̃ = 0`.
    pub fn gaussian_charge(grid: Arc<MomentumGrid>, name: &str, q: f64, s: f64) -> Result<Self> {
        let g = RadialProfile::gaussian(q * (2.0 * PI).powf(-1.5), s)?;
        Ok(Self::from_source(
            grid,
            Source::new(name, Some(g), None),
            q,
            Klass::Charge,
        ))
    }

    /// Charge function whose position-space `g` is a bump of radius `support`
    /// with `∫ g d³x = q`.
    pub fn bump_charge(
        grid: Arc<MomentumGrid>,
        name: &str,
        q: f64,
        support: f64,
        panels: usize,
    ) -> Result<Self> {
        let g = RadialProfile::bump(q, support, panels)?;
        Ok(Self::from_source(
            grid,
            Source::new(name, Some(g), None),
            q,
            Klass::Charge,
        ))
    }

    /// Test function with `g̃ = 0`, `h̃(p) = c exp(-p² t² / 2)`.
    pub fn gaussian_test(grid: Arc<MomentumGrid>, name: &str, c: f64, t: f64) -> Result<Self> {
        let h = RadialProfile::gaussian(c, t)?;
        Ok(Self::from_source(
            grid,
            Source::new(name, None, Some(h)),
            0.0,
            Klass::Test,
        ))
    }

    /// Test function with `g̃ = 0` and `h` a bump with `∫ h d³x = c`.
    pub fn bump_test(
        grid: Arc<MomentumGrid>,
        name: &str,
        c: f64,
        support: f64,
        panels: usize,
    ) -> Result<Self> {
        let h = RadialProfile::bump(c, support, panels)?;
        Ok(Self::from_source(
            grid,
            Source::new(name, None, Some(h)),
            0.0,
            Klass::Test,
        ))
    }

    /// Wraps an arbitrary source. `charge` is taken as given; a `Test` class
    /// requires `charge == 0`.
    pub fn from_source(
        grid: Arc<MomentumGrid>,
        source: Arc<Source>,
        charge: f64,
        klass: Klass,
    ) -> Self {
        let charge = if klass == Klass::Test { 0.0 } else { charge };
        let modes = vec![Mode {
            source,
            offset: [0.0; 3],
            time: 0.0,
            quarter: false,
            coeff: 1.0,
        }];
        FieldVector {
            grid,
            modes,
            charge,
            klass,
        }
    }

    pub fn grid(&self) -> &Arc<MomentumGrid> {
        &self.grid
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn charge(&self) -> f64 {
        self.charge
    }

    pub fn klass(&self) -> Klass {
        self.klass
    }

    pub fn is_zero(&self) -> bool {
        self.modes.is_empty()
    }

    fn with_modes(&self, modes: Vec<Mode>, charge: f64, klass: Klass) -> Self {
        FieldVector {
            grid: Arc::clone(&self.grid),
            modes: canonicalize(modes),
            charge,
            klass,
        }
    }

    /// Sum. The result is `Test` only when both operands are.
    pub fn add(&self, other: &FieldVector) -> Result<FieldVector> {
        ensure_same_grid(&self.grid, &other.grid)?;
        let klass = if self.klass == Klass::Test && other.klass == Klass::Test {
            Klass::Test
        } else {
            Klass::Charge
        };
        let modes = self.modes.iter().chain(&other.modes).cloned().collect();
        Ok(self.with_modes(modes, self.charge + other.charge, klass))
    }

    pub fn sub(&self, other: &FieldVector) -> Result<FieldVector> {
        self.add(&other.negate())
    }

    pub fn scale(&self, c: f64) -> FieldVector {
        let modes = self
            .modes
            .iter()
            .map(|m| Mode {
                coeff: c * m.coeff,
                ..m.clone()
            })
            .collect();
        self.with_modes(modes, c * self.charge, self.klass)
    }

    pub fn negate(&self) -> FieldVector {
        self.scale(-1.0)
    }

    /// Multiplication by `i` in the complex structure of the test-function
    /// space: `(g̃, h̃) ↦ (ω h̃, -ω^{-1} g̃)`.
    pub fn mul_i(&self) -> Result<FieldVector> {
        if self.klass != Klass::Test {
            return Err(Error::Domain(
                "multiplication by i is only defined on test functions".into(),
            ));
        }
        let modes = self
            .modes
            .iter()
            .map(|m| {
                // J² = -1
                if m.quarter {
                    Mode {
                        quarter: false,
                        coeff: -m.coeff,
                        ..m.clone()
                    }
                } else {
                    Mode {
                        quarter: true,
                        ..m.clone()
                    }
                }
            })
            .collect();
        Ok(self.with_modes(modes, 0.0, Klass::Test))
    }

    /// Free-field translate by `a`: the spatial part multiplies both channels
    /// by `e^{-ip·a}`; the time part evolves
    /// `g̃ → cos(ωa0) g̃ + ω sin(ωa0) h̃`, `h̃ → cos(ωa0) h̃ - ω^{-1} sin(ωa0) g̃`.
    /// The charge is unchanged by both.
    pub fn translate(&self, a: Translation) -> FieldVector {
        let modes = self
            .modes
            .iter()
            .map(|m| Mode {
                offset: [
                    m.offset[0] + a.space[0],
                    m.offset[1] + a.space[1],
                    m.offset[2] + a.space[2],
                ],
                time: m.time + a.time,
                ..m.clone()
            })
            .collect();
        self.with_modes(modes, self.charge, self.klass)
    }

    /// `target - source` for two vectors of equal charge, certified as a test
    /// function. This is the only route by which charged data become `Test`.
    pub fn chargeless_difference(
        target: &FieldVector,
        source: &FieldVector,
    ) -> Result<FieldVector> {
        ensure_same_grid(&target.grid, &source.grid)?;
        if target.charge != source.charge {
            return Err(Error::Domain(format!(
                "charges differ ({} vs {}); the difference is not a test function",
                target.charge, source.charge
            )));
        }
        let modes = target
            .modes
            .iter()
            .cloned()
            .chain(source.negate().modes)
            .collect();
        Ok(target.with_modes(modes, 0.0, Klass::Test))
    }

    /// `(2π)^{3/2}` times the angular mean of `g̃` at `|p| = r`; tends to the
    /// charge as `r → 0`.
    pub fn zero_momentum_charge(&self, r: f64) -> f64 {
        let mean: f64 = self
            .modes
            .iter()
            .map(|m| m.coeff * m.radial(r).0 * j0(r * norm3(m.offset)))
            .sum();
        (2.0 * PI).powf(1.5) * mean
    }

    /// `σ(self, other) = ∫ d³p ω^{-2} (g̃(-p) h̃'(p) - g̃'(-p) h̃(p))`.
    pub fn symplectic(&self, other: &FieldVector) -> Result<f64> {
        symplectic(self, other)
    }

    /// `(f, f') = ∫ d³p conj(f̃(p)) f̃'(p)` with `f̃ = ω^{-1/2} h̃ + i ω^{-3/2} g̃`.
    pub fn scalar_product(&self, other: &FieldVector) -> Result<Complex64> {
        scalar_product(self, other)
    }

    /// Samples of `(g̃, h̃)` at every grid node, flattened as in [`MomentumGrid`].
    pub fn samples(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let grid = &self.grid;
        let mut g = vec![Complex64::new(0.0, 0.0); grid.len()];
        let mut h = g.clone();
        let n = grid.n_angular();
        for (i, &r) in grid.radial_nodes().iter().enumerate() {
            for m in &self.modes {
                let (gr, hr) = m.radial(r);
                for (j, u) in grid.angular_nodes().iter().enumerate() {
                    let phase = -r * (u[0] * m.offset[0] + u[1] * m.offset[1] + u[2] * m.offset[2]);
                    let e = Complex64::from_polar(m.coeff, phase);
                    g[i * n + j] += e * gr;
                    h[i * n + j] += e * hr;
                }
            }
        }
        (g, h)
    }

    /// Largest violation of `f̃(-p) = conj(f̃(p))` over both channels at the grid nodes.
    pub fn hermitian_defect(&self) -> f64 {
        let (g, h) = self.samples();
        let mut worst: f64 = 0.0;
        for k in 0..g.len() {
            let a = self.grid.antipode_index(k);
            worst = worst
                .max((g[a] - g[k].conj()).norm())
                .max((h[a] - h[k].conj()).norm());
        }
        worst
    }
}

fn canonicalize(mut modes: Vec<Mode>) -> Vec<Mode> {
    modes.sort_by_key(|m| m.key());
    let mut out: Vec<Mode> = Vec::with_capacity(modes.len());
    for m in modes {
        match out.last_mut() {
            Some(last) if last.key().cmp(&m.key()) == Ordering::Equal => last.coeff += m.coeff,
            _ => out.push(m),
        }
    }
    out.retain(|m| m.coeff != 0.0);
    out
}

fn pair_frequency(a: &Mode, b: &Mode) -> f64 {
    let d = [
        a.offset[0] - b.offset[0],
        a.offset[1] - b.offset[1],
        a.offset[2] - b.offset[2],
    ];
    norm3(d) + a.time.abs() + b.time.abs()
}

/// Symplectic form on the charge space; bilinear and antisymmetric.
///
/// Each pair of modes is integrated with its own radial rule, so the result is
/// bilinear in the modes up to floating-point summation order.
pub fn symplectic(x: &FieldVector, y: &FieldVector) -> Result<f64> {
    ensure_same_grid(&x.grid, &y.grid)?;
    let mut total = 0.0;
    for m in &x.modes {
        for n in &y.modes {
            total += m.coeff * n.coeff * pair_symplectic(&x.grid, m, n);
        }
    }
    Ok(total)
}

fn pair_symplectic(grid: &MomentumGrid, m: &Mode, n: &Mode) -> f64 {
    let d = norm3([
        m.offset[0] - n.offset[0],
        m.offset[1] - n.offset[1],
        m.offset[2] - n.offset[2],
    ]);
    let rule = grid.radial_rule(pair_frequency(m, n));
    let mut acc = 0.0;
    for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
        let (gm, hm) = m.radial(r);
        let (gn, hn) = n.radial(r);
        // r² from the Jacobian cancels ω^{-2}
        acc += w * j0(r * d) * (gm * hn - gn * hm);
    }
    4.0 * PI * acc
}

/// Scalar product on test functions. Charged arguments are rejected because
/// their norm diverges at `p = 0`.
pub fn scalar_product(f: &FieldVector, fp: &FieldVector) -> Result<Complex64> {
    ensure_same_grid(&f.grid, &fp.grid)?;
    if f.klass != Klass::Test || fp.klass != Klass::Test {
        return Err(Error::Domain(
            "scalar product is only defined on test functions".into(),
        ));
    }
    if f.modes.is_empty() || fp.modes.is_empty() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut freq: f64 = 0.0;
    let mut dist = Vec::with_capacity(f.modes.len() * fp.modes.len());
    for m in &f.modes {
        for n in &fp.modes {
            freq = freq.max(pair_frequency(m, n));
            dist.push(norm3([
                m.offset[0] - n.offset[0],
                m.offset[1] - n.offset[1],
                m.offset[2] - n.offset[2],
            ]));
        }
    }
    // One rule for the whole sum: single pairs carry a 1/r singularity that
    // only cancels between pairs of a chargeless combination.
    let rule = f.grid.radial_rule(freq);
    let mut re = 0.0;
    let mut im = 0.0;
    let mut left = vec![(0.0, 0.0); f.modes.len()];
    let mut right = vec![(0.0, 0.0); fp.modes.len()];
    for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
        for (slot, m) in left.iter_mut().zip(&f.modes) {
            let (g, h) = m.radial(r);
            *slot = (m.coeff * g, m.coeff * h);
        }
        for (slot, n) in right.iter_mut().zip(&fp.modes) {
            let (g, h) = n.radial(r);
            *slot = (n.coeff * g, n.coeff * h);
        }
        let mut node_re = 0.0;
        let mut node_im = 0.0;
        let mut k = 0;
        for &(gm, hm) in &left {
            for &(gn, hn) in &right {
                let bessel = j0(r * dist[k]);
                node_re += bessel * (r * hm * hn + gm * gn / r);
                node_im += bessel * (hm * gn - gm * hn);
                k += 1;
            }
        }
        re += w * node_re;
        im += w * node_im;
    }
    Ok(Complex64::new(4.0 * PI * re, 4.0 * PI * im))
}

/// `(f, f) / 4`, so that the vacuum expectation of `W(f)` is `exp(-vacuum_exponent(f))`.
pub fn vacuum_exponent(f: &FieldVector) -> Result<f64> {
    Ok(scalar_product(f, f)?.re / 4.0)
}

/// The symplectic form evaluated directly from node samples with the grid's
/// spherical rule. Only accurate while `|p| |a - a'|` stays within the
/// resolution of the angular rule; used to cross-check [`symplectic`].
pub fn symplectic_on_grid(x: &FieldVector, y: &FieldVector) -> Result<Complex64> {
    ensure_same_grid(&x.grid, &y.grid)?;
    let grid = &x.grid;
    let (gx, hx) = x.samples();
    let (gy, hy) = y.samples();
    let n = grid.n_angular();
    let integrand: Vec<Complex64> = (0..grid.len())
        .map(|k| {
            let r = grid.radial_nodes()[k / n];
            let a = grid.antipode_index(k);
            (gx[a] * hy[k] - gy[a] * hx[k]) / (r * r)
        })
        .collect();
    grid.integrate(&integrand)
}
