//! The braided tensor category of charge automorphisms.
//!
//! Objects are automorphisms `γ(W(f)) = e^{iσ(γ,f)} W(f)` labelled by charge
//! functions; arrows `γ → δ` exist iff the charges agree and are multiples of
//! `W(δ - γ)`. Tensor product of objects is addition, `R × S = R γ(S)` for
//! `R: γ → γ'`, and the braiding is `ε(γ,δ) = e^{-iσ(γ,δ)}`, recovered here
//! also as a limit over translates receding into opposite spacelike cones.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{ensure_same_grid, norm3, symplectic, FieldVector, Klass, Translation};
use crate::weyl::{commutator, commutator_norm, LabelId, WeylElement};

/// Tolerance for internal agreement between the categorical expansion and
/// closed-form phases.
pub const CONSISTENCY_TOL: f64 = 1e-12;

fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// An object: the automorphism generated by a charge function.
#[derive(Debug, Clone)]
pub struct ChargeAutomorphism {
    data: FieldVector,
    id: LabelId,
}

impl ChargeAutomorphism {
    pub fn new(data: FieldVector) -> Self {
        let id = LabelId::of(&data);
        ChargeAutomorphism { data, id }
    }

    /// The tensor unit `ι`.
    pub fn unit(grid: std::sync::Arc<crate::quadrature::MomentumGrid>) -> Self {
        Self::new(FieldVector::zero(grid))
    }

    pub fn data(&self) -> &FieldVector {
        &self.data
    }

    pub fn id(&self) -> &LabelId {
        &self.id
    }

    pub fn charge(&self) -> f64 {
        self.data.charge()
    }

    pub fn translate(&self, a: Translation) -> Self {
        Self::new(self.data.translate(a))
    }

    pub fn negate(&self) -> Self {
        Self::new(self.data.negate())
    }
}

impl PartialEq for ChargeAutomorphism {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

/// An arrow `coeff · W(target - source)`.
#[derive(Debug, Clone)]
pub struct Intertwiner {
    source: ChargeAutomorphism,
    target: ChargeAutomorphism,
    coeff: Complex64,
    label: FieldVector,
}

impl Intertwiner {
    fn build(
        source: ChargeAutomorphism,
        target: ChargeAutomorphism,
        coeff: Complex64,
    ) -> Result<Self> {
        let label = FieldVector::chargeless_difference(target.data(), source.data())?;
        Ok(Intertwiner {
            source,
            target,
            coeff,
            label,
        })
    }

    pub fn identity(object: &ChargeAutomorphism) -> Self {
        Self::build(object.clone(), object.clone(), Complex64::new(1.0, 0.0))
            .expect("equal charges")
    }

    pub fn source(&self) -> &ChargeAutomorphism {
        &self.source
    }

    pub fn target(&self) -> &ChargeAutomorphism {
        &self.target
    }

    pub fn coeff(&self) -> Complex64 {
        self.coeff
    }

    pub fn label(&self) -> &FieldVector {
        &self.label
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Intertwiner {
            coeff: c * self.coeff,
            ..self.clone()
        }
    }

    /// `R*: target → source`.
    pub fn star(&self) -> Self {
        Intertwiner {
            source: self.target.clone(),
            target: self.source.clone(),
            coeff: self.coeff.conj(),
            label: self.label.negate(),
        }
    }

    /// The arrow as an element of the Weyl algebra.
    pub fn as_weyl(&self) -> Result<WeylElement> {
        WeylElement::single(self.label.clone(), self.coeff)
    }

    /// Coefficient distance to a parallel arrow.
    pub fn distance(&self, other: &Intertwiner) -> Result<f64> {
        if self.source != other.source || self.target != other.target {
            return Err(Error::Usage("arrows are not parallel".into()));
        }
        Ok((self.coeff - other.coeff).norm())
    }
}

/// The unit arrow `γ → δ` if the charges agree, else `None` (zero hom-set).
pub fn hom_basis(
    gamma: &ChargeAutomorphism,
    delta: &ChargeAutomorphism,
) -> Result<Option<Intertwiner>> {
    ensure_same_grid(gamma.data().grid(), delta.data().grid())?;
    if gamma.charge() != delta.charge() {
        return Ok(None);
    }
    Intertwiner::build(gamma.clone(), delta.clone(), Complex64::new(1.0, 0.0)).map(Some)
}

fn transporter(gamma: &ChargeAutomorphism, a: Translation) -> Result<Intertwiner> {
    hom_basis(gamma, &gamma.translate(a))?
        .ok_or_else(|| Error::Consistency("translation changed the charge".into()))
}

/// `S ∘ R` for `R: γ → δ`, `S: δ → τ`.
pub fn compose(s: &Intertwiner, r: &Intertwiner) -> Result<Intertwiner> {
    if r.target != s.source {
        return Err(Error::Usage(
            "compose: target of the right arrow differs from source of the left arrow".into(),
        ));
    }
    let phase = cis(0.5 * symplectic(&s.label, &r.label)?);
    Intertwiner::build(
        r.source.clone(),
        s.target.clone(),
        s.coeff * r.coeff * phase,
    )
}

/// `γδ`.
pub fn tensor_obj(
    gamma: &ChargeAutomorphism,
    delta: &ChargeAutomorphism,
) -> Result<ChargeAutomorphism> {
    Ok(ChargeAutomorphism::new(gamma.data().add(delta.data())?))
}

/// `R × S = R γ(S)` for `R: γ → γ'`, `S: δ → δ'`.
pub fn tensor_mor(r: &Intertwiner, s: &Intertwiner) -> Result<Intertwiner> {
    let phase = cis(symplectic(r.source.data(), &s.label)? + 0.5 * symplectic(&r.label, &s.label)?);
    Intertwiner::build(
        tensor_obj(&r.source, &s.source)?,
        tensor_obj(&r.target, &s.target)?,
        r.coeff * s.coeff * phase,
    )
}

/// `γ(A)`: multiplies each `W(f)` by `e^{iσ(γ,f)}`.
pub fn auto_action(gamma: &ChargeAutomorphism, a: &WeylElement) -> Result<WeylElement> {
    ensure_same_grid(gamma.data().grid(), a.grid())?;
    a.map_phases(|f| Ok(cis(symplectic(gamma.data(), f)?)))
}

/// `ε(γ,δ) = e^{-iσ(γ,δ)}: γδ → δγ`.
pub fn braiding_exact(
    gamma: &ChargeAutomorphism,
    delta: &ChargeAutomorphism,
) -> Result<Intertwiner> {
    let coeff = cis(-symplectic(gamma.data(), delta.data())?);
    Intertwiner::build(tensor_obj(gamma, delta)?, tensor_obj(delta, gamma)?, coeff)
}

/// An open spacelike cone together with how translates inside it are drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeSpec {
    axis: [f64; 3],
    half_angle: f64,
    time_slope: f64,
    time_exponent: f64,
    jitter: Vec<[f64; 3]>,
}

fn normalize(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = norm3(v);
    (n.is_finite() && n > 0.0).then(|| [v[0] / n, v[1] / n, v[2] / n])
}

fn angle_between(u: [f64; 3], v: [f64; 3]) -> f64 {
    let dot = (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]).clamp(-1.0, 1.0);
    dot.acos()
}

fn rotate(v: [f64; 3], axis: [f64; 3], angle: f64) -> [f64; 3] {
    let (s, c) = angle.sin_cos();
    let k = axis;
    let dot = k[0] * v[0] + k[1] * v[1] + k[2] * v[2];
    let cross = [
        k[1] * v[2] - k[2] * v[1],
        k[2] * v[0] - k[0] * v[2],
        k[0] * v[1] - k[1] * v[0],
    ];
    [0, 1, 2].map(|i| v[i] * c + cross[i] * s + k[i] * dot * (1.0 - c))
}

impl ConeSpec {
    /// `half_angle` in radians; translates get `a0 = κ |a|^β`.
    pub fn new(
        axis: [f64; 3],
        half_angle: f64,
        time_slope: f64,
        time_exponent: f64,
    ) -> Result<Self> {
        let axis = normalize(axis)
            .ok_or_else(|| Error::Config("cone axis must be a nonzero finite vector".into()))?;
        if !(half_angle > 0.0 && half_angle < PI / 2.0) {
            return Err(Error::Config(format!(
                "cone half-angle must lie in (0, π/2), got {half_angle}"
            )));
        }
        if !(time_slope >= 0.0 && time_slope.is_finite()) {
            return Err(Error::Config(format!(
                "cone time slope must be ≥ 0, got {time_slope}"
            )));
        }
        if !(0.0..1.0).contains(&time_exponent) {
            return Err(Error::Config(format!(
                "cone time exponent must lie in [0, 1), got {time_exponent}"
            )));
        }
        Ok(ConeSpec {
            axis,
            half_angle,
            time_slope,
            time_exponent,
            jitter: Vec::new(),
        })
    }

    /// Per-step directions, cycled by step index; each must lie strictly inside the cone.
    pub fn with_jitter(mut self, directions: Vec<[f64; 3]>) -> Result<Self> {
        let mut out = Vec::with_capacity(directions.len());
        for d in directions {
            let u = normalize(d)
                .ok_or_else(|| Error::Config("jitter direction must be nonzero".into()))?;
            if angle_between(u, self.axis) >= self.half_angle {
                return Err(Error::Config(format!(
                    "jitter direction {d:?} lies outside the cone"
                )));
            }
            out.push(u);
        }
        self.jitter = out;
        Ok(self)
    }

    pub fn axis(&self) -> [f64; 3] {
        self.axis
    }

    pub fn half_angle(&self) -> f64 {
        self.half_angle
    }

    /// `-𝒮`.
    pub fn opposite(&self) -> Self {
        let flip = |v: [f64; 3]| [-v[0], -v[1], -v[2]];
        ConeSpec {
            axis: flip(self.axis),
            jitter: self.jitter.iter().map(|&v| flip(v)).collect(),
            ..self.clone()
        }
    }

    /// The translate used at sweep position `step` and spatial distance `radius`.
    pub fn translation(&self, step: usize, radius: f64) -> Translation {
        let u = if self.jitter.is_empty() {
            self.axis
        } else {
            self.jitter[step % self.jitter.len()]
        };
        let time = if self.time_slope == 0.0 {
            0.0
        } else {
            self.time_slope * radius.powf(self.time_exponent)
        };
        Translation::new(time, u.map(|x| radius * x))
    }

    pub fn overlaps(&self, other: &ConeSpec) -> bool {
        angle_between(self.axis, other.axis) < self.half_angle + other.half_angle
    }

    /// `self` followed by `steps` copies rotated successively by `step_angle` about `about`.
    pub fn rotation_chain(
        &self,
        about: [f64; 3],
        step_angle: f64,
        steps: usize,
    ) -> Result<Vec<ConeSpec>> {
        let k = normalize(about)
            .ok_or_else(|| Error::Config("rotation axis must be nonzero".into()))?;
        let mut chain = vec![self.clone()];
        for m in 1..=steps {
            let angle = step_angle * m as f64;
            let mut c = self.clone();
            c.axis = normalize(rotate(self.axis, k, angle)).expect("rotation preserves length");
            c.jitter = self.jitter.iter().map(|&v| rotate(v, k, angle)).collect();
            chain.push(c);
        }
        Ok(chain)
    }
}

/// How the sequence of phases is turned into a single limit value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LimitEstimator {
    /// The phase at the largest radius.
    #[default]
    Last,
    /// Eliminates a `1/R` term using the two largest radii.
    Richardson,
}

/// Options for [`braiding_asymptotic_with`].
#[derive(Debug, Clone, Default)]
pub struct BraidingOptions {
    /// Cone for the `b` translates; defaults to the exact antipode of the `a` cone.
    pub anti_cone: Option<ConeSpec>,
    /// Multiplies each transporter by a seeded random unit phase.
    pub gauge_seed: Option<u64>,
    pub estimator: LimitEstimator,
}

/// Phases of the bi-asymptotic braiding sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct BraidingSweep {
    pub radii: Vec<f64>,
    pub phases: Vec<Complex64>,
    pub limit: Complex64,
}

/// `F(V*×U*) ∘ F(U×V)` with `U = W(γ_a - γ)`, `a` in the cone, and
/// `V = W(δ_b - δ)`, `b = -a`.
pub fn braiding_asymptotic(
    gamma: &ChargeAutomorphism,
    delta: &ChargeAutomorphism,
    cone: &ConeSpec,
    radii: &[f64],
) -> Result<BraidingSweep> {
    braiding_asymptotic_with(gamma, delta, cone, radii, &BraidingOptions::default())
}

pub fn braiding_asymptotic_with(
    gamma: &ChargeAutomorphism,
    delta: &ChargeAutomorphism,
    cone: &ConeSpec,
    radii: &[f64],
    options: &BraidingOptions,
) -> Result<BraidingSweep> {
    validate_radii(radii)?;
    let anti = options.anti_cone.clone().unwrap_or_else(|| cone.opposite());
    let gauges: Vec<(f64, f64)> = match options.gauge_seed {
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            radii
                .iter()
                .map(|_| {
                    (
                        rng.random_range(0.0..2.0 * PI),
                        rng.random_range(0.0..2.0 * PI),
                    )
                })
                .collect()
        }
        None => vec![(0.0, 0.0); radii.len()],
    };
    let phases = radii
        .par_iter()
        .enumerate()
        .map(|(m, &radius)| {
            let a = cone.translation(m, radius);
            let b = anti.translation(m, radius);
            let u = transporter(gamma, a)?.scale(cis(gauges[m].0));
            let v = transporter(delta, b)?.scale(cis(gauges[m].1));
            let forward = tensor_mor(&u, &v)?;
            let backward = tensor_mor(&v.star(), &u.star())?;
            let eps = compose(&backward, &forward)?;
            if !eps.label().is_zero() {
                return Err(Error::Consistency("asymptotic braiding did not reduce to a scalar".into()));
            }
            let closed = cis(
                symplectic(gamma.data(), v.label())? - symplectic(v.target().data(), u.label())?,
            );
            if (eps.coeff() - closed).norm() > CONSISTENCY_TOL {
                return Err(Error::Consistency(format!(
                    "categorical braiding phase {} disagrees with closed form {closed} at radius {radius}",
                    eps.coeff()
                )));
            }
            Ok(eps.coeff())
        })
        .collect::<Result<Vec<_>>>()?;
    let limit = estimate_limit(radii, &phases, options.estimator);
    Ok(BraidingSweep {
        radii: radii.to_vec(),
        phases,
        limit,
    })
}

fn validate_radii(radii: &[f64]) -> Result<()> {
    if radii.len() < 3 {
        return Err(Error::Config(format!(
            "need at least 3 radii, got {}",
            radii.len()
        )));
    }
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) || radii.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::Config(format!(
            "radii must be positive and strictly increasing, got {radii:?}"
        )));
    }
    Ok(())
}

fn estimate_limit(radii: &[f64], phases: &[Complex64], estimator: LimitEstimator) -> Complex64 {
    let n = phases.len();
    match estimator {
        LimitEstimator::Last => phases[n - 1],
        LimitEstimator::Richardson => {
            let (r1, r2) = (radii[n - 2], radii[n - 1]);
            (phases[n - 1] * r2 - phases[n - 2] * r1) / (r2 - r1)
        }
    }
}

/// Both hexagon residuals:
/// `ε(γδ,τ)` vs `(ε(γ,τ)×1_δ) ∘ (1_γ×ε(δ,τ))` and
/// `ε(γ,δτ)` vs `(1_δ×ε(γ,τ)) ∘ (ε(γ,δ)×1_τ)`.
pub fn hexagon_residuals(
    gamma: &ChargeAutomorphism,
    delta: &ChargeAutomorphism,
    tau: &ChargeAutomorphism,
) -> Result<(f64, f64)> {
    let id = Intertwiner::identity;
    let first = braiding_exact(&tensor_obj(gamma, delta)?, tau)?;
    let first_rhs = compose(
        &tensor_mor(&braiding_exact(gamma, tau)?, &id(delta))?,
        &tensor_mor(&id(gamma), &braiding_exact(delta, tau)?)?,
    )?;
    let second = braiding_exact(gamma, &tensor_obj(delta, tau)?)?;
    let second_rhs = compose(
        &tensor_mor(&id(delta), &braiding_exact(gamma, tau)?)?,
        &tensor_mor(&braiding_exact(gamma, delta)?, &id(tau))?,
    )?;
    Ok((first.distance(&first_rhs)?, second.distance(&second_rhs)?))
}

/// `|ε(γ',δ') ∘ (R×S) - (S×R) ∘ ε(γ,δ)|` for `R: γ → γ'`, `S: δ → δ'`.
pub fn naturality_residual(r: &Intertwiner, s: &Intertwiner) -> Result<f64> {
    let lhs = compose(&braiding_exact(r.target(), s.target())?, &tensor_mor(r, s)?)?;
    let rhs = compose(&tensor_mor(s, r)?, &braiding_exact(r.source(), s.source())?)?;
    lhs.distance(&rhs)
}

/// Runs the asymptotic braiding along each cone of a chain of pairwise
/// overlapping cones.
pub fn cone_homotopy(
    gamma: &ChargeAutomorphism,
    delta: &ChargeAutomorphism,
    chain: &[ConeSpec],
    radii: &[f64],
) -> Result<Vec<BraidingSweep>> {
    if chain.is_empty() {
        return Err(Error::Config("cone chain is empty".into()));
    }
    for (k, w) in chain.windows(2).enumerate() {
        if !w[0].overlaps(&w[1]) {
            return Err(Error::Config(format!(
                "cones {k} and {} of the chain do not overlap",
                k + 1
            )));
        }
    }
    chain
        .iter()
        .map(|c| braiding_asymptotic(gamma, delta, c, radii))
        .collect()
}

/// `‖U_a* W(f) U_a - γ(W(f))‖` with `U_a = W(γ_a - γ)`, evaluated in the Weyl
/// algebra and checked against `|e^{iσ(γ_a,f)} - 1|`.
pub fn implementation_residual(
    gamma: &ChargeAutomorphism,
    a: Translation,
    f: &FieldVector,
) -> Result<f64> {
    let u = transporter(gamma, a)?.as_weyl()?;
    let w = WeylElement::weyl(f)?;
    let moved = u.star().mul(&w)?.mul(&u)?;
    let residual = moved.sub(&auto_action(gamma, &w)?)?.norm();
    let closed = (cis(symplectic(gamma.translate(a).data(), f)?) - 1.0).norm();
    check_closed("implementation residual", residual, closed)?;
    Ok(residual)
}

fn check_closed(what: &str, value: f64, closed: f64) -> Result<()> {
    if (value - closed).abs() > CONSISTENCY_TOL {
        return Err(Error::Consistency(format!(
            "{what}: {value} disagrees with closed form {closed}"
        )));
    }
    Ok(())
}

/// `‖[W(x), W(y)]‖` for chargeless labels.
pub fn abelianness_residual(x: &FieldVector, y: &FieldVector) -> Result<f64> {
    if x.klass() != Klass::Test || y.klass() != Klass::Test {
        return Err(Error::Domain(
            "abelianness residual needs chargeless labels".into(),
        ));
    }
    let residual = commutator(&WeylElement::weyl(x)?, &WeylElement::weyl(y)?)?.norm();
    check_closed("abelianness residual", residual, commutator_norm(x, y)?)?;
    Ok(residual)
}

/// `U' R U*` for `R: γ → γ'` with `U: γ → γ_a`, `U': γ' → γ'_a`.
pub fn transported(r: &Intertwiner, a: Translation) -> Result<Intertwiner> {
    let u = transporter(r.source(), a)?;
    let u_prime = transporter(r.target(), a)?;
    compose(&compose(&u_prime, r)?, &u.star())
}

/// Coefficient distance between `X×Y` and `Y×X` with `X = U'RU*` transported
/// into the cone at `radius` and `Y = V'SV*` into the opposite cone.
pub fn tensor_abelianness_residual(
    r: &Intertwiner,
    s: &Intertwiner,
    cone: &ConeSpec,
    step: usize,
    radius: f64,
) -> Result<f64> {
    let x = transported(r, cone.translation(step, radius))?;
    let y = transported(s, cone.opposite().translation(step, radius))?;
    let xy = tensor_mor(&x, &y)?;
    let yx = tensor_mor(&y, &x)?;
    if xy.source() != yx.source() || xy.target() != yx.target() {
        return Err(Error::Consistency(
            "tensor orderings have different objects".into(),
        ));
    }
    Ok((xy.coeff() - yx.coeff()).norm())
}

/// `|ρ_{U₁}(S) - ρ_{U₂}(S)|` where `ρ_U(S) = U* S U` and `U_i = W(γ_{a_i} - γ)`
/// with `a_i` at `radius` in `cone_i`.
pub fn extension_residual(
    gamma: &ChargeAutomorphism,
    s: &Intertwiner,
    cone1: &ConeSpec,
    cone2: &ConeSpec,
    step: usize,
    radius: f64,
) -> Result<f64> {
    let sw = s.as_weyl()?;
    let extend = |cone: &ConeSpec| -> Result<(WeylElement, Translation)> {
        let a = cone.translation(step, radius);
        let u = transporter(gamma, a)?.as_weyl()?;
        Ok((u.star().mul(&sw)?.mul(&u)?, a))
    };
    let (e1, a1) = extend(cone1)?;
    let (e2, a2) = extend(cone2)?;
    let residual = e1.sub(&e2)?.norm();
    let phase = |a: Translation| -> Result<Complex64> {
        Ok(cis(-symplectic(gamma.translate(a).data(), s.label())?))
    };
    let closed = s.coeff().norm() * (phase(a1)? - phase(a2)?).norm();
    check_closed("extension residual", residual, closed)?;
    Ok(residual)
}
