//! Verification suites: which checks run, how many rows each produces, and
//! how each row is judged.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use asymptopia::category::{
    abelianness_residual, auto_action, braiding_asymptotic, braiding_asymptotic_with,
    braiding_exact, compose, cone_homotopy, extension_residual, hexagon_residuals, hom_basis,
    implementation_residual, naturality_residual, tensor_abelianness_residual, tensor_mor,
    BraidingOptions, ChargeAutomorphism, ConeSpec, Intertwiner,
};
use asymptopia::field::{scalar_product, symplectic, FieldVector, Klass, Translation};
use asymptopia::quadrature::MomentumGrid;
use asymptopia::seqalg::{
    adjoint_morphism, equivalent, is_null, limsup_norm, polar_unitarize, stability_probe,
    subsequence, Matrix, SequenceElement, StarAlgebra, TailPolicy,
};
use asymptopia::weyl::{commutator_norm, gram_matrix, WeylElement};
use asymptopia::{Error, Result};

use crate::config::{Channel, ProfileKind, RunConfig};
use crate::report::{PolicyRecord, Report, Row};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Laws,
    Decay,
    Braiding,
    Homotopy,
    Seqalg,
    All,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Laws => "laws",
            Suite::Decay => "decay",
            Suite::Braiding => "braiding",
            Suite::Homotopy => "homotopy",
            Suite::Seqalg => "seqalg",
            Suite::All => "all",
        }
    }

    fn includes(&self, part: Suite) -> bool {
        *self == Suite::All || *self == part
    }
}

const LAW_SWEEPS: [&str; 10] = [
    "laws.associativity",
    "laws.hexagon",
    "laws.interchange",
    "laws.intertwiner",
    "laws.naturality",
    "laws.unit",
    "laws.weyl_cocycle",
    "laws.weyl_exchange",
    "laws.weyl_star",
    "laws.weyl_unitary",
];

const SEQALG_CHECKS: [&str; 10] = [
    "seqalg.ideal",
    "seqalg.subsequence_split",
    "seqalg.subsequence_stable",
    "seqalg.adjoint_alternating",
    "seqalg.adjoint_central",
    "seqalg.adjoint_constant",
    "seqalg.polar_null",
    "seqalg.polar_precondition",
    "seqalg.polar_ratio",
    "seqalg.polar_unitary",
];

/// Number of random subsequence maps per stability probe.
pub const PROBE_MAPS: usize = 16;

fn oracle_pairs(config: &RunConfig) -> usize {
    config
        .pairs
        .iter()
        .filter(|[a, b]| closed_form_sigma(config, a, b).is_some())
        .count()
}

/// `q c / sqrt(s² + t²)` for a g-channel Gaussian against an h-channel Gaussian.
pub fn closed_form_sigma(config: &RunConfig, a: &str, b: &str) -> Option<f64> {
    let (x, y) = (config.charge(a).ok()?, config.charge(b).ok()?);
    if x.profile != ProfileKind::GaussianMomentum || y.profile != ProfileKind::GaussianMomentum {
        return None;
    }
    let (s, t) = (x.width?, y.width?);
    let value = x.amplitude * y.amplitude / (s * s + t * t).sqrt();
    match (x.channel, y.channel) {
        (Channel::G, Channel::H) => Some(value),
        (Channel::H, Channel::G) => Some(-value),
        _ => None,
    }
}

/// Check ids and row counts for `suite`, derived from the configuration alone.
pub fn plan(config: &RunConfig, suite: Suite) -> Vec<(String, usize)> {
    let pairs = config.pairs.len();
    let radii = config.radii.len();
    let mut out: Vec<(String, usize)> = Vec::new();
    if suite.includes(Suite::Laws) {
        out.push(("laws.braiding_exact".into(), pairs));
        out.push(("laws.commutator_pi".into(), pairs));
        out.push(("laws.gauge".into(), pairs));
        out.push(("laws.gram".into(), 1));
        out.push(("laws.plancherel".into(), 1));
        out.push(("laws.sigma_oracle".into(), oracle_pairs(config)));
        out.push(("laws.symmetry".into(), pairs));
        out.extend(LAW_SWEEPS.iter().map(|id| (id.to_string(), 1)));
    }
    if suite.includes(Suite::Braiding) {
        out.push((
            "braiding.asymptotic".into(),
            pairs * config.cones.len() * radii,
        ));
    }
    if suite.includes(Suite::Homotopy) {
        out.push(("homotopy.limit".into(), pairs * (config.homotopy.steps + 1)));
        out.push(("homotopy.spread".into(), pairs));
    }
    if suite.includes(Suite::Decay) {
        for id in [
            "decay.implementation",
            "decay.abelianness",
            "decay.tensor_abelianness",
            "decay.extension",
        ] {
            out.push((id.into(), radii));
        }
    }
    if suite.includes(Suite::Seqalg) {
        out.extend(SEQALG_CHECKS.iter().map(|id| (id.to_string(), 1)));
    }
    out.sort();
    out
}

struct Context<'a> {
    config: &'a RunConfig,
    grid: Arc<MomentumGrid>,
    objects: HashMap<String, ChargeAutomorphism>,
}

impl Context<'_> {
    fn object(&self, name: &str) -> Result<&ChargeAutomorphism> {
        self.objects
            .get(name)
            .ok_or_else(|| Error::Config(format!("unknown charge {name:?}")))
    }

    fn pairs(&self) -> Result<Vec<(String, &ChargeAutomorphism, &ChargeAutomorphism)>> {
        self.config
            .pairs
            .iter()
            .map(|[a, b]| Ok((format!("{a}/{b}"), self.object(a)?, self.object(b)?)))
            .collect()
    }
}

/// Runs every check of `suite` and returns the order-normalized report.
pub fn run_suite(config: &RunConfig, suite: Suite) -> Result<Report> {
    config.validate()?;
    let start = Instant::now();
    let grid = config.grid()?;
    let mut objects = HashMap::new();
    for c in &config.charges {
        objects.insert(c.name.clone(), c.build(grid.clone())?);
    }
    let ctx = Context {
        config,
        grid: grid.clone(),
        objects,
    };
    let policy = config.tail_policy()?;
    let mut rows = Vec::new();
    if suite.includes(Suite::Laws) {
        laws(&ctx, &mut rows)?;
    }
    if suite.includes(Suite::Braiding) {
        braiding(&ctx, &mut rows)?;
    }
    if suite.includes(Suite::Homotopy) {
        homotopy(&ctx, &mut rows)?;
    }
    if suite.includes(Suite::Decay) {
        decay(&ctx, &mut rows)?;
    }
    if suite.includes(Suite::Seqalg) {
        seqalg(config, &policy, &mut rows)?;
    }
    let mut checksum = Sha256::new();
    for bits in grid.checksum_bits() {
        checksum.update(bits.to_le_bytes());
    }
    let mut report = Report {
        suite: suite.name().to_string(),
        seed: config.seed,
        config_hash: config.hash()?,
        grid_checksum: format!("{:x}", checksum.finalize()),
        tail_policy: PolicyRecord {
            window_start: policy.window_start(),
            sample_count: policy.sample_count(),
            tolerance: policy.tolerance(),
        },
        plan: plan(config, suite),
        rows,
        wall_time: start.elapsed(),
    };
    report.normalize();
    report.verify_plan()?;
    Ok(report)
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Pushes one row per radius for a decaying sequence of residuals. Every
/// radius must stay within the envelope set by the first one; the last must
/// also fall strictly below both `tol` and the first residual.
fn push_sweep(
    rows: &mut Vec<Row>,
    (id, pair, cone): (&str, &str, &str),
    radii: &[f64],
    values: &[Complex64],
    residuals: &[f64],
    tol: f64,
) {
    let first = residuals[0];
    let last = radii.len() - 1;
    for (k, (&r, &res)) in radii.iter().zip(residuals).enumerate() {
        rows.push(if k == last {
            Row::below(id, pair, cone, Some(r), values[k], res, tol.min(first))
        } else {
            Row::at_most(id, pair, cone, Some(r), values[k], res, first)
        });
    }
}

fn braiding(ctx: &Context, rows: &mut Vec<Row>) -> Result<()> {
    let tol = ctx.config.tolerances.braiding;
    for (pair, gamma, delta) in ctx.pairs()? {
        let eps = braiding_exact(gamma, delta)?.coeff();
        for cone in &ctx.config.cones {
            let sweep = braiding_asymptotic(gamma, delta, &cone.spec()?, &ctx.config.radii)?;
            let residuals: Vec<f64> = sweep.phases.iter().map(|p| (p - eps).norm()).collect();
            push_sweep(
                rows,
                ("braiding.asymptotic", &pair, &cone.id),
                &sweep.radii,
                &sweep.phases,
                &residuals,
                tol,
            );
        }
    }
    Ok(())
}

fn homotopy(ctx: &Context, rows: &mut Vec<Row>) -> Result<()> {
    let h = &ctx.config.homotopy;
    let tol = ctx.config.tolerances.braiding;
    let base = ctx.config.cone(&h.cone)?.spec()?;
    let chain = base.rotation_chain(h.rotation_axis, h.step_deg.to_radians(), h.steps)?;
    let last = *ctx.config.radii.last().expect("validated");
    for (pair, gamma, delta) in ctx.pairs()? {
        let eps = braiding_exact(gamma, delta)?.coeff();
        let sweeps = cone_homotopy(gamma, delta, &chain, &ctx.config.radii)?;
        let mut spread: f64 = 0.0;
        for (k, s) in sweeps.iter().enumerate() {
            let cone_id = format!("{}/{k}", h.cone);
            rows.push(Row::at_most(
                "homotopy.limit",
                &pair,
                &cone_id,
                Some(last),
                s.limit,
                (s.limit - eps).norm(),
                tol,
            ));
            for t in &sweeps {
                spread = spread.max((s.limit - t.limit).norm());
            }
        }
        rows.push(Row::at_most(
            "homotopy.spread",
            &pair,
            &h.cone,
            Some(last),
            real(spread),
            spread,
            tol,
        ));
    }
    Ok(())
}

/// Inputs of the decay checks: the charge `γ`, the test vector `f`, the
/// cone, and the probe translation `c`.
struct DecayInputs {
    gamma: ChargeAutomorphism,
    delta: ChargeAutomorphism,
    cone: ConeSpec,
    c: Translation,
}

type DecayCheck = fn(&DecayInputs, usize, f64) -> Result<f64>;

fn decay(ctx: &Context, rows: &mut Vec<Row>) -> Result<()> {
    let d = &ctx.config.decay;
    let inputs = DecayInputs {
        gamma: ctx.object(&d.charge)?.clone(),
        delta: ctx.object(&d.test)?.clone(),
        cone: ctx.config.cone(&d.cone)?.spec()?,
        c: Translation::spatial(d.probe_offset),
    };
    let pair = format!("{}/{}", d.charge, d.test);
    let tol = ctx.config.tolerances.decay;
    let radii = &ctx.config.radii;
    let checks: [(&str, DecayCheck); 4] = [
        ("decay.implementation", implementation),
        ("decay.abelianness", abelianness),
        ("decay.tensor_abelianness", tensor_abelianness),
        ("decay.extension", extension),
    ];
    for (id, check) in checks {
        let residuals = radii
            .iter()
            .enumerate()
            .map(|(m, &r)| check(&inputs, m, r))
            .collect::<Result<Vec<_>>>()?;
        let values: Vec<Complex64> = residuals.iter().map(|&x| real(x)).collect();
        push_sweep(rows, (id, &pair, &d.cone), radii, &values, &residuals, tol);
    }
    Ok(())
}

fn test_label(v: &ChargeAutomorphism) -> Result<FieldVector> {
    if v.data().klass() == Klass::Test {
        Ok(v.data().clone())
    } else {
        Err(Error::Config(
            "the decay test vector must be an h-channel (chargeless) profile".into(),
        ))
    }
}

fn implementation(x: &DecayInputs, m: usize, r: f64) -> Result<f64> {
    implementation_residual(&x.gamma, x.cone.translation(m, r), &test_label(&x.delta)?)
}

fn abelianness(x: &DecayInputs, m: usize, r: f64) -> Result<f64> {
    let a = x.cone.translation(m, r);
    let b = x.cone.opposite().translation(m, r);
    let u = FieldVector::chargeless_difference(
        x.gamma.translate(b).data(),
        x.gamma.translate(a).data(),
    )?;
    let v = FieldVector::chargeless_difference(x.delta.translate(x.c).data(), x.delta.data())?;
    abelianness_residual(&u, &v)
}

fn tensor_abelianness(x: &DecayInputs, m: usize, r: f64) -> Result<f64> {
    let rr = arrow(&x.gamma, &x.gamma.translate(x.c))?;
    let ss = arrow(&x.delta, &x.delta.translate(-x.c))?;
    tensor_abelianness_residual(&rr, &ss, &x.cone, m, r)
}

fn extension(x: &DecayInputs, m: usize, r: f64) -> Result<f64> {
    let s = arrow(&x.delta, &x.delta.translate(x.c))?;
    extension_residual(&x.gamma, &s, &x.cone, &x.cone.opposite(), m, r)
}

fn arrow(a: &ChargeAutomorphism, b: &ChargeAutomorphism) -> Result<Intertwiner> {
    hom_basis(a, b)?
        .ok_or_else(|| Error::Consistency("no arrow between objects of equal charge".into()))
}

/// Seeded generator of random objects, arrows and labels built from the
/// configured charges.
struct Sampler<'a> {
    ctx: &'a Context<'a>,
    names: Vec<String>,
    rng: ChaCha8Rng,
}

impl<'a> Sampler<'a> {
    fn new(ctx: &'a Context<'a>, stream: u64) -> Self {
        let mut names: Vec<String> = ctx.config.charges.iter().map(|c| c.name.clone()).collect();
        names.sort();
        let rng =
            ChaCha8Rng::seed_from_u64(ctx.config.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ stream);
        Sampler { ctx, names, rng }
    }

    fn offset(&mut self) -> Translation {
        let space = [0; 3].map(|_| self.rng.random_range(-1.0..1.0));
        let time = if self.rng.random_bool(0.25) {
            self.rng.random_range(-1.0..1.0)
        } else {
            0.0
        };
        Translation::new(time, space)
    }

    fn coeff(&mut self) -> Complex64 {
        Complex64::from_polar(
            self.rng.random_range(0.5..2.0),
            self.rng.random_range(0.0..2.0 * PI),
        )
    }

    fn object(&mut self) -> Result<ChargeAutomorphism> {
        let terms = self.rng.random_range(1..=3);
        let mut data = FieldVector::zero(self.ctx.grid.clone());
        for _ in 0..terms {
            let name = self.names[self.rng.random_range(0..self.names.len())].clone();
            let scale = [-1.0, 1.0, 2.0][self.rng.random_range(0..3)];
            let a = self.offset();
            data = data.add(&self.ctx.object(&name)?.data().translate(a).scale(scale))?;
        }
        Ok(ChargeAutomorphism::new(data))
    }

    /// A random arrow out of `x`: to a translate of `x`, shifted by a test vector.
    fn arrow_from(&mut self, x: &ChargeAutomorphism) -> Result<Intertwiner> {
        let a = self.offset();
        let mut target = x.translate(a);
        if self.rng.random_bool(0.5) {
            let extra = self.label()?;
            target = ChargeAutomorphism::new(target.data().add(&extra)?);
        }
        Ok(arrow(x, &target)?.scale(self.coeff()))
    }

    fn label(&mut self) -> Result<FieldVector> {
        let x = self.object()?;
        let a = self.offset();
        let mut f = FieldVector::chargeless_difference(x.translate(a).data(), x.data())?;
        if self.rng.random_bool(0.5) {
            f = f.mul_i()?;
        }
        Ok(f)
    }

    fn weyl(&mut self) -> Result<WeylElement> {
        let mut w = WeylElement::single(self.label()?, self.coeff())?;
        if self.rng.random_bool(0.5) {
            w = w.add(&WeylElement::single(self.label()?, self.coeff())?)?;
        }
        Ok(w)
    }
}

fn max_over<F>(samples: usize, mut f: F) -> Result<f64>
where
    F: FnMut(usize) -> Result<f64>,
{
    (0..samples).try_fold(0.0f64, |m, k| Ok(m.max(f(k)?)))
}

fn laws(ctx: &Context, rows: &mut Vec<Row>) -> Result<()> {
    let cfg = ctx.config;
    let tol = &cfg.tolerances;
    let n = cfg.laws.samples;
    for (pair, gamma, delta) in ctx.pairs()? {
        let sigma = symplectic(gamma.data(), delta.data())?;
        let [a, b] = pair
            .split('/')
            .collect::<Vec<_>>()
            .try_into()
            .map_err(|_| Error::Config("bad pair".into()))?;
        if let Some(closed) = closed_form_sigma(cfg, a, b) {
            rows.push(Row::at_most(
                "laws.sigma_oracle",
                &pair,
                "",
                None,
                real(sigma),
                (sigma - closed).abs(),
                tol.oracle,
            ));
        }
        let eps = braiding_exact(gamma, delta)?;
        let expected = Complex64::from_polar(1.0, -sigma);
        rows.push(Row::at_most(
            "laws.braiding_exact",
            &pair,
            "",
            None,
            eps.coeff(),
            (eps.coeff() - expected).norm(),
            tol.exact,
        ));
        let sym = compose(&braiding_exact(delta, gamma)?, &eps)?;
        let sym_res = if sym.label().is_zero() {
            (sym.coeff() - 1.0).norm()
        } else {
            f64::INFINITY
        };
        rows.push(Row::at_most(
            "laws.symmetry",
            &pair,
            "",
            None,
            sym.coeff(),
            sym_res,
            tol.exact,
        ));
        let (value, res) = if sigma != 0.0 {
            let v = commutator_norm(&gamma.data().scale(PI / sigma), delta.data())?;
            (v, (v - 2.0).abs())
        } else {
            (0.0, 2.0)
        };
        rows.push(Row::at_most(
            "laws.commutator_pi",
            &pair,
            "",
            None,
            real(value),
            res,
            tol.weyl,
        ));
        let cone = cfg.cones[0].spec()?;
        let plain = braiding_asymptotic(gamma, delta, &cone, &cfg.radii)?;
        let gauge = max_over(3, |k| {
            let options = BraidingOptions {
                gauge_seed: Some(cfg.seed.wrapping_add(k as u64 + 1)),
                ..Default::default()
            };
            let g = braiding_asymptotic_with(gamma, delta, &cone, &cfg.radii, &options)?;
            Ok(plain
                .phases
                .iter()
                .zip(&g.phases)
                .map(|(p, q)| (p - q).norm())
                .fold(0.0, f64::max))
        })?;
        rows.push(Row::at_most(
            "laws.gauge",
            &pair,
            &cfg.cones[0].id,
            None,
            real(gauge),
            gauge,
            tol.exact,
        ));
    }

    // σ = -Im(f, f') on chargeless labels built from the decay charges
    let d = &cfg.decay;
    let (g, t) = (ctx.object(&d.charge)?, ctx.object(&d.test)?);
    let c = Translation::spatial(d.probe_offset);
    let f = FieldVector::chargeless_difference(g.translate(c).data(), g.data())?;
    let fp = FieldVector::chargeless_difference(t.translate(c).translate(c).data(), t.data())?
        .scale(0.5)
        .add(&FieldVector::chargeless_difference(
            g.translate(-c).data(),
            g.data(),
        )?)?;
    let (s, sp) = (symplectic(&f, &fp)?, scalar_product(&f, &fp)?);
    rows.push(Row::at_most(
        "laws.plancherel",
        "",
        "",
        None,
        real(s),
        (s + sp.im).abs(),
        tol.plancherel,
    ));

    let mut sampler = Sampler::new(ctx, 1);
    let labels = (0..cfg.laws.gram_labels)
        .map(|_| sampler.label())
        .collect::<Result<Vec<_>>>()?;
    let (_, min_eig) = gram_matrix(&labels)?;
    rows.push(Row::at_most(
        "laws.gram",
        "*",
        "",
        None,
        real(min_eig),
        (-min_eig).max(0.0),
        tol.gram,
    ));

    let sweep =
        |id: &str, stream: u64, f: &mut dyn FnMut(&mut Sampler) -> Result<f64>| -> Result<Row> {
            let mut s = Sampler::new(ctx, stream);
            let worst = max_over(n, |_| f(&mut s))?;
            Ok(Row::at_most(
                id,
                "*",
                "",
                None,
                real(n as f64),
                worst,
                tol.exact,
            ))
        };
    rows.push(sweep("laws.hexagon", 2, &mut |s| {
        let (x, y, z) = (s.object()?, s.object()?, s.object()?);
        let (h1, h2) = hexagon_residuals(&x, &y, &z)?;
        Ok(h1.max(h2))
    })?);
    rows.push(sweep("laws.naturality", 3, &mut |s| {
        let (x, y) = (s.object()?, s.object()?);
        naturality_residual(&s.arrow_from(&x)?, &s.arrow_from(&y)?)
    })?);
    rows.push(sweep("laws.interchange", 4, &mut |s| {
        let (x, y) = (s.object()?, s.object()?);
        let r1 = s.arrow_from(&x)?;
        let r2 = s.arrow_from(r1.target())?;
        let s1 = s.arrow_from(&y)?;
        let s2 = s.arrow_from(s1.target())?;
        let lhs = tensor_mor(&compose(&r2, &r1)?, &compose(&s2, &s1)?)?;
        let rhs = compose(&tensor_mor(&r2, &s2)?, &tensor_mor(&r1, &s1)?)?;
        lhs.distance(&rhs)
    })?);
    rows.push(sweep("laws.associativity", 5, &mut |s| {
        let x = s.object()?;
        let r = s.arrow_from(&x)?;
        let q = s.arrow_from(r.target())?;
        let p = s.arrow_from(q.target())?;
        compose(&p, &compose(&q, &r)?)?.distance(&compose(&compose(&p, &q)?, &r)?)
    })?);
    rows.push(sweep("laws.unit", 6, &mut |s| {
        let x = s.object()?;
        let r = s.arrow_from(&x)?;
        let left = compose(&Intertwiner::identity(r.target()), &r)?.distance(&r)?;
        let right = compose(&r, &Intertwiner::identity(&x))?.distance(&r)?;
        let iota = ChargeAutomorphism::unit(ctx.grid.clone());
        let tensor = tensor_mor(&r, &Intertwiner::identity(&iota))?.distance(&r)?;
        Ok(left.max(right).max(tensor))
    })?);
    rows.push(sweep("laws.weyl_cocycle", 7, &mut |s| {
        let (a, b, c) = (s.weyl()?, s.weyl()?, s.weyl()?);
        a.mul(&b)?.mul(&c)?.distance(&a.mul(&b.mul(&c)?)?)
    })?);
    rows.push(sweep("laws.weyl_exchange", 8, &mut |s| {
        let (x, y) = (s.label()?, s.label()?);
        let (wx, wy) = (WeylElement::weyl(&x)?, WeylElement::weyl(&y)?);
        let phase = Complex64::from_polar(1.0, symplectic(&x, &y)?);
        wx.mul(&wy)?.distance(&wy.mul(&wx)?.scale(phase))
    })?);
    rows.push(sweep("laws.weyl_star", 9, &mut |s| {
        let (a, b) = (s.weyl()?, s.weyl()?);
        let twice = a.star().star().distance(&a)?;
        Ok(twice.max(a.mul(&b)?.star().distance(&b.star().mul(&a.star())?)?))
    })?);
    rows.push(sweep("laws.weyl_unitary", 10, &mut |s| {
        let mut p = WeylElement::identity(ctx.grid.clone());
        for _ in 0..4 {
            p = p.mul(&WeylElement::weyl(&s.label()?)?)?;
        }
        let (_, c) = p
            .terms()
            .next()
            .ok_or_else(|| Error::Consistency("product of generators vanished".into()))?;
        Ok((c.norm() - 1.0).abs())
    })?);
    rows.push(sweep("laws.intertwiner", 11, &mut |s| {
        let x = s.object()?;
        let r = s.arrow_from(&x)?;
        let w = WeylElement::weyl(&s.label()?)?;
        let rw = r.as_weyl()?;
        let lhs = rw.mul(&auto_action(&x, &w)?)?;
        let rhs = auto_action(r.target(), &w)?.mul(&rw)?;
        lhs.distance(&rhs)
    })?);
    Ok(())
}

fn seqalg(config: &RunConfig, policy: &TailPolicy, rows: &mut Vec<Row>) -> Result<()> {
    let tol = &config.tolerances;
    let tau = policy.tolerance();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5EA1);
    let c = |re: f64, im: f64| Complex64::new(re, im);

    let random_matrix = |rng: &mut ChaCha8Rng, n: usize| -> Result<Matrix> {
        Matrix::new(DMatrix::from_fn(n, n, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        }))
    };
    let random_unitary = |rng: &mut ChaCha8Rng, n: usize| -> Result<Matrix> {
        let svd = random_matrix(rng, n)?.inner().clone().svd(true, true);
        Matrix::new(svd.u.expect("requested") * svd.v_t.expect("requested"))
    };
    let random_hermitian = |rng: &mut ChaCha8Rng, n: usize| -> Result<Matrix> {
        let m = random_matrix(rng, n)?;
        let h = m.add(&m.star())?.scale(c(0.5, 0.0));
        Ok(h.scale(c(1.0 / h.norm(), 0.0)))
    };

    // almost-unitary corpus
    let swap = Matrix::from_real(2, &[0.0, 1.0, 1.0, 0.0])?;
    let mut corpus: Vec<SequenceElement<Matrix>> = Vec::new();
    {
        let early = Matrix::from_real(2, &[0.0, 2.0, 1.0, 0.0])?;
        let late = swap.clone();
        corpus.push(SequenceElement::new(2.0, move |n| {
            Ok(if n < 5 { early.clone() } else { late.clone() })
        }));
    }
    for n in [2, 3, 4, 8] {
        let u = random_unitary(&mut rng, n)?;
        let h = random_hermitian(&mut rng, n)?;
        corpus.push(SequenceElement::new(1.5, move |k| {
            let eps = 0.5f64.powi(k.min(1000) as i32);
            u.mul(&u.unit_like().add(&h.scale(c(eps, 0.0)))?)
        }));
    }
    {
        let singular = Matrix::from_real(3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0])?;
        let u = random_unitary(&mut rng, 3)?;
        corpus.push(SequenceElement::new(1.0 + 1e-12, move |k| {
            Ok(if k < 3 { singular.clone() } else { u.clone() })
        }));
    }
    let probe_indices: Vec<u64> = (1..=8).chain(policy.indices()).collect();
    let mut unitary: f64 = 0.0;
    let mut null: f64 = 0.0;
    let mut ratio: f64 = 0.0;
    for s in &corpus {
        let u = polar_unitarize(s, policy)?;
        for &k in &probe_indices {
            let (un, bn) = (u.at(k)?, s.at(k)?);
            unitary = unitary.max(un.unitarity_defect());
            let defect = bn.star().mul(&bn)?.sub(&bn.unit_like())?.norm();
            if defect > 1e-8 && bn.inner().clone().svd(false, false).singular_values.min() >= 1e-8 {
                ratio = ratio.max(un.sub(&bn)?.norm() / defect);
            }
        }
        null = null.max(limsup_norm(&u.sub(s), policy)?);
    }
    rows.push(Row::below(
        "seqalg.polar_unitary",
        "",
        "",
        None,
        real(unitary),
        unitary,
        tol.exact,
    ));
    rows.push(Row::at_most(
        "seqalg.polar_null",
        "",
        "",
        None,
        real(null),
        null,
        tau,
    ));
    rows.push(Row::at_most(
        "seqalg.polar_ratio",
        "",
        "",
        None,
        real(ratio),
        ratio,
        2.0,
    ));
    let doubled = SequenceElement::constant(Matrix::identity(2)?.scale(c(2.0, 0.0)));
    let rejected = matches!(polar_unitarize(&doubled, policy), Err(Error::Domain(_)));
    rows.push(flag("seqalg.polar_precondition", rejected));

    // subsequences of a convergent sequence agree with it; an alternating one splits
    let a = random_matrix(&mut rng, 3)?;
    let h = random_hermitian(&mut rng, 3)?;
    let converging = {
        let (a, h) = (a.clone(), h.clone());
        SequenceElement::new(a.norm() + 1.0, move |n| {
            a.add(&h.scale(c(0.5f64.powi(n.min(1000) as i32), 0.0)))
        })
    };
    let probe = stability_probe(
        &converging,
        |t| equivalent(t, &converging, policy),
        PROBE_MAPS,
        config.seed,
    )?;
    rows.push(Row::at_most(
        "seqalg.subsequence_stable",
        "",
        "",
        None,
        real(probe.maps_tested as f64),
        probe.failures as f64,
        0.0,
    ));
    let alt = {
        let a = a.clone();
        SequenceElement::new(2.0 * a.norm(), move |n| {
            Ok(a.scale(c(if n % 2 == 0 { 1.0 } else { 2.0 }, 0.0)))
        })
    };
    let even = subsequence(&alt, Arc::new(|n| 2 * n))?;
    let odd = subsequence(&alt, Arc::new(|n| 2 * n + 1))?;
    let gap = limsup_norm(&even.sub(&odd), policy)?;
    rows.push(Row::at_most(
        "seqalg.subsequence_split",
        "",
        "",
        None,
        real(gap),
        if gap > tau { 0.0 } else { 1.0 },
        0.0,
    ));

    // adjoint action of unitary sequences
    let u = random_unitary(&mut rng, 3)?;
    let conj = adjoint_morphism(&SequenceElement::constant(u.clone()), &a)?;
    let expected = SequenceElement::constant(u.star().mul(&a)?.mul(&u)?);
    let d = limsup_norm(&conj.sub(&expected), policy)?;
    rows.push(Row::at_most(
        "seqalg.adjoint_constant",
        "",
        "",
        None,
        real(d),
        d,
        tau,
    ));
    let phases = SequenceElement::new(1.0, |n| {
        Ok(Matrix::identity(3)?.scale(Complex64::from_polar(1.0, n as f64)))
    });
    let d = limsup_norm(
        &adjoint_morphism(&phases, &a)?.sub(&SequenceElement::constant(a.clone())),
        policy,
    )?;
    rows.push(Row::at_most(
        "seqalg.adjoint_central",
        "",
        "",
        None,
        real(d),
        d,
        tau,
    ));
    let v = random_unitary(&mut rng, 3)?;
    let alternating = {
        let (u, v) = (u.clone(), v.clone());
        SequenceElement::new(1.0 + 1e-12, move |n| {
            Ok(if n % 2 == 0 { u.clone() } else { v.clone() })
        })
    };
    let moved = adjoint_morphism(&alternating, &a)?;
    let gap = limsup_norm(
        &subsequence(&moved, Arc::new(|n| 2 * n))?
            .sub(&subsequence(&moved, Arc::new(|n| 2 * n + 1))?),
        policy,
    )?;
    rows.push(Row::at_most(
        "seqalg.adjoint_alternating",
        "",
        "",
        None,
        real(gap),
        if gap > tau { 0.0 } else { 1.0 },
        0.0,
    ));

    // null sequences form a two-sided ideal
    let small = {
        let a = a.clone();
        SequenceElement::new(a.norm(), move |n| {
            Ok(a.scale(c(0.5f64.powi(n.min(1000) as i32), 0.0)))
        })
    };
    let bounded = SequenceElement::new(2.0 * a.norm(), move |n| {
        Ok(a.scale(c(1.0 + (n as f64).sin(), 0.0)))
    });
    let worst =
        limsup_norm(&small.mul(&bounded), policy)?.max(limsup_norm(&bounded.mul(&small), policy)?);
    let null_ok = is_null(&small, policy)?;
    rows.push(Row::at_most(
        "seqalg.ideal",
        "",
        "",
        None,
        real(worst),
        if null_ok { worst } else { f64::INFINITY },
        tau,
    ));
    Ok(())
}

fn flag(id: &str, ok: bool) -> Row {
    Row::at_most(
        id,
        "",
        "",
        None,
        real(if ok { 1.0 } else { 0.0 }),
        if ok { 0.0 } else { 1.0 },
        0.0,
    )
}
