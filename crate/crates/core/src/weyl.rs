//! Finite linear combinations of Weyl operators and the Fock vacuum.
//!
//! Convention: `W(x) W(y) = e^{iσ(x,y)/2} W(x+y)`, `W(x)* = W(-x)`, so that
//! `W(x) W(y) = e^{iσ(x,y)} W(y) W(x)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{
    ensure_same_grid, scalar_product, symplectic, vacuum_exponent, FieldVector, Klass, ModeKey,
};
use crate::quadrature::MomentumGrid;

/// Coefficients below this magnitude are dropped after multiplication.
pub const DROP_THRESHOLD: f64 = 1e-14;

/// Largest label set accepted by [`gram_matrix`].
pub const MAX_GRAM_LABELS: usize = 16;

/// Exact symbolic identity of a test-function label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelId(Vec<(ModeKey, u64)>);

impl LabelId {
    pub fn of(f: &FieldVector) -> Self {
        LabelId(
            f.modes()
                .iter()
                .map(|m| (m.key(), (m.coeff() + 0.0).to_bits()))
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
}

/// `Σ c_k W(f_k)` over test-function labels `f_k`.
#[derive(Debug, Clone)]
pub struct WeylElement {
    grid: Arc<MomentumGrid>,
    terms: BTreeMap<LabelId, (FieldVector, Complex64)>,
}

fn require_test(f: &FieldVector) -> Result<()> {
    if f.klass() != Klass::Test {
        return Err(Error::Domain(
            "Weyl operators are labelled by test functions only".into(),
        ));
    }
    Ok(())
}

impl WeylElement {
    pub fn zero(grid: Arc<MomentumGrid>) -> Self {
        WeylElement {
            grid,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(grid: Arc<MomentumGrid>) -> Self {
        let label = FieldVector::zero(Arc::clone(&grid));
        Self::single(label, Complex64::new(1.0, 0.0)).expect("zero is a test function")
    }

    /// `W(f)`.
    pub fn weyl(f: &FieldVector) -> Result<Self> {
        Self::single(f.clone(), Complex64::new(1.0, 0.0))
    }

    /// `c W(f)`.
    pub fn single(f: FieldVector, c: Complex64) -> Result<Self> {
        require_test(&f)?;
        let mut out = WeylElement::zero(Arc::clone(f.grid()));
        out.push(f, c);
        Ok(out)
    }

    pub fn grid(&self) -> &Arc<MomentumGrid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical label order.
    pub fn terms(&self) -> impl Iterator<Item = (&FieldVector, Complex64)> {
        self.terms.values().map(|(f, c)| (f, *c))
    }

    /// Coefficient of `W(f)`, zero if absent.
    pub fn coefficient(&self, f: &FieldVector) -> Complex64 {
        self.terms
            .get(&LabelId::of(f))
            .map_or(Complex64::new(0.0, 0.0), |t| t.1)
    }

    fn push(&mut self, f: FieldVector, c: Complex64) {
        let id = LabelId::of(&f);
        let entry = self
            .terms
            .entry(id)
            .or_insert((f, Complex64::new(0.0, 0.0)));
        entry.1 += c;
    }

    fn prune(mut self, threshold: f64) -> Self {
        self.terms.retain(|_, (_, c)| c.norm() > threshold);
        self
    }

    pub fn add(&self, other: &WeylElement) -> Result<WeylElement> {
        ensure_same_grid(&self.grid, &other.grid)?;
        let mut out = self.clone();
        for (f, c) in other.terms.values() {
            out.push(f.clone(), *c);
        }
        Ok(out.prune(0.0))
    }

    pub fn sub(&self, other: &WeylElement) -> Result<WeylElement> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> WeylElement {
        let mut out = self.clone();
        for (_, c) in out.terms.values_mut() {
            *c *= s;
        }
        out.prune(0.0)
    }

    /// Product under the Weyl relation; coefficients below [`DROP_THRESHOLD`] are dropped.
    pub fn mul(&self, other: &WeylElement) -> Result<WeylElement> {
        ensure_same_grid(&self.grid, &other.grid)?;
        let mut out = WeylElement::zero(Arc::clone(&self.grid));
        for (x, a) in self.terms.values() {
            for (y, b) in other.terms.values() {
                let phase = Complex64::from_polar(1.0, 0.5 * symplectic(x, y)?);
                out.push(x.add(y)?, a * b * phase);
            }
        }
        Ok(out.prune(DROP_THRESHOLD))
    }

    /// `(Σ c W(f))* = Σ conj(c) W(-f)`.
    pub fn star(&self) -> WeylElement {
        let mut out = WeylElement::zero(Arc::clone(&self.grid));
        for (f, c) in self.terms.values() {
            out.push(f.negate(), c.conj());
        }
        out
    }

    /// `Σ |c_k|`, an upper bound for the C*-norm.
    pub fn norm(&self) -> f64 {
        self.terms.values().map(|(_, c)| c.norm()).sum()
    }

    /// Applies `W(f) ↦ phase(f) W(f)` termwise.
    pub fn map_phases<F>(&self, mut phase: F) -> Result<WeylElement>
    where
        F: FnMut(&FieldVector) -> Result<Complex64>,
    {
        let mut out = self.clone();
        for (f, c) in out.terms.values_mut() {
            *c *= phase(f)?;
        }
        Ok(out)
    }

    /// Largest coefficient difference against `other`, term by term.
    pub fn distance(&self, other: &WeylElement) -> Result<f64> {
        let diff = self.sub(other)?;
        Ok(diff
            .terms
            .values()
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max))
    }
}

/// Free-function form of [`WeylElement::mul`].
pub fn weyl_mul(a: &WeylElement, b: &WeylElement) -> Result<WeylElement> {
    a.mul(b)
}

/// `ab - ba`.
pub fn commutator(a: &WeylElement, b: &WeylElement) -> Result<WeylElement> {
    a.mul(b)?.sub(&b.mul(a)?)
}

/// `‖[W(x), W(y)]‖ = |e^{iσ(x,y)} - 1|`.
pub fn commutator_norm(x: &FieldVector, y: &FieldVector) -> Result<f64> {
    Ok((Complex64::from_polar(1.0, symplectic(x, y)?) - 1.0).norm())
}

/// Fock vacuum: `ω(W(f)) = exp(-(f,f)/4)`, extended linearly.
pub fn vacuum_state(a: &WeylElement) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    for (f, c) in a.terms() {
        total += c * (-vacuum_exponent(f)?).exp();
    }
    Ok(total)
}

/// `G_ij = ω(W(f_i)* W(f_j))` together with its smallest eigenvalue.
pub fn gram_matrix(labels: &[FieldVector]) -> Result<(DMatrix<Complex64>, f64)> {
    if labels.is_empty() || labels.len() > MAX_GRAM_LABELS {
        return Err(Error::Usage(format!(
            "gram matrix needs 1..={MAX_GRAM_LABELS} labels, got {}",
            labels.len()
        )));
    }
    for f in labels {
        require_test(f)?;
        ensure_same_grid(labels[0].grid(), f.grid())?;
    }
    let n = labels.len();
    let norms: Vec<f64> = labels
        .iter()
        .map(|f| Ok(scalar_product(f, f)?.re))
        .collect::<Result<_>>()?;
    let mut g = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for i in 0..n {
        for j in i..n {
            // W(-f_i) W(f_j) = e^{-iσ(f_i,f_j)/2} W(f_j - f_i)
            let cross = scalar_product(&labels[i], &labels[j])?.re;
            let sq = norms[i] + norms[j] - 2.0 * cross;
            let sigma = symplectic(&labels[i], &labels[j])?;
            let v = Complex64::from_polar((-sq / 4.0).exp(), -0.5 * sigma);
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
    }
    let min = g
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    Ok((g, min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Translation;
    use crate::quadrature::build_grid;
    use proptest::prelude::*;

    fn grid() -> Arc<MomentumGrid> {
        Arc::new(build_grid(48, 26, 10.0).unwrap())
    }

    fn labels(g: &Arc<MomentumGrid>) -> Vec<FieldVector> {
        let gamma = FieldVector::gaussian_charge(g.clone(), "gamma", 1.0, 1.0).unwrap();
        let delta = FieldVector::gaussian_test(g.clone(), "delta", 1.0, 1.0).unwrap();
        vec![
            FieldVector::chargeless_difference(
                &gamma.translate(Translation::spatial([0.0, 0.0, 1.5])),
                &gamma,
            )
            .unwrap(),
            delta.clone(),
            delta
                .translate(Translation::new(0.3, [1.0, -0.5, 0.0]))
                .scale(0.5),
            delta.mul_i().unwrap(),
        ]
    }

    #[test]
    fn exchange_relation() {
        let g = grid();
        let l = labels(&g);
        let (x, y) = (
            WeylElement::weyl(&l[0]).unwrap(),
            WeylElement::weyl(&l[1]).unwrap(),
        );
        let sigma = symplectic(&l[0], &l[1]).unwrap();
        assert!(sigma.abs() > 1e-3);
        let lhs = x.mul(&y).unwrap();
        let rhs = y.mul(&x).unwrap().scale(Complex64::from_polar(1.0, sigma));
        assert!(lhs.distance(&rhs).unwrap() < 1e-12);
    }

    #[test]
    fn star_is_an_antimultiplicative_involution() {
        let g = grid();
        let l = labels(&g);
        let a = WeylElement::weyl(&l[0])
            .unwrap()
            .add(&WeylElement::single(l[2].clone(), Complex64::new(0.3, -1.0)).unwrap())
            .unwrap();
        let b = WeylElement::weyl(&l[1])
            .unwrap()
            .scale(Complex64::new(0.0, 2.0));
        assert!(a.star().star().distance(&a).unwrap() < 1e-15);
        let lhs = a.mul(&b).unwrap().star();
        let rhs = b.star().mul(&a.star()).unwrap();
        assert!(lhs.distance(&rhs).unwrap() < 1e-12);
    }

    #[test]
    fn weyl_operators_are_unitary() {
        let g = grid();
        for f in labels(&g) {
            let w = WeylElement::weyl(&f).unwrap();
            let one = WeylElement::identity(g.clone());
            assert!(w.star().mul(&w).unwrap().distance(&one).unwrap() < 1e-14);
            assert!(w.mul(&w.star()).unwrap().distance(&one).unwrap() < 1e-14);
        }
    }

    #[test]
    fn commutator_norm_of_generators() {
        let g = grid();
        let l = labels(&g);
        for (x, y) in [
            (&l[0], &l[1]),
            (&l[1], &l[2]),
            (&l[2], &l[3]),
            (&l[1], &l[1]),
        ] {
            let c = commutator(
                &WeylElement::weyl(x).unwrap(),
                &WeylElement::weyl(y).unwrap(),
            )
            .unwrap();
            assert!((c.norm() - commutator_norm(x, y).unwrap()).abs() < 1e-12);
        }
        assert_eq!(commutator_norm(&l[1], &l[1]).unwrap(), 0.0);
        let gamma = FieldVector::gaussian_charge(g.clone(), "gamma", 1.0, 1.0).unwrap();
        let delta = FieldVector::gaussian_test(g, "delta", 1.0, 1.0).unwrap();
        let chord = 2.0 * (0.5 / 2f64.sqrt()).sin();
        assert!((chord - 0.692_467).abs() < 1e-6);
        assert!((commutator_norm(&gamma, &delta).unwrap() - chord).abs() < 1e-6);
        let sigma = symplectic(&gamma, &delta).unwrap();
        let half_turn = gamma.scale(std::f64::consts::PI / sigma);
        assert!((commutator_norm(&half_turn, &delta).unwrap() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn products_of_generators_have_unit_coefficients() {
        let g = grid();
        let l = labels(&g);
        let mut p = WeylElement::identity(g.clone());
        for k in [0, 1, 2, 3, 1, 0, 2] {
            p = p.mul(&WeylElement::weyl(&l[k]).unwrap()).unwrap();
            assert_eq!(p.len(), 1);
            let (_, c) = p.terms().next().unwrap();
            assert!((c.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn charges_cannot_label_weyl_operators() {
        let g = grid();
        let gamma = FieldVector::gaussian_charge(g, "gamma", 1.0, 1.0).unwrap();
        assert!(matches!(WeylElement::weyl(&gamma), Err(Error::Domain(_))));
    }

    #[test]
    fn vacuum_values() {
        let g = grid();
        assert!((vacuum_state(&WeylElement::identity(g.clone())).unwrap() - 1.0).norm() < 1e-15);
        let delta = FieldVector::gaussian_test(g, "delta", 1.0, 1.0).unwrap();
        let w = vacuum_state(&WeylElement::weyl(&delta).unwrap()).unwrap();
        assert!((w.re - (-std::f64::consts::PI / 2.0).exp()).abs() < 1e-8);
    }

    #[test]
    fn gram_matrix_is_positive() {
        let g = grid();
        let (m, min) = gram_matrix(&labels(&g)).unwrap();
        assert!(min > -1e-10);
        for i in 0..m.nrows() {
            assert!((m[(i, i)] - 1.0).norm() < 1e-12);
        }
        assert!(matches!(gram_matrix(&[]), Err(Error::Usage(_))));
    }

    #[test]
    fn gram_matrix_matches_vacuum_of_products() {
        let g = grid();
        let l = labels(&g);
        let (m, _) = gram_matrix(&l).unwrap();
        for i in 0..l.len() {
            for j in 0..l.len() {
                let p = WeylElement::weyl(&l[i])
                    .unwrap()
                    .star()
                    .mul(&WeylElement::weyl(&l[j]).unwrap())
                    .unwrap();
                assert!((vacuum_state(&p).unwrap() - m[(i, j)]).norm() < 1e-10);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn multiplication_is_associative(
            c in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3),
            shift in prop::collection::vec(-2.0f64..2.0, 3),
        ) {
            let g = grid();
            let l = labels(&g);
            let el = |k: usize| WeylElement::single(l[k].translate(Translation::spatial([shift[k], 0.0, 0.0])), Complex64::new(c[k].0, c[k].1)).unwrap()
                .add(&WeylElement::weyl(&l[3]).unwrap()).unwrap();
            let (a, b, d) = (el(0), el(1), el(2));
            let lhs = a.mul(&b).unwrap().mul(&d).unwrap();
            let rhs = a.mul(&b.mul(&d).unwrap()).unwrap();
            prop_assert!(lhs.distance(&rhs).unwrap() < 1e-10);
        }

        #[test]
        fn vacuum_is_positive(c in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4)) {
            let g = grid();
            let l = labels(&g);
            let mut a = WeylElement::zero(g.clone());
            for (k, (re, im)) in c.iter().enumerate() {
                a = a.add(&WeylElement::single(l[k].clone(), Complex64::new(*re, *im)).unwrap()).unwrap();
            }
            let v = vacuum_state(&a.star().mul(&a).unwrap()).unwrap();
            prop_assert!(v.re > -1e-10);
            prop_assert!(v.im.abs() < 1e-10);
        }
    }
}
