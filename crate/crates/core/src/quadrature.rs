//! Spherical quadrature over momentum space with the massless dispersion
//! `ω(p) = |p|`, and radial Fourier transforms of position-space profiles.
//!
//! A [`MomentumGrid`] is the tensor product of a Gauss–Legendre rule on
//! `(0, r_max]` and an inversion-symmetric rule on the unit sphere. The origin
//! is never a node, so factors like `ω^{-2}` are always finite at nodes.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Minimum number of panels accepted by [`radial_fourier`].
pub const MIN_FOURIER_PANELS: usize = 200;

/// Gauss–Legendre nodes per panel in the oscillatory radial rule.
const PANEL_ORDER: usize = 16;

/// Gauss–Legendre nodes per panel in the radial Fourier transform.
const FOURIER_PANEL_ORDER: usize = 8;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let n = NonZeroUsize::new(n).expect("Gauss–Legendre order must be positive");
    let rule = GaussLegendre::new(n);
    (
        rule.nodes().copied().collect(),
        rule.weights().copied().collect(),
    )
}

/// Inversion-symmetric quadrature rules on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngularRule {
    /// Lebedev rule with the given number of points (6, 14, 26 or 50).
    Lebedev(usize),
    /// Gauss–Legendre in `cos θ` times a uniform azimuthal rule.
    /// `azimuthal` must be even for inversion symmetry.
    Product { polar: usize, azimuthal: usize },
}

impl AngularRule {
    /// The Lebedev rule with `points` nodes.
    pub fn from_order(points: usize) -> Result<Self> {
        match points {
            6 | 14 | 26 | 50 => Ok(AngularRule::Lebedev(points)),
            _ => Err(Error::Config(format!(
                "no inversion-symmetric Lebedev rule with {points} points (use 6, 14, 26 or 50)"
            ))),
        }
    }

    /// Highest spherical-harmonic degree integrated exactly.
    pub fn degree(&self) -> usize {
        match *self {
            AngularRule::Lebedev(6) => 3,
            AngularRule::Lebedev(14) => 5,
            AngularRule::Lebedev(26) => 7,
            AngularRule::Lebedev(50) => 11,
            AngularRule::Lebedev(_) => 0,
            AngularRule::Product { polar, azimuthal } => (2 * polar - 1).min(azimuthal - 1),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            AngularRule::Lebedev(n) => AngularRule::from_order(n).map(|_| ()),
            AngularRule::Product { polar, azimuthal } => {
                if polar == 0 || azimuthal < 2 || azimuthal % 2 != 0 {
                    Err(Error::Config(format!(
                        "product rule needs polar >= 1 and an even azimuthal count >= 2, got {polar}x{azimuthal}"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Unit nodes, weights summing to one, and the antipode of every node.
    fn build(&self) -> (Vec<[f64; 3]>, Vec<f64>, Vec<usize>) {
        match *self {
            AngularRule::Lebedev(n) => {
                let (nodes, weights) = lebedev(n);
                let antipodes = nodes
                    .iter()
                    .map(|u| {
                        nodes
                            .iter()
                            .position(|v| (0..3).all(|k| (u[k] + v[k]).abs() < 1e-14))
                            .expect("Lebedev rules are inversion symmetric")
                    })
                    .collect();
                (nodes, weights, antipodes)
            }
            AngularRule::Product { polar, azimuthal } => {
                let (xs, ws) = gauss_legendre(polar);
                let mut nodes = Vec::with_capacity(polar * azimuthal);
                let mut weights = Vec::with_capacity(polar * azimuthal);
                let mut antipodes = Vec::with_capacity(polar * azimuthal);
                for (a, (&z, &wz)) in xs.iter().zip(&ws).enumerate() {
                    let rho = (1.0 - z * z).sqrt();
                    for b in 0..azimuthal {
                        let phi = 2.0 * PI * b as f64 / azimuthal as f64;
                        nodes.push([rho * phi.cos(), rho * phi.sin(), z]);
                        weights.push(wz / (2.0 * azimuthal as f64));
                        antipodes
                            .push((polar - 1 - a) * azimuthal + (b + azimuthal / 2) % azimuthal);
                    }
                }
                (nodes, weights, antipodes)
            }
        }
    }
}

fn lebedev(points: usize) -> (Vec<[f64; 3]>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(points);
    let mut weights = Vec::with_capacity(points);
    let mut push = |generated: Vec<[f64; 3]>, w: f64| {
        for u in generated {
            nodes.push(u);
            weights.push(w);
        }
    };
    match points {
        6 => push(octahedron(), 1.0 / 6.0),
        14 => {
            push(octahedron(), 1.0 / 15.0);
            push(cube(), 3.0 / 40.0);
        }
        26 => {
            push(octahedron(), 1.0 / 21.0);
            push(edge_midpoints(), 4.0 / 105.0);
            push(cube(), 9.0 / 280.0);
        }
        50 => {
            push(octahedron(), 4.0 / 315.0);
            push(edge_midpoints(), 64.0 / 2835.0);
            push(cube(), 27.0 / 1280.0);
            push(
                llm(1.0 / 11f64.sqrt(), 3.0 / 11f64.sqrt()),
                14641.0 / 725760.0,
            );
        }
        _ => unreachable!("validated by AngularRule::from_order"),
    }
    (nodes, weights)
}

fn octahedron() -> Vec<[f64; 3]> {
    let mut out = Vec::new();
    for k in 0..3 {
        for s in [1.0, -1.0] {
            let mut u = [0.0; 3];
            u[k] = s;
            out.push(u);
        }
    }
    out
}

fn edge_midpoints() -> Vec<[f64; 3]> {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for zero in 0..3 {
        for s1 in [a, -a] {
            for s2 in [a, -a] {
                let mut u = [0.0; 3];
                u[(zero + 1) % 3] = s1;
                u[(zero + 2) % 3] = s2;
                out.push(u);
            }
        }
    }
    out
}

fn cube() -> Vec<[f64; 3]> {
    let a = 1.0 / 3f64.sqrt();
    let mut out = Vec::new();
    for sx in [a, -a] {
        for sy in [a, -a] {
            for sz in [a, -a] {
                out.push([sx, sy, sz]);
            }
        }
    }
    out
}

fn llm(l: f64, m: f64) -> Vec<[f64; 3]> {
    let mut out = Vec::new();
    for mpos in 0..3 {
        for s0 in [1.0, -1.0] {
            for s1 in [1.0, -1.0] {
                for s2 in [1.0, -1.0] {
                    let mut u = [l, l, l];
                    u[mpos] = m;
                    out.push([s0 * u[0], s1 * u[1], s2 * u[2]]);
                }
            }
        }
    }
    out
}

/// A one-dimensional rule on `(0, r_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialRule {
    /// Composite Gauss–Legendre rule with `panels` equal panels on `[0, upper]`.
    pub fn composite(upper: f64, panels: usize, order: usize) -> Self {
        let (xs, ws) = gauss_legendre(order);
        let width = upper / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for k in 0..panels {
            let left = k as f64 * width;
            for (&x, &w) in xs.iter().zip(&ws) {
                nodes.push(left + 0.5 * width * (x + 1.0));
                weights.push(0.5 * width * w);
            }
        }
        RadialRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Momentum-space quadrature grid. Node `(i, j)` is `r_i · u_j` with weight
/// `w_i r_i² v_j`; the flattened sample index is `i * n_angular + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    radial: RadialRule,
    angular_nodes: Vec<[f64; 3]>,
    angular_weights: Vec<f64>,
    antipodes: Vec<usize>,
    angular_rule: AngularRule,
    r_max: f64,
}

/// Builds a grid from a Lebedev point count; see [`MomentumGrid::new`].
pub fn build_grid(n_radial: usize, n_angular: usize, r_max: f64) -> Result<MomentumGrid> {
    MomentumGrid::new(n_radial, AngularRule::from_order(n_angular)?, r_max)
}

impl MomentumGrid {
    pub fn new(n_radial: usize, angular: AngularRule, r_max: f64) -> Result<Self> {
        if n_radial < 4 {
            return Err(Error::Config(format!(
                "n_radial must be at least 4, got {n_radial}"
            )));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::Config(format!(
                "r_max must be positive and finite, got {r_max}"
            )));
        }
        angular.validate()?;
        let radial = RadialRule::composite(r_max, 1, n_radial);
        let (angular_nodes, unit_weights, antipodes) = angular.build();
        let angular_weights = unit_weights.iter().map(|w| 4.0 * PI * w).collect();
        Ok(MomentumGrid {
            radial,
            angular_nodes,
            angular_weights,
            antipodes,
            angular_rule: angular,
            r_max,
        })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn angular_rule(&self) -> AngularRule {
        self.angular_rule
    }

    pub fn radial_nodes(&self) -> &[f64] {
        &self.radial.nodes
    }

    pub fn radial_weights(&self) -> &[f64] {
        &self.radial.weights
    }

    pub fn angular_nodes(&self) -> &[[f64; 3]] {
        &self.angular_nodes
    }

    /// Angular weights, summing to `4π`.
    pub fn angular_weights(&self) -> &[f64] {
        &self.angular_weights
    }

    pub fn n_radial(&self) -> usize {
        self.radial.len()
    }

    pub fn n_angular(&self) -> usize {
        self.angular_nodes.len()
    }

    pub fn len(&self) -> usize {
        self.n_radial() * self.n_angular()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Index of the angular node `-u_j`.
    pub fn antipode(&self, j: usize) -> usize {
        self.antipodes[j]
    }

    /// Flattened index of the node `-p` for the node with flattened index `k`.
    pub fn antipode_index(&self, k: usize) -> usize {
        let n = self.n_angular();
        (k / n) * n + self.antipodes[k % n]
    }

    /// Momentum vector of node `(i, j)`.
    pub fn node(&self, i: usize, j: usize) -> [f64; 3] {
        let r = self.radial.nodes[i];
        let u = self.angular_nodes[j];
        [r * u[0], r * u[1], r * u[2]]
    }

    /// `Σ_ij w_i r_i² v_j s_ij`.
    pub fn integrate(&self, samples: &[Complex64]) -> Result<Complex64> {
        if samples.len() != self.len() {
            return Err(Error::Usage(format!(
                "expected {} samples (one per grid node), got {}",
                self.len(),
                samples.len()
            )));
        }
        let n = self.n_angular();
        let mut total = Complex64::new(0.0, 0.0);
        for (i, (&r, &w)) in self
            .radial
            .nodes
            .iter()
            .zip(&self.radial.weights)
            .enumerate()
        {
            let mut shell = Complex64::new(0.0, 0.0);
            for (j, &v) in self.angular_weights.iter().enumerate() {
                shell += samples[i * n + j] * v;
            }
            total += shell * (w * r * r);
        }
        Ok(total)
    }

    /// Radial rule able to resolve integrands oscillating with angular
    /// frequency `frequency` in `|p|`. Returns the grid's own rule when one
    /// half-period covers the whole range.
    pub fn radial_rule(&self, frequency: f64) -> std::borrow::Cow<'_, RadialRule> {
        let panels = (self.r_max * frequency / PI).ceil();
        if panels.is_nan() || panels <= 1.0 {
            return std::borrow::Cow::Borrowed(&self.radial);
        }
        let panels = panels as usize;
        let order = PANEL_ORDER.max(self.n_radial().div_ceil(panels));
        std::borrow::Cow::Owned(RadialRule::composite(self.r_max, panels, order))
    }

    /// Stable digest input: every node and weight as raw bits.
    pub fn checksum_bits(&self) -> Vec<u64> {
        let mut bits = vec![self.r_max.to_bits()];
        bits.extend(self.radial.nodes.iter().map(|x| x.to_bits()));
        bits.extend(self.radial.weights.iter().map(|x| x.to_bits()));
        for u in &self.angular_nodes {
            bits.extend(u.iter().map(|x| x.to_bits()));
        }
        bits.extend(self.angular_weights.iter().map(|x| x.to_bits()));
        bits
    }
}

/// Momentum-space value of a radial position-space profile supported in
/// `[0, support]`, convention `f̃(p) = (2π)^{-3/2} ∫ e^{-ip·x} f(x) d³x`:
/// `f̃(p) = (2π)^{-3/2} (4π/p) ∫₀^R r sin(pr) f(r) dr`.
pub fn radial_fourier_at<F: Fn(f64) -> f64>(
    profile: &F,
    support: f64,
    p: f64,
    panels: usize,
) -> f64 {
    let rule = RadialRule::composite(support, panels, FOURIER_PANEL_ORDER);
    let norm = (2.0 * PI).powf(-1.5) * 4.0 * PI;
    let integral: f64 = if p.abs() < 1e-8 {
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&r, &w)| w * r * r * profile(r))
            .sum()
    } else {
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&r, &w)| w * r * (p * r).sin() * profile(r))
            .sum::<f64>()
            / p
    };
    norm * integral
}

/// Samples of the radial Fourier transform at every node of `grid`.
pub fn radial_fourier<F: Fn(f64) -> f64>(
    profile: F,
    support: f64,
    grid: &MomentumGrid,
    panels: usize,
) -> Result<Vec<Complex64>> {
    if !(support.is_finite() && support > 0.0) {
        return Err(Error::Config(format!(
            "profile support must be positive, got {support}"
        )));
    }
    if panels < MIN_FOURIER_PANELS {
        return Err(Error::Config(format!(
            "radial Fourier transform needs at least {MIN_FOURIER_PANELS} panels, got {panels}"
        )));
    }
    let n = grid.n_angular();
    let mut out = Vec::with_capacity(grid.len());
    for &r in grid.radial_nodes() {
        let value = radial_fourier_at(&profile, support, r, panels);
        out.extend(std::iter::repeat_n(Complex64::new(value, 0.0), n));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ball_volume(r: f64) -> f64 {
        4.0 / 3.0 * PI * r.powi(3)
    }

    #[test]
    fn default_grid_reproduces_ball_volume() {
        let grid = build_grid(64, 26, 10.0).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); grid.len()];
        let v = grid.integrate(&ones).unwrap();
        assert!(((v.re - ball_volume(10.0)) / ball_volume(10.0)).abs() < 1e-10);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn minimal_grid_is_valid() {
        let grid = build_grid(4, 6, 1.0).unwrap();
        assert_eq!(grid.len(), 24);
        let ones = vec![Complex64::new(1.0, 0.0); grid.len()];
        let v = grid.integrate(&ones).unwrap();
        assert!(v.re.is_finite());
        assert!(grid.radial_weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn invalid_grids_are_rejected() {
        assert!(matches!(build_grid(0, 26, 10.0), Err(Error::Config(_))));
        assert!(matches!(build_grid(64, 26, 0.0), Err(Error::Config(_))));
        assert!(matches!(build_grid(64, 27, 10.0), Err(Error::Config(_))));
        let odd = AngularRule::Product {
            polar: 4,
            azimuthal: 7,
        };
        assert!(matches!(
            MomentumGrid::new(8, odd, 1.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn every_angular_rule_is_inversion_symmetric_with_unit_mass() {
        let rules = [
            AngularRule::Lebedev(6),
            AngularRule::Lebedev(14),
            AngularRule::Lebedev(26),
            AngularRule::Lebedev(50),
            AngularRule::Product {
                polar: 5,
                azimuthal: 10,
            },
        ];
        for rule in rules {
            let grid = MomentumGrid::new(8, rule, 1.0).unwrap();
            let total: f64 = grid.angular_weights().iter().sum();
            assert_relative_eq!(total, 4.0 * PI, max_relative = 1e-14);
            for j in 0..grid.n_angular() {
                let k = grid.antipode(j);
                let (u, v) = (grid.angular_nodes()[j], grid.angular_nodes()[k]);
                assert!(
                    (0..3).all(|c| (u[c] + v[c]).abs() < 1e-14),
                    "{rule:?} node {j}"
                );
                assert_eq!(grid.angular_weights()[j], grid.angular_weights()[k]);
                assert_relative_eq!(
                    u[0] * u[0] + u[1] * u[1] + u[2] * u[2],
                    1.0,
                    max_relative = 1e-14
                );
            }
        }
    }

    #[test]
    fn lebedev_rules_integrate_monomials_to_their_degree() {
        // ∫ x^a y^b z^c dΩ / 4π for even exponents: (a-1)!!(b-1)!!(c-1)!!/(a+b+c+1)!!
        fn dfact(n: i64) -> f64 {
            if n <= 0 {
                1.0
            } else {
                (n as f64) * dfact(n - 2)
            }
        }
        for rule in [AngularRule::Lebedev(26), AngularRule::Lebedev(50)] {
            let grid = MomentumGrid::new(4, rule, 1.0).unwrap();
            let deg = rule.degree() as i64;
            for a in (0..=deg).step_by(2) {
                for b in (0..=deg - a).step_by(2) {
                    for c in (0..=deg - a - b).step_by(2) {
                        let exact =
                            dfact(a - 1) * dfact(b - 1) * dfact(c - 1) / dfact(a + b + c + 1);
                        let got: f64 = grid
                            .angular_nodes()
                            .iter()
                            .zip(grid.angular_weights())
                            .map(|(u, w)| {
                                w * u[0].powi(a as i32) * u[1].powi(b as i32) * u[2].powi(c as i32)
                            })
                            .sum::<f64>()
                            / (4.0 * PI);
                        assert_relative_eq!(got, exact, max_relative = 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn gaussian_integral_matches_closed_form() {
        let grid = build_grid(64, 26, 10.0).unwrap();
        let samples: Vec<Complex64> = (0..grid.n_radial())
            .flat_map(|i| {
                let r = grid.radial_nodes()[i];
                std::iter::repeat_n(Complex64::new((-r * r / 2.0).exp(), 0.0), grid.n_angular())
            })
            .collect();
        let v = grid.integrate(&samples).unwrap();
        let exact = (2.0 * PI).powf(1.5);
        assert!(((v.re - exact) / exact).abs() < 1e-8);
    }

    #[test]
    fn odd_integrands_vanish() {
        let grid = build_grid(32, 26, 5.0).unwrap();
        let mut samples = Vec::with_capacity(grid.len());
        for i in 0..grid.n_radial() {
            for j in 0..grid.n_angular() {
                let p = grid.node(i, j);
                let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
                samples.push(Complex64::new(
                    p[0] * (-r2).exp(),
                    p[2].powi(3) * (-r2).exp(),
                ));
            }
        }
        let v = grid.integrate(&samples).unwrap();
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn sample_count_mismatch_is_a_usage_error() {
        let grid = build_grid(8, 6, 1.0).unwrap();
        assert!(matches!(
            grid.integrate(&[Complex64::new(1.0, 0.0)]),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn oscillatory_rule_refines_with_frequency() {
        let grid = build_grid(64, 26, 10.0).unwrap();
        assert_eq!(grid.radial_rule(0.0).len(), 64);
        assert_eq!(grid.radial_rule(0.1).len(), 64);
        let fine = grid.radial_rule(80.0);
        assert!(fine.len() >= 255 * PANEL_ORDER);
        // ∫₀^10 sin(80 r) dr
        let got: f64 = fine
            .nodes
            .iter()
            .zip(&fine.weights)
            .map(|(r, w)| w * (80.0 * r).sin())
            .sum();
        assert_relative_eq!(got, (1.0 - 800f64.cos()) / 80.0, max_relative = 1e-12);
    }

    #[test]
    fn radial_fourier_of_zero_is_zero() {
        let grid = build_grid(16, 6, 5.0).unwrap();
        let s = radial_fourier(|_| 0.0, 1.0, &grid, 200).unwrap();
        assert!(s.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn radial_fourier_of_ball_indicator() {
        let grid = build_grid(32, 6, 5.0).unwrap();
        let s = radial_fourier(|_| 1.0, 1.0, &grid, 200).unwrap();
        for (i, &p) in grid.radial_nodes().iter().enumerate() {
            let exact = (2.0 * PI).powf(-1.5) * 4.0 * PI * (p.sin() - p * p.cos()) / p.powi(3);
            let got = s[i * grid.n_angular()].re;
            assert!(
                ((got - exact) / exact).abs() < 1e-6,
                "p = {p}: {got} vs {exact}"
            );
        }
    }

    #[test]
    fn radial_fourier_is_panel_converged() {
        let grid = build_grid(32, 6, 10.0).unwrap();
        let bump = |r: f64| {
            if r < 1.0 {
                (-1.0 / (1.0 - r * r)).exp()
            } else {
                0.0
            }
        };
        let coarse = radial_fourier(bump, 1.0, &grid, 200).unwrap();
        let fine = radial_fourier(bump, 1.0, &grid, 400).unwrap();
        for (a, b) in coarse.iter().zip(&fine) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn radial_fourier_rejects_bad_parameters() {
        let grid = build_grid(8, 6, 1.0).unwrap();
        assert!(matches!(
            radial_fourier(|_| 1.0, 0.0, &grid, 200),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            radial_fourier(|_| 1.0, 1.0, &grid, 100),
            Err(Error::Config(_))
        ));
    }
}
