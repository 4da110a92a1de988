//! Run configuration, read from TOML.

use std::collections::HashSet;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use asymptopia::category::{ChargeAutomorphism, ConeSpec};
use asymptopia::field::FieldVector;
use asymptopia::quadrature::{AngularRule, MomentumGrid};
use asymptopia::seqalg::TailPolicy;
use asymptopia::{Error, Result};

/// The configuration shipped with the crate, selected by `--config default`.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: String,
    pub radii: Vec<f64>,
    pub pairs: Vec<[String; 2]>,
    pub grid: GridConfig,
    pub charges: Vec<ChargeConfig>,
    pub cones: Vec<ConeConfig>,
    pub homotopy: HomotopyConfig,
    pub decay: DecayConfig,
    pub tail_policy: TailPolicyConfig,
    pub tolerances: Tolerances,
    pub laws: LawsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_radial: usize,
    /// Number of points of the Lebedev rule (6, 14, 26 or 50).
    pub angular_order: usize,
    pub r_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    GaussianMomentum,
    BumpPosition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    G,
    H,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChargeConfig {
    pub name: String,
    pub profile: ProfileKind,
    pub channel: Channel,
    /// `q` for the g channel, `c` for the h channel.
    pub amplitude: f64,
    /// Gaussian width `s` (or `t`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    /// Bump support radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub panels: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeConfig {
    pub id: String,
    pub axis: [f64; 3],
    pub half_angle_deg: f64,
    pub time_slope: f64,
    pub time_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomotopyConfig {
    pub cone: String,
    pub rotation_axis: [f64; 3],
    pub step_deg: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    pub cone: String,
    pub charge: String,
    pub test: String,
    pub probe_offset: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailPolicyConfig {
    pub window_start: u64,
    pub sample_count: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub exact: f64,
    pub oracle: f64,
    pub plancherel: f64,
    pub braiding: f64,
    pub decay: f64,
    pub gram: f64,
    pub weyl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawsConfig {
    pub samples: usize,
    pub gram_labels: usize,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads `path`, or the built-in configuration when `path` is `default`.
    pub fn load(path: &Path) -> Result<Self> {
        if path.as_os_str() == "default" {
            return Self::parse(DEFAULT_CONFIG);
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize config: {e}")))
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> Result<String> {
        Ok(format!("{:x}", Sha256::digest(self.to_toml()?.as_bytes())))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.grid.n_radial < 4 || self.grid.r_max.is_nan() || self.grid.r_max <= 0.0 {
            return bad(format!(
                "grid needs n_radial ≥ 4 and r_max > 0, got {:?}",
                self.grid
            ));
        }
        AngularRule::from_order(self.grid.angular_order)?;
        let mut names = HashSet::new();
        for c in &self.charges {
            if !names.insert(c.name.as_str()) {
                return bad(format!("duplicate charge name {:?}", c.name));
            }
            c.validate()?;
        }
        let mut cone_ids = HashSet::new();
        for c in &self.cones {
            if !cone_ids.insert(c.id.as_str()) {
                return bad(format!("duplicate cone id {:?}", c.id));
            }
            c.spec()?;
        }
        for [a, b] in &self.pairs {
            for n in [a, b] {
                if !names.contains(n.as_str()) {
                    return bad(format!("pair refers to unknown charge {n:?}"));
                }
            }
        }
        if self.radii.len() < 3
            || self.radii.iter().any(|r| !(r.is_finite() && *r > 0.0))
            || self.radii.windows(2).any(|w| w[1] <= w[0])
        {
            return bad(format!(
                "radii must be ≥ 3 positive, strictly increasing values, got {:?}",
                self.radii
            ));
        }
        for (what, cone) in [
            ("homotopy", &self.homotopy.cone),
            ("decay", &self.decay.cone),
        ] {
            if !cone_ids.contains(cone.as_str()) {
                return bad(format!("{what} refers to unknown cone {cone:?}"));
            }
        }
        for n in [&self.decay.charge, &self.decay.test] {
            if !names.contains(n.as_str()) {
                return bad(format!("decay refers to unknown charge {n:?}"));
            }
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("exact", t.exact),
            ("oracle", t.oracle),
            ("plancherel", t.plancherel),
            ("braiding", t.braiding),
            ("decay", t.decay),
            ("gram", t.gram),
            ("weyl", t.weyl),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("tolerance {name} must be > 0, got {v}"));
            }
        }
        self.tail_policy()?;
        if self.laws.samples == 0 || self.laws.gram_labels == 0 || self.laws.gram_labels > 16 {
            return bad("laws need samples ≥ 1 and 1..=16 gram labels".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Arc<MomentumGrid>> {
        let rule = AngularRule::from_order(self.grid.angular_order)?;
        Ok(Arc::new(MomentumGrid::new(
            self.grid.n_radial,
            rule,
            self.grid.r_max,
        )?))
    }

    pub fn tail_policy(&self) -> Result<TailPolicy> {
        let p = &self.tail_policy;
        TailPolicy::new(p.window_start, p.sample_count, p.tolerance)
    }

    pub fn charge(&self, name: &str) -> Result<&ChargeConfig> {
        self.charges
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::Config(format!("unknown charge {name:?}")))
    }

    pub fn cone(&self, id: &str) -> Result<&ConeConfig> {
        self.cones
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| Error::Config(format!("unknown cone {id:?}")))
    }
}

impl ChargeConfig {
    fn validate(&self) -> Result<()> {
        let need = |v: Option<f64>, what: &str| -> Result<f64> {
            v.filter(|x| *x > 0.0 && x.is_finite()).ok_or_else(|| {
                Error::Config(format!("charge {:?} needs a positive {what}", self.name))
            })
        };
        if !self.amplitude.is_finite() {
            return Err(Error::Config(format!(
                "charge {:?} has a non-finite amplitude",
                self.name
            )));
        }
        match self.profile {
            ProfileKind::GaussianMomentum => {
                need(self.width, "width")?;
                if self.support.is_some() || self.panels.is_some() {
                    return Err(Error::Config(format!(
                        "gaussian charge {:?} takes no support/panels",
                        self.name
                    )));
                }
            }
            ProfileKind::BumpPosition => {
                need(self.support, "support")?;
                if self.panels.is_none() || self.width.is_some() {
                    return Err(Error::Config(format!(
                        "bump charge {:?} needs panels and no width",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn build(&self, grid: Arc<MomentumGrid>) -> Result<ChargeAutomorphism> {
        let a = self.amplitude;
        let v = match (self.profile, self.channel) {
            (ProfileKind::GaussianMomentum, Channel::G) => {
                FieldVector::gaussian_charge(grid, &self.name, a, self.width.unwrap_or(0.0))?
            }
            (ProfileKind::GaussianMomentum, Channel::H) => {
                FieldVector::gaussian_test(grid, &self.name, a, self.width.unwrap_or(0.0))?
            }
            (ProfileKind::BumpPosition, Channel::G) => FieldVector::bump_charge(
                grid,
                &self.name,
                a,
                self.support.unwrap_or(0.0),
                self.panels.unwrap_or(0),
            )?,
            (ProfileKind::BumpPosition, Channel::H) => FieldVector::bump_test(
                grid,
                &self.name,
                a,
                self.support.unwrap_or(0.0),
                self.panels.unwrap_or(0),
            )?,
        };
        Ok(ChargeAutomorphism::new(v))
    }
}

impl ConeConfig {
    pub fn spec(&self) -> Result<ConeSpec> {
        ConeSpec::new(
            self.axis,
            self.half_angle_deg.to_radians(),
            self.time_slope,
            self.time_exponent,
        )
    }
}
