//! TOML run configuration for the command-line front end.
//!
//! Angles are radians throughout. Complex numbers are `[re, im]` pairs, a
//! state is either a ket (list of pairs) or a density matrix (list of rows of
//! pairs), and an operator is always a list of rows.
//!
//! ```toml
//! seed = 7
//! format = "csv"
//!
//! [setup]
//! kind = "mach-zehnder"
//! delta = 1.5707963267948966
//! visibility = 0.977
//! theta = 0.01
//!
//! [channels]
//! pre = "depolarizing 0.3"
//! post = { kraus = [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]] }
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::QuantumChannel;
use crate::engine::{Selection, WeakSetup};
use crate::error::{Error, Result};
use crate::experiment::{self, MzConfig};
use crate::matrix::{ComplexMatrix, TOL};
use crate::state::{DensityOperator, Observable, PureState};

pub type ComplexPair = [f64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub setup: Option<SetupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channels: Option<ChannelsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarloSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flowfield: Option<FlowSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySpec>,
}

/// A state: ket amplitudes or a density matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Ket(Vec<ComplexPair>),
    Density(Vec<Vec<ComplexPair>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SetupSpec {
    /// The interferometer: pre `|+⟩`, post-selection phase `delta` blended
    /// with `I/2` below unit visibility, `A = |0⟩⟨0|`, `K = Z`.
    MachZehnder {
        delta: f64,
        #[serde(default = "one")]
        visibility: f64,
        /// Coupling `θ` of `exp(−iθ A⊗K)`.
        #[serde(default)]
        theta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        probe: Option<StateSpec>,
    },
    Explicit {
        pre: StateSpec,
        post: StateSpec,
        a: Vec<Vec<ComplexPair>>,
        k: Vec<Vec<ComplexPair>>,
        #[serde(default)]
        theta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        probe: Option<StateSpec>,
    },
}

/// A named preset such as `"phase-flip 0.1"`, or explicit Kraus operators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelSpec {
    Preset(String),
    Kraus { kraus: Vec<Vec<Vec<ComplexPair>>> },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pre: Option<ChannelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post: Option<ChannelSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<RangeSpec>,
    #[serde(default = "one")]
    pub visibility: f64,
    /// Half-wave-plate angles of the fit window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<StateSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSpec {
    pub shots: u64,
    /// Measured probe observable; defaults to `K`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<Vec<Vec<ComplexPair>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub grid: Vec<[f64; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_noise_override: Option<ChannelSpec>,
}

fn one() -> f64 {
    1.0
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn complex(p: &ComplexPair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {x}")))
    }
}

pub fn matrix_from_spec(rows: &[Vec<ComplexPair>]) -> Result<ComplexMatrix> {
    let rows: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|r| r.iter().map(complex).collect())
        .collect();
    ComplexMatrix::from_rows(&rows)
}

pub fn observable_from_spec(rows: &[Vec<ComplexPair>]) -> Result<Observable> {
    Observable::new(matrix_from_spec(rows)?)
}

impl StateSpec {
    pub fn to_density(&self) -> Result<DensityOperator> {
        match self {
            StateSpec::Ket(_) => Ok(self.to_selection()?.density()),
            StateSpec::Density(rows) => DensityOperator::new(matrix_from_spec(rows)?),
        }
    }

    pub fn to_selection(&self) -> Result<Selection> {
        match self {
            StateSpec::Ket(amps) => Ok(Selection::Pure(PureState::new(
                amps.iter().map(complex).collect(),
            )?)),
            StateSpec::Density(_) => Ok(Selection::Mixed(self.to_density()?)),
        }
    }
}

impl ChannelSpec {
    pub fn build(&self, dim: usize) -> Result<QuantumChannel> {
        let chan = match self {
            ChannelSpec::Kraus { kraus } => QuantumChannel::new(
                kraus
                    .iter()
                    .map(|k| matrix_from_spec(k))
                    .collect::<Result<Vec<_>>>()?,
            )?,
            ChannelSpec::Preset(text) => {
                let mut words = text.split_whitespace();
                let name = words.next().unwrap_or("");
                let arg = words
                    .next()
                    .map(str::parse::<f64>)
                    .transpose()
                    .map_err(|_| {
                        invalid(format!(
                            "channel preset {text:?} has a non-numeric parameter"
                        ))
                    })?;
                if words.next().is_some() {
                    return Err(invalid(format!(
                        "channel preset {text:?} has trailing words"
                    )));
                }
                let need = |arg: Option<f64>| {
                    arg.ok_or_else(|| invalid(format!("channel preset {name:?} needs a parameter")))
                };
                match name {
                    "identity" if arg.is_none() => QuantumChannel::identity(dim),
                    "phase-flip" => QuantumChannel::phase_flip(need(arg)?)?,
                    "bit-flip" => QuantumChannel::bit_flip(need(arg)?)?,
                    "depolarizing" => QuantumChannel::depolarizing(need(arg)?)?,
                    "z-rotation" => QuantumChannel::z_rotation(need(arg)?),
                    "amplitude-damping" => QuantumChannel::amplitude_damping(need(arg)?)?,
                    _ => return Err(invalid(format!("unknown channel preset {text:?}"))),
                }
            }
        };
        if chan.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: chan.dim(),
            });
        }
        Ok(chan)
    }
}

impl SetupSpec {
    pub fn default_interferometer() -> Self {
        SetupSpec::MachZehnder {
            delta: std::f64::consts::FRAC_PI_2,
            visibility: 1.0,
            theta: 0.0,
            probe: None,
        }
    }

    pub fn build(&self) -> Result<WeakSetup> {
        match self {
            SetupSpec::MachZehnder {
                delta,
                visibility,
                theta,
                probe,
            } => {
                finite("theta", *theta)?;
                let mut cfg = MzConfig::new(*delta, *visibility);
                if let Some(p) = probe {
                    cfg.probe = p.to_density()?;
                }
                cfg.validate()?;
                Ok(experiment::mz_setup(&cfg, 0.0)?.with_theta(*theta))
            }
            SetupSpec::Explicit {
                pre,
                post,
                a,
                k,
                theta,
                probe,
            } => {
                let k = observable_from_spec(k)?;
                let probe = match probe {
                    Some(p) => p.to_density()?,
                    None => DensityOperator::maximally_mixed(k.dim()),
                };
                WeakSetup::new(
                    pre.to_selection()?,
                    post.to_selection()?,
                    observable_from_spec(a)?,
                    k,
                    *theta,
                    probe,
                )
            }
        }
    }

    pub fn set_delta(&mut self, value: f64) -> Result<()> {
        match self {
            SetupSpec::MachZehnder { delta, .. } => {
                *delta = value;
                Ok(())
            }
            SetupSpec::Explicit { .. } => {
                Err(invalid("delta applies only to the mach-zehnder setup"))
            }
        }
    }

    pub fn set_theta(&mut self, value: f64) {
        match self {
            SetupSpec::MachZehnder { theta, .. } | SetupSpec::Explicit { theta, .. } => {
                *theta = value
            }
        }
    }
}

impl SweepSpec {
    pub fn deltas(&self) -> Result<Vec<f64>> {
        match (&self.deltas, &self.range) {
            (Some(d), None) if !d.is_empty() => Ok(d.clone()),
            (None, Some(r)) if r.count > 0 => Ok(experiment::linspace(r.start, r.stop, r.count)),
            (Some(_), Some(_)) => Err(invalid("sweep takes either deltas or range, not both")),
            _ => Err(invalid("sweep needs a nonempty list of deltas or a range")),
        }
    }

    /// The interferometer template before `pre_noise` is applied to its probe.
    pub fn template(&self) -> Result<MzConfig> {
        let mut cfg = MzConfig::new(0.0, self.visibility);
        if let Some(grid) = &self.theta_grid {
            cfg.theta_grid = grid.clone();
        }
        if let Some(p) = &self.probe {
            cfg.probe = p.to_density()?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            deltas: None,
            range: Some(RangeSpec {
                start: 0.0,
                stop: 2.8,
                count: 57,
            }),
            visibility: 0.977,
            theta_grid: None,
            probe: None,
        }
    }
}

impl FlowSpec {
    /// Origin, the six axis points at radius 0.8 and an equatorial ring.
    pub fn default_grid() -> Self {
        let mut grid = vec![[0.0, 0.0, 0.0]];
        for axis in 0..3 {
            for sign in [-0.8, 0.8] {
                let mut p = [0.0; 3];
                p[axis] = sign;
                grid.push(p);
            }
        }
        for j in 0..8 {
            let phi = j as f64 * std::f64::consts::FRAC_PI_4;
            grid.push([0.5 * phi.cos(), 0.5 * phi.sin(), 0.0]);
        }
        Self { grid }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| invalid(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| invalid(e.to_string()))
    }

    pub fn setup_spec(&self) -> SetupSpec {
        self.setup
            .clone()
            .unwrap_or_else(SetupSpec::default_interferometer)
    }

    pub fn channel(&self, which: ChannelSlot, dim: usize) -> Result<QuantumChannel> {
        let spec = self.channels.as_ref().and_then(|c| match which {
            ChannelSlot::Pre => c.pre.as_ref(),
            ChannelSlot::Post => c.post.as_ref(),
        });
        match spec {
            Some(s) => s.build(dim),
            None => Ok(QuantumChannel::identity(dim)),
        }
    }

    /// Builds every block once so that range and consistency errors surface
    /// at load time.
    pub fn validate(&self) -> Result<()> {
        if let Some(setup) = &self.setup {
            let s = setup.build()?;
            self.channel(ChannelSlot::Pre, s.dim_probe())?;
            self.channel(ChannelSlot::Post, s.dim_probe())?;
            if let Some(mc) = &self.monte_carlo {
                if let Some(m) = &mc.observable {
                    if observable_from_spec(m)?.dim() != s.dim_probe() {
                        return Err(invalid(
                            "monte_carlo observable does not match the probe dimension",
                        ));
                    }
                }
            }
        }
        if let Some(sweep) = &self.sweep {
            for d in sweep.deltas()? {
                finite("sweep delta", d)?;
            }
            let cfg = sweep.template()?;
            self.channel(ChannelSlot::Pre, cfg.probe.dim())?;
        }
        if let Some(mc) = &self.monte_carlo {
            if mc.shots == 0 {
                return Err(invalid("monte_carlo shots must be at least 1"));
            }
            if let Some(m) = &mc.observable {
                observable_from_spec(m)?;
            }
        }
        if let Some(flow) = &self.flowfield {
            if flow.grid.is_empty() {
                return Err(invalid("flowfield grid is empty"));
            }
            for p in &flow.grid {
                let r2: f64 = p.iter().map(|x| x * x).sum();
                if r2.is_nan() || r2 > 1.0 + TOL {
                    return Err(invalid(format!(
                        "flowfield point {p:?} lies outside the Bloch ball"
                    )));
                }
            }
        }
        if let Some(v) = &self.verify {
            if v.trials == Some(0) || v.shots == Some(0) {
                return Err(invalid("verify trials and shots must be positive"));
            }
            if let Some(c) = &v.phase_noise_override {
                c.build(2)?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelSlot {
    Pre,
    Post,
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
seed = 42
format = "json"
output_path = "out.json"

[setup]
kind = "explicit"
pre = [[0.7071067811865476, 0.0], [0.7071067811865476, 0.0]]
post = [[1.0, 0.0], [0.0, 0.0]]
a = [[[0.0, 0.0], [1.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]]
k = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]]
theta = 0.01
probe = [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]

[channels]
pre = "depolarizing 0.3"
post = { kraus = [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]] }

[sweep]
range = { start = 0.0, stop = 2.0, count = 5 }
visibility = 0.977

[monte_carlo]
shots = 1000

[flowfield]
grid = [[0.0, 0.0, 0.0], [0.5, 0.0, 0.0]]

[verify]
trials = 5
phase_noise_override = "bit-flip 0.2"
"#;

    #[test]
    fn round_trip_is_identity() {
        let cfg = RunConfig::from_toml(FULL).unwrap();
        let again = RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn interferometer_round_trip() {
        let text = "[setup]\nkind = \"mach-zehnder\"\ndelta = 0.1\nvisibility = 0.5\n";
        let cfg = RunConfig::from_toml(text).unwrap();
        assert_eq!(cfg, RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml("sed = 1\n").is_err());
        assert!(
            RunConfig::from_toml("[setup]\nkind = \"mach-zehnder\"\ndelta = 0.1\nvis = 1.0\n")
                .is_err()
        );
        assert!(RunConfig::from_toml("[sweep]\ndeltas = [0.1]\nstep = 2\n").is_err());
    }

    #[test]
    fn ranges_checked_at_parse_time() {
        assert!(RunConfig::from_toml(
            "[setup]\nkind = \"mach-zehnder\"\ndelta = 0.1\nvisibility = 1.5\n"
        )
        .is_err());
        assert!(RunConfig::from_toml("[monte_carlo]\nshots = 0\n").is_err());
        assert!(RunConfig::from_toml(
            "[setup]\nkind = \"mach-zehnder\"\ndelta = 0.1\n[channels]\npre = \"phase-flip 1.5\"\n"
        )
        .is_err());
        assert!(RunConfig::from_toml("[flowfield]\ngrid = [[1.0, 1.0, 0.0]]\n").is_err());
        assert!(RunConfig::from_toml("[sweep]\ndeltas = []\n").is_err());
        // Unnormalized ket.
        let bad = FULL.replace("pre = [[0.7071067811865476", "pre = [[0.9");
        assert!(RunConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn presets_parse() {
        for (text, dim) in [
            ("identity", 3),
            ("phase-flip 0.1", 2),
            ("depolarizing 1", 2),
            ("z-rotation 0.3", 2),
            ("amplitude-damping 0.25", 2),
        ] {
            ChannelSpec::Preset(text.into()).build(dim).unwrap();
        }
        for text in [
            "phase-flip",
            "phase-flip x",
            "spin-flip 0.1",
            "identity 0.1",
            "phase-flip 0.1 0.2",
        ] {
            assert!(ChannelSpec::Preset(text.into()).build(2).is_err(), "{text}");
        }
        assert!(ChannelSpec::Preset("phase-flip 0.1".into())
            .build(3)
            .is_err());
    }

    #[test]
    fn default_interferometer_setup() {
        let s = RunConfig::default().setup_spec().build().unwrap();
        let w = s.weak_value().unwrap();
        assert!((w.re - 0.5).abs() < 1e-12 && (w.im - 0.5).abs() < 1e-12);
    }
}
