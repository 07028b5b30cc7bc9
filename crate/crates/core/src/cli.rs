//! Command implementations behind the `weakmix` binary.
//!
//! Every command renders its full output to a string before anything is
//! written, so identical configurations give identical bytes and tests can
//! call the commands directly.

use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{observable_from_spec, ChannelSlot, FlowSpec, Format, RunConfig};
use crate::engine::{flow_field_for_weak_value, monte_carlo_noisy, predicted_snr};
use crate::error::Error;
use crate::experiment::sweep;
use crate::state::from_bloch;
use crate::verify::{self, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_SELECTION: i32 = 2;
pub const EXIT_STATISTICS: i32 = 3;
pub const EXIT_PROPERTY: i32 = 4;

pub const DEFAULT_SHOTS: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    WeakValue,
    Sweep,
    MonteCarlo,
    FlowField,
    Verify,
}

/// A failure with its process exit code. Displays as one line.
#[derive(Clone, Debug, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            kind,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self::new(EXIT_IO, "io", message)
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(EXIT_IO, "config", message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let message = self
            .message
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ");
        write!(
            f,
            "error kind={} code={}: {}",
            self.kind, self.code, message
        )
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::OrthogonalSelection { .. } => (EXIT_SELECTION, "orthogonal-selection"),
            Error::DegeneratePostSelection { .. } => (EXIT_SELECTION, "degenerate-post-selection"),
            Error::InsufficientStatistics { .. } => (EXIT_STATISTICS, "insufficient-statistics"),
            _ => (EXIT_IO, "invalid-input"),
        };
        Self::new(code, kind, e.to_string())
    }
}

/// Output of a command. A failed property check still produces its report.
#[derive(Clone, Debug)]
pub struct Report {
    pub body: String,
    pub failure: Option<CliError>,
}

impl From<String> for Report {
    fn from(body: String) -> Self {
        Self {
            body,
            failure: None,
        }
    }
}

/// Command-line values that take precedence over the configuration file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub delta: Option<f64>,
    pub theta: Option<f64>,
    /// `delta` and `theta` are given in degrees.
    pub degrees: bool,
}

pub fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::io(format!("cannot read {}: {e}", p.display())))?;
            RunConfig::from_toml(&text)
                .map_err(|e| CliError::config(format!("{}: {e}", p.display())))
        }
    }
}

pub fn apply_overrides(mut cfg: RunConfig, o: &Overrides) -> Result<RunConfig, CliError> {
    let angle = |x: f64| if o.degrees { x.to_radians() } else { x };
    if let Some(seed) = o.seed {
        cfg.seed = seed;
    }
    if let Some(format) = o.format {
        cfg.format = Some(format);
    }
    if let Some(out) = &o.out {
        cfg.output_path = Some(out.to_string_lossy().into_owned());
    }
    if o.delta.is_some() || o.theta.is_some() {
        let mut setup = cfg.setup_spec();
        if let Some(d) = o.delta {
            setup
                .set_delta(angle(d))
                .map_err(|e| CliError::config(e.to_string()))?;
        }
        if let Some(t) = o.theta {
            setup.set_theta(angle(t));
        }
        cfg.setup = Some(setup);
    }
    cfg.validate()
        .map_err(|e| CliError::config(e.to_string()))?;
    Ok(cfg)
}

/// Writes to the configured output path, or stdout when there is none.
pub fn write_output(cfg: &RunConfig, body: &str) -> Result<(), CliError> {
    match &cfg.output_path {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| CliError::io(format!("cannot write {path}: {e}"))),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io(format!("cannot write to stdout: {e}")))
        }
    }
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Report, CliError> {
    match cmd {
        Command::WeakValue => cmd_weakvalue(cfg).map(Report::from),
        Command::Sweep => cmd_sweep(cfg).map(Report::from),
        Command::MonteCarlo => cmd_montecarlo(cfg).map(Report::from),
        Command::FlowField => cmd_flowfield(cfg).map(Report::from),
        Command::Verify => cmd_verify(cfg),
    }
}

/// `x` rounded to 12 significant digits, printed without trailing zeros.
pub fn sig12(x: f64) -> String {
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    if rounded == 0.0 {
        "0".into()
    } else {
        format!("{rounded}")
    }
}

/// 17 significant digits; negative zero prints as zero.
fn full(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct WeakValueOut {
    re: f64,
    im: f64,
    p: f64,
}

pub fn cmd_weakvalue(cfg: &RunConfig) -> Result<String, CliError> {
    let setup = cfg.setup_spec().build()?;
    let w = setup.weak_value()?;
    let p = setup.success_probability();
    match cfg.format {
        None => Ok(format!(
            "re={} im={} p={}\n",
            sig12(w.re),
            sig12(w.im),
            sig12(p)
        )),
        Some(Format::Csv) => Ok(format!(
            "re,im,p\n{},{},{}\n",
            full(w.re),
            full(w.im),
            full(p)
        )),
        Some(Format::Json) => to_json(&WeakValueOut {
            re: w.re,
            im: w.im,
            p,
        }),
    }
}

pub const SWEEP_HEADER: &str = "delta_rad,im_wv_extracted,im_wv_analytic,fit_stderr";

pub fn cmd_sweep(cfg: &RunConfig) -> Result<String, CliError> {
    let spec = cfg.sweep.clone().unwrap_or_default();
    let mut template = spec.template()?;
    template.probe = cfg
        .channel(ChannelSlot::Pre, template.probe.dim())?
        .apply(&template.probe)?;
    let records = sweep(&spec.deltas()?, &template)?;
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&records),
        Format::Csv => {
            let mut out = String::from(SWEEP_HEADER);
            out.push('\n');
            for r in &records {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    full(r.delta),
                    full(r.extracted_im_weak_value),
                    full(r.analytic_im_weak_value),
                    full(r.fit_stderr)
                );
            }
            Ok(out)
        }
    }
}

#[derive(Serialize)]
struct MonteCarloOut {
    predicted_snr: f64,
    empirical_snr: f64,
    mean_shift: f64,
    accepted: u64,
    shots: u64,
    seed: u64,
}

pub fn cmd_montecarlo(cfg: &RunConfig) -> Result<String, CliError> {
    let setup = cfg.setup_spec().build()?;
    let dim = setup.dim_probe();
    let pre = cfg.channel(ChannelSlot::Pre, dim)?;
    let post = cfg.channel(ChannelSlot::Post, dim)?;
    let (shots, m) = match &cfg.monte_carlo {
        Some(spec) => (
            spec.shots,
            match &spec.observable {
                Some(rows) => observable_from_spec(rows)?,
                None => setup.k().clone(),
            },
        ),
        None => (DEFAULT_SHOTS, setup.k().clone()),
    };
    let mc = monte_carlo_noisy(&setup, &pre, &post, &m, shots, cfg.seed)?;
    let predicted = predicted_snr(&setup.with_probe(pre.apply(setup.probe())?)?, mc.shots)?;
    let out = MonteCarloOut {
        predicted_snr: predicted,
        empirical_snr: mc.empirical_snr,
        mean_shift: mc.mean_shift,
        accepted: mc.accepted,
        shots: mc.shots,
        seed: cfg.seed,
    };
    match cfg.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&out),
        Format::Csv => Ok(format!(
            "predicted_snr,empirical_snr,mean_shift,accepted,shots,seed\n{},{},{},{},{},{}\n",
            full(out.predicted_snr),
            full(out.empirical_snr),
            full(out.mean_shift),
            out.accepted,
            out.shots,
            out.seed
        )),
    }
}

pub const FLOW_HEADER: &str = "x,y,z,vx_re,vy_re,vz_re,vx_im,vy_im,vz_im";

pub fn cmd_flowfield(cfg: &RunConfig) -> Result<String, CliError> {
    let setup = cfg.setup_spec().build()?;
    if setup.dim_probe() != 2 {
        return Err(Error::NotQubit(setup.dim_probe()).into());
    }
    let spec = cfg.flowfield.clone().unwrap_or_else(FlowSpec::default_grid);
    let grid = spec
        .grid
        .iter()
        .map(|&p| from_bloch(p))
        .collect::<Result<Vec<_>, _>>()?;
    let flow = flow_field_for_weak_value(setup.weak_value()?, setup.k(), &grid)?;
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&flow),
        Format::Csv => {
            let mut out = String::from(FLOW_HEADER);
            out.push('\n');
            for v in &flow {
                let cols: Vec<String> = v
                    .point
                    .iter()
                    .chain(&v.real_part)
                    .chain(&v.imag_part)
                    .map(|&x| full(x))
                    .collect();
                out.push_str(&cols.join(","));
                out.push('\n');
            }
            Ok(out)
        }
    }
}

pub fn verify_options(cfg: &RunConfig) -> Result<VerifyOptions, CliError> {
    let mut opts = VerifyOptions {
        seed: cfg.seed,
        ..VerifyOptions::default()
    };
    if let Some(spec) = &cfg.verify {
        if let Some(t) = spec.trials {
            opts.trials = t;
        }
        if let Some(s) = spec.shots {
            opts.shots = s;
        }
        if let Some(c) = &spec.phase_noise_override {
            opts.phase_noise_override = Some(c.build(2)?);
        }
    }
    Ok(opts)
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Report, CliError> {
    let report = verify::run(&verify_options(cfg)?)?;
    let body = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut out = String::from("property,pass,metric,bound\n");
            for p in &report.properties {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    p.name,
                    p.pass,
                    full(p.metric),
                    full(p.bound)
                );
            }
            out
        }
    };
    let failures = report.failures();
    let failure = (!failures.is_empty()).then(|| {
        CliError::new(
            EXIT_PROPERTY,
            "property-failure",
            format!("failed: {}", failures.join(",")),
        )
    });
    Ok(Report { body, failure })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{SetupSpec, SweepSpec};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn mz(delta: f64, theta: f64) -> RunConfig {
        RunConfig {
            setup: Some(SetupSpec::MachZehnder {
                delta,
                visibility: 1.0,
                theta,
                probe: None,
            }),
            ..RunConfig::default()
        }
    }

    #[test]
    fn weakvalue_text() {
        assert_eq!(
            cmd_weakvalue(&mz(FRAC_PI_2, 0.0)).unwrap(),
            "re=0.5 im=0.5 p=0.5\n"
        );
    }

    #[test]
    fn weakvalue_eigenstate_has_zero_imaginary_part() {
        let out = cmd_weakvalue(&mz(0.0, 0.0)).unwrap();
        assert!(out.contains("im=0 "), "{out}");
    }

    #[test]
    fn weakvalue_dark_port_is_exit_two() {
        let err = cmd_weakvalue(&mz(PI, 0.0)).unwrap_err();
        assert_eq!(err.code, EXIT_SELECTION);
        assert!(
            err.to_string().contains("orthogonal selection: overlap"),
            "{err}"
        );
        assert!(!err.to_string().contains('\n'));
    }

    #[test]
    fn montecarlo_dark_port_is_exit_three() {
        let mut cfg = mz(PI, 0.0);
        cfg.monte_carlo = Some(crate::config::MonteCarloSpec {
            shots: 1,
            observable: None,
        });
        assert_eq!(cmd_montecarlo(&cfg).unwrap_err().code, EXIT_STATISTICS);
    }

    #[test]
    fn sig12_formatting() {
        assert_eq!(sig12(0.5), "0.5");
        assert_eq!(sig12(-0.0), "0");
        assert_eq!(sig12(0.1 + 0.2), "0.3");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
    }

    #[test]
    fn sweep_three_rows() {
        let cfg = RunConfig {
            sweep: Some(SweepSpec {
                deltas: Some(vec![0.0, FRAC_PI_2, PI - 0.2]),
                range: None,
                visibility: 1.0,
                theta_grid: None,
                probe: None,
            }),
            ..RunConfig::default()
        };
        let out = cmd_sweep(&cfg).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], SWEEP_HEADER);
        assert!(!out.contains('\r'));
        let analytic: Vec<f64> = lines[1..]
            .iter()
            .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
            .collect();
        let oracle = [0.0, 0.5, 0.5 * ((PI - 0.2) / 2.0).tan()];
        for (a, b) in analytic.iter().zip(oracle) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn flowfield_rejects_qutrit_probe() {
        let z3 = vec![
            vec![[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
            vec![[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
            vec![[0.0, 0.0], [0.0, 0.0], [-1.0, 0.0]],
        ];
        let cfg = RunConfig {
            setup: Some(SetupSpec::Explicit {
                pre: crate::config::StateSpec::Ket(vec![[1.0, 0.0], [0.0, 0.0]]),
                post: crate::config::StateSpec::Ket(vec![[1.0, 0.0], [0.0, 0.0]]),
                a: vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[0.0, 0.0], [0.0, 0.0]]],
                k: z3,
                theta: 0.0,
                probe: None,
            }),
            ..RunConfig::default()
        };
        assert_eq!(cmd_flowfield(&cfg).unwrap_err().code, EXIT_IO);
    }

    #[test]
    fn flowfield_origin_and_equator() {
        let out = cmd_flowfield(&mz(FRAC_PI_2, 0.0)).unwrap();
        let rows: Vec<Vec<f64>> = out
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
            .collect();
        let origin = rows.iter().find(|r| r[..3] == [0.0, 0.0, 0.0]).unwrap();
        assert!(origin[3..6].iter().all(|v| v.abs() < 1e-15));
        let equator: Vec<&Vec<f64>> = rows.iter().filter(|r| r[2] == 0.0).collect();
        assert!(equator.len() > 4);
        for r in &equator {
            assert!((r[8] - equator[0][8]).abs() < 1e-12);
        }
    }

    #[test]
    fn overrides_in_degrees() {
        let o = Overrides {
            delta: Some(90.0),
            degrees: true,
            ..Overrides::default()
        };
        let cfg = apply_overrides(RunConfig::default(), &o).unwrap();
        assert_eq!(cmd_weakvalue(&cfg).unwrap(), "re=0.5 im=0.5 p=0.5\n");
    }
}
