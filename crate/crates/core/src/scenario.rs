//! Scenario files: `key = value` lines, `#` starts a comment.
//!
//! ```text
//! dim = 1
//! extents = 256
//! lengths = 6.283185307179586
//! periodic = true
//! nu = 0.1
//! initial = sine
//! reaction = zero
//! window = 0.05
//! horizon = 1
//! output = out/sine
//! ```
//!
//! Vector-valued keys (`extents`, `lengths`, `origin`, `periodic`) take one
//! whitespace-separated entry per axis, or a single entry used for every axis.
//! Relative file paths resolve against the scenario file's directory.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use crate::calculus::gradient;
use crate::cole_hopf::{pressure_difference, FluidParams};
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::mapping::{MappingConfig, ReactionMode, ReactionSchedule};
use crate::snapshot::Snapshot;

const KEYS: &[&str] = &[
    "dim",
    "extents",
    "lengths",
    "origin",
    "periodic",
    "nu",
    "mu",
    "rho",
    "initial",
    "amplitude",
    "reaction",
    "gamma",
    "pressure_file",
    "reference_pressure",
    "re0",
    "t0",
    "window",
    "substeps",
    "fp_tolerance",
    "fp_max_iters",
    "horizon",
    "output",
    "sample_every",
];

/// Sharpness of the `gaussian-bump` preset.
const BUMP_CONCENTRATION: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialVelocity {
    Zero,
    /// `v_k = amplitude * sin(2 pi (x_k - origin_k) / L_k)`.
    Sine,
    /// Gradient of a smooth periodic bump centred in the domain.
    GaussianBump,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReactionSpec {
    Zero,
    Uniform { gamma: f64 },
    Pressure { file: PathBuf, reference: f64 },
    SelfConsistent,
    Reynolds { re0: f64, t0: f64 },
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub path: PathBuf,
    /// The file as read, echoed into run manifests.
    pub source: String,
    pub grid: Grid,
    pub params: FluidParams,
    pub initial: InitialVelocity,
    pub amplitude: f64,
    pub reaction: ReactionSpec,
    pub window: f64,
    pub substeps: usize,
    pub fp_tolerance: f64,
    pub fp_max_iters: usize,
    pub horizon: f64,
    pub output: Option<PathBuf>,
    pub sample_every: usize,
}

struct Entries<'a> {
    path: &'a Path,
    map: BTreeMap<&'a str, (usize, &'a str)>,
}

impl<'a> Entries<'a> {
    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Config { path: self.path.display().to_string(), line, message: message.into() }
    }

    fn raw(&self, key: &str) -> Option<(usize, &'a str)> {
        self.map.get(key).copied()
    }

    fn line(&self, key: &str) -> usize {
        self.raw(key).map_or(0, |(l, _)| l)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| self.err(line, format!("`{key}`: cannot parse {v:?}: {e}"))),
        }
    }

    fn required<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.parse(key)?.ok_or_else(|| self.err(0, format!("missing required key `{key}`")))
    }

    fn list<T: std::str::FromStr + Clone>(&self, key: &str, dim: usize) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        let Some((line, v)) = self.raw(key) else { return Ok(None) };
        let items = v
            .split_whitespace()
            .map(|t| t.parse::<T>().map_err(|e| self.err(line, format!("`{key}`: cannot parse {t:?}: {e}"))))
            .collect::<Result<Vec<T>>>()?;
        match items.len() {
            1 => Ok(Some(vec![items[0].clone(); dim])),
            n if n == dim => Ok(Some(items)),
            n => Err(self.err(line, format!("`{key}` has {n} entries, expected 1 or {dim}"))),
        }
    }

    fn positive(&self, key: &str, value: f64) -> Result<f64> {
        if value.is_finite() && value > 0.0 {
            Ok(value)
        } else {
            Err(self.err(self.line(key), format!("`{key}` must be positive and finite, got {value}")))
        }
    }

    fn file(&self, key: &str, value: &str) -> Result<PathBuf> {
        let base = self.path.parent().unwrap_or(Path::new("."));
        let file = base.join(value);
        if !file.is_file() {
            return Err(self.err(self.line(key), format!("`{key}`: file {} does not exist", file.display())));
        }
        Ok(file)
    }
}

impl ScenarioConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            path: path.display().to_string(),
            line: 0,
            message: format!("cannot read scenario: {e}"),
        })?;
        Self::parse(&text, path)
    }

    /// Parses scenario text; `path` is used for messages and to resolve
    /// relative file references.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut entries = Entries { path, map: BTreeMap::new() };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(entries.err(line, format!("expected `key = value`, got {content:?}")));
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(entries.err(line, format!("unknown key `{key}`")));
            }
            if value.is_empty() {
                return Err(entries.err(line, format!("`{key}` has no value")));
            }
            if let Some((first, _)) = entries.map.insert(key, (line, value)) {
                return Err(entries.err(line, format!("`{key}` already set on line {first}")));
            }
        }
        let e = &entries;

        let dim: usize = e.required("dim")?;
        if !(1..=3).contains(&dim) {
            return Err(e.err(e.line("dim"), format!("`dim` must be 1, 2 or 3, got {dim}")));
        }
        let extents: Vec<usize> =
            e.list("extents", dim)?.ok_or_else(|| e.err(0, "missing required key `extents`"))?;
        let lengths: Vec<f64> = e.list("lengths", dim)?.ok_or_else(|| e.err(0, "missing required key `lengths`"))?;
        let origin: Vec<f64> = e.list("origin", dim)?.unwrap_or_else(|| vec![0.0; dim]);
        let periodic: Vec<bool> = e.list("periodic", dim)?.unwrap_or_else(|| vec![true; dim]);
        for &l in &lengths {
            e.positive("lengths", l)?;
        }
        let spacing = extents
            .iter()
            .zip(&lengths)
            .zip(&periodic)
            .map(|((&n, &l), &p)| if p { l / n as f64 } else { l / (n.max(2) - 1) as f64 })
            .collect();
        let grid = Grid::new(extents, spacing, origin, periodic)
            .map_err(|err| e.err(e.line("extents"), err.to_string()))?;

        let nu: Option<f64> = e.parse("nu")?;
        let mu: Option<f64> = e.parse("mu")?;
        let rho: Option<f64> = e.parse("rho")?;
        let params = match (nu, mu, rho) {
            (Some(nu), None, None) => FluidParams::kinematic(e.positive("nu", nu)?),
            (nu, Some(mu), Some(rho)) => FluidParams::new(nu.unwrap_or(mu / rho), mu, rho),
            (Some(nu), Some(mu), None) => FluidParams::new(nu, mu, mu / nu),
            (Some(nu), None, Some(rho)) => FluidParams::new(nu, nu * rho, rho),
            _ => return Err(e.err(0, "set `nu`, or `mu` and `rho`")),
        }
        .map_err(|err| e.err(e.line("nu").max(e.line("mu")), err.to_string()))?;

        let initial = match e.raw("initial") {
            None => InitialVelocity::Zero,
            Some((_, "zero")) => InitialVelocity::Zero,
            Some((_, "sine")) => InitialVelocity::Sine,
            Some((_, "gaussian-bump")) => InitialVelocity::GaussianBump,
            Some((_, v)) if v.starts_with("file:") => InitialVelocity::File(e.file("initial", &v[5..])?),
            Some((line, v)) => {
                return Err(e.err(line, format!("unknown initial preset {v:?} (zero | sine | gaussian-bump | file:PATH)")))
            }
        };
        let amplitude: f64 = e.parse("amplitude")?.unwrap_or(1.0);
        if !amplitude.is_finite() {
            return Err(e.err(e.line("amplitude"), "`amplitude` must be finite"));
        }

        let reaction = match e.raw("reaction") {
            None | Some((_, "zero")) => ReactionSpec::Zero,
            Some((_, "uniform")) => ReactionSpec::Uniform { gamma: e.required("gamma")? },
            Some((_, "pressure")) => {
                let (_, file) =
                    e.raw("pressure_file").ok_or_else(|| e.err(e.line("reaction"), "pressure reaction needs `pressure_file`"))?;
                ReactionSpec::Pressure {
                    file: e.file("pressure_file", file)?,
                    reference: e.parse("reference_pressure")?.unwrap_or(0.0),
                }
            }
            Some((_, "self-consistent")) => ReactionSpec::SelfConsistent,
            Some((_, "reynolds")) => {
                let re0: f64 = e.required("re0")?;
                let t0: f64 = e.required("t0")?;
                e.positive("t0", t0)?;
                if !re0.is_finite() {
                    return Err(e.err(e.line("re0"), "`re0` must be finite"));
                }
                ReactionSpec::Reynolds { re0, t0 }
            }
            Some((line, v)) => {
                return Err(e.err(
                    line,
                    format!("unknown reaction {v:?} (zero | uniform | pressure | self-consistent | reynolds)"),
                ))
            }
        };
        if let ReactionSpec::Uniform { gamma } = reaction {
            if !gamma.is_finite() {
                return Err(e.err(e.line("gamma"), "`gamma` must be finite"));
            }
        }

        let defaults = MappingConfig::new(params, grid.clone());
        let window = e.positive("window", e.parse("window")?.unwrap_or(defaults.window))?;
        let substeps: usize = e.parse("substeps")?.unwrap_or(defaults.substeps);
        if substeps == 0 {
            return Err(e.err(e.line("substeps"), "`substeps` must be at least 1"));
        }
        let fp_tolerance = e.positive("fp_tolerance", e.parse("fp_tolerance")?.unwrap_or(defaults.fp_tolerance))?;
        let fp_max_iters: usize = e.parse("fp_max_iters")?.unwrap_or(defaults.fp_max_iters);
        if fp_max_iters == 0 {
            return Err(e.err(e.line("fp_max_iters"), "`fp_max_iters` must be at least 1"));
        }
        let horizon = e.positive("horizon", e.required("horizon")?)?;
        let output = e.raw("output").map(|(_, v)| PathBuf::from(v));
        let sample_every: usize = e.parse("sample_every")?.unwrap_or(1);

        let config = Self {
            path: path.to_path_buf(),
            source: text.to_string(),
            grid,
            params,
            initial,
            amplitude,
            reaction,
            window,
            substeps,
            fp_tolerance,
            fp_max_iters,
            horizon,
            output,
            sample_every,
        };
        // Surface file and field problems now rather than mid-run.
        config.initial_velocity().map_err(|err| e.err(e.line("initial"), err.to_string()))?;
        config.mapping_config().map_err(|err| e.err(e.line("reaction"), err.to_string()))?;
        Ok(config)
    }

    pub fn initial_velocity(&self) -> Result<VectorField> {
        let grid = &self.grid;
        let a = self.amplitude;
        let wave = |axis: usize, x: f64| 2.0 * PI * (x - grid.origin()[axis]) / grid.axis_length(axis);
        match &self.initial {
            InitialVelocity::Zero => Ok(VectorField::zeros(grid)),
            InitialVelocity::Sine => Ok(VectorField::from_fn(grid, |x, v| {
                for (axis, out) in v.iter_mut().enumerate() {
                    *out = a * wave(axis, x[axis]).sin();
                }
            })),
            InitialVelocity::GaussianBump => {
                // phi = a * prod exp(k (cos(theta - pi) - 1)), peaked mid-domain. The
                // discrete gradient keeps the field curl-free to roundoff.
                let k = BUMP_CONCENTRATION;
                let phi = ScalarField::from_fn(grid, |x| {
                    a * (0..x.len()).map(|axis| (k * ((wave(axis, x[axis]) - PI).cos() - 1.0)).exp()).product::<f64>()
                });
                Ok(gradient(&phi))
            }
            InitialVelocity::File(path) => {
                let v = Snapshot::read(path)?.field.into_vector()?;
                if v.grid() != grid {
                    return Err(Error::GridMismatch);
                }
                Ok(v)
            }
        }
    }

    pub fn reaction_mode(&self) -> Result<ReactionMode> {
        Ok(match &self.reaction {
            ReactionSpec::Zero => ReactionMode::Zero,
            ReactionSpec::Uniform { gamma } => ReactionMode::Prescribed(ReactionSchedule::Uniform(*gamma)),
            ReactionSpec::Pressure { file, reference } => {
                let p: ScalarField = Snapshot::read(file)?.field.into_scalar()?;
                p.check_grid(&self.grid)?;
                ReactionMode::Prescribed(ReactionSchedule::from_pressure(&pressure_difference(&p, *reference), &self.params))
            }
            ReactionSpec::SelfConsistent => ReactionMode::SelfConsistent,
            ReactionSpec::Reynolds { re0, t0 } => ReactionMode::ReynoldsSchedule { re0: *re0, t0: *t0 },
        })
    }

    pub fn mapping_config(&self) -> Result<MappingConfig> {
        let mut cfg = MappingConfig::new(self.params, self.grid.clone());
        cfg.window = self.window;
        cfg.substeps = self.substeps;
        cfg.fp_tolerance = self.fp_tolerance;
        cfg.fp_max_iters = self.fp_max_iters;
        cfg.reaction = self.reaction_mode()?;
        cfg.snapshot_every = self.sample_every;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ScenarioConfig> {
        ScenarioConfig::parse(text, Path::new("test.cfg"))
    }

    const SINE: &str = "dim = 1\nextents = 64\nlengths = 6.283185307179586\nnu = 0.1\ninitial = sine\nhorizon = 1\n";

    #[test]
    fn minimal_sine_scenario() {
        let c = parse(SINE).unwrap();
        assert_eq!(c.grid.extents(), &[64]);
        assert!(c.grid.is_periodic(0));
        assert_eq!(c.reaction, ReactionSpec::Zero);
        let v = c.initial_velocity().unwrap();
        let x = c.grid.coordinate(0, 16);
        assert!((v.component(0).values()[16] - x.sin()).abs() < 1e-14);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = format!("{SINE}window = -1\n");
        match parse(&text) {
            Err(Error::Config { line, message, .. }) => {
                assert_eq!(line, 7);
                assert!(message.contains("window"));
            }
            other => panic!("{other:?}"),
        }
        match parse("dim = 1\nbogus = 3\n") {
            Err(Error::Config { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse(&format!("{SINE}nu = 0.2\n")) {
            Err(Error::Config { line: 7, message, .. }) => assert!(message.contains("already set")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_files_fail_at_load() {
        let text = SINE.replace("initial = sine", "initial = file:nowhere.txt");
        assert!(matches!(parse(&text), Err(Error::Config { line: 5, .. })));
    }

    #[test]
    fn reaction_modes() {
        let c = parse(&format!("{SINE}reaction = reynolds\nre0 = 50\nt0 = 0.1\n")).unwrap();
        assert_eq!(c.reaction, ReactionSpec::Reynolds { re0: 50.0, t0: 0.1 });
        assert!(parse(&format!("{SINE}reaction = uniform\n")).is_err());
        assert!(parse(&format!("{SINE}reaction = reynolds\nre0 = 50\nt0 = 0\n")).is_err());
    }

    #[test]
    fn bump_is_curl_free_and_periodic() {
        let text = "dim = 2\nextents = 32\nlengths = 1 2\nnu = 0.05\ninitial = gaussian-bump\namplitude = 0.3\nhorizon = 1\n";
        let c = parse(text).unwrap();
        let v = c.initial_velocity().unwrap();
        assert!(crate::calculus::curl_residual(&v) < 1e-12 * v.max_abs() / c.grid.min_spacing());
        assert!(crate::cole_hopf::initial_psi(&v, &c.params).is_ok());
    }

    #[test]
    fn dynamic_viscosity_must_agree() {
        assert!(parse(&SINE.replace("nu = 0.1", "mu = 0.2\nrho = 2")).is_ok());
        assert!(parse(&SINE.replace("nu = 0.1", "nu = 0.1\nmu = 0.3\nrho = 2")).is_err());
    }
}
