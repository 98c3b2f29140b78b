//! Experiment configuration: a flat `key = value` file with `[section]`
//! headers, no nesting. Parsing is strict (unknown sections, unknown keys,
//! and malformed lines are errors carrying their line number) and
//! `to_canonical_string` re-emits a normalized form, so parse -> emit is
//! idempotent byte for byte.
//!
//! ```text
//! seed = 42
//!
//! [model]
//! id = b_family
//! b = 2
//!
//! [grid]
//! kind = circle
//! n = 1024
//! length = 1
//!
//! [initial_u]
//! kind = random_band_limited
//! kmax = 8
//! amplitude = 0.02
//!
//! [control]
//! dt = 0.001
//! t_end = 1
//! record_every = 10
//! max_steps = 10000000
//!
//! [diagnostics]
//! functionals = mass, h1_energy
//!
//! [output]
//! dir = runs/ch
//! snapshot_every = 1
//! ```
//!
//! Models with two state fields take a second generator in `[initial_v]`
//! (`[initial_rho]` is accepted as an alias and canonicalized away); the
//! second field is the density for pi-CH / modified Euler-Poisson and the
//! velocity `v = u_t` for Boussinesq.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridKind};
use crate::initial::InitialData;
use crate::invariants::Functional;
use crate::model::{ModelSpec, Nonlinearity, State};
use crate::stepper::{StepControl, StepSize};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub model: ModelSpec,
    pub grid_kind: GridKind,
    pub n: usize,
    /// Period for the circle, half-width for the line.
    pub extent: f64,
    pub initial_u: InitialData,
    pub initial_v: Option<InitialData>,
    pub control: StepControl,
    /// `None` means: use the model's default audit set.
    pub functionals: Option<Vec<String>>,
    pub output_dir: PathBuf,
    /// Write every k-th recorded snapshot to disk.
    pub snapshot_every: usize,
}

struct Entry {
    value: String,
    line: usize,
    used: std::cell::Cell<bool>,
}

struct Section {
    line: usize,
    entries: BTreeMap<String, Entry>,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

struct Raw {
    sections: BTreeMap<String, Section>,
}

impl Raw {
    fn parse(text: &str) -> Result<Raw> {
        let mut sections: BTreeMap<String, Section> = BTreeMap::new();
        sections.insert(
            String::new(),
            Section {
                line: 0,
                entries: BTreeMap::new(),
            },
        );
        let mut current = String::new();
        for (i, raw_line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = match raw_line.find('#') {
                Some(p) => &raw_line[..p],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(inner) = line.strip_prefix('[') {
                let name = inner
                    .strip_suffix(']')
                    .ok_or_else(|| err(lineno, "unterminated section header"))?
                    .trim()
                    .to_string();
                if name.is_empty() {
                    return Err(err(lineno, "empty section name"));
                }
                let canonical = if name == "initial_rho" {
                    "initial_v".to_string()
                } else {
                    name
                };
                if sections.contains_key(&canonical) && !canonical.is_empty() {
                    return Err(err(lineno, format!("duplicate section [{canonical}]")));
                }
                current = canonical.clone();
                sections.insert(
                    canonical,
                    Section {
                        line: lineno,
                        entries: BTreeMap::new(),
                    },
                );
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(lineno, format!("expected 'key = value', got '{line}'")))?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(err(lineno, "empty key"));
            }
            let section = sections.get_mut(&current).expect("current section exists");
            if section
                .entries
                .insert(
                    key.clone(),
                    Entry {
                        value,
                        line: lineno,
                        used: std::cell::Cell::new(false),
                    },
                )
                .is_some()
            {
                return Err(err(lineno, format!("duplicate key '{key}'")));
            }
        }
        Ok(Raw { sections })
    }

    fn section(&self, name: &str) -> Option<&Section> {
        self.sections.get(name)
    }

    fn require_section(&self, name: &str) -> Result<&Section> {
        self.section(name)
            .ok_or_else(|| err(0, format!("missing required section [{name}]")))
    }

    fn get<'a>(&'a self, section: &str, key: &str) -> Option<(&'a str, usize)> {
        self.sections.get(section).and_then(|s| {
            s.entries.get(key).map(|e| {
                e.used.set(true);
                (e.value.as_str(), e.line)
            })
        })
    }

    fn require<'a>(&'a self, section: &str, key: &str) -> Result<(&'a str, usize)> {
        let s = self.require_section(section)?;
        self.get(section, key).ok_or_else(|| {
            err(
                s.line,
                format!("missing required key '{key}' in [{section}]"),
            )
        })
    }

    fn get_f64(&self, section: &str, key: &str) -> Result<Option<f64>> {
        match self.get(section, key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| err(line, format!("'{key}' must be a number, got '{v}'"))),
        }
    }

    fn require_f64(&self, section: &str, key: &str) -> Result<f64> {
        let (v, line) = self.require(section, key)?;
        v.parse::<f64>()
            .map_err(|_| err(line, format!("'{key}' must be a number, got '{v}'")))
    }

    fn get_usize(&self, section: &str, key: &str) -> Result<Option<usize>> {
        match self.get(section, key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| err(line, format!("'{key}' must be a non-negative integer, got '{v}'"))),
        }
    }

    fn check_all_used(&self, known_sections: &[&str]) -> Result<()> {
        for (name, section) in &self.sections {
            if !name.is_empty() && !known_sections.contains(&name.as_str()) {
                return Err(err(section.line, format!("unknown section [{name}]")));
            }
            for (key, entry) in &section.entries {
                if !entry.used.get() {
                    let place = if name.is_empty() {
                        "top level".to_string()
                    } else {
                        format!("[{name}]")
                    };
                    return Err(err(entry.line, format!("unknown key '{key}' in {place}")));
                }
            }
        }
        Ok(())
    }
}

fn parse_initial(raw: &Raw, section: &str) -> Result<InitialData> {
    let (kind, line) = raw.require(section, "kind")?;
    let data = match kind {
        "zero" => InitialData::Zero,
        "constant" => InitialData::Constant {
            value: raw.require_f64(section, "value")?,
        },
        "fourier_mode" => InitialData::FourierMode {
            k: raw
                .get_usize(section, "k")?
                .ok_or_else(|| err(line, "fourier_mode needs 'k'"))?,
            amplitude: raw.require_f64(section, "amplitude")?,
            phase: raw.get_f64(section, "phase")?.unwrap_or(0.0),
        },
        "gaussian" => InitialData::Gaussian {
            amplitude: raw.require_f64(section, "amplitude")?,
            center: raw.get_f64(section, "center")?.unwrap_or(0.0),
            width: raw.get_f64(section, "width")?.unwrap_or(1.0),
        },
        "smoothed_peakon" => InitialData::SmoothedPeakon {
            c: raw.require_f64(section, "c")?,
            x0: raw.get_f64(section, "x0")?.unwrap_or(0.0),
            delta: raw.get_f64(section, "delta")?.unwrap_or(0.0),
        },
        "bump_vanishing_on" => InitialData::BumpVanishingOn {
            a: raw.require_f64(section, "a")?,
            b: raw.require_f64(section, "b")?,
            amplitude: raw.get_f64(section, "amplitude")?.unwrap_or(1.0),
        },
        "random_band_limited" => InitialData::RandomBandLimited {
            kmax: raw
                .get_usize(section, "kmax")?
                .ok_or_else(|| err(line, "random_band_limited needs 'kmax'"))?,
            amplitude: raw.get_f64(section, "amplitude")?.unwrap_or(1.0),
        },
        other => return Err(err(line, format!("unknown initial-data kind '{other}'"))),
    };
    Ok(data)
}

fn emit_initial(out: &mut String, section: &str, data: &InitialData) {
    let _ = writeln!(out, "[{section}]");
    let _ = writeln!(out, "kind = {}", data.kind_name());
    match data {
        InitialData::Zero => {}
        InitialData::Constant { value } => {
            let _ = writeln!(out, "value = {value}");
        }
        InitialData::FourierMode { k, amplitude, phase } => {
            let _ = writeln!(out, "k = {k}");
            let _ = writeln!(out, "amplitude = {amplitude}");
            let _ = writeln!(out, "phase = {phase}");
        }
        InitialData::Gaussian {
            amplitude,
            center,
            width,
        } => {
            let _ = writeln!(out, "amplitude = {amplitude}");
            let _ = writeln!(out, "center = {center}");
            let _ = writeln!(out, "width = {width}");
        }
        InitialData::SmoothedPeakon { c, x0, delta } => {
            let _ = writeln!(out, "c = {c}");
            let _ = writeln!(out, "x0 = {x0}");
            let _ = writeln!(out, "delta = {delta}");
        }
        InitialData::BumpVanishingOn { a, b, amplitude } => {
            let _ = writeln!(out, "a = {a}");
            let _ = writeln!(out, "b = {b}");
            let _ = writeln!(out, "amplitude = {amplitude}");
        }
        InitialData::RandomBandLimited { kmax, amplitude } => {
            let _ = writeln!(out, "kmax = {kmax}");
            let _ = writeln!(out, "amplitude = {amplitude}");
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let raw = Raw::parse(text)?;

        let seed = match raw.get("", "seed") {
            None => 0,
            Some((v, line)) => v
                .parse::<u64>()
                .map_err(|_| err(line, format!("'seed' must be a non-negative integer, got '{v}'")))?,
        };

        let (id, id_line) = raw.require("model", "id")?;
        let model = match id {
            "b_family" => ModelSpec::BFamily {
                b: raw.require_f64("model", "b")?,
            },
            "fornberg_whitham" => ModelSpec::FornbergWhitham,
            "potential_ch" => ModelSpec::PotentialCh,
            "pi_ch" => ModelSpec::PiCh,
            "boussinesq" => {
                let f = match raw.get("model", "f") {
                    None => Nonlinearity::Square,
                    Some((name, line)) => Nonlinearity::from_name(name)
                        .ok_or_else(|| err(line, format!("unknown nonlinearity '{name}'")))?,
                };
                ModelSpec::Boussinesq { f }
            }
            "modified_euler_poisson" => ModelSpec::ModifiedEulerPoisson,
            other => return Err(err(id_line, format!("unknown model id '{other}'"))),
        };

        let (kind_str, kind_line) = raw.require("grid", "kind")?;
        let grid_kind = match kind_str {
            "circle" => GridKind::PeriodicCircle,
            "line" => GridKind::TruncatedLine,
            other => return Err(err(kind_line, format!("grid kind must be 'circle' or 'line', got '{other}'"))),
        };
        let grid_section = raw.require_section("grid")?;
        let n = raw
            .get_usize("grid", "n")?
            .ok_or_else(|| err(grid_section.line, "missing required key 'n' in [grid]"))?;
        let extent = match grid_kind {
            GridKind::PeriodicCircle => raw.get_f64("grid", "length")?.unwrap_or(1.0),
            GridKind::TruncatedLine => raw.require_f64("grid", "halfwidth")?,
        };

        let initial_u = parse_initial(&raw, "initial_u")?;
        let initial_v = if raw.section("initial_v").is_some() {
            Some(parse_initial(&raw, "initial_v")?)
        } else {
            None
        };
        match (model.arity(), &initial_v) {
            (2, None) => {
                return Err(err(
                    0,
                    format!(
                        "model '{}' has two fields; add an [initial_v] section",
                        model.name()
                    ),
                ))
            }
            (1, Some(_)) => {
                return Err(err(
                    raw.section("initial_v").unwrap().line,
                    format!("model '{}' has one field; remove [initial_v]", model.name()),
                ))
            }
            _ => {}
        }

        let control_section = raw.require_section("control")?;
        let dt = raw.get_f64("control", "dt")?;
        let cfl = raw.get_f64("control", "cfl_safety")?;
        let step = match (dt, cfl) {
            (Some(dt), None) => StepSize::Fixed(dt),
            (None, Some(c)) => StepSize::CflAdaptive(c),
            (Some(_), Some(_)) => {
                return Err(err(
                    control_section.line,
                    "set exactly one of 'dt' and 'cfl_safety', not both",
                ))
            }
            (None, None) => {
                return Err(err(
                    control_section.line,
                    "set exactly one of 'dt' and 'cfl_safety'",
                ))
            }
        };
        let control = StepControl {
            step,
            t_end: raw.require_f64("control", "t_end")?,
            record_every: raw.get_usize("control", "record_every")?.unwrap_or(1),
            max_steps: raw.get_usize("control", "max_steps")?.unwrap_or(10_000_000),
        };
        control
            .validate()
            .map_err(|e| err(control_section.line, e.to_string()))?;

        let functionals = match raw.get("diagnostics", "functionals") {
            None => None,
            Some((list, line)) => {
                let names: Vec<String> = list
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                for name in &names {
                    Functional::from_name(name, &model).map_err(|e| err(line, e.to_string()))?;
                }
                Some(names)
            }
        };

        let output_dir = PathBuf::from(
            raw.get("output", "dir")
                .map(|(v, _)| v.to_string())
                .unwrap_or_else(|| "out".to_string()),
        );
        let snapshot_every = raw.get_usize("output", "snapshot_every")?.unwrap_or(1);
        if snapshot_every == 0 {
            return Err(err(0, "snapshot_every must be >= 1"));
        }

        raw.check_all_used(&[
            "model",
            "grid",
            "initial_u",
            "initial_v",
            "control",
            "diagnostics",
            "output",
        ])?;

        Ok(ExperimentConfig {
            seed,
            model,
            grid_kind,
            n,
            extent,
            initial_u,
            initial_v,
            control,
            functionals,
            output_dir,
            snapshot_every,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Normalized emission; `parse` then `to_canonical_string` is
    /// idempotent.
    pub fn to_canonical_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out);
        let _ = writeln!(out, "[model]");
        let _ = writeln!(out, "id = {}", self.model.name());
        match &self.model {
            ModelSpec::BFamily { b } => {
                let _ = writeln!(out, "b = {b}");
            }
            ModelSpec::Boussinesq { f } => {
                let _ = writeln!(out, "f = {}", f.name());
            }
            _ => {}
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "[grid]");
        match self.grid_kind {
            GridKind::PeriodicCircle => {
                let _ = writeln!(out, "kind = circle");
                let _ = writeln!(out, "n = {}", self.n);
                let _ = writeln!(out, "length = {}", self.extent);
            }
            GridKind::TruncatedLine => {
                let _ = writeln!(out, "kind = line");
                let _ = writeln!(out, "n = {}", self.n);
                let _ = writeln!(out, "halfwidth = {}", self.extent);
            }
        }
        let _ = writeln!(out);
        emit_initial(&mut out, "initial_u", &self.initial_u);
        if let Some(v) = &self.initial_v {
            let _ = writeln!(out);
            emit_initial(&mut out, "initial_v", v);
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "[control]");
        match self.control.step {
            StepSize::Fixed(dt) => {
                let _ = writeln!(out, "dt = {dt}");
            }
            StepSize::CflAdaptive(c) => {
                let _ = writeln!(out, "cfl_safety = {c}");
            }
        }
        let _ = writeln!(out, "t_end = {}", self.control.t_end);
        let _ = writeln!(out, "record_every = {}", self.control.record_every);
        let _ = writeln!(out, "max_steps = {}", self.control.max_steps);
        if let Some(fs) = &self.functionals {
            let _ = writeln!(out);
            let _ = writeln!(out, "[diagnostics]");
            let _ = writeln!(out, "functionals = {}", fs.join(", "));
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "[output]");
        let _ = writeln!(out, "dir = {}", self.output_dir.display());
        let _ = writeln!(out, "snapshot_every = {}", self.snapshot_every);
        out
    }

    pub fn build_grid(&self) -> Result<Arc<Grid>> {
        Grid::new(self.grid_kind, self.n, self.extent)
    }

    /// Generate the initial state. The second field draws from a shifted
    /// seed so the two generators are independent streams.
    pub fn build_initial_state(&self, grid: &Arc<Grid>) -> Result<State> {
        let u = self.initial_u.generate(grid, self.seed)?;
        let fields = match &self.initial_v {
            None => vec![u],
            Some(v) => vec![u, v.generate(grid, self.seed.wrapping_add(1))?],
        };
        State::new(fields, 0.0)
    }

    /// Functionals to audit: the configured list, or the model defaults.
    pub fn resolved_functionals(&self) -> Result<Vec<Functional>> {
        match &self.functionals {
            None => Ok(crate::invariants::default_functionals(&self.model)),
            Some(names) => names
                .iter()
                .map(|n| Functional::from_name(n, &self.model))
                .collect(),
        }
    }

    pub fn initial_data_for(&self, field: usize) -> Option<&InitialData> {
        match field {
            0 => Some(&self.initial_u),
            1 => self.initial_v.as_ref(),
            _ => None,
        }
    }
}
