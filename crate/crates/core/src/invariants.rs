//! Conserved functionals and drift auditing.
//!
//! Each model carries at least one functional that is constant along its
//! solutions; integrating it along a computed trajectory and reporting the
//! maximal relative drift is the primary correctness audit of the solver.
//! Quadrature throughout is the spectral mean times the domain length,
//! which on an equispaced periodic grid coincides with the trapezoid rule
//! and is spectrally accurate for smooth data.
//!
//! The modified Euler-Poisson Hamiltonian is computed in two versions: the
//! `printed` one, `integral(rho u^2 + 2 (Hinv rho)^2)`, and a `variant`
//! with second and third terms `(Hinv rho)^2 + (dx Hinv rho)^2`. They
//! differ by which of them actually stays constant under the flow; both
//! are reported so the drift audit can decide empirically rather than
//! silently editing the functional.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::model::{ModelSpec, Nonlinearity, State};
use crate::spectral::{deriv, dx_helmholtz_inverse, helmholtz_inverse, zero_mean_antiderivative};

/// Quadrature of a field over its domain: mean times length.
pub fn integral(f: &Field) -> f64 {
    f.mean() * f.grid().length()
}

/// `integral(u)`; conserved by the b-family and Fornberg-Whitham, and by
/// the modified Euler-Poisson density.
pub fn mass(u: &Field) -> f64 {
    integral(u)
}

/// `integral(u^2 + u_x^2)`, the squared H1 norm; conserved by Camassa-Holm
/// (b = 2). Non-negative, and zero only for the zero field.
pub fn h1_energy(u: &Field) -> f64 {
    let ux = deriv(u);
    let vals: f64 = u
        .values()
        .iter()
        .zip(ux.values())
        .map(|(u, ux)| u * u + ux * ux)
        .sum();
    vals / u.len() as f64 * u.grid().length()
}

/// `integral(u_x^2 + u_xx^2)`; conserved by the potential Camassa-Holm
/// equation. Zero exactly when `u` is constant.
pub fn potential_ch_energy(u: &Field) -> f64 {
    let ux = deriv(u);
    let uxx = deriv(&ux);
    let vals: f64 = ux
        .values()
        .iter()
        .zip(uxx.values())
        .map(|(a, b)| a * a + b * b)
        .sum();
    vals / u.len() as f64 * u.grid().length()
}

/// `h1_energy(u) + integral(p^2)` with `p = rho - mean(rho)`; the product
/// energy of the pi-Camassa-Holm system. Circle only.
pub fn pich_energy(u: &Field, rho: &Field) -> Result<f64> {
    if !u.grid().is_circle() {
        return Err(Error::RequiresCircle {
            what: "the pi-Camassa-Holm product energy",
        });
    }
    if !u.same_grid(rho) {
        return Err(Error::GridMismatch);
    }
    let mean = rho.mean();
    let p2: f64 = rho.values().iter().map(|r| (r - mean) * (r - mean)).sum();
    Ok(h1_energy(u) + p2 / rho.len() as f64 * rho.grid().length())
}

/// Boussinesq Hamiltonian `1/2 integral(z^2 + z_x^2) + integral(P(u))`,
/// where `z` is the zero-mean antiderivative of `v = u_t` and `P` the
/// antiderivative of the nonlinearity. Errors when `v` has nonzero mean,
/// since `z` is then undefined on the periodic domain.
pub fn boussinesq_hamiltonian(u: &Field, v: &Field, f: Nonlinearity) -> Result<f64> {
    if !u.same_grid(v) {
        return Err(Error::GridMismatch);
    }
    let z = zero_mean_antiderivative(v, "the Boussinesq Hamiltonian")?;
    let zx = deriv(&z);
    let quad: f64 = z
        .values()
        .iter()
        .zip(zx.values())
        .map(|(z, zx)| z * z + zx * zx)
        .sum();
    let h1 = 0.5 * quad / z.len() as f64 * z.grid().length();
    let p: f64 = u.values().iter().map(|&x| f.antiderivative(x)).sum();
    Ok(h1 + p / u.len() as f64 * u.grid().length())
}

/// The modified Euler-Poisson functionals, as printed:
/// `(integral(rho u^2 + 2 (Hinv rho)^2), integral(u rho), integral(rho))`.
/// See `mep_h1_variant` for the alternative Hamiltonian that the drift
/// audit compares against.
pub fn mep_functionals(u: &Field, rho: &Field) -> (f64, f64, f64) {
    let w = helmholtz_inverse(rho);
    let n = u.len() as f64;
    let length = u.grid().length();
    let h1: f64 = rho
        .values()
        .iter()
        .zip(u.values())
        .zip(w.values())
        .map(|((r, u), w)| r * u * u + 2.0 * (w * w))
        .sum::<f64>()
        / n
        * length;
    let h2: f64 = u
        .values()
        .iter()
        .zip(rho.values())
        .map(|(u, r)| u * r)
        .sum::<f64>()
        / n
        * length;
    (h1, h2, mass(rho))
}

/// `integral(rho u^2 + (Hinv rho)^2 + (dx Hinv rho)^2)`.
pub fn mep_h1_variant(u: &Field, rho: &Field) -> f64 {
    let w = helmholtz_inverse(rho);
    let wx = dx_helmholtz_inverse(rho);
    let n = u.len() as f64;
    rho.values()
        .iter()
        .zip(u.values())
        .zip(w.values())
        .zip(wx.values())
        .map(|(((r, u), w), wx)| r * u * u + w * w + wx * wx)
        .sum::<f64>()
        / n
        * u.grid().length()
}

/// A named functional of a state, evaluable along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    /// `integral` of field 0.
    Mass,
    /// `integral` of field 1.
    RhoMass,
    H1Energy,
    PotentialChEnergy,
    PichEnergy,
    BoussinesqHamiltonian(Nonlinearity),
    MepH1Printed,
    MepH1Variant,
    MepCross,
    /// Max-norm of a field; not conserved, recorded for blow-up auditing.
    MaxAbs(usize),
}

impl Functional {
    pub fn name(&self) -> String {
        match self {
            Functional::Mass => "mass".into(),
            Functional::RhoMass => "rho_mass".into(),
            Functional::H1Energy => "h1_energy".into(),
            Functional::PotentialChEnergy => "potential_ch_energy".into(),
            Functional::PichEnergy => "pich_energy".into(),
            Functional::BoussinesqHamiltonian(_) => "boussinesq_hamiltonian".into(),
            Functional::MepH1Printed => "mep_h1_printed".into(),
            Functional::MepH1Variant => "mep_h1_variant".into(),
            Functional::MepCross => "mep_cross".into(),
            Functional::MaxAbs(i) => format!("max_abs_{i}"),
        }
    }

    fn arity(&self) -> usize {
        match self {
            Functional::Mass | Functional::H1Energy | Functional::PotentialChEnergy => 1,
            Functional::MaxAbs(i) => i + 1,
            _ => 2,
        }
    }

    /// Resolve a config-file name against a model. Rejects names whose
    /// field requirements the model cannot satisfy.
    pub fn from_name(name: &str, model: &ModelSpec) -> Result<Self> {
        let f = match name {
            "mass" => Functional::Mass,
            "rho_mass" => Functional::RhoMass,
            "h1_energy" => Functional::H1Energy,
            "potential_ch_energy" => Functional::PotentialChEnergy,
            "pich_energy" => Functional::PichEnergy,
            "boussinesq_hamiltonian" => match model {
                ModelSpec::Boussinesq { f } => Functional::BoussinesqHamiltonian(*f),
                _ => {
                    return Err(Error::UnknownFunctional {
                        name: name.into(),
                        model: model.name(),
                    })
                }
            },
            "mep_h1_printed" => Functional::MepH1Printed,
            "mep_h1_variant" => Functional::MepH1Variant,
            "mep_cross" => Functional::MepCross,
            "max_abs_0" => Functional::MaxAbs(0),
            "max_abs_1" => Functional::MaxAbs(1),
            _ => {
                return Err(Error::UnknownFunctional {
                    name: name.into(),
                    model: model.name(),
                })
            }
        };
        if f.arity() > model.arity() {
            return Err(Error::UnknownFunctional {
                name: name.into(),
                model: model.name(),
            });
        }
        Ok(f)
    }

    pub fn evaluate(&self, s: &State) -> Result<f64> {
        if self.arity() > s.arity() {
            return Err(Error::ArityMismatch {
                model: "functional",
                expected: self.arity(),
                got: s.arity(),
            });
        }
        Ok(match self {
            Functional::Mass => mass(s.field(0)),
            Functional::RhoMass => mass(s.field(1)),
            Functional::H1Energy => h1_energy(s.field(0)),
            Functional::PotentialChEnergy => potential_ch_energy(s.field(0)),
            Functional::PichEnergy => pich_energy(s.field(0), s.field(1))?,
            Functional::BoussinesqHamiltonian(f) => {
                boussinesq_hamiltonian(s.field(0), s.field(1), *f)?
            }
            Functional::MepH1Printed => mep_functionals(s.field(0), s.field(1)).0,
            Functional::MepH1Variant => mep_h1_variant(s.field(0), s.field(1)),
            Functional::MepCross => mep_functionals(s.field(0), s.field(1)).1,
            Functional::MaxAbs(i) => s.field(*i).max_abs(),
        })
    }
}

/// The audit set recorded by default for each model.
pub fn default_functionals(model: &ModelSpec) -> Vec<Functional> {
    match model {
        ModelSpec::BFamily { b } => {
            let mut fs = vec![Functional::Mass];
            if *b == 2.0 {
                fs.push(Functional::H1Energy);
            }
            fs.push(Functional::MaxAbs(0));
            fs
        }
        ModelSpec::FornbergWhitham => vec![Functional::Mass, Functional::MaxAbs(0)],
        ModelSpec::PotentialCh => vec![Functional::PotentialChEnergy, Functional::MaxAbs(0)],
        ModelSpec::PiCh => vec![Functional::PichEnergy, Functional::MaxAbs(0)],
        ModelSpec::Boussinesq { f } => {
            vec![Functional::BoussinesqHamiltonian(*f), Functional::MaxAbs(0)]
        }
        ModelSpec::ModifiedEulerPoisson => vec![
            Functional::RhoMass,
            Functional::MepCross,
            Functional::MepH1Printed,
            Functional::MepH1Variant,
            Functional::MaxAbs(0),
        ],
    }
}

/// Time-stamped functional values along a run.
#[derive(Debug, Clone)]
pub struct DiagnosticSeries {
    times: Vec<f64>,
    names: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl DiagnosticSeries {
    pub fn empty() -> Self {
        DiagnosticSeries {
            times: Vec::new(),
            names: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn new(names: Vec<String>) -> Self {
        let values = names.iter().map(|_| Vec::new()).collect();
        DiagnosticSeries {
            times: Vec::new(),
            names,
            values,
        }
    }

    pub fn push_row(&mut self, t: f64, row: &[f64]) {
        assert_eq!(row.len(), self.names.len(), "diagnostic row shape");
        self.times.push(t);
        for (col, &v) in self.values.iter_mut().zip(row) {
            col.push(v);
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i].as_slice())
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }
}

/// Per-functional maximal drift relative to `max(1, |H(0)|)`.
#[derive(Debug, Clone)]
pub struct DriftEntry {
    pub name: String,
    pub initial: f64,
    pub max_drift: f64,
}

pub fn drift_report(d: &DiagnosticSeries) -> Result<Vec<DriftEntry>> {
    if d.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(d.names
        .iter()
        .zip(&d.values)
        .map(|(name, vals)| {
            let h0 = vals[0];
            let denom = h0.abs().max(1.0);
            let max_drift = vals
                .iter()
                .map(|v| (v - h0).abs() / denom)
                .fold(0.0, f64::max);
            DriftEntry {
                name: name.clone(),
                initial: h0,
                max_drift,
            }
        })
        .collect())
}

/// Observer that evaluates a functional set on every recorded snapshot.
#[derive(Debug)]
pub struct Recorder {
    functionals: Vec<Functional>,
    series: DiagnosticSeries,
}

impl Recorder {
    pub fn new(functionals: Vec<Functional>) -> Self {
        let names = functionals.iter().map(Functional::name).collect();
        Recorder {
            functionals,
            series: DiagnosticSeries::new(names),
        }
    }

    pub fn for_model(model: &ModelSpec) -> Self {
        Recorder::new(default_functionals(model))
    }

    pub fn record(&mut self, s: &State) -> Result<()> {
        let row: Result<Vec<f64>> = self.functionals.iter().map(|f| f.evaluate(s)).collect();
        self.series.push_row(s.t(), &row?);
        Ok(())
    }

    pub fn series(&self) -> &DiagnosticSeries {
        &self.series
    }

    pub fn into_series(self) -> DiagnosticSeries {
        self.series
    }
}
