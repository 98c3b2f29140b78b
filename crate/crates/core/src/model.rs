//! The six concrete models, written as first-order evolution equations
//! `u_t = F([u])` whose nonlocal terms go through the inverse Helmholtz
//! operator:
//!
//! * b-family:          `u_t = -u u_x - dx Hinv( b/2 u^2 + (3-b)/2 u_x^2 )`
//! * Fornberg-Whitham:  `u_t = -(3/2) u u_x + dx Hinv( u )`
//! * potential CH:      `u_t = (1/2) u_x^2 + Hinv( u_x^2 + (1/2) u_xx^2 )`
//! * pi-CH system:      `u_t = -u u_x - dx Hinv( u^2 + u_x^2/2 + p^2/2 )`,
//!                      `rho_t = -u rho_x - p u_x`, with `p = rho - mean(rho)`
//! * Boussinesq:        `u_t = v`, `v_t = Hinv( f(u) ) - f(u)`
//! * mod. Euler-Poisson: `rho_t = -(u rho)_x`, `u_t = -u u_x - dx Hinv( rho )`
//!
//! where `Hinv = (1 - d^2/dx^2)^{-1}` and `dx Hinv` is the fused form.
//! Quadratic products are evaluated pointwise and passed through the
//! 2/3-rule filter. Every right-hand side maps the zero state to zero.
//!
//! Notes on structure the tests rely on:
//! * the pi-CH `rho` equation has identically vanishing spatial mean (the
//!   `u rho_x` and `rho u_x` contributions cancel mode by mode and
//!   `mean(rho) u_x` has zero mean), so the mean of `rho` is a constant of
//!   motion without any explicit projection;
//! * with `rho` constant the pi-CH `u` equation reduces to the b-family
//!   right-hand side at `b = 2` through the same arithmetic;
//! * the Boussinesq `v` equation uses the minus-sign form
//!   `Hinv(f(u)) - f(u) = d^2/dx^2 Hinv(f(u))`, the one that follows from
//!   `(1 - d^2/dx^2) v_t = d^2/dx^2 f(u)` and keeps the Hamiltonian
//!   constant; the plus-sign variant is demonstrably not conservative.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::spectral::{dealias, dealiased_product, deriv, dx_helmholtz_inverse, helmholtz_inverse};

/// Nonlinearity of the Boussinesq system: a named smooth function with
/// `f(0) = 0`. `Square` (the default) and `Quartic` are non-negative and
/// vanish only at zero; `Identity` is signed and exists for linear tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nonlinearity {
    Square,
    Quartic,
    Identity,
}

impl Nonlinearity {
    pub fn apply(self, u: f64) -> f64 {
        match self {
            Nonlinearity::Square => u * u,
            Nonlinearity::Quartic => (u * u) * (u * u),
            Nonlinearity::Identity => u,
        }
    }

    /// `P(u) = integral of f from 0 to u`, used by the Hamiltonian.
    pub fn antiderivative(self, u: f64) -> f64 {
        match self {
            Nonlinearity::Square => u * u * u / 3.0,
            Nonlinearity::Quartic => u * u * u * u * u / 5.0,
            Nonlinearity::Identity => u * u / 2.0,
        }
    }

    fn is_nonlinear(self) -> bool {
        !matches!(self, Nonlinearity::Identity)
    }

    pub fn name(self) -> &'static str {
        match self {
            Nonlinearity::Square => "square",
            Nonlinearity::Quartic => "quartic",
            Nonlinearity::Identity => "identity",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "square" => Some(Nonlinearity::Square),
            "quartic" => Some(Nonlinearity::Quartic),
            "identity" => Some(Nonlinearity::Identity),
            _ => None,
        }
    }
}

/// Which equation to solve, together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    /// One-parameter b-family; `b = 2` is Camassa-Holm, `b = 3` is
    /// Degasperis-Procesi.
    BFamily { b: f64 },
    FornbergWhitham,
    PotentialCh,
    /// Two-component system coupling `u` with a density `rho` through the
    /// mean-free projection `p = rho - mean(rho)`. Circle only.
    PiCh,
    Boussinesq { f: Nonlinearity },
    ModifiedEulerPoisson,
}

impl ModelSpec {
    pub fn camassa_holm() -> Self {
        ModelSpec::BFamily { b: 2.0 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::BFamily { .. } => "b_family",
            ModelSpec::FornbergWhitham => "fornberg_whitham",
            ModelSpec::PotentialCh => "potential_ch",
            ModelSpec::PiCh => "pi_ch",
            ModelSpec::Boussinesq { .. } => "boussinesq",
            ModelSpec::ModifiedEulerPoisson => "modified_euler_poisson",
        }
    }

    /// Number of fields in a state of this model.
    pub fn arity(&self) -> usize {
        match self {
            ModelSpec::BFamily { .. } | ModelSpec::FornbergWhitham | ModelSpec::PotentialCh => 1,
            ModelSpec::PiCh | ModelSpec::Boussinesq { .. } | ModelSpec::ModifiedEulerPoisson => 2,
        }
    }

    pub fn field_names(&self) -> &'static [&'static str] {
        match self {
            ModelSpec::BFamily { .. } | ModelSpec::FornbergWhitham | ModelSpec::PotentialCh => {
                &["u"]
            }
            ModelSpec::PiCh | ModelSpec::ModifiedEulerPoisson => &["u", "rho"],
            ModelSpec::Boussinesq { .. } => &["u", "v"],
        }
    }

    /// Hard errors for unusable (model, grid) combinations, plus a list of
    /// warnings for legal but dubious ones.
    pub fn validate(&self, grid: &Grid) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        match self {
            ModelSpec::BFamily { b } => {
                if !b.is_finite() {
                    return Err(Error::Experiment(format!("b must be finite, got {b}")));
                }
                if !(0.0..=3.0).contains(b) {
                    warnings.push(format!(
                        "b = {b} is outside [0, 3]; the structural results cover b in [0, 3]"
                    ));
                }
            }
            ModelSpec::PiCh => {
                if !grid.is_circle() {
                    return Err(Error::RequiresCircle {
                        what: "the pi-Camassa-Holm system",
                    });
                }
            }
            ModelSpec::PotentialCh => {
                if grid.is_circle() {
                    warnings.push(
                        "potential Camassa-Holm on the circle is experimental; \
                         its conservation argument assumes decay on the line"
                            .to_string(),
                    );
                }
            }
            _ => {}
        }
        Ok(warnings)
    }

    /// Time derivative of a state under this model.
    pub fn rhs(&self, s: &State) -> Result<State> {
        match self {
            ModelSpec::BFamily { b } => rhs_b_family(s, *b),
            ModelSpec::FornbergWhitham => rhs_fornberg_whitham(s),
            ModelSpec::PotentialCh => rhs_potential_ch(s),
            ModelSpec::PiCh => rhs_pi_ch(s),
            ModelSpec::Boussinesq { f } => rhs_boussinesq(s, *f),
            ModelSpec::ModifiedEulerPoisson => rhs_mep(s),
        }
    }
}

/// Model state: one or two fields on a shared grid plus the current time.
#[derive(Debug, Clone)]
pub struct State {
    fields: Vec<Field>,
    t: f64,
}

impl State {
    pub fn new(fields: Vec<Field>, t: f64) -> Result<Self> {
        if fields.is_empty() || fields.len() > 2 {
            return Err(Error::ArityMismatch {
                model: "state",
                expected: 1,
                got: fields.len(),
            });
        }
        if !t.is_finite() {
            return Err(Error::NonFinite { index: 0, value: t });
        }
        if fields.len() == 2 && !fields[0].same_grid(&fields[1]) {
            return Err(Error::GridMismatch);
        }
        Ok(State { fields, t })
    }

    pub fn scalar(u: Field, t: f64) -> Self {
        State { fields: vec![u], t }
    }

    pub fn pair(u: Field, second: Field, t: f64) -> Result<Self> {
        State::new(vec![u, second], t)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn field(&self, i: usize) -> &Field {
        &self.fields[i]
    }

    pub fn arity(&self) -> usize {
        self.fields.len()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.fields[0].grid()
    }

    pub fn max_abs(&self) -> f64 {
        self.fields.iter().fold(0.0, |m, f| m.max(f.max_abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.fields.iter().all(Field::is_finite)
    }

    /// `self + a * k` with the given time stamp; used by the RK stages.
    pub(crate) fn axpy(&self, a: f64, k: &State, t: f64) -> State {
        debug_assert_eq!(self.fields.len(), k.fields.len());
        let fields = self
            .fields
            .iter()
            .zip(&k.fields)
            .map(|(f, g)| f.axpy(a, g))
            .collect();
        State { fields, t }
    }

    pub(crate) fn derivative(fields: Vec<Field>, t: f64) -> State {
        State { fields, t }
    }
}

fn expect_arity(s: &State, model: &'static str, expected: usize) -> Result<()> {
    if s.arity() != expected {
        return Err(Error::ArityMismatch {
            model,
            expected,
            got: s.arity(),
        });
    }
    Ok(())
}

/// `-u u_x - dx Hinv(q)` assembled from a precomputed advection product and
/// quadratic source; shared by the b-family and pi-CH u-equations so that
/// the constant-density reduction of pi-CH reproduces b = 2 bit for bit.
fn transport_rhs(adv: &Field, q: &Field) -> Field {
    let nl = dx_helmholtz_inverse(&dealias(q));
    let values = adv
        .values()
        .iter()
        .zip(nl.values())
        .map(|(a, n)| -a - n)
        .collect();
    Field::from_values_unchecked(adv.grid().clone(), values)
}

pub fn rhs_b_family(s: &State, b: f64) -> Result<State> {
    expect_arity(s, "b_family", 1)?;
    if !b.is_finite() {
        return Err(Error::Experiment(format!("b must be finite, got {b}")));
    }
    let u = s.field(0);
    let ux = deriv(u);
    let adv = dealiased_product(u, &ux);
    let cu = 0.5 * b;
    let cx = 0.5 * (3.0 - b);
    let q = Field::from_values_unchecked(
        u.grid().clone(),
        u.values()
            .iter()
            .zip(ux.values())
            .map(|(u, ux)| cu * (u * u) + cx * (ux * ux))
            .collect(),
    );
    Ok(State::derivative(vec![transport_rhs(&adv, &q)], s.t))
}

pub fn rhs_fornberg_whitham(s: &State) -> Result<State> {
    expect_arity(s, "fornberg_whitham", 1)?;
    let u = s.field(0);
    let ux = deriv(u);
    let adv = dealiased_product(u, &ux);
    let nl = dx_helmholtz_inverse(u);
    let values = adv
        .values()
        .iter()
        .zip(nl.values())
        .map(|(a, n)| -1.5 * a + n)
        .collect();
    let du = Field::from_values_unchecked(u.grid().clone(), values);
    Ok(State::derivative(vec![du], s.t))
}

pub fn rhs_potential_ch(s: &State) -> Result<State> {
    expect_arity(s, "potential_ch", 1)?;
    let u = s.field(0);
    let ux = deriv(u);
    let uxx = deriv(&ux);
    let ux2 = dealias(&ux.product(&ux));
    let uxx2 = dealias(&uxx.product(&uxx));
    let lam = helmholtz_inverse(&ux2.axpy(0.5, &uxx2));
    let values = ux2
        .values()
        .iter()
        .zip(lam.values())
        .map(|(d, l)| 0.5 * d + l)
        .collect();
    let du = Field::from_values_unchecked(u.grid().clone(), values);
    Ok(State::derivative(vec![du], s.t))
}

pub fn rhs_pi_ch(s: &State) -> Result<State> {
    expect_arity(s, "pi_ch", 2)?;
    if !s.grid().is_circle() {
        return Err(Error::RequiresCircle {
            what: "the pi-Camassa-Holm system",
        });
    }
    let u = s.field(0);
    let rho = s.field(1);
    let rho_mean = rho.mean();
    let p = rho.map(|r| r - rho_mean);

    let ux = deriv(u);
    let adv = dealiased_product(u, &ux);
    let q = Field::from_values_unchecked(
        u.grid().clone(),
        u.values()
            .iter()
            .zip(ux.values())
            .zip(p.values())
            .map(|((u, ux), p)| (u * u) + 0.5 * (ux * ux) + 0.5 * (p * p))
            .collect(),
    );
    let du = transport_rhs(&adv, &q);

    // rho_t = -u rho_x - p u_x. Its spatial mean vanishes identically
    // (mode-paired cancellation plus mean(u_x) = 0), so mean(rho) is a
    // constant of motion.
    let rhox = deriv(rho);
    let a1 = dealiased_product(u, &rhox);
    let a2 = dealiased_product(&p, &ux);
    let drho = Field::from_values_unchecked(
        u.grid().clone(),
        a1.values()
            .iter()
            .zip(a2.values())
            .map(|(x, y)| -x - y)
            .collect(),
    );
    Ok(State::derivative(vec![du, drho], s.t))
}

pub fn rhs_boussinesq(s: &State, f: Nonlinearity) -> Result<State> {
    expect_arity(s, "boussinesq", 2)?;
    let u = s.field(0);
    let v = s.field(1);
    let fu = u.map(|x| f.apply(x));
    let fu = if f.is_nonlinear() { dealias(&fu) } else { fu };
    let lam = helmholtz_inverse(&fu);
    let dv = Field::from_values_unchecked(
        u.grid().clone(),
        lam.values()
            .iter()
            .zip(fu.values())
            .map(|(l, f)| l - f)
            .collect(),
    );
    Ok(State::derivative(vec![v.clone(), dv], s.t))
}

pub fn rhs_mep(s: &State) -> Result<State> {
    expect_arity(s, "modified_euler_poisson", 2)?;
    let u = s.field(0);
    let rho = s.field(1);
    let ux = deriv(u);
    let adv = dealiased_product(u, &ux);
    let nl = dx_helmholtz_inverse(rho);
    let du = Field::from_values_unchecked(
        u.grid().clone(),
        adv.values()
            .iter()
            .zip(nl.values())
            .map(|(a, n)| -a - n)
            .collect(),
    );
    let drho = deriv(&dealiased_product(u, rho)).scale(-1.0);
    Ok(State::derivative(vec![du, drho], s.t))
}
