//! Trial wavefunctions as exact polynomial-exponential term sums in
//! Hylleraas coordinates (s = r1+r2, t = r2-r1, u = r12), and the analytic
//! application of the confined-helium Hamiltonian to them.
//!
//! A [`TermSum`] is sum_k coef_k * s^a * t^b * u^c * exp(-alpha*s) in
//! canonical form: terms sorted by exponent triple, duplicates merged,
//! zero coefficients dropped. Derivatives are taken symbolically, so the
//! kinetic-energy terms entering the energy integrand are exact.

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Nuclear charge of helium in atomic units.
pub const NUCLEAR_CHARGE: f64 = 2.0;

/// Confinement radius of the cavity: finite wall or the free atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Radius {
    Finite(f64),
    Infinite,
}

impl Radius {
    pub fn finite(value: f64) -> Result<Self> {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::InvalidRadius(value));
        }
        Ok(Radius::Finite(value))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Radius::Infinite)
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Radius::Finite(v) => Some(*v),
            Radius::Infinite => None,
        }
    }
}

impl PartialOrd for Radius {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        use std::cmp::Ordering::*;
        match (self, other) {
            (Radius::Finite(a), Radius::Finite(b)) => a.partial_cmp(b),
            (Radius::Finite(_), Radius::Infinite) => Some(Less),
            (Radius::Infinite, Radius::Finite(_)) => Some(Greater),
            (Radius::Infinite, Radius::Infinite) => Some(Equal),
        }
    }
}

impl fmt::Display for Radius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Radius::Finite(v) => write!(f, "{v}"),
            Radius::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Radius {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") || s == "∞" {
            return Ok(Radius::Infinite);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::InvalidInput(format!("cannot parse radius {s:?}")))?;
        Radius::finite(v)
    }
}

impl Serialize for Radius {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Radius::Finite(v) => serializer.serialize_f64(*v),
            Radius::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Radius {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct RadiusVisitor;
        impl<'de> Visitor<'de> for RadiusVisitor {
            type Value = Radius;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a positive number or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Radius, E> {
                Radius::finite(v).map_err(|e| E::custom(e.to_string()))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Radius, E> {
                self.visit_f64(v as f64)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Radius, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Radius, E> {
                v.parse().map_err(|e: Error| E::custom(e.to_string()))
            }
        }
        deserializer.deserialize_any(RadiusVisitor)
    }
}

/// A point in Hylleraas coordinates. Valid points satisfy |t| <= u <= s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HylleraasPoint {
    pub s: f64,
    pub t: f64,
    pub u: f64,
}

impl HylleraasPoint {
    pub fn new(s: f64, t: f64, u: f64) -> Result<Self> {
        if !(s.is_finite() && t.is_finite() && u.is_finite()) {
            return Err(Error::InvalidInput("non-finite Hylleraas coordinates".into()));
        }
        if t.abs() > u || u > s {
            return Err(Error::InvalidInput(format!(
                "coordinates violate |t| <= u <= s: s={s}, t={t}, u={u}"
            )));
        }
        Ok(Self { s, t, u })
    }

    /// Strictly inside the coordinate region, away from u = 0 and |t| = s.
    pub fn is_interior(&self) -> bool {
        self.u > 0.0 && self.t.abs() < self.u && self.u < self.s
    }
}

/// Differentiation variable for [`TermSum::differentiate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    S,
    T,
    U,
}

/// One monomial term coef * s^a * t^b * u^c (the exponential lives on the sum).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    pub s_pow: u32,
    pub t_pow: u32,
    pub u_pow: u32,
}

impl Term {
    pub fn new(coef: f64, s_pow: u32, t_pow: u32, u_pow: u32) -> Self {
        Self { coef, s_pow, t_pow, u_pow }
    }

    fn key(&self) -> (u32, u32, u32) {
        (self.s_pow, self.t_pow, self.u_pow)
    }
}

/// Canonical sum of monomials times exp(-alpha*s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSum {
    alpha: f64,
    terms: Vec<Term>,
}

impl TermSum {
    /// Build in canonical form: merge duplicate exponent triples, drop zeros,
    /// sort by (s_pow, t_pow, u_pow).
    pub fn new(alpha: f64, terms: impl IntoIterator<Item = Term>) -> Self {
        let mut v: Vec<Term> = terms.into_iter().collect();
        v.sort_by_key(Term::key);
        let mut merged: Vec<Term> = Vec::with_capacity(v.len());
        for t in v {
            match merged.last_mut() {
                Some(last) if last.key() == t.key() => last.coef += t.coef,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coef != 0.0);
        Self { alpha, terms: merged }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Largest (s, t, u) exponents appearing in the sum.
    pub fn max_powers(&self) -> (u32, u32, u32) {
        self.terms.iter().fold((0, 0, 0), |(a, b, c), t| {
            (a.max(t.s_pow), b.max(t.t_pow), c.max(t.u_pow))
        })
    }

    /// Evaluate sum_k coef_k s^a t^b u^c * exp(-alpha*s) at `p`.
    pub fn evaluate(&self, p: &HylleraasPoint) -> f64 {
        let poly: f64 = self
            .terms
            .iter()
            .map(|t| {
                t.coef
                    * p.s.powi(t.s_pow as i32)
                    * p.t.powi(t.t_pow as i32)
                    * p.u.powi(t.u_pow as i32)
            })
            .sum();
        poly * (-self.alpha * p.s).exp()
    }

    /// Exact partial derivative; the product rule on exp(-alpha*s) applies
    /// for [`Var::S`]. The result is canonical.
    pub fn differentiate(&self, var: Var) -> TermSum {
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            match var {
                Var::S => {
                    if t.s_pow > 0 {
                        out.push(Term::new(t.coef * t.s_pow as f64, t.s_pow - 1, t.t_pow, t.u_pow));
                    }
                    out.push(Term::new(-self.alpha * t.coef, t.s_pow, t.t_pow, t.u_pow));
                }
                Var::T => {
                    if t.t_pow > 0 {
                        out.push(Term::new(t.coef * t.t_pow as f64, t.s_pow, t.t_pow - 1, t.u_pow));
                    }
                }
                Var::U => {
                    if t.u_pow > 0 {
                        out.push(Term::new(t.coef * t.u_pow as f64, t.s_pow, t.t_pow, t.u_pow - 1));
                    }
                }
            }
        }
        TermSum::new(self.alpha, out)
    }

    fn scaled(&self, factor: f64) -> TermSum {
        TermSum::new(
            self.alpha,
            self.terms.iter().map(|t| Term::new(t.coef * factor, t.s_pow, t.t_pow, t.u_pow)),
        )
    }
}

/// Which trial wavefunction family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialKind {
    Psi0,
    Psi1,
    Psi2,
    Psi3,
    Psi4,
}

/// Exponent triples (n, m, l) of s^n t^m u^l for the psi4 expansion:
/// n+m+l <= 2 with m even, preserving singlet exchange symmetry.
pub const PSI4_EXPONENTS: [(u32, u32, u32); 7] = [
    (0, 0, 0),
    (1, 0, 0),
    (0, 0, 1),
    (2, 0, 0),
    (0, 2, 0),
    (0, 0, 2),
    (1, 0, 1),
];

impl TrialKind {
    pub const ALL: [TrialKind; 5] = [
        TrialKind::Psi0,
        TrialKind::Psi1,
        TrialKind::Psi2,
        TrialKind::Psi3,
        TrialKind::Psi4,
    ];

    /// Length of the full parameter vector (alpha first).
    pub fn param_count(&self) -> usize {
        match self {
            TrialKind::Psi0 => 1,
            TrialKind::Psi1 => 2,
            TrialKind::Psi2 => 3,
            TrialKind::Psi3 => 4,
            TrialKind::Psi4 => 1 + PSI4_EXPONENTS.len(),
        }
    }

    /// Monomials multiplying the cut-off; the first carries coefficient 1
    /// for psi0-psi3 and the gauge-fixed C_000 for psi4.
    pub(crate) fn monomials(&self) -> &'static [(u32, u32, u32)] {
        match self {
            TrialKind::Psi0 => &[(0, 0, 0)],
            TrialKind::Psi1 => &[(0, 0, 0), (0, 0, 1)],
            TrialKind::Psi2 => &[(0, 0, 0), (0, 0, 1), (0, 2, 0)],
            TrialKind::Psi3 => &[(0, 0, 0), (0, 0, 1), (0, 2, 0), (2, 0, 0)],
            TrialKind::Psi4 => &PSI4_EXPONENTS,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TrialKind::Psi0 => "psi0",
            TrialKind::Psi1 => "psi1",
            TrialKind::Psi2 => "psi2",
            TrialKind::Psi3 => "psi3",
            TrialKind::Psi4 => "psi4",
        }
    }

    pub fn index(&self) -> usize {
        match self {
            TrialKind::Psi0 => 0,
            TrialKind::Psi1 => 1,
            TrialKind::Psi2 => 2,
            TrialKind::Psi3 => 3,
            TrialKind::Psi4 => 4,
        }
    }
}

impl fmt::Display for TrialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TrialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "psi0" | "0" => Ok(TrialKind::Psi0),
            "psi1" | "1" => Ok(TrialKind::Psi1),
            "psi2" | "2" => Ok(TrialKind::Psi2),
            "psi3" | "3" => Ok(TrialKind::Psi3),
            "psi4" | "4" => Ok(TrialKind::Psi4),
            other => Err(Error::InvalidInput(format!("unknown trial kind {other:?}"))),
        }
    }
}

/// Cut-off chi = (r0-(s-t)/2)(r0-(s+t)/2) = r0^2 - r0*s + s^2/4 - t^2/4,
/// or the constant 1 in free mode.
fn cutoff_terms(r0: Radius) -> Vec<Term> {
    match r0 {
        Radius::Infinite => vec![Term::new(1.0, 0, 0, 0)],
        Radius::Finite(r) => vec![
            Term::new(r * r, 0, 0, 0),
            Term::new(-r, 1, 0, 0),
            Term::new(0.25, 2, 0, 0),
            Term::new(-0.25, 0, 2, 0),
        ],
    }
}

/// Expand (polynomial prefactor) * chi * exp(-alpha*s) into canonical form.
/// The overall normalization constant B is not included.
pub fn build_trial(kind: TrialKind, params: &[f64], r0: Radius) -> Result<TermSum> {
    if params.len() != kind.param_count() {
        return Err(Error::ParamCount {
            kind: kind.name(),
            expected: kind.param_count(),
            got: params.len(),
        });
    }
    let alpha = params[0];
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    if let Radius::Finite(r) = r0 {
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::InvalidRadius(r));
        }
    }

    let mut coefs: Vec<f64> = Vec::with_capacity(kind.monomials().len());
    if kind == TrialKind::Psi4 {
        coefs.extend_from_slice(&params[1..]);
    } else {
        coefs.push(1.0);
        coefs.extend_from_slice(&params[1..]);
    }

    let chi = cutoff_terms(r0);
    let mut product = Vec::with_capacity(coefs.len() * chi.len());
    for ((n, m, l), coef) in kind.monomials().iter().zip(&coefs) {
        for c in &chi {
            product.push(Term::new(
                coef * c.coef,
                n + c.s_pow,
                m + c.t_pow,
                l + c.u_pow,
            ));
        }
    }
    Ok(TermSum::new(alpha, product))
}

/// Basis functions spanning a trial kind at fixed alpha: each monomial times
/// the cut-off. `build_trial` output is the coefficient-weighted sum of these.
pub(crate) fn basis_functions(kind: TrialKind, alpha: f64, r0: Radius) -> Vec<TermSum> {
    let chi = cutoff_terms(r0);
    kind.monomials()
        .iter()
        .map(|(n, m, l)| {
            TermSum::new(
                alpha,
                chi.iter()
                    .map(|c| Term::new(c.coef, n + c.s_pow, m + c.t_pow, l + c.u_pow)),
            )
        })
        .collect()
}

const MAX_POWER: usize = 15;

/// A wavefunction with the eight partial derivatives the Hamiltonian needs,
/// precomputed symbolically so repeated evaluation is cheap.
#[derive(Debug, Clone)]
pub struct HamiltonianApplied {
    z: f64,
    alpha: f64,
    f: TermSum,
    fs: TermSum,
    ft: TermSum,
    fu: TermSum,
    fss: TermSum,
    ftt: TermSum,
    fuu: TermSum,
    fsu: TermSum,
    ftu: TermSum,
    max_s: usize,
    max_t: usize,
    max_u: usize,
}

impl HamiltonianApplied {
    pub fn new(f: &TermSum, z: f64) -> Self {
        let fs = f.differentiate(Var::S);
        let ft = f.differentiate(Var::T);
        let fu = f.differentiate(Var::U);
        let fss = fs.differentiate(Var::S);
        let ftt = ft.differentiate(Var::T);
        let fuu = fu.differentiate(Var::U);
        let fsu = fs.differentiate(Var::U);
        let ftu = ft.differentiate(Var::U);
        let (ms, mt, mu) = f.max_powers();
        assert!(
            (ms as usize) <= MAX_POWER && (mt as usize) <= MAX_POWER && (mu as usize) <= MAX_POWER,
            "term sum degree exceeds evaluator power table"
        );
        Self {
            z,
            alpha: f.alpha(),
            f: f.clone(),
            fs,
            ft,
            fu,
            fss,
            ftt,
            fuu,
            fsu,
            ftu,
            max_s: ms as usize,
            max_t: mt as usize,
            max_u: mu as usize,
        }
    }

    #[inline]
    fn poly(&self, sum: &TermSum, sp: &[f64], tp: &[f64], up: &[f64]) -> f64 {
        let mut acc = 0.0;
        for t in sum.terms() {
            acc += t.coef
                * sp[t.s_pow as usize]
                * tp[t.t_pow as usize]
                * up[t.u_pow as usize];
        }
        acc
    }

    /// Evaluate (psi, H psi) at a strictly interior point, sharing one
    /// exponential and one set of power tables across all nine sums.
    pub fn eval_pair(&self, p: &HylleraasPoint) -> (f64, f64) {
        debug_assert!(p.is_interior(), "Hamiltonian evaluated at a singular point");
        let mut sp = [1.0f64; MAX_POWER + 1];
        let mut tp = [1.0f64; MAX_POWER + 1];
        let mut up = [1.0f64; MAX_POWER + 1];
        for i in 1..=self.max_s {
            sp[i] = sp[i - 1] * p.s;
        }
        for i in 1..=self.max_t {
            tp[i] = tp[i - 1] * p.t;
        }
        for i in 1..=self.max_u {
            up[i] = up[i - 1] * p.u;
        }

        let f0 = self.poly(&self.f, &sp, &tp, &up);
        let fs = self.poly(&self.fs, &sp, &tp, &up);
        let ft = self.poly(&self.ft, &sp, &tp, &up);
        let fu = self.poly(&self.fu, &sp, &tp, &up);
        let fss = self.poly(&self.fss, &sp, &tp, &up);
        let ftt = self.poly(&self.ftt, &sp, &tp, &up);
        let fuu = self.poly(&self.fuu, &sp, &tp, &up);
        let fsu = self.poly(&self.fsu, &sp, &tp, &up);
        let ftu = self.poly(&self.ftu, &sp, &tp, &up);

        let (s, t, u) = (p.s, p.t, p.u);
        let inv_u = 1.0 / u;
        let inv_st2 = 1.0 / (s * s - t * t);
        let h = -(fss + ftt + fuu)
            - 2.0 * s * (u * u - t * t) * inv_u * inv_st2 * fsu
            - 2.0 * t * (s * s - u * u) * inv_u * inv_st2 * ftu
            - 4.0 * s * inv_st2 * fs
            + 4.0 * t * inv_st2 * ft
            - 2.0 * inv_u * fu
            - 4.0 * self.z * s * inv_st2 * f0
            + inv_u * f0;

        let e = (-self.alpha * s).exp();
        (f0 * e, h * e)
    }

    pub fn wavefunction(&self) -> &TermSum {
        &self.f
    }
}

/// (H f)(p) with every term of the Hylleraas-coordinate Hamiltonian:
/// second derivatives, the two mixed-derivative terms, the three
/// first-derivative terms, nuclear attraction -4Zs/(s^2-t^2), and the
/// electron repulsion 1/u. Derivatives are exact.
///
/// The point must be strictly interior (u > 0, |t| < s, u < s).
pub fn apply_hamiltonian(f: &TermSum, p: &HylleraasPoint, z: f64) -> f64 {
    HamiltonianApplied::new(f, z).eval_pair(p).1
}
