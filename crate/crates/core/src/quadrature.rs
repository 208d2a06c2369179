//! Gauss-Legendre rules and the split-domain Hylleraas triple integral.
//!
//! The energy and norm integrals take the form
//!   2 pi^2 [ int_0^r0 ds int_0^s dt int_t^s du
//!          + int_r0^2r0 ds int_0^(2r0-s) dt int_t^s du ] f(s,t,u) (s^2-t^2) u,
//! with nested Gauss-Legendre in each dimension and the inner limits mapped
//! per outer node. The volume measure (s^2-t^2)*u is applied here, not by f.
//!
//! Summation order is fixed: compensated sums within each outer-s block,
//! pairwise summation across blocks. Parallel and sequential execution
//! produce bit-identical results.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, pairwise_sum, CompensatedSum, Exec};
use crate::wavefunction::HylleraasPoint;

const TWO_PI_SQUARED: f64 = 2.0 * std::f64::consts::PI * std::f64::consts::PI;

/// Reference Gauss-Legendre nodes/weights on [-1, 1], cached per order.
#[derive(Debug)]
struct ReferenceRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn legendre_value_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    // P'_n from the standard identity; x = +-1 never reached by Newton here.
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn reference_rule(n: usize) -> Arc<ReferenceRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<ReferenceRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&n) {
        return Arc::clone(rule);
    }

    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Newton iteration from the Chebyshev-like guess; fill symmetric pairs
    // from one half so the rule is exactly mirror-symmetric.
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_value_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_value_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Guess starts near +1 for small i; store descending half mirrored.
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, dp) = legendre_value_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (dp * dp);
    }

    let rule = Arc::new(ReferenceRule { nodes, weights });
    cache.lock().unwrap().insert(n, Arc::clone(&rule));
    rule
}

/// Nodes and weights of an n-point Gauss-Legendre rule on [a, b].
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    interval: (f64, f64),
}

/// n-point Gauss-Legendre rule mapped to [a, b]. Exact for polynomials of
/// degree <= 2n-1; nodes computed by Newton iteration on P_n to ~1e-15.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidInput("quadrature order must be at least 1".into()));
    }
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::InvalidInput(format!(
            "invalid quadrature interval [{a}, {b}]"
        )));
    }
    let reference = reference_rule(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    Ok(QuadratureRule {
        nodes: reference.nodes.iter().map(|x| mid + half * x).collect(),
        weights: reference.weights.iter().map(|w| half * w).collect(),
        interval: (a, b),
    })
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Apply the rule to `f`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let mut acc = CompensatedSum::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(*x));
        }
        acc.total()
    }
}

/// One outer-s region of the split domain.
#[derive(Debug, Clone, Copy)]
struct Region {
    s_lo: f64,
    s_hi: f64,
    /// Upper t limit: s itself, or 2*r0 - s in the outer shell.
    t_cap_from_r0: Option<f64>,
}

/// The nested integration domain of the two-region Hylleraas integral,
/// streaming nodes from the 1-D reference rule (nothing materialized).
#[derive(Debug, Clone)]
pub struct HylleraasDomain {
    regions: Vec<Region>,
    order: usize,
    rule: Arc<ReferenceRule>,
}

impl HylleraasDomain {
    /// Two-region domain for a cavity of radius `r0`.
    pub fn confined(r0: f64, order: usize) -> Result<Self> {
        if !r0.is_finite() || r0 <= 0.0 {
            return Err(Error::InvalidRadius(r0));
        }
        if order == 0 {
            return Err(Error::InvalidInput("quadrature order must be at least 1".into()));
        }
        Ok(Self {
            regions: vec![
                Region { s_lo: 0.0, s_hi: r0, t_cap_from_r0: None },
                Region { s_lo: r0, s_hi: 2.0 * r0, t_cap_from_r0: Some(r0) },
            ],
            order,
            rule: reference_rule(order),
        })
    }

    /// Free-atom domain truncated at `s_max` (single region, t up to s).
    pub fn free(s_max: f64, order: usize) -> Result<Self> {
        if !s_max.is_finite() || s_max <= 0.0 {
            return Err(Error::InvalidInput(format!("invalid domain truncation {s_max}")));
        }
        if order == 0 {
            return Err(Error::InvalidInput("quadrature order must be at least 1".into()));
        }
        Ok(Self {
            regions: vec![Region { s_lo: 0.0, s_hi: s_max, t_cap_from_r0: None }],
            order,
            rule: reference_rule(order),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn block_count(&self) -> usize {
        self.regions.len() * self.order
    }

    fn block_partial<F>(&self, block: usize, f: &F) -> Result<(f64, f64)>
    where
        F: Fn(&HylleraasPoint) -> (f64, f64) + Sync,
    {
        let region = self.regions[block / self.order];
        let i = block % self.order;
        let n = self.order;
        let x = &self.rule.nodes;
        let w = &self.rule.weights;

        let s_mid = 0.5 * (region.s_hi + region.s_lo);
        let s_half = 0.5 * (region.s_hi - region.s_lo);
        let s = s_mid + s_half * x[i];
        let ws = s_half * w[i];

        let t_max = match region.t_cap_from_r0 {
            None => s,
            Some(r0) => 2.0 * r0 - s,
        };

        let mut acc0 = CompensatedSum::default();
        let mut acc1 = CompensatedSum::default();
        for j in 0..n {
            let t = 0.5 * t_max * (x[j] + 1.0);
            let wt = 0.5 * t_max * w[j];
            let u_mid = 0.5 * (s + t);
            let u_half = 0.5 * (s - t);
            let st2 = s * s - t * t;
            for k in 0..n {
                let u = u_mid + u_half * x[k];
                let wu = u_half * w[k];
                let p = HylleraasPoint { s, t, u };
                let (a, b) = f(&p);
                if !(a.is_finite() && b.is_finite()) {
                    return Err(Error::NonFiniteIntegrand { s, t, u });
                }
                let weight = ws * wt * wu * st2 * u;
                acc0.add(weight * a);
                acc1.add(weight * b);
            }
        }
        Ok((acc0.total(), acc1.total()))
    }

    /// Integrate a pair of integrands sharing their evaluation work.
    pub fn integrate_pair<F>(&self, f: F, exec: Exec) -> Result<(f64, f64)>
    where
        F: Fn(&HylleraasPoint) -> (f64, f64) + Sync,
    {
        let partials = map_indexed(self.block_count(), exec, |b| self.block_partial(b, &f));
        let mut first = Vec::with_capacity(partials.len());
        let mut second = Vec::with_capacity(partials.len());
        for p in partials {
            let (a, b) = p?;
            first.push(a);
            second.push(b);
        }
        Ok((
            TWO_PI_SQUARED * pairwise_sum(&first),
            TWO_PI_SQUARED * pairwise_sum(&second),
        ))
    }

    pub fn integrate<F>(&self, f: F, exec: Exec) -> Result<f64>
    where
        F: Fn(&HylleraasPoint) -> f64 + Sync,
    {
        let partials = map_indexed(self.block_count(), exec, |b| {
            self.block_partial(b, &|p: &HylleraasPoint| (f(p), 0.0)).map(|(a, _)| a)
        });
        let mut values = Vec::with_capacity(partials.len());
        for p in partials {
            values.push(p?);
        }
        Ok(TWO_PI_SQUARED * pairwise_sum(&values))
    }

    /// Accumulate a block-summed vector of integrals in one sweep; `fill`
    /// writes the integrand components at a point into the scratch slice.
    pub(crate) fn integrate_components<F>(&self, dim: usize, fill: F, exec: Exec) -> Result<Vec<f64>>
    where
        F: Fn(&HylleraasPoint, &mut [f64]) + Sync,
    {
        let partials = map_indexed(self.block_count(), exec, |block| {
            let region = self.regions[block / self.order];
            let i = block % self.order;
            let n = self.order;
            let x = &self.rule.nodes;
            let w = &self.rule.weights;
            let s_mid = 0.5 * (region.s_hi + region.s_lo);
            let s_half = 0.5 * (region.s_hi - region.s_lo);
            let s = s_mid + s_half * x[i];
            let ws = s_half * w[i];
            let t_max = match region.t_cap_from_r0 {
                None => s,
                Some(r0) => 2.0 * r0 - s,
            };
            let mut acc = vec![CompensatedSum::default(); dim];
            let mut scratch = vec![0.0; dim];
            for j in 0..n {
                let t = 0.5 * t_max * (x[j] + 1.0);
                let wt = 0.5 * t_max * w[j];
                let u_mid = 0.5 * (s + t);
                let u_half = 0.5 * (s - t);
                let st2 = s * s - t * t;
                for k in 0..n {
                    let u = u_mid + u_half * x[k];
                    let wu = u_half * w[k];
                    let weight = ws * wt * wu * st2 * u;
                    let p = HylleraasPoint { s, t, u };
                    fill(&p, &mut scratch);
                    for (a, v) in acc.iter_mut().zip(&scratch) {
                        a.add(weight * v);
                    }
                }
            }
            acc.iter().map(CompensatedSum::total).collect::<Vec<f64>>()
        });
        let mut out = vec![0.0; dim];
        let mut column = vec![0.0; partials.len()];
        for (d, slot) in out.iter_mut().enumerate() {
            for (b, p) in partials.iter().enumerate() {
                column[b] = p[d];
            }
            *slot = TWO_PI_SQUARED * pairwise_sum(&column);
        }
        Ok(out)
    }
}

/// The two-region triple integral of the energy functional for a cavity of
/// radius `r0`; the measure (s^2-t^2)*u and the 2 pi^2 prefactor are applied
/// here. `order` Gauss-Legendre points per dimension, limits substituted per
/// outer node.
pub fn integrate_hylleraas<F>(f: F, r0: f64, order: usize) -> Result<f64>
where
    F: Fn(&HylleraasPoint) -> f64 + Sync,
{
    HylleraasDomain::confined(r0, order)?.integrate(f, Exec::default())
}

/// Free-mode variant on the truncated domain s in [0, s_max].
pub fn integrate_hylleraas_free<F>(f: F, s_max: f64, order: usize) -> Result<f64>
where
    F: Fn(&HylleraasPoint) -> f64 + Sync,
{
    HylleraasDomain::free(s_max, order)?.integrate(f, Exec::default())
}

/// Composite Gauss-Legendre integral of g over [a, b] split into equal panels.
pub fn integrate_radial<G>(g: G, a: f64, b: f64, order: usize, panels: usize) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::InvalidInput(format!("invalid radial interval [{a}, {b}]")));
    }
    if panels == 0 {
        return Err(Error::InvalidInput("panel count must be at least 1".into()));
    }
    if order == 0 {
        return Err(Error::InvalidInput("quadrature order must be at least 1".into()));
    }
    let reference = reference_rule(order);
    let width = (b - a) / panels as f64;
    let mut acc = CompensatedSum::default();
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let mid = lo + 0.5 * width;
        let half = 0.5 * width;
        for (x, w) in reference.nodes.iter().zip(&reference.weights) {
            let r = mid + half * x;
            let v = g(r);
            if !v.is_finite() {
                return Err(Error::NonFinite("radial integrand"));
            }
            acc.add(half * w * v);
        }
    }
    Ok(acc.total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefunction::{build_trial, Radius, Term, TermSum, TrialKind};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn one_point_rule_is_the_midpoint_rule() {
        let rule = gauss_legendre(1, -1.0, 1.0).unwrap();
        assert_eq!(rule.nodes(), &[0.0]);
        assert_eq!(rule.weights(), &[2.0]);
    }

    #[test]
    fn two_point_rule_matches_closed_form() {
        let rule = gauss_legendre(2, -1.0, 1.0).unwrap();
        let inv_sqrt3 = 1.0 / 3.0f64.sqrt();
        assert_relative_eq!(rule.nodes()[0], -inv_sqrt3, max_relative = 1e-15);
        assert_relative_eq!(rule.nodes()[1], inv_sqrt3, max_relative = 1e-15);
        assert_relative_eq!(rule.weights()[0], 1.0, max_relative = 1e-15);
        assert_relative_eq!(rule.weights()[1], 1.0, max_relative = 1e-15);
        // Degree-3 exactness: int_-1^1 x^3 = 0, int_0^1 x^2 = 1/3.
        assert!(rule.integrate(|x| x * x * x).abs() < 1e-15);
        let rule01 = gauss_legendre(2, 0.0, 1.0).unwrap();
        assert_relative_eq!(rule01.integrate(|x| x * x), 1.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn weights_sum_to_interval_length_and_nodes_are_interior_increasing() {
        for n in [1, 2, 3, 7, 16, 48, 96] {
            let (a, b) = (-0.3, 2.7);
            let rule = gauss_legendre(n, a, b).unwrap();
            let total: f64 = rule.weights().iter().sum();
            assert_relative_eq!(total, b - a, max_relative = 1e-12);
            for pair in rule.nodes().windows(2) {
                assert!(pair[0] < pair[1]);
            }
            assert!(rule.nodes()[0] > a && rule.nodes()[n - 1] < b);
        }
    }

    #[test]
    fn rules_are_mirror_symmetric() {
        for n in [5, 8, 48] {
            let rule = gauss_legendre(n, -1.0, 1.0).unwrap();
            for i in 0..n {
                assert_eq!(rule.nodes()[i], -rule.nodes()[n - 1 - i]);
                assert_eq!(rule.weights()[i], rule.weights()[n - 1 - i]);
            }
        }
    }

    #[test]
    fn rejects_degenerate_requests() {
        assert!(gauss_legendre(0, 0.0, 1.0).is_err());
        assert!(gauss_legendre(4, 1.0, 1.0).is_err());
        assert!(gauss_legendre(4, 2.0, 1.0).is_err());
    }

    #[test]
    fn volume_identity_over_the_two_ball_domain() {
        // int 1 dtau over both balls of radius r0 = (4 pi r0^3 / 3)^2.
        for r0 in [1.0, 2.5] {
            let got = integrate_hylleraas(|_| 1.0, r0, 24).unwrap();
            let expected = (4.0 * PI * r0.powi(3) / 3.0).powi(2);
            assert_relative_eq!(got, expected, max_relative = 1e-13);
        }
    }

    #[test]
    fn pure_cutoff_norm_matches_separable_closed_form() {
        // |psi0|^2 at alpha -> 0 separates: (4 pi r0^5 / 30)^2.
        let r0 = 1.0;
        let f = TermSum::new(
            0.0,
            [
                Term::new(r0 * r0, 0, 0, 0),
                Term::new(-r0, 1, 0, 0),
                Term::new(0.25, 2, 0, 0),
                Term::new(-0.25, 0, 2, 0),
            ],
        );
        let got = integrate_hylleraas(|p| f.evaluate(p).powi(2), r0, 24).unwrap();
        let expected = (4.0 * PI * r0.powi(5) / 30.0).powi(2);
        assert_relative_eq!(got, expected, max_relative = 1e-12);
    }

    #[test]
    fn free_mode_norm_matches_hydrogenic_product() {
        // int e^{-2s} dtau = (pi / alpha^3)^2 at alpha = 1.
        let f = build_trial(TrialKind::Psi0, &[1.0], Radius::Infinite).unwrap();
        let got = integrate_hylleraas_free(|p| f.evaluate(p).powi(2), 40.0, 48).unwrap();
        assert_relative_eq!(got, PI * PI, max_relative = 1e-10);
    }

    #[test]
    fn order_doubling_agrees_on_smooth_integrands() {
        let f = build_trial(TrialKind::Psi1, &[1.2, 0.4], Radius::finite(3.0).unwrap()).unwrap();
        let i48 = integrate_hylleraas(|p| f.evaluate(p).powi(2), 3.0, 48).unwrap();
        let i96 = integrate_hylleraas(|p| f.evaluate(p).powi(2), 3.0, 96).unwrap();
        assert!(((i48 - i96) / i96).abs() < 1e-9);
    }

    #[test]
    fn parallel_and_sequential_are_bit_identical() {
        let f = build_trial(TrialKind::Psi1, &[1.1, 0.3], Radius::finite(2.0).unwrap()).unwrap();
        let domain = HylleraasDomain::confined(2.0, 32).unwrap();
        let seq = domain.integrate(|p| f.evaluate(p).powi(2), Exec::Sequential).unwrap();
        let def = domain.integrate(|p| f.evaluate(p).powi(2), Exec::default()).unwrap();
        assert_eq!(seq.to_bits(), def.to_bits());
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let err = integrate_hylleraas(|p| 1.0 / (p.s - p.s), 1.0, 4).unwrap_err();
        assert!(matches!(err, Error::NonFiniteIntegrand { .. }));
    }

    #[test]
    fn odd_in_t_integrands_vanish_over_the_symmetric_region() {
        // The printed formula integrates t >= 0 only; extending to the full
        // region t in [-s, s] (u >= |t|) by mirrored rules, any odd-in-t
        // integrand cancels to rounding while its even part does not.
        let order = 16;
        let rule = reference_rule(order);
        let r0 = 1.5;
        let symmetric = |f: &dyn Fn(f64, f64, f64) -> f64| -> f64 {
            let mut total = 0.0;
            for (s_lo, s_hi, shell) in [(0.0, r0, false), (r0, 2.0 * r0, true)] {
                for i in 0..order {
                    let s = 0.5 * (s_hi + s_lo) + 0.5 * (s_hi - s_lo) * rule.nodes[i];
                    let ws = 0.5 * (s_hi - s_lo) * rule.weights[i];
                    let t_max = if shell { 2.0 * r0 - s } else { s };
                    for sign in [-1.0, 1.0] {
                        for j in 0..order {
                            let t_abs = 0.5 * t_max * (rule.nodes[j] + 1.0);
                            let wt = 0.5 * t_max * rule.weights[j];
                            let t = sign * t_abs;
                            for k in 0..order {
                                let u = 0.5 * (s + t_abs)
                                    + 0.5 * (s - t_abs) * rule.nodes[k];
                                let wu = 0.5 * (s - t_abs) * rule.weights[k];
                                total += ws * wt * wu * (s * s - t * t) * u * f(s, t, u);
                            }
                        }
                    }
                }
            }
            total
        };
        let odd = symmetric(&|s, t, u| t * u * (-s).exp());
        let even = symmetric(&|s, t, u| t * t * u * (-s).exp());
        assert!(odd.abs() < 1e-12 * even.abs());
    }

    #[test]
    fn radial_integration_examples() {
        let third = integrate_radial(|r| r * r, 0.0, 1.0, 16, 1).unwrap();
        assert_relative_eq!(third, 1.0 / 3.0, max_relative = 1e-14);

        let three = integrate_radial(|_| 1.0, 2.0, 5.0, 4, 2).unwrap();
        assert_relative_eq!(three, 3.0, max_relative = 1e-14);

        // Hydrogenic normalization: int 4 pi r^2 e^{-2r}/pi dr = 1.
        let one = integrate_radial(|r| 4.0 * r * r * (-2.0 * r).exp(), 0.0, 40.0, 32, 8).unwrap();
        assert_relative_eq!(one, 1.0, max_relative = 1e-12);

        assert!(integrate_radial(|r| r, 1.0, 0.0, 8, 1).is_err());
    }

    #[test]
    fn exactness_on_random_polynomials_up_to_degree_2n_minus_1() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in [3usize, 8, 16] {
            let degree = 2 * n - 1;
            let coefs: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (a, b) = (-0.5, 1.5);
            let rule = gauss_legendre(n, a, b).unwrap();
            let got = rule.integrate(|x| {
                coefs.iter().rev().fold(0.0, |acc, c| acc * x + c)
            });
            let exact: f64 = coefs
                .iter()
                .enumerate()
                .map(|(k, c)| c * (b.powi(k as i32 + 1) - a.powi(k as i32 + 1)) / (k as f64 + 1.0))
                .sum();
            assert_relative_eq!(got, exact, max_relative = 1e-12);
        }
    }
}
