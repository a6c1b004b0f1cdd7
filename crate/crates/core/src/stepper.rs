//! One time step of ETDRK(r), with or without polynomial rescaling.
//!
//! Over `[t_n, t_n + tau]` the equation `w' = L w + N(w)`, `N = f + kappa I`,
//! is integrated exactly against a polynomial approximation
//! `P(s) = K + sum_{m>=1} c_m (s/tau)^m` of the nonlinearity:
//!
//! ```text
//! w(s) = e^{sL} u + s phi_1(sL) K + tau sum_m m! (s/tau)^{m+1} phi_{m+1}(sL) c_m
//! ```
//!
//! The order-`r` scheme is built as a cascade. Level 1 uses the constant
//! `P_0 = N(u^n)` (ETDRK1). Level `j` samples the level-`j` solution at the
//! nodes `a_{j,k} tau`, interpolates `N` there to get `P_j`, and the last
//! polynomial `P_{r-1}` produces `u^{n+1} = w_r(tau)`.
//!
//! In rescaled mode every interpolation polynomial is multiplied pointwise by
//! `alpha(x) = min(kappa beta / max_s |P(x, s)|, 1)`, which keeps
//! `|alpha P| <= kappa beta` and with it the maximum bound for any `tau`.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::phi::{factorial, phi_unchecked};
use crate::poly::{bernstein_bound, polynomial_abs_max};
use crate::potential::{Potential, Reaction};
use crate::scheme::{SchemeSpec, MAX_ORDER};
use crate::spectral::SpectralPlan;

/// The pointwise polynomial `P(x, sigma) = constant(x) + sum_m coeffs[m-1](x) sigma^m`
/// in the normalized time `sigma = s / tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct StagePolynomial {
    pub constant: Field,
    pub coeffs: Vec<Field>,
}

impl StagePolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficients `[K, c_1, .., c_d]` at grid point `p`.
    pub fn at_point(&self, p: usize) -> Vec<f64> {
        std::iter::once(self.constant.values()[p])
            .chain(self.coeffs.iter().map(|c| c.values()[p]))
            .collect()
    }
}

/// Result of one step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub u: Field,
    /// Minimum over the grid of the final-level rescale factor (1 in standard mode).
    pub alpha_min: f64,
    /// Largest `|w|` over every internal stage value and the output.
    pub stage_max_norm: f64,
}

/// Per-point rescale factors `min(kappa_beta / max_sigma |P|, 1)`.
pub fn rescale_factor(poly: &StagePolynomial, kappa_beta: f64) -> Field {
    let coeffs: Vec<&[f64]> = poly.coeffs.iter().map(|c| c.values()).collect();
    let alpha = rescale_factor_raw(poly.constant.values(), &coeffs, kappa_beta);
    Field::from_raw(*poly.constant.mesh(), alpha)
}

fn rescale_factor_raw(constant: &[f64], coeffs: &[&[f64]], kappa_beta: f64) -> Vec<f64> {
    let d = coeffs.len();
    let mut buf = [0.0; MAX_ORDER + 1];
    constant
        .iter()
        .enumerate()
        .map(|(p, &k)| {
            buf[0] = k;
            let mut bound = k.abs();
            for (m, c) in coeffs.iter().enumerate() {
                buf[m + 1] = c[p];
                bound += c[p].abs();
            }
            // sum |c_k| bounds |P| on [0, 1]; most points never need the exact maximum.
            if bound <= kappa_beta || bernstein_bound(&buf[..=d]) <= kappa_beta {
                return 1.0;
            }
            let (max, _) = polynomial_abs_max(&buf[..=d]);
            if max <= kappa_beta {
                1.0
            } else {
                kappa_beta / max
            }
        })
        .collect()
}

/// Spectral multipliers for one stage time `s`: entry 0 is
/// `e^{s lambda} - 1 = s lambda phi_1(s lambda)`, entry `m >= 1` is `phi_m(s lambda)`.
struct StageTable {
    phis: Vec<Vec<f64>>,
}

fn stage_multipliers(plan: &SpectralPlan, s: f64, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|m| {
            if m == 0 {
                plan.eigvals().iter().map(|&lam| s * lam * phi_unchecked(1, s * lam)).collect()
            } else {
                plan.phi_multipliers(m, s)
            }
        })
        .collect()
}

/// Everything needed to advance one trajectory with a fixed step size.
pub struct StepContext<R: Reaction = Potential> {
    plan: Arc<SpectralPlan>,
    reaction: R,
    scheme: Arc<SchemeSpec>,
    tau: f64,
    rescaled: bool,
    kappa_beta: f64,
    tables: HashMap<u64, StageTable>,
}

impl<R: Reaction> StepContext<R> {
    pub fn new(plan: Arc<SpectralPlan>, reaction: R, scheme: Arc<SchemeSpec>, tau: f64, rescaled: bool) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {tau}")));
        }
        let kappa = plan.kappa();
        if kappa < reaction.kappa_min() * (1.0 - 1e-14) {
            return Err(Error::InvalidParameter(format!(
                "kappa = {kappa} is below the minimal stabilizer {}",
                reaction.kappa_min()
            )));
        }
        let kappa_beta = kappa * reaction.beta();
        let mut ctx = Self { plan, reaction, scheme, tau, rescaled, kappa_beta, tables: HashMap::new() };
        let r = ctx.scheme.order();
        let mut sigmas = vec![1.0];
        for j in 1..r {
            sigmas.extend_from_slice(ctx.scheme.nodes(j).interior());
        }
        for sigma in sigmas {
            ctx.tables.entry(sigma.to_bits()).or_insert_with(|| StageTable {
                phis: stage_multipliers(&ctx.plan, sigma * tau, r + 1),
            });
        }
        Ok(ctx)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn rescaled(&self) -> bool {
        self.rescaled
    }
    pub fn plan(&self) -> &SpectralPlan {
        &self.plan
    }
    pub fn scheme(&self) -> &SchemeSpec {
        &self.scheme
    }
    pub fn reaction(&self) -> &R {
        &self.reaction
    }
    pub fn kappa_beta(&self) -> f64 {
        self.kappa_beta
    }

    /// `N(u) = f(u) + kappa u` pointwise. Domain errors are reported at `(level, stage)`.
    fn nonlinearity(&self, u: &[f64], level: usize, stage: usize) -> Result<Vec<f64>> {
        let kappa = self.plan.kappa();
        u.iter()
            .map(|&v| match self.reaction.f(v) {
                Ok(fv) => Ok(fv + kappa * v),
                Err(Error::Domain { value }) => Err(Error::BoundExceeded { level, stage, value }),
                Err(e) => Err(e),
            })
            .collect()
    }

    /// Builds `w(sigma tau)` from `u^n` and the spectral coefficients of
    /// `u^n`, `K` and `c_m`. Only the increment `w - u^n` passes through the
    /// inverse transform, so transform roundoff scales with the increment.
    fn stage_from_hats(
        &self,
        sigma: f64,
        phis: &[Vec<f64>],
        u: &[f64],
        u_hat: &[f64],
        k_hat: &[f64],
        c_hats: &[Vec<f64>],
    ) -> Vec<f64> {
        let s = sigma * self.tau;
        let weights: Vec<f64> = (1..=c_hats.len())
            .map(|m| self.tau * factorial(m) * sigma.powi(m as i32 + 1))
            .collect();
        let mut out: Vec<f64> = (0..u_hat.len())
            .map(|p| phis[0][p] * u_hat[p] + s * phis[1][p] * k_hat[p])
            .collect();
        for (m, (c, w)) in c_hats.iter().zip(&weights).enumerate() {
            let phi = &phis[m + 2];
            for p in 0..out.len() {
                out[p] += w * phi[p] * c[p];
            }
        }
        self.plan.inverse_in_place(&mut out);
        for (o, v) in out.iter_mut().zip(u) {
            *o += v;
        }
        out
    }

    fn forward(&self, v: &[f64]) -> Vec<f64> {
        let mut hat = v.to_vec();
        self.plan.forward_in_place(&mut hat);
        hat
    }

    /// Evaluates `w(s) = e^{sL} u + int_0^s e^{(s-r)L} P(r) dr` for a given
    /// (already rescaled) polynomial, `0 < s <= tau`.
    pub fn evaluate_stage(&self, poly: &StagePolynomial, u_n: &Field, s: f64) -> Result<Field> {
        if !(s > 0.0 && s <= self.tau) {
            return Err(Error::InvalidParameter(format!("stage time {s} outside (0, {}]", self.tau)));
        }
        let sigma = s / self.tau;
        let d = poly.degree();
        let phis: Vec<Vec<f64>> = match self.tables.get(&sigma.to_bits()) {
            Some(t) if t.phis.len() >= d + 2 => t.phis.clone(),
            _ => stage_multipliers(&self.plan, s, d + 2),
        };
        let u_hat = self.plan.to_spectral(u_n)?;
        let k_hat = self.plan.to_spectral(&poly.constant)?;
        let c_hats = poly
            .coeffs
            .iter()
            .map(|c| self.plan.to_spectral(c).map(|h| h.coeffs().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        let w = self.stage_from_hats(sigma, &phis, u_n.values(), u_hat.coeffs(), k_hat.coeffs(), &c_hats);
        Ok(Field::from_raw(*self.plan.mesh(), w))
    }

    /// Advances `u_n` by one step of size `tau`.
    pub fn step(&self, u_n: &Field) -> Result<StepOutcome> {
        Ok(self.step_with_polynomial(u_n)?.0)
    }

    /// Like [`StepContext::step`], also returning the final-level polynomial
    /// (after rescaling) so callers can inspect it.
    pub fn step_with_polynomial(&self, u_n: &Field) -> Result<(StepOutcome, StagePolynomial)> {
        if u_n.mesh() != self.plan.mesh() {
            return Err(Error::MeshMismatch { left: self.plan.mesh().to_string(), right: u_n.mesh().to_string() });
        }
        if !u_n.is_finite() {
            return Err(Error::NumericalBlowup { level: 0 });
        }
        let r = self.scheme.order();
        let npts = u_n.values().len();
        let n0 = self.nonlinearity(u_n.values(), 0, 0)?;
        let u_hat = self.forward(u_n.values());

        // P_0 = N(u^n); |N(u^n)| <= kappa beta whenever |u^n| <= beta, so it is never rescaled.
        let mut constant = n0.clone();
        let mut coeffs: Vec<Vec<f64>> = Vec::new();
        let mut alpha = vec![1.0; npts];
        let mut k_hat = self.forward(&constant);
        let mut c_hats: Vec<Vec<f64>> = Vec::new();
        let mut stage_max: f64 = u_n.max_norm();

        for j in 1..r {
            let nodes = self.scheme.nodes(j).interior();
            let mut rhs = Vec::with_capacity(j);
            for (k, &sigma) in nodes.iter().enumerate() {
                let phis = &self.tables[&sigma.to_bits()].phis;
                let w = self.stage_from_hats(sigma, phis, u_n.values(), &u_hat, &k_hat, &c_hats);
                if w.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NumericalBlowup { level: j });
                }
                stage_max = stage_max.max(w.iter().fold(0.0, |m, v| m.max(v.abs())));
                let mut d = self.nonlinearity(&w, j, k + 1)?;
                for (dp, n) in d.iter_mut().zip(&n0) {
                    *dp -= n;
                }
                rhs.push(d);
            }
            coeffs = self.scheme.vandermonde(j).solve_fields(&rhs);
            constant = n0.clone();
            if self.rescaled {
                let refs: Vec<&[f64]> = coeffs.iter().map(|c| c.as_slice()).collect();
                alpha = rescale_factor_raw(&n0, &refs, self.kappa_beta);
                for (p, a) in alpha.iter().enumerate() {
                    constant[p] *= a;
                    for c in coeffs.iter_mut() {
                        c[p] *= a;
                    }
                }
            }
            k_hat = self.forward(&constant);
            c_hats = coeffs.iter().map(|c| self.forward(c)).collect();
        }

        let phis = &self.tables[&1.0f64.to_bits()].phis;
        let u_next = self.stage_from_hats(1.0, phis, u_n.values(), &u_hat, &k_hat, &c_hats);
        if u_next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalBlowup { level: r });
        }
        let mesh = *self.plan.mesh();
        let u = Field::from_raw(mesh, u_next);
        stage_max = stage_max.max(u.max_norm());
        let alpha_min = alpha.iter().copied().fold(1.0, f64::min);
        let poly = StagePolynomial {
            constant: Field::from_raw(mesh, constant),
            coeffs: coeffs.into_iter().map(|c| Field::from_raw(mesh, c)).collect(),
        };
        Ok((StepOutcome { u, alpha_min, stage_max_norm: stage_max }, poly))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Mesh2D;
    use crate::scheme::NodeKind;

    struct Linear {
        kappa: f64,
    }
    impl Reaction for Linear {
        fn f(&self, u: f64) -> Result<f64> {
            Ok(-self.kappa * u)
        }
        fn beta(&self) -> f64 {
            1.0
        }
        fn kappa_min(&self) -> f64 {
            self.kappa
        }
    }

    fn setup(n: usize, order: usize) -> (Arc<SpectralPlan>, Arc<SchemeSpec>) {
        let plan = Arc::new(SpectralPlan::new(Mesh2D::square_2pi(n).unwrap(), 0.1, 2.0).unwrap());
        let scheme = Arc::new(SchemeSpec::new(order, NodeKind::Uniform).unwrap());
        (plan, scheme)
    }

    #[test]
    fn vanishing_nonlinearity_reduces_to_semigroup() {
        let (plan, scheme) = setup(16, 4);
        let ctx = StepContext::new(plan.clone(), Linear { kappa: 2.0 }, scheme, 0.1, false).unwrap();
        let u = Field::from_fn(*plan.mesh(), |x, y| (x * 0.5).cos() + 0.3 * (2.0 * y).sin());
        let out = ctx.step(&u).unwrap();
        let want = plan.apply_phi(0, 0.1, &u).unwrap();
        assert!(out.u.max_diff(&want).unwrap() < 1e-13);
    }

    #[test]
    fn constant_steady_state_is_preserved() {
        for rescaled in [false, true] {
            for order in 1..=5 {
                let (plan, scheme) = setup(8, order);
                let ctx = StepContext::new(plan.clone(), Potential::ginzburg_landau(), scheme, 0.3, rescaled).unwrap();
                let out = ctx.step(&Field::constant(*plan.mesh(), 1.0)).unwrap();
                assert!(out.u.values().iter().all(|v| (v - 1.0).abs() < 1e-12), "order {order}");
            }
        }
    }

    #[test]
    fn rejects_small_kappa_and_bad_tau() {
        let plan = Arc::new(SpectralPlan::new(Mesh2D::square_2pi(8).unwrap(), 0.1, 1.0).unwrap());
        let scheme = Arc::new(SchemeSpec::new(2, NodeKind::Uniform).unwrap());
        assert!(StepContext::new(plan.clone(), Potential::ginzburg_landau(), scheme.clone(), 0.1, false).is_err());
        let (plan, scheme) = setup(8, 2);
        assert!(StepContext::new(plan, Potential::ginzburg_landau(), scheme, 0.0, false).is_err());
    }

    #[test]
    fn first_level_stage_is_etdrk1() {
        let (plan, scheme) = setup(8, 3);
        let gl = Potential::ginzburg_landau();
        let ctx = StepContext::new(plan.clone(), gl, scheme, 0.2, false).unwrap();
        let u = Field::from_fn(*plan.mesh(), |x, y| 0.5 * x.sin() * y.sin());
        let n = u.map(|v| gl.f(v).unwrap() + 2.0 * v);
        let poly = StagePolynomial { constant: n.clone(), coeffs: vec![] };
        let s = 0.07;
        let w = ctx.evaluate_stage(&poly, &u, s).unwrap();
        let want = plan
            .apply_phi(0, s, &u)
            .unwrap()
            .lin_comb(1.0, &plan.apply_phi(1, s, &n).unwrap(), s)
            .unwrap();
        assert!(w.max_diff(&want).unwrap() < 1e-14);
        assert!(ctx.evaluate_stage(&poly, &u, 0.0).is_err());
        assert!(ctx.evaluate_stage(&poly, &u, 0.25).is_err());
    }

    #[test]
    fn stage_at_full_step_equals_step_output() {
        let (plan, scheme) = setup(16, 4);
        let ctx = StepContext::new(plan.clone(), Potential::ginzburg_landau(), scheme, 0.05, true).unwrap();
        let u = Field::from_fn(*plan.mesh(), |x, y| 0.5 * x.sin() * y.sin());
        let (out, poly) = ctx.step_with_polynomial(&u).unwrap();
        let w = ctx.evaluate_stage(&poly, &u, 0.05).unwrap();
        assert!(w.max_diff(&out.u).unwrap() < 1e-14);
    }

    #[test]
    fn rescale_factor_examples() {
        let mesh = Mesh2D::square_2pi(4).unwrap();
        let kb = 2.0;
        let inside = StagePolynomial { constant: Field::constant(mesh, 1.5), coeffs: vec![] };
        assert!(rescale_factor(&inside, kb).values().iter().all(|&a| a == 1.0));
        let twice = StagePolynomial { constant: Field::constant(mesh, 2.0 * kb), coeffs: vec![] };
        assert!(rescale_factor(&twice, kb).values().iter().all(|&a| a == 0.5));
        let zero = StagePolynomial { constant: Field::zeros(mesh), coeffs: vec![Field::zeros(mesh)] };
        assert!(rescale_factor(&zero, kb).values().iter().all(|&a| a == 1.0));
    }

    #[test]
    fn rescaled_polynomial_is_bounded() {
        let mesh = Mesh2D::square_2pi(8).unwrap();
        let kb = 1.3;
        let poly = StagePolynomial {
            constant: Field::from_fn(mesh, |x, y| (x + y).sin() * 1.2),
            coeffs: vec![
                Field::from_fn(mesh, |x, _| 3.0 * (2.0 * x).cos()),
                Field::from_fn(mesh, |_, y| -4.0 * y.sin()),
                Field::from_fn(mesh, |x, y| 0.5 * x - y),
            ],
        };
        let alpha = rescale_factor(&poly, kb);
        for p in 0..mesh.len() {
            let c = poly.at_point(p);
            let a = alpha.values()[p];
            assert!(a > 0.0 && a <= 1.0);
            for k in 0..=64 {
                let v = crate::poly::horner(&c, k as f64 / 64.0);
                assert!((a * v).abs() <= kb + 1e-12);
            }
        }
    }
}
