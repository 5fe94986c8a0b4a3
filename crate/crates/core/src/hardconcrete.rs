//! The binary concrete distribution and its stretched, clamped ("hard")
//! variant.
//!
//! A gate is a [0, 1]-valued random variable built in three steps:
//!
//! 1. sample `s` from the binary concrete distribution with location
//!    `exp(log_alpha)` and temperature `beta`,
//! 2. stretch it to `(gamma, zeta)` with `gamma < 0 < 1 < zeta`,
//! 3. clamp back into [0, 1].
//!
//! The clamping folds the tails into point masses at exactly 0 and 1, so a
//! sampled gate can switch a branch fully off (or on) while the sampling
//! path stays differentiable in `log_alpha` and `beta` everywhere except
//! the clamp boundary, where the subgradient is taken as 0.

use crate::error::{Error, Result};
use crate::scalar::{logistic, logit, Scalar};

/// Default temperature.
pub const DEFAULT_BETA: f64 = 0.5;
/// Default stretch lower bound.
pub const DEFAULT_GAMMA: f64 = -0.1;
/// Default stretch upper bound.
pub const DEFAULT_ZETA: f64 = 1.1;

/// Parameters of one hard-concrete gate.
///
/// `log_alpha` is the unconstrained location and the main trainable
/// parameter. The temperature is stored as an unconstrained `u_beta` with
/// `beta = logistic(u_beta)`, so gradient steps on `u_beta` can never push
/// the temperature out of (0, 1). The stretch bounds are fixed at
/// construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateParams<T: Scalar> {
    /// Unconstrained location; larger values bias the gate toward 1.
    pub log_alpha: T,
    u_beta: T,
    gamma: T,
    zeta: T,
}

impl<T: Scalar> GateParams<T> {
    /// Builds parameters, rejecting `beta` outside (0, 1), `gamma >= 0`
    /// and `zeta <= 1`.
    pub fn new(log_alpha: T, beta: T, gamma: T, zeta: T) -> Result<Self> {
        if !(beta > T::zero() && beta < T::one()) {
            return Err(Error::InvalidGateParams(format!(
                "beta must lie in (0, 1), got {beta}"
            )));
        }
        if !(gamma < T::zero()) {
            return Err(Error::InvalidGateParams(format!(
                "gamma must be negative, got {gamma}"
            )));
        }
        if !(zeta > T::one()) {
            return Err(Error::InvalidGateParams(format!(
                "zeta must exceed 1, got {zeta}"
            )));
        }
        Ok(Self {
            log_alpha,
            u_beta: logit(beta),
            gamma,
            zeta,
        })
    }

    /// `beta = 0.5`, `gamma = -0.1`, `zeta = 1.1`.
    pub fn with_defaults(log_alpha: T) -> Self {
        Self::new(
            log_alpha,
            T::from_f64(DEFAULT_BETA),
            T::from_f64(DEFAULT_GAMMA),
            T::from_f64(DEFAULT_ZETA),
        )
        .expect("default stretch bounds are valid")
    }

    /// Rebuilds from raw unconstrained fields (used when reloading trained
    /// gates; `u_beta` is the logit of the temperature).
    pub fn from_raw(log_alpha: T, u_beta: T, gamma: T, zeta: T) -> Result<Self> {
        Self::new(log_alpha, logistic(u_beta), gamma, zeta)
    }

    pub fn beta(&self) -> T {
        logistic(self.u_beta)
    }

    pub fn u_beta(&self) -> T {
        self.u_beta
    }

    /// Unconstrained temperature update (SGD step on `u_beta`).
    pub fn set_u_beta(&mut self, u_beta: T) {
        self.u_beta = u_beta;
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn zeta(&self) -> T {
        self.zeta
    }

    fn check_open_unit(value: T, name: &str) -> Result<()> {
        if value > T::zero() && value < T::one() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "{name} must lie strictly inside (0, 1), got {value}"
            )))
        }
    }

    /// Density of the binary concrete distribution at `s` in (0, 1):
    /// `alpha*beta*s^(beta-1)*(1-s)^(beta-1) / (s^beta + alpha*(1-s)^beta)^2`.
    pub fn concrete_pdf(&self, s: T) -> Result<T> {
        Self::check_open_unit(s, "s")?;
        let alpha = self.log_alpha.exp();
        let beta = self.beta();
        let one = T::one();
        let sb = s.powf(beta);
        let cb = (one - s).powf(beta);
        let num = alpha * beta * s.powf(beta - one) * (one - s).powf(beta - one);
        let den = sb + alpha * cb;
        Ok(num / (den * den))
    }

    /// CDF of the binary concrete distribution:
    /// `logistic(beta * logit(s) - log_alpha)`.
    ///
    /// This is the probability-integral inverse of [`Self::sample_concrete`],
    /// strictly increasing in `s` and strictly decreasing in `log_alpha`.
    pub fn concrete_cdf(&self, s: T) -> Result<T> {
        Self::check_open_unit(s, "s")?;
        Ok(logistic(self.beta() * logit(s) - self.log_alpha))
    }

    /// Reparameterized concrete sample from uniform noise `u` in (0, 1):
    /// `logistic((logit(u) + log_alpha) / beta)`.
    pub fn sample_concrete(&self, u: T) -> Result<T> {
        Self::check_open_unit(u, "u")?;
        Ok(logistic((logit(u) + self.log_alpha) / self.beta()))
    }

    /// Stretches `s` to `(gamma, zeta)` and folds back into [0, 1]:
    /// `min(1, max(0, s*zeta + (1-s)*gamma))`.
    ///
    /// Accepts the closed interval so that float-saturated samples (exactly
    /// 0.0 or 1.0 for extreme `log_alpha`) pass through; they land in the
    /// clamped region anyway.
    pub fn stretch_and_fold(&self, s: T) -> T {
        let sbar = s * self.zeta + (T::one() - s) * self.gamma;
        sbar.max(T::zero()).min(T::one())
    }

    /// Point mass of the hard-concrete gate at exactly 0:
    /// `F(-gamma / (zeta - gamma))`.
    pub fn prob_zero(&self) -> T {
        let t = -self.gamma / (self.zeta - self.gamma);
        self.concrete_cdf(t)
            .expect("gamma < 0 < 1 < zeta keeps the argument inside (0, 1)")
    }

    /// Point mass of the hard-concrete gate at exactly 1:
    /// `1 - F((1 - gamma) / (zeta - gamma))`.
    pub fn prob_one(&self) -> T {
        let t = (T::one() - self.gamma) / (self.zeta - self.gamma);
        T::one()
            - self
                .concrete_cdf(t)
                .expect("gamma < 0 < 1 < zeta keeps the argument inside (0, 1)")
    }

    /// Continuous part of the hard-concrete density at `g` in (0, 1).
    ///
    /// Together with [`Self::prob_zero`] and [`Self::prob_one`] this
    /// integrates to one.
    pub fn hard_pdf_continuous(&self, g: T) -> Result<T> {
        Self::check_open_unit(g, "g")?;
        let width = self.zeta - self.gamma;
        let s = (g - self.gamma) / width;
        Ok(self.concrete_pdf(s)? / width)
    }

    /// One stochastic gate draw: concrete sample, stretch, fold.
    pub fn sample_gate(&self, u: T) -> Result<T> {
        Ok(self.stretch_and_fold(self.sample_concrete(u)?))
    }

    /// Test-time gate estimate `min(1, max(0, logistic(log_alpha) *
    /// (zeta - gamma) + gamma))`; monotone nondecreasing in `log_alpha`.
    pub fn deterministic_gate(&self) -> T {
        let raw = logistic(self.log_alpha) * (self.zeta - self.gamma) + self.gamma;
        raw.max(T::zero()).min(T::one())
    }

    /// Gate draw plus its partials w.r.t. `log_alpha` and `u_beta` at the
    /// fixed noise `u`. In the clamped region both partials are 0.
    pub fn sample_gate_grad(&self, u: T) -> Result<GateGrad<T>> {
        Self::check_open_unit(u, "u")?;
        let beta = self.beta();
        let z = (logit(u) + self.log_alpha) / beta;
        let s = logistic(z);
        let width = self.zeta - self.gamma;
        let sbar = s * self.zeta + (T::one() - s) * self.gamma;
        if sbar <= T::zero() || sbar >= T::one() {
            return Ok(GateGrad {
                gate: sbar.max(T::zero()).min(T::one()),
                d_log_alpha: T::zero(),
                d_u_beta: T::zero(),
            });
        }
        let ds_dz = s * (T::one() - s);
        let d_log_alpha = width * ds_dz / beta;
        // z depends on beta as z = c / beta, so dz/dbeta = -z / beta;
        // beta = logistic(u_beta) gives dbeta/du_beta = beta * (1 - beta).
        let d_u_beta = width * ds_dz * (-z / beta) * beta * (T::one() - beta);
        Ok(GateGrad {
            gate: sbar,
            d_log_alpha,
            d_u_beta,
        })
    }

    /// Deterministic gate plus its partial w.r.t. `log_alpha` (0 when
    /// clamped).
    pub fn deterministic_gate_grad(&self) -> GateGrad<T> {
        let a = logistic(self.log_alpha);
        let width = self.zeta - self.gamma;
        let raw = a * width + self.gamma;
        if raw <= T::zero() || raw >= T::one() {
            return GateGrad {
                gate: raw.max(T::zero()).min(T::one()),
                d_log_alpha: T::zero(),
                d_u_beta: T::zero(),
            };
        }
        GateGrad {
            gate: raw,
            d_log_alpha: a * (T::one() - a) * width,
            d_u_beta: T::zero(),
        }
    }
}

/// A gate value with its partials, used by the tape ops.
#[derive(Debug, Clone, Copy)]
pub struct GateGrad<T> {
    pub gate: T,
    pub d_log_alpha: T,
    pub d_u_beta: T,
}

/// Draws uniform noise in the open interval (0, 1), clamping away the
/// endpoints so downstream logits stay finite.
pub fn draw_uniform<T: Scalar, R: rand::Rng + ?Sized>(rng: &mut R) -> T {
    let eps = 1e-12;
    T::from_f64(rng.random::<f64>().clamp(eps, 1.0 - eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gp(log_alpha: f64, beta: f64) -> GateParams<f64> {
        GateParams::new(log_alpha, beta, DEFAULT_GAMMA, DEFAULT_ZETA).unwrap()
    }

    /// Simpson integration of the concrete pdf over (0, 1) under the
    /// logistic substitution s = logistic(t), which removes the endpoint
    /// singularities. Independent of the CDF implementation.
    fn pdf_total_mass(p: &GateParams<f64>) -> f64 {
        let (lo, hi, n) = (-60.0, 60.0, 24_000);
        let h = (hi - lo) / n as f64;
        let f = |t: f64| {
            let s = logistic(t);
            let ds_dt = s * (1.0 - s);
            if s <= 0.0 || s >= 1.0 {
                0.0
            } else {
                p.concrete_pdf(s).unwrap() * ds_dt
            }
        };
        let mut acc = f(lo) + f(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(lo + i as f64 * h);
        }
        acc * h / 3.0
    }

    /// Plain Simpson over [0, 1] for the continuous hard-concrete part;
    /// its support maps strictly inside (0, 1) of the base variable, so
    /// there is no singularity.
    fn hard_continuous_mass(p: &GateParams<f64>) -> f64 {
        let n = 20_000;
        let h = 1.0 / n as f64;
        let f = |g: f64| p.hard_pdf_continuous(g).unwrap();
        let eps = 1e-9;
        let mut acc = f(eps) + f(1.0 - eps);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn constructor_rejects_bad_params() {
        assert!(GateParams::new(0.0, 0.0, -0.1, 1.1).is_err());
        assert!(GateParams::new(0.0, 1.0, -0.1, 1.1).is_err());
        assert!(GateParams::new(0.0, 0.5, 0.0, 1.1).is_err());
        assert!(GateParams::new(0.0, 0.5, -0.1, 1.0).is_err());
        assert!(GateParams::new(0.0, 0.5, -0.1, 1.1).is_ok());
    }

    #[test]
    fn beta_round_trips_through_u_beta() {
        let p = gp(0.0, 0.37);
        assert!((p.beta() - 0.37).abs() < 1e-12);
    }

    #[test]
    fn pdf_hand_value_at_midpoint() {
        // numerator 1 * 0.5 * 2, denominator (sqrt(0.5) + sqrt(0.5))^2 = 2
        let p = gp(0.0, 0.5);
        assert!((p.concrete_pdf(0.5).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pdf_symmetric_at_unit_alpha() {
        let p = gp(0.0, 0.5);
        let a = p.concrete_pdf(0.25).unwrap();
        let b = p.concrete_pdf(0.75).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn pdf_integrates_to_one() {
        for &la in &[-3.0, 0.0, 3.0] {
            for &beta in &[0.3, 0.5, 0.8] {
                let mass = pdf_total_mass(&gp(la, beta));
                assert!(
                    (mass - 1.0).abs() < 1e-6,
                    "log_alpha={la} beta={beta} mass={mass}"
                );
            }
        }
    }

    #[test]
    fn pdf_rejects_boundary() {
        let p = gp(0.0, 0.5);
        assert!(p.concrete_pdf(0.0).is_err());
        assert!(p.concrete_pdf(1.0).is_err());
        assert!(p.concrete_cdf(-0.1).is_err());
        assert!(p.sample_concrete(1.0).is_err());
    }

    #[test]
    fn cdf_median_at_half() {
        for &beta in &[0.3, 0.5, 0.8] {
            let p = gp(0.0, beta);
            assert!((p.concrete_cdf(0.5).unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn cdf_matches_reported_tail_value() {
        let p = gp(-3.0, 0.5);
        assert!((p.concrete_cdf(1.0 / 12.0).unwrap() - 0.8583).abs() < 5e-4);
    }

    #[test]
    fn cdf_derivative_matches_pdf() {
        let p = gp(0.7, 0.4);
        let s = 0.3;
        let h = 1e-6;
        let fd = (p.concrete_cdf(s + h).unwrap() - p.concrete_cdf(s - h).unwrap()) / (2.0 * h);
        let pdf = p.concrete_pdf(s).unwrap();
        assert!((fd - pdf).abs() / pdf.abs() < 1e-5, "fd={fd} pdf={pdf}");
    }

    #[test]
    fn sample_hand_values() {
        let p = gp(0.0, 0.5);
        assert!((p.sample_concrete(0.5).unwrap() - 0.5).abs() < 1e-12);
        let p = gp(-3.0, 0.5);
        let s = p.sample_concrete(0.5).unwrap();
        assert!((s - logistic(-6.0)).abs() < 1e-12);
        assert!((s - 0.002473).abs() < 1e-6);
    }

    #[test]
    fn stretch_and_fold_hand_values() {
        let p = gp(0.0, 0.5);
        assert!((p.stretch_and_fold(0.5) - 0.5).abs() < 1e-12);
        assert_eq!(p.stretch_and_fold(0.002473), 0.0); // sbar = -0.09703
        assert_eq!(p.stretch_and_fold(0.9781), 1.0); // sbar = 1.0737
    }

    #[test]
    fn point_masses_match_reported_values() {
        let p = gp(-3.0, 0.5);
        assert!((p.prob_zero() - 0.8583).abs() < 5e-4);
        assert!((p.prob_one() - 0.0148).abs() < 5e-4);
        let p = gp(0.0, 0.5);
        assert!((p.prob_zero() - 0.2317).abs() < 5e-4);
        assert!((p.prob_one() - 0.2317).abs() < 5e-4);
    }

    #[test]
    fn point_masses_mirror_under_sign_flip() {
        // The stretch endpoints 1/12 and 11/12 are logit-symmetric, so
        // flipping log_alpha swaps the two point masses.
        let a = gp(3.0, 0.5).prob_zero();
        let b = gp(-3.0, 0.5).prob_one();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn total_probability_is_one() {
        for &la in &[-3.0, 0.0, 3.0] {
            for &beta in &[0.3, 0.5, 0.8] {
                let p = gp(la, beta);
                let total = p.prob_zero() + p.prob_one() + hard_continuous_mass(&p);
                assert!(
                    (total - 1.0).abs() < 1e-6,
                    "log_alpha={la} beta={beta} total={total}"
                );
            }
        }
    }

    #[test]
    fn gate_chain_hand_values() {
        let p = gp(0.0, 0.5);
        assert!((p.sample_gate(0.5).unwrap() - 0.5).abs() < 1e-12);
        let p = gp(-3.0, 0.5);
        assert_eq!(p.sample_gate(0.5).unwrap(), 0.0);
    }

    #[test]
    fn gate_mean_is_centered_at_zero_log_alpha() {
        let p = gp(0.0, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|_| p.sample_gate(draw_uniform(&mut rng)).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((0.49..=0.51).contains(&mean), "mean={mean}");
    }

    #[test]
    fn deterministic_gate_hand_values() {
        assert!((gp(0.0, 0.5).deterministic_gate() - 0.5).abs() < 1e-12);
        assert_eq!(gp(-3.0, 0.5).deterministic_gate(), 0.0);
        assert_eq!(gp(3.0, 0.5).deterministic_gate(), 1.0);
    }

    #[test]
    fn sample_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut checked = 0;
        while checked < 100 {
            let la = (rng.random::<f64>() - 0.5) * 4.0;
            let beta = 0.2 + rng.random::<f64>() * 0.6;
            let u: f64 = draw_uniform(&mut rng);
            let p = GateParams::new(la, beta, DEFAULT_GAMMA, DEFAULT_ZETA).unwrap();
            let s = p.sample_concrete(u).unwrap();
            let sbar = s * p.zeta() + (1.0 - s) * p.gamma();
            if !(0.01..0.99).contains(&sbar) {
                continue;
            }
            let g = p.sample_gate_grad(u).unwrap();
            let h = 1e-6;
            let up = GateParams::new(la + h, beta, DEFAULT_GAMMA, DEFAULT_ZETA).unwrap();
            let dn = GateParams::new(la - h, beta, DEFAULT_GAMMA, DEFAULT_ZETA).unwrap();
            let fd_alpha = (up.sample_gate(u).unwrap() - dn.sample_gate(u).unwrap()) / (2.0 * h);
            let rel = (g.d_log_alpha - fd_alpha).abs() / fd_alpha.abs().max(1e-9);
            assert!(rel < 1e-5, "alpha grad rel err {rel}");

            let mut up = p;
            up.set_u_beta(p.u_beta() + h);
            let mut dn = p;
            dn.set_u_beta(p.u_beta() - h);
            let fd_beta = (up.sample_gate(u).unwrap() - dn.sample_gate(u).unwrap()) / (2.0 * h);
            let rel = (g.d_u_beta - fd_beta).abs() / fd_beta.abs().max(1e-7);
            assert!(rel < 1e-4, "beta grad rel err {rel}");
            checked += 1;
        }
    }

    #[test]
    fn seeded_draws_are_bit_identical() {
        let p = gp(0.3, 0.5);
        let draw = |seed: u64| -> Vec<u64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..256)
                .map(|_| p.sample_gate(draw_uniform(&mut rng)).unwrap().to_bits())
                .collect()
        };
        assert_eq!(draw(7), draw(7));
        assert_ne!(draw(7), draw(8));
    }

    proptest! {
        #[test]
        fn cdf_increasing_in_s_decreasing_in_log_alpha(
            s1 in 0.01f64..0.97,
            ds in 0.001f64..0.02,
            la in -4.0f64..4.0,
            beta in 0.2f64..0.9,
        ) {
            let p = GateParams::new(la, beta, DEFAULT_GAMMA, DEFAULT_ZETA).unwrap();
            let s2 = s1 + ds;
            prop_assert!(p.concrete_cdf(s1).unwrap() < p.concrete_cdf(s2).unwrap());
            let q = GateParams::new(la + 0.5, beta, DEFAULT_GAMMA, DEFAULT_ZETA).unwrap();
            prop_assert!(q.concrete_cdf(s1).unwrap() < p.concrete_cdf(s1).unwrap());
        }

        #[test]
        fn sampled_gates_stay_in_unit_interval(
            la in -6.0f64..6.0,
            beta in 0.1f64..0.9,
            u in 1e-6f64..0.999999,
        ) {
            let p = GateParams::new(la, beta, DEFAULT_GAMMA, DEFAULT_ZETA).unwrap();
            let g = p.sample_gate(u).unwrap();
            prop_assert!((0.0..=1.0).contains(&g));
        }
    }
}
