//! Coin-betting potentials `F_t`, betting fractions `beta_t` and betting
//! functions `h_t = beta_t * F_{t-1}` for the exponential and
//! Krichevsky-Trofimov (KT) families.
//!
//! Both families carry the initial endowment `epsilon` as a multiplicative
//! prefactor and use `F_0 = epsilon`. KT values are always computed in the
//! log domain through [`log_beta`], which keeps `F_t` finite far beyond the
//! point where `Gamma` itself overflows.

mod special;

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

pub use special::{ln_gamma, log_beta, DIGAMMA_HALF};

use crate::error::{Error, Result};

/// Relative slack allowed on the domain bound `|x| <= t` before an argument
/// is rejected; arguments inside the slack are clamped onto the boundary.
const DOMAIN_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PotentialKind {
    /// `F_t(x) = eps / sqrt(t) * exp(x^2 / (2t))`, `beta_t(x) = tanh(x / t)`.
    Exponential,
    /// `F_t(x) = eps * 2^t * B((t+1+|x|)/2, (t+1-|x|)/2) / pi`, `beta_t(x) = x / t`.
    KrichevskyTrofimov,
}

impl fmt::Display for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PotentialKind::Exponential => "exp",
            PotentialKind::KrichevskyTrofimov => "kt",
        })
    }
}

impl FromStr for PotentialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exp" | "exponential" => Ok(PotentialKind::Exponential),
            "kt" | "krichevsky-trofimov" => Ok(PotentialKind::KrichevskyTrofimov),
            other => Err(Error::Config(format!("unknown potential `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialFamily {
    kind: PotentialKind,
    epsilon: f64,
}

impl PotentialFamily {
    pub fn new(kind: PotentialKind, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidInput(format!(
                "endowment must be > 0, got {epsilon}"
            )));
        }
        Ok(Self { kind, epsilon })
    }

    pub fn exponential(epsilon: f64) -> Result<Self> {
        Self::new(PotentialKind::Exponential, epsilon)
    }

    pub fn kt(epsilon: f64) -> Result<Self> {
        Self::new(PotentialKind::KrichevskyTrofimov, epsilon)
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `ln F_t(x)` for `|x| <= t`.
    pub fn log_value(&self, t: usize, x: f64) -> Result<f64> {
        let ax = clamp_to_domain(x, t as f64, "F_t")?;
        if t == 0 {
            return Ok(self.epsilon.ln());
        }
        let tf = t as f64;
        Ok(match self.kind {
            PotentialKind::Exponential => self.epsilon.ln() - 0.5 * tf.ln() + ax * ax / (2.0 * tf),
            PotentialKind::KrichevskyTrofimov => {
                (self.epsilon / PI).ln()
                    + tf * LN_2
                    + log_beta((tf + 1.0 + ax) / 2.0, (tf + 1.0 - ax) / 2.0)?
            }
        })
    }

    /// `F_t(x)` for `|x| <= t`; `F_0` is the constant `epsilon`.
    pub fn value(&self, t: usize, x: f64) -> Result<f64> {
        Ok(self.log_value(t, x)?.exp())
    }

    /// `beta_t(x)` for `t >= 1` and `|x| <= t - 1`.
    pub fn betting_fraction(&self, t: usize, x: f64) -> Result<f64> {
        if t == 0 {
            return Err(Error::Domain(
                "betting fraction is defined for t >= 1".into(),
            ));
        }
        let ax = clamp_to_domain(x, (t - 1) as f64, "beta_t")?;
        let x = ax.copysign(x);
        let tf = t as f64;
        Ok(match self.kind {
            PotentialKind::Exponential => (x / tf).tanh(),
            PotentialKind::KrichevskyTrofimov => x / tf,
        })
    }

    /// `h_t(x) = beta_t(x) * F_{t-1}(x)` for `t >= 1` and `|x| <= t - 1`.
    pub fn betting_function(&self, t: usize, x: f64) -> Result<f64> {
        let beta = self.betting_fraction(t, x)?;
        if beta == 0.0 {
            return Ok(0.0);
        }
        let log_f = self.log_value(t - 1, x)?;
        Ok((beta.abs().ln() + log_f).exp().copysign(beta))
    }

    /// `ln L_{h_t}`, the log of the Lipschitz bound of `h_t` on
    /// `[-(t-1), t-1]` used by the disagreement analysis.
    pub fn log_lipschitz_bound(&self, t: usize) -> f64 {
        let tf = t.max(1) as f64;
        match self.kind {
            PotentialKind::Exponential => {
                self.epsilon.ln() - 0.5 * tf.ln()
                    + (tf - 1.0).powi(2) / (2.0 * tf)
                    + exp_lipschitz_factor().ln()
            }
            PotentialKind::KrichevskyTrofimov => {
                self.epsilon.ln() + (tf - 2.0) * LN_2 + (tf.ln() - DIGAMMA_HALF).ln()
                    - 0.5 * (PI * tf).ln()
            }
        }
    }

    /// The constant `C` with `L_{h_t} * sum_s rho^{Q(s,t)} <= C / sqrt(t)`
    /// under a sufficient linear gossip schedule.
    pub fn disagreement_constant(&self) -> f64 {
        match self.kind {
            PotentialKind::Exponential => self.epsilon * exp_lipschitz_factor(),
            PotentialKind::KrichevskyTrofimov => self.epsilon * 4.0 * PI.sqrt(),
        }
    }

    /// Closed-form regret bound shared by both families:
    /// `|u| sqrt(T ln(1 + 24 T^2 |u|^2 / eps^2)) + eps`.
    pub fn regret_bound(&self, horizon: usize, u_norm: f64) -> f64 {
        regret_bound(self.epsilon, horizon, u_norm)
    }
}

impl fmt::Display for PotentialFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(eps={})", self.kind, self.epsilon)
    }
}

/// `|u| sqrt(T ln(1 + 24 T^2 |u|^2 / eps^2)) + eps`.
pub fn regret_bound(epsilon: f64, horizon: usize, u_norm: f64) -> f64 {
    let t = horizon as f64;
    let log_term = (24.0 * t * t * u_norm * u_norm / (epsilon * epsilon)).ln_1p();
    u_norm * (t * log_term).sqrt() + epsilon
}

fn exp_lipschitz_factor() -> f64 {
    1.0 - 2.0 / (1.0 + std::f64::consts::E.powi(2))
}

fn clamp_to_domain(x: f64, bound: f64, what: &str) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!(
            "{what}: non-finite argument {x}"
        )));
    }
    let ax = x.abs();
    if ax > bound + DOMAIN_SLACK * bound.max(1.0) {
        return Err(Error::Domain(format!("{what}: |x| = {ax} exceeds {bound}")));
    }
    Ok(ax.min(bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn families() -> [PotentialFamily; 2] {
        [
            PotentialFamily::exponential(1.0).unwrap(),
            PotentialFamily::kt(1.0).unwrap(),
        ]
    }

    /// Direct Gamma-ratio KT potential, used as an oracle for small t.
    fn kt_direct(eps: f64, t: usize, x: f64) -> f64 {
        use statrs::function::gamma::gamma;
        let tf = t as f64;
        let fact: f64 = (1..=t).map(|k| k as f64).product();
        eps * 2f64.powi(t as i32) * gamma((tf + 1.0 + x) / 2.0) * gamma((tf + 1.0 - x) / 2.0)
            / (PI * fact)
    }

    #[test]
    fn kt_first_round_values() {
        let kt = PotentialFamily::kt(1.0).unwrap();
        assert!((kt.value(1, 0.0).unwrap() - 2.0 / PI).abs() < 1e-14);
        assert!((kt.value(1, 1.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exponential_value() {
        let e = PotentialFamily::exponential(1.0).unwrap();
        assert!((e.value(4, 0.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zeroth_potential_is_endowment() {
        for kind in [
            PotentialKind::Exponential,
            PotentialKind::KrichevskyTrofimov,
        ] {
            let f = PotentialFamily::new(kind, 2.5).unwrap();
            assert!((f.value(0, 0.0).unwrap() - 2.5).abs() < 1e-15);
        }
    }

    #[test]
    fn kt_large_round_is_finite() {
        // F_t itself is about e^1300 here, beyond f64; its logarithm is not
        let kt = PotentialFamily::kt(1.0).unwrap();
        let v = kt.log_value(10_000, 5_000.0).unwrap();
        let lg = statrs::function::gamma::ln_gamma;
        let reference = -PI.ln() + 10_000.0 * LN_2 + lg(7_500.5) + lg(2_500.5) - lg(10_001.0);
        assert!(v.is_finite() && v > 0.0, "{v}");
        assert!(
            (v - reference).abs() <= 1e-9 * reference,
            "{v} vs {reference}"
        );
        assert!(kt.log_value(10_000, 10_000.0).unwrap().is_finite());
    }

    #[test]
    fn kt_log_domain_matches_direct_gamma() {
        let kt = PotentialFamily::kt(1.0).unwrap();
        for t in 1..=20 {
            for i in 0..=40 {
                let x = t as f64 * (f64::from(i) / 20.0 - 1.0);
                let direct = kt_direct(1.0, t, x);
                let ours = kt.value(t, x).unwrap();
                assert!(
                    ((ours - direct) / direct).abs() < 1e-9,
                    "t={t} x={x}: {ours} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn domain_errors() {
        let kt = PotentialFamily::kt(1.0).unwrap();
        assert!(matches!(kt.value(3, 3.5), Err(Error::Domain(_))));
        assert!(matches!(kt.value(3, f64::NAN), Err(Error::InvalidInput(_))));
        assert!(matches!(kt.betting_fraction(3, 2.5), Err(Error::Domain(_))));
        assert!(matches!(kt.betting_fraction(0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(kt.value(0, 0.5), Err(Error::Domain(_))));
        // inside the rounding slack the argument is clamped, not rejected
        assert!(kt.value(3, 3.0 + 1e-12).is_ok());
        assert!(PotentialFamily::kt(0.0).is_err());
    }

    #[test]
    fn betting_fraction_examples() {
        let kt = PotentialFamily::kt(1.0).unwrap();
        let e = PotentialFamily::exponential(1.0).unwrap();
        assert!((kt.betting_fraction(2, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(e.betting_fraction(5, 0.0).unwrap(), 0.0);
        let b = e.betting_fraction(3, 2.0).unwrap();
        assert!((b - 0.582_782_945_347_910_2).abs() < 1e-12);
        let (fp, fm) = (e.value(3, 3.0).unwrap(), e.value(3, 1.0).unwrap());
        assert!((b - (fp - fm) / (fp + fm)).abs() < 1e-9);
    }

    #[test]
    fn betting_function_examples() {
        let kt = PotentialFamily::kt(1.0).unwrap();
        let e = PotentialFamily::exponential(1.0).unwrap();
        assert_eq!(kt.betting_function(1, 0.0).unwrap(), 0.0);
        let h = e.betting_function(2, 1.0).unwrap();
        assert!((h - 0.761_902_386_730_054_2).abs() < 1e-12, "{h}");
        assert!((kt.betting_function(2, 1.0).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn regret_bound_examples() {
        assert_eq!(regret_bound(1.0, 57, 0.0), 1.0);
        let b = regret_bound(1.0, 100, 1.0);
        assert!((b - 36.197_156_659_284_445).abs() < 1e-9, "{b}");
        let b = regret_bound(1.0, 3000, 10f64.sqrt());
        assert!(b.is_finite() && b > 0.0);
    }

    #[test]
    fn exponential_inequality_fails_only_at_first_round() {
        // F_0 = eps but F_1(c) = eps * exp(c^2 / 2) > eps for c != 0, so the
        // potential inequality cannot hold at t = 1 for this family.
        let e = PotentialFamily::exponential(1.0).unwrap();
        let lhs = (1.0 + 1.0 * e.betting_fraction(1, 0.0).unwrap()) * e.value(0, 0.0).unwrap();
        assert!(lhs < e.value(1, 1.0).unwrap());
    }

    #[test]
    fn excellent_condition_spot_check() {
        // x F''(x) >= F'(x) on [0, t), by central finite differences
        for f in families() {
            for t in [2usize, 5, 20, 100] {
                for i in 1..10 {
                    let x = t as f64 * f64::from(i) / 10.0;
                    let h = 1e-4;
                    let fx = |y: f64| f.value(t, y).unwrap();
                    let d1 = (fx(x + h) - fx(x - h)) / (2.0 * h);
                    let d2 = (fx(x + h) - 2.0 * fx(x) + fx(x - h)) / (h * h);
                    assert!(
                        x * d2 >= d1 * (1.0 - 1e-4),
                        "{f} t={t} x={x}: {} < {d1}",
                        x * d2
                    );
                }
            }
        }
    }

    fn in_domain() -> impl Strategy<Value = (usize, f64)> {
        (1usize..400)
            .prop_flat_map(|t| (Just(t), -1.0..=1.0f64).prop_map(|(t, u)| (t, u * t as f64)))
    }

    proptest! {
        #[test]
        fn potentials_are_even((t, x) in in_domain()) {
            for f in families() {
                let (a, b) = (f.log_value(t, x).unwrap(), f.log_value(t, -x).unwrap());
                prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
            }
        }

        #[test]
        fn betting_functions_are_odd((t, x) in in_domain()) {
            let x = x * (t - 1) as f64 / t as f64;
            for f in families() {
                let (a, b) = (f.betting_function(t, x).unwrap(), f.betting_function(t, -x).unwrap());
                prop_assert!((a + b).abs() <= 1e-10 * a.abs().max(1e-300));
            }
        }

        #[test]
        fn fraction_matches_ratio_definition(t in 1usize..200, u in -1.0..=1.0f64) {
            let x = u * (t - 1) as f64;
            for f in families() {
                let lp = f.log_value(t, x + 1.0).unwrap();
                let lm = f.log_value(t, x - 1.0).unwrap();
                // (e^a - e^b) / (e^a + e^b) = tanh((a - b) / 2)
                let ratio = ((lp - lm) / 2.0).tanh();
                prop_assert!((f.betting_fraction(t, x).unwrap() - ratio).abs() < 1e-9);
            }
        }
    }
}
