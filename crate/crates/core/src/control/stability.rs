use super::FblGains;
use serde::{Deserialize, Serialize};

/// Routh-Hurwitz verdict for one monic characteristic polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopVerdict {
    /// `[a_{n-1}, ..., a_0]` of `s^n + a_{n-1} s^{n-1} + ... + a_0`.
    pub coefficients: Vec<f64>,
    pub stable: bool,
    /// First Routh condition that fails, if any.
    pub violated: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub surge: LoopVerdict,
    pub yaw: LoopVerdict,
}

impl StabilityReport {
    pub fn stable(&self) -> bool {
        self.surge.stable && self.yaw.stable
    }
}

/// First column of the Routh array of a monic polynomial.
pub fn routh_first_column(coefficients: &[f64]) -> Vec<f64> {
    let n = coefficients.len();
    let mut full = Vec::with_capacity(n + 1);
    full.push(1.0);
    full.extend_from_slice(coefficients);
    let width = n / 2 + 1;
    let row = |start: usize| (0..width).map(|j| full.get(start + 2 * j).copied().unwrap_or(0.0)).collect::<Vec<_>>();
    let mut rows = vec![row(0), row(1)];
    while rows.len() < n + 1 {
        let (a, b) = (&rows[rows.len() - 2], &rows[rows.len() - 1]);
        if b[0] == 0.0 {
            // A zero pivot already decides the verdict; stop the array here.
            break;
        }
        let next = (0..width)
            .map(|j| {
                let a1 = a.get(j + 1).copied().unwrap_or(0.0);
                let b1 = b.get(j + 1).copied().unwrap_or(0.0);
                (b[0] * a1 - a[0] * b1) / b[0]
            })
            .collect();
        rows.push(next);
    }
    rows.iter().map(|r| r[0]).collect()
}

fn named_conditions(c: &[f64]) -> Vec<(String, bool)> {
    match c {
        [a1, a0] => vec![("a1 > 0".into(), *a1 > 0.0), ("a0 > 0".into(), *a0 > 0.0)],
        [a2, a1, a0] => vec![
            ("a2 > 0".into(), *a2 > 0.0),
            ("a0 > 0".into(), *a0 > 0.0),
            ("a2*a1 > a0".into(), a2 * a1 > *a0),
        ],
        _ => routh_first_column(c)
            .iter()
            .enumerate()
            .map(|(i, v)| (format!("routh column entry {i} > 0"), *v > 0.0))
            .collect(),
    }
}

/// Verdict for a monic polynomial; every root lies strictly in the left half-plane
/// exactly when all conditions hold.
pub fn routh_verdict(coefficients: &[f64]) -> LoopVerdict {
    let conditions = named_conditions(coefficients);
    let violated = conditions.iter().find(|(_, ok)| !ok).map(|(name, _)| name.clone());
    let full_column = routh_first_column(coefficients);
    let stable = violated.is_none() && full_column.len() == coefficients.len() + 1 && full_column.iter().all(|v| *v > 0.0);
    LoopVerdict { coefficients: coefficients.to_vec(), stable, violated }
}

/// Closed-loop characteristic polynomials of the surge and yaw loops.
pub fn characteristic_polynomials(g: &FblGains) -> (Vec<f64>, Vec<f64>) {
    let (wu, ww) = (g.omega_c_u, g.omega_c_w);
    let su = g.beta_u.max(0.0).sqrt();
    let sw = g.beta_w.max(0.0).sqrt();
    (vec![2.0 * su * wu, wu * wu], vec![sw * ww, sw * ww * ww, ww * ww * ww])
}

pub fn stability_check(g: &FblGains) -> StabilityReport {
    let (u, w) = characteristic_polynomials(g);
    StabilityReport { surge: routh_verdict(&u), yaw: routh_verdict(&w) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gains(wu: f64, bu: f64, ww: f64, bw: f64) -> FblGains {
        FblGains { omega_c_u: wu, beta_u: bu, omega_c_w: ww, beta_w: bw, ..Default::default() }
    }

    #[test]
    fn nominal_gains_are_stable() {
        assert!(stability_check(&gains(1.0, 2.0, 1.0, 4.0)).stable());
        assert!(stability_check(&FblGains::default()).stable());
    }

    #[test]
    fn unit_yaw_ratio_is_marginal() {
        let r = stability_check(&gains(1.0, 2.0, 1.0, 1.0));
        assert!(r.surge.stable);
        assert!(!r.yaw.stable);
        assert_eq!(r.yaw.violated.as_deref(), Some("a2*a1 > a0"));
    }

    #[test]
    fn cubic_first_column() {
        let col = routh_first_column(&[2.0, 3.0, 1.0]);
        assert_eq!(col, vec![1.0, 2.0, 2.5, 1.0]);
    }
}
