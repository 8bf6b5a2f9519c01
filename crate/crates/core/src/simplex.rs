//! Operations on a single (possibly perturbed) probability simplex
//! `Δ^γ = { q : q_i ≥ γ, Σ q_i = 1 }`.

use crate::{Error, Result};

/// Rejects perturbations for which `Δ^γ` over `actions` entries is empty.
pub fn check_gamma(gamma: f64, actions: usize) -> Result<()> {
    if !(gamma >= 0.0) || gamma * actions as f64 > 1.0 + 1e-12 || actions == 0 {
        return Err(Error::InfeasibleGamma { gamma, actions });
    }
    Ok(())
}

/// Euclidean projection of `v` onto `Δ^γ`.
///
/// Shifts by `γ`, projects onto the scaled simplex `{w ≥ 0, Σ w = 1 − nγ}`
/// with the sort-and-threshold rule, and shifts back.
pub fn project_gamma_simplex(v: &[f64], gamma: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; v.len()];
    project_into(v, gamma, &mut out)?;
    Ok(out)
}

/// Same as [`project_gamma_simplex`] but writes into `out`.
pub fn project_into(v: &[f64], gamma: f64, out: &mut [f64]) -> Result<()> {
    let n = v.len();
    check_gamma(gamma, n)?;
    if out.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: out.len(),
        });
    }
    let radius = (1.0 - gamma * n as f64).max(0.0);
    if radius == 0.0 {
        out.iter_mut().for_each(|o| *o = gamma);
        return Ok(());
    }
    if n == 1 {
        out[0] = 1.0;
        return Ok(());
    }

    let mut sorted: Vec<f64> = v.iter().map(|x| x - gamma).collect();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - radius) / (k + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        } else {
            break;
        }
    }
    for (o, x) in out.iter_mut().zip(v) {
        *o = (x - gamma - theta).max(0.0) + gamma;
    }
    Ok(())
}

/// Minimizes (or maximizes) `⟨v, q⟩` over `Δ^γ`: mass `γ` everywhere and the
/// remaining `1 − γn` on the best entry. Ties go to the lowest index.
/// Returns the optimal value and writes the optimizer into `q`.
pub fn linear_opt(v: &[f64], gamma: f64, maximize: bool, q: &mut [f64]) -> f64 {
    let n = v.len();
    let mut best = 0;
    for i in 1..n {
        let better = if maximize {
            v[i] > v[best]
        } else {
            v[i] < v[best]
        };
        if better {
            best = i;
        }
    }
    let rest = 1.0 - gamma * n as f64;
    let mut value = 0.0;
    for i in 0..n {
        q[i] = if i == best { gamma + rest } else { gamma };
        value += q[i] * v[i];
    }
    value
}
