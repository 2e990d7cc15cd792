//! Curve fitting of the logical-error ansatz `eps_L = A n (B eps)^gamma_n`,
//! the two-noise-parameter variant, effective-distance extraction, and the
//! qubit-count planner built on the fitted model.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::RuleError;

/// One measured point for the ansatz fit. `sigma_ln` is the standard
/// deviation of `ln eps_l` (from the confidence interval); censored points
/// (no observed flips) are kept for plotting but never fitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub n: usize,
    pub eps: f64,
    pub eps_l: f64,
    pub sigma_ln: f64,
    pub censored: bool,
}

impl FitPoint {
    pub fn from_estimate(n: usize, eps: f64, est: &crate::montecarlo::LogicalRateEstimate) -> Self {
        let censored = est.censored || est.eps_l <= 0.0;
        let sigma_ln = if censored || est.ci_low <= 0.0 {
            1.0
        } else {
            // Half the CI width in log space, floored to keep weights sane.
            (libm::log(est.ci_high) - libm::log(est.ci_low)) / (2.0 * 1.96)
        }
        .max(1e-3);
        FitPoint { n, eps, eps_l: est.eps_l, sigma_ln, censored }
    }
}

/// Fitted ansatz parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Global amplitude `A`.
    pub amplitude: f64,
    /// Scale `B`; `1/B` is the fitted threshold estimate.
    pub scale: f64,
    /// Per-size effective distance `gamma_n`, sorted by `n`.
    pub gamma: Vec<(usize, f64)>,
    pub residual_rms: f64,
    pub iterations: u32,
}

impl FitResult {
    pub fn gamma_for(&self, n: usize) -> Option<f64> {
        self.gamma.iter().find(|(m, _)| *m == n).map(|(_, g)| *g)
    }

    pub fn threshold_estimate(&self) -> f64 {
        1.0 / self.scale
    }

    /// `gamma_n` at an arbitrary size by monotone piecewise-linear
    /// interpolation; sizes beyond the fitted range extrapolate on the last
    /// segment and are flagged.
    pub fn gamma_extended(&self, n: usize) -> Option<(f64, bool)> {
        if self.gamma.is_empty() {
            return None;
        }
        let x = n as f64;
        let first = self.gamma[0];
        let last = *self.gamma.last().unwrap();
        if n <= first.0 {
            return Some((first.1, n < first.0));
        }
        if n >= last.0 {
            if n == last.0 {
                return Some((last.1, false));
            }
            if self.gamma.len() == 1 {
                return Some((last.1, true));
            }
            let prev = self.gamma[self.gamma.len() - 2];
            let slope =
                ((last.1 - prev.1) / (last.0 as f64 - prev.0 as f64)).max(0.0);
            return Some((last.1 + slope * (x - last.0 as f64), true));
        }
        for w in self.gamma.windows(2) {
            let (n0, g0) = w[0];
            let (n1, g1) = w[1];
            if n >= n0 && n <= n1 {
                let f = (x - n0 as f64) / (n1 as f64 - n0 as f64);
                return Some((g0 + f * (g1 - g0), false));
            }
        }
        None
    }

    pub fn predict(&self, n: usize, eps: f64) -> Option<f64> {
        let (g, _) = self.gamma_extended(n)?;
        Some(self.amplitude * n as f64 * libm::pow(self.scale * eps, g))
    }
}

/// Reference effective distance of minimum-weight matching on the
/// repetition code.
pub fn mwpm_gamma(n: usize) -> f64 {
    (n as f64 + 1.0) / 2.0
}

fn distinct_sizes(points: &[FitPoint]) -> Vec<usize> {
    let mut ns: Vec<usize> = points.iter().map(|p| p.n).collect();
    ns.sort_unstable();
    ns.dedup();
    ns
}

/// Weighted least squares of the log ansatz
/// `ln eps_l = ln A + ln n + gamma_n (ln eps + ln B)`, solved by
/// alternating closed-form updates of `(A, B)` and the per-size exponents,
/// with a damped step when the residual grows.
pub fn fit_ansatz(points: &[FitPoint]) -> Result<FitResult, RuleError> {
    let usable: Vec<&FitPoint> = points.iter().filter(|p| !p.censored && p.eps_l > 0.0).collect();
    let sizes = distinct_sizes(&usable.iter().map(|p| **p).collect::<Vec<_>>());
    if sizes.len() < 2 {
        return Err(RuleError::Degenerate("ansatz fit needs at least two sizes"));
    }
    for &n in &sizes {
        let mut rates: Vec<f64> = usable.iter().filter(|p| p.n == n).map(|p| p.eps).collect();
        rates.sort_by(|a, b| a.partial_cmp(b).unwrap());
        rates.dedup();
        if rates.len() < 2 {
            return Err(RuleError::Degenerate("ansatz fit needs two error rates per size"));
        }
    }

    // Initialization: independent per-size lines ln eps_l = a_n + g_n ln eps,
    // then ln A and ln B from regressing a_n - ln n on g_n.
    let mut gammas: Vec<(usize, f64)> = Vec::new();
    let mut anchors: Vec<(f64, f64)> = Vec::new(); // (g_n, a_n - ln n)
    for &n in &sizes {
        let pts: Vec<(f64, f64, f64)> = usable
            .iter()
            .filter(|p| p.n == n)
            .map(|p| (libm::log(p.eps), libm::log(p.eps_l), 1.0 / (p.sigma_ln * p.sigma_ln)))
            .collect();
        let (a, g) = weighted_line(&pts)?;
        gammas.push((n, g));
        anchors.push((g, a - libm::log(n as f64)));
    }
    let line: Vec<(f64, f64, f64)> = anchors.iter().map(|&(g, c)| (g, c, 1.0)).collect();
    let (ln_a, ln_b) = weighted_line(&line)?;

    let mut ln_a = ln_a;
    let mut ln_b = ln_b;
    let residual = |ln_a: f64, ln_b: f64, gammas: &[(usize, f64)]| -> f64 {
        let mut sum = 0.0;
        let mut wsum = 0.0;
        for p in &usable {
            let g = gammas.iter().find(|(m, _)| *m == p.n).unwrap().1;
            let pred = ln_a + libm::log(p.n as f64) + g * (libm::log(p.eps) + ln_b);
            let w = 1.0 / (p.sigma_ln * p.sigma_ln);
            let r = libm::log(p.eps_l) - pred;
            sum += w * r * r;
            wsum += w;
        }
        sum / wsum
    };

    let mut best = residual(ln_a, ln_b, &gammas);
    let mut iterations = 0u32;
    loop {
        iterations += 1;
        // Per-size exponents with (A, B) fixed.
        let mut new_gammas = Vec::with_capacity(sizes.len());
        for &n in &sizes {
            let mut sxx = 0.0;
            let mut sxy = 0.0;
            for p in usable.iter().filter(|p| p.n == n) {
                let x = libm::log(p.eps) + ln_b;
                let y = libm::log(p.eps_l) - ln_a - libm::log(p.n as f64);
                let w = 1.0 / (p.sigma_ln * p.sigma_ln);
                sxx += w * x * x;
                sxy += w * x * y;
            }
            if sxx == 0.0 {
                return Err(RuleError::Degenerate("no spread in error rates for one size"));
            }
            new_gammas.push((n, sxy / sxx));
        }
        // Amplitude with exponents fixed.
        let mut num = 0.0;
        let mut den = 0.0;
        for p in &usable {
            let g = new_gammas.iter().find(|(m, _)| *m == p.n).unwrap().1;
            let w = 1.0 / (p.sigma_ln * p.sigma_ln);
            num += w * (libm::log(p.eps_l) - libm::log(p.n as f64) - g * (libm::log(p.eps) + ln_b));
            den += w;
        }
        let new_ln_a = num / den;
        // Scale with exponents and amplitude fixed.
        let mut num = 0.0;
        let mut den = 0.0;
        for p in &usable {
            let g = new_gammas.iter().find(|(m, _)| *m == p.n).unwrap().1;
            let w = 1.0 / (p.sigma_ln * p.sigma_ln);
            num += w * g * (libm::log(p.eps_l) - new_ln_a - libm::log(p.n as f64) - g * libm::log(p.eps));
            den += w * g * g;
        }
        let new_ln_b = num / den;

        let mut cand = (new_ln_a, new_ln_b, new_gammas.clone());
        let mut r = residual(cand.0, cand.1, &cand.2);
        if r > best {
            // Damped update.
            cand.0 = 0.5 * (ln_a + new_ln_a);
            cand.1 = 0.5 * (ln_b + new_ln_b);
            for (c, old) in cand.2.iter_mut().zip(&gammas) {
                c.1 = 0.5 * (c.1 + old.1);
            }
            r = residual(cand.0, cand.1, &cand.2);
        }
        let delta = (cand.0 - ln_a).abs().max((cand.1 - ln_b).abs()).max(
            cand.2
                .iter()
                .zip(&gammas)
                .map(|(a, b)| (a.1 - b.1).abs())
                .fold(0.0, f64::max),
        );
        ln_a = cand.0;
        ln_b = cand.1;
        gammas = cand.2;
        best = best.min(r);
        if delta < 1e-8 * (1.0 + ln_a.abs().max(ln_b.abs())) || iterations >= 10_000 {
            break;
        }
    }

    Ok(FitResult {
        amplitude: libm::exp(ln_a),
        scale: libm::exp(ln_b),
        gamma: gammas,
        residual_rms: libm::sqrt(best),
        iterations,
    })
}

/// Weighted straight-line fit `y = a + b x` over `(x, y, w)` triples.
fn weighted_line(pts: &[(f64, f64, f64)]) -> Result<(f64, f64), RuleError> {
    let mut sw = 0.0;
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y, w) in pts {
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let det = sw * sxx - sx * sx;
    if det.abs() < 1e-30 || pts.len() < 2 {
        return Err(RuleError::Degenerate("rank-deficient line fit"));
    }
    let b = (sw * sxy - sx * sy) / det;
    let a = (sy - b * sx) / sw;
    Ok((a, b))
}

/// Unweighted coefficient of determination of `y = a + b x`.
pub fn linear_fit_r2(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64), RuleError> {
    let pts: Vec<(f64, f64, f64)> = xs.iter().zip(ys).map(|(&x, &y)| (x, y, 1.0)).collect();
    let (a, b) = weighted_line(&pts)?;
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let r = y - (a + b * x);
        ss_res += r * r;
        ss_tot += (y - mean) * (y - mean);
    }
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok((a, b, r2))
}

/// One measured point of the two-noise sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoNoisePoint {
    pub n: usize,
    pub eps_d: f64,
    pub eps_m: f64,
    pub eps_l: f64,
    pub sigma_ln: f64,
    pub censored: bool,
}

/// Fit of `eps_l = A_n (eps_d + eps_m / m)^gamma_n` with the exponents
/// supplied from the single-noise fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoNoiseFit {
    /// Per-size amplitude `A_n`.
    pub amplitudes: Vec<(usize, f64)>,
    /// Measurement-error weight `m` in `eps_d + eps_m / m`.
    pub meas_weight: f64,
    pub residual_rms: f64,
}

impl TwoNoiseFit {
    /// Iso-`eps_l` contour for one size: the line
    /// `eps_d + eps_m / m = (eps_l / A_n)^(1/gamma_n)` sampled over
    /// `eps_d in [0, limit]`.
    pub fn contour(
        &self,
        n: usize,
        gamma_n: f64,
        target: f64,
        samples: usize,
    ) -> Option<Vec<(f64, f64)>> {
        let a_n = self.amplitudes.iter().find(|(m, _)| *m == n).map(|(_, a)| *a)?;
        let level = libm::pow(target / a_n, 1.0 / gamma_n);
        let mut out = Vec::with_capacity(samples);
        for i in 0..samples {
            let eps_d = level * i as f64 / (samples - 1).max(1) as f64;
            let eps_m = (level - eps_d) * self.meas_weight;
            out.push((eps_d, eps_m));
        }
        Some(out)
    }
}

pub fn fit_two_noise(
    points: &[TwoNoisePoint],
    gamma: &[(usize, f64)],
) -> Result<TwoNoiseFit, RuleError> {
    let usable: Vec<&TwoNoisePoint> =
        points.iter().filter(|p| !p.censored && p.eps_l > 0.0).collect();
    if usable.len() < 3 {
        return Err(RuleError::Degenerate("two-noise fit needs at least three points"));
    }
    let gamma_for = |n: usize| -> Option<f64> {
        gamma.iter().find(|(m, _)| *m == n).map(|(_, g)| *g)
    };
    for p in &usable {
        if gamma_for(p.n).is_none() {
            return Err(RuleError::Degenerate("missing exponent for a fitted size"));
        }
    }
    let sizes = {
        let mut ns: Vec<usize> = usable.iter().map(|p| p.n).collect();
        ns.sort_unstable();
        ns.dedup();
        ns
    };

    // With m fixed the problem is linear: ln A_n is a per-size weighted
    // mean. Optimize m by golden-section search on the weighted residual.
    let eval = |m: f64| -> (f64, Vec<(usize, f64)>) {
        let mut amps = Vec::with_capacity(sizes.len());
        let mut sum = 0.0;
        let mut wsum = 0.0;
        for &n in &sizes {
            let g = gamma_for(n).unwrap();
            let mut num = 0.0;
            let mut den = 0.0;
            for p in usable.iter().filter(|p| p.n == n) {
                let x = libm::log(p.eps_d + p.eps_m / m);
                let w = 1.0 / (p.sigma_ln * p.sigma_ln);
                num += w * (libm::log(p.eps_l) - g * x);
                den += w;
            }
            let ln_a = num / den;
            amps.push((n, libm::exp(ln_a)));
            for p in usable.iter().filter(|p| p.n == n) {
                let x = libm::log(p.eps_d + p.eps_m / m);
                let w = 1.0 / (p.sigma_ln * p.sigma_ln);
                let r = libm::log(p.eps_l) - ln_a - g * x;
                sum += w * r * r;
                wsum += w;
            }
        }
        (sum / wsum, amps)
    };

    let (mut lo, mut hi) = (0.05f64, 20.0f64);
    let phi = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = eval(x1).0;
    let mut f2 = eval(x2).0;
    for _ in 0..200 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = eval(x1).0;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = eval(x2).0;
        }
        if (hi - lo).abs() < 1e-10 {
            break;
        }
    }
    let m = 0.5 * (lo + hi);
    let (res, amps) = eval(m);
    Ok(TwoNoiseFit { amplitudes: amps, meas_weight: m, residual_rms: libm::sqrt(res) })
}

/// Qubit-count plan from a fitted model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitEstimate {
    pub n: usize,
    pub predicted_eps_l: f64,
    /// True when the answer used exponents beyond the fitted sizes.
    pub extrapolated: bool,
}

/// Smallest `n` whose predicted logical rate is at or below the target.
pub fn required_qubits(
    target_eps_l: f64,
    eps: f64,
    fit: &FitResult,
    n_cap: usize,
) -> Result<QubitEstimate, RuleError> {
    if eps * fit.scale >= 1.0 {
        return Err(RuleError::Degenerate("error rate above the fitted threshold"));
    }
    if target_eps_l <= 0.0 {
        return Err(RuleError::InvalidParam("target rate must be positive"));
    }
    let n_min = fit.gamma.first().map(|(n, _)| *n).unwrap_or(3);
    for n in n_min..=n_cap {
        let (g, extrapolated) = fit
            .gamma_extended(n)
            .ok_or(RuleError::Degenerate("empty fit"))?;
        let pred = fit.amplitude * n as f64 * libm::pow(fit.scale * eps, g);
        if pred <= target_eps_l {
            return Ok(QubitEstimate { n, predicted_eps_l: pred, extrapolated });
        }
    }
    Err(RuleError::Degenerate("target unreachable below the size cap"))
}
