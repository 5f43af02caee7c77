//! Exact coverage probability from stochastic geometry.
//!
//! Coverage is the sum over serving link types `v` of
//! `∫ P[SINR > T | R_S = r, v] f_v(r) dr`. The serving-distance density uses
//! the exclusion sets directly (the densities are piecewise constant, so those
//! integrals are exact). The conditional coverage of a Nakagami-m link with
//! integer `m` is a finite combination of derivatives of the interference
//! Laplace transform, which is evaluated by quadrature over the complement of
//! the exclusion sets.

use std::f64::consts::PI;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{ConfigError, ModelError, NumericError};
use crate::exclusion::{exclusion_sets, StrongerSets};
use crate::model::{LinkType, Scenario, DEFAULT_GROUND_TAIL_TOL};
use crate::quadrature::{integrate_panels, split_at, QuadOptions};
use crate::region::RegionSet;

pub use crate::exclusion::ServingContext;

/// Largest Nakagami parameter supported by the analytic engine.
pub const MAX_ANALYTIC_M: u32 = 10;

/// Serving densities below this (per meter, times the domain radius) are
/// treated as zero and skip the Laplace evaluation.
const NEGLIGIBLE_MASS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    /// Relative tolerance of every inner integral.
    pub rel_tol: f64,
    /// Absolute tolerance on final probabilities.
    pub abs_tol: f64,
    /// Fixed ground-user truncation radius, meters. When absent it is chosen
    /// from `ground_tail_tol`.
    pub truncation_radius_m: Option<f64>,
    pub ground_tail_tol: f64,
    /// Split integration panels at LoS steps and gain boundaries.
    pub split_at_breakpoints: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-5,
            truncation_radius_m: None,
            ground_tail_tol: DEFAULT_GROUND_TAIL_TOL,
            split_at_breakpoints: true,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (field, v) in [
            ("quadrature.rel_tol", self.rel_tol),
            ("quadrature.abs_tol", self.abs_tol),
            ("quadrature.ground_tail_tol", self.ground_tail_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::new(field, "must be positive and finite"));
            }
        }
        if let Some(r) = self.truncation_radius_m {
            if !(r.is_finite() && r > 0.0) {
                return Err(ConfigError::new("quadrature.truncation_radius_m", "must be positive and finite"));
            }
        }
        Ok(())
    }

    /// Builds the scenario with the truncation policy of this spec.
    pub fn scenario(&self, cfg: &ScenarioConfig) -> Result<Scenario, ConfigError> {
        self.validate()?;
        match self.truncation_radius_m {
            Some(r) => Scenario::with_truncation_radius(cfg, r),
            None => Scenario::with_tail_tolerance(cfg, self.ground_tail_tol),
        }
    }

    fn inner(&self) -> QuadOptions {
        QuadOptions {
            rel_tol: self.rel_tol,
            abs_tol: 0.0,
            max_intervals: 4000,
            parallel: false,
        }
    }

    fn outer(&self) -> QuadOptions {
        QuadOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_intervals: 4000,
            parallel: true,
        }
    }
}

/// Laplace transform of the conditional interference and its derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceEval {
    pub s: f64,
    /// `L(s)`.
    pub value: f64,
    /// `ln L(s)`, accurate even when `L` is within rounding of 1 or underflows.
    pub log_value: f64,
    /// `d^k L / ds^k` for `k = 0..=k_max`; `derivatives[0] == value`.
    pub derivatives: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageReport {
    pub coverage: f64,
    /// Coverage contributed by LoS and NLoS servers.
    pub by_link: [f64; 2],
    /// Probability that some base station can serve the user.
    pub served_probability: f64,
}

impl CoverageReport {
    /// Mass with no serving base station (counted as outage).
    pub fn no_server_probability(&self) -> f64 {
        (1.0 - self.served_probability).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceSummary {
    pub served_probability: f64,
    /// Mean serving ground distance over realizations with a server.
    pub mean_serving_distance: f64,
    /// Mean interference conditioned on the serving BS at the mean serving
    /// distance, averaged over its link type.
    pub conditional_at_mean_distance: f64,
    /// Mean interference over realizations with a server.
    pub mean_interference: f64,
}

/// `P_tx g(r) ζ_ξ(r)`: mean received power from a BS at `r`.
fn mean_rx(scenario: &Scenario, r: f64, xi: LinkType) -> f64 {
    scenario.p_tx() * scenario.bs_gain(r) * scenario.path_loss_unchecked(r, xi)
}

/// Per-interferer Laplace factor `(m / (m + s c))^m` of a Nakagami-faded
/// received power with mean `c = P_tx g(r) ζ_ξ(r)`.
pub fn upsilon(r: f64, s: f64, xi: LinkType, scenario: &Scenario) -> f64 {
    let m = scenario.fading_m(xi) as f64;
    let c = mean_rx(scenario, r, xi);
    (m / (m + s * c)).powf(m)
}

/// `∂^j Υ_ξ / ∂s^j` for `j = 0..=k_max`.
pub fn upsilon_derivatives(r: f64, s: f64, xi: LinkType, scenario: &Scenario, k_max: usize) -> Vec<f64> {
    let c = mean_rx(scenario, r, xi);
    let mut out = vec![0.0; k_max + 1];
    upsilon_terms(c, s, scenario.fading_m(xi), &mut out);
    // upsilon_terms stores 1 - Υ in slot 0
    out[0] = 1.0 - out[0];
    out
}

/// Fills `out[0] = 1 - Υ` and `out[j] = ∂^j Υ / ∂s^j` for `j ≥ 1`, using
/// `∂^j Υ = Υ · Π_{i<j} (-c (m + i) / (m + s c))`.
fn upsilon_terms(c: f64, s: f64, m: u32, out: &mut [f64]) {
    let mf = m as f64;
    let x = s * c;
    let log_ups = -mf * (x / mf).ln_1p();
    let ups = log_ups.exp();
    out[0] = -log_ups.exp_m1();
    let mut d = ups;
    for (j, o) in out.iter_mut().enumerate().skip(1) {
        d *= -c * (mf + (j - 1) as f64) / (mf + x);
        *o = d;
    }
}

/// Discontinuities of the integrands in `(lo, hi)`: LoS-probability steps,
/// mainlobe edges and the footprint radius.
fn breakpoints(scenario: &Scenario, lo: f64, hi: f64) -> Vec<f64> {
    let mut bps = scenario.los_breakpoints(lo, hi);
    for iv in scenario.mainlobe_region().intervals() {
        bps.push(iv.lo);
        bps.push(iv.hi);
    }
    bps.push(scenario.r_max());
    bps.retain(|&x| x.is_finite() && x > lo && x < hi);
    bps
}

fn panels(set: &RegionSet, scenario: &Scenario, quad: &QuadratureSpec) -> Vec<(f64, f64)> {
    let outer = scenario.outer_radius();
    let mut out = Vec::new();
    for iv in set.clip(0.0, outer).intervals() {
        if quad.split_at_breakpoints {
            out.extend(split_at(iv.lo, iv.hi, &breakpoints(scenario, iv.lo, iv.hi)));
        } else {
            out.push((iv.lo, iv.hi));
        }
    }
    out
}

fn check_fading_order(scenario: &Scenario, link: LinkType) -> Result<(), NumericError> {
    let m = scenario.fading_m(link);
    if m > MAX_ANALYTIC_M {
        Err(NumericError::FadingOrderTooLarge(m))
    } else {
        Ok(())
    }
}

/// Serving-distance density of a type-`v` server at `r_s`: the density of a
/// type-`v` BS at `r_s` times the void probabilities of both exclusion sets.
pub fn serving_pdf(serving: &ServingContext, scenario: &Scenario) -> f64 {
    let sets = exclusion_sets(serving, scenario);
    serving_pdf_with(serving, &sets, scenario)
}

fn serving_pdf_with(serving: &ServingContext, sets: &StrongerSets, scenario: &Scenario) -> f64 {
    let lam = scenario.density(serving.r_s, serving.link);
    if lam == 0.0 {
        return 0.0;
    }
    let exponent: f64 = LinkType::ALL
        .iter()
        .map(|&xi| scenario.region_density_moment(sets.set(xi), xi))
        .sum();
    2.0 * PI * lam * serving.r_s * (-2.0 * PI * exponent).exp()
}

/// Laplace transform of the interference conditioned on `serving`, with
/// derivatives up to order `k_max`.
///
/// With `G(s) = -2π Σ_ξ ∫ λ_ξ(r) [1 - Υ_ξ(r, s)] r dr` over the interferer
/// domains, `L = exp(G)` and `L^(k) = Σ_{j<k} C(k-1, j) G^(k-j) L^(j)`.
pub fn laplace_interference(
    serving: &ServingContext,
    s: f64,
    scenario: &Scenario,
    quad: &QuadratureSpec,
    k_max: usize,
) -> Result<LaplaceEval, NumericError> {
    let sets = exclusion_sets(serving, scenario);
    laplace_with(&sets, s, scenario, quad, k_max)
}

fn laplace_with(
    sets: &StrongerSets,
    s: f64,
    scenario: &Scenario,
    quad: &QuadratureSpec,
    k_max: usize,
) -> Result<LaplaceEval, NumericError> {
    let dim = k_max + 1;
    let mut g = vec![0.0; dim];
    for xi in LinkType::ALL {
        if xi == LinkType::Nlos && scenario.nlos_suppressed() {
            continue;
        }
        let domain = sets.complement(xi, scenario);
        let pan = panels(&domain, scenario, quad);
        if pan.is_empty() {
            continue;
        }
        let m = scenario.fading_m(xi);
        let integrand = |r: f64, out: &mut [f64]| {
            let lam = scenario.density(r, xi);
            if lam == 0.0 {
                out.fill(0.0);
                return;
            }
            upsilon_terms(mean_rx(scenario, r, xi), s, m, out);
            let w = lam * r;
            out.iter_mut().for_each(|o| *o *= w);
        };
        let res = integrate_panels(integrand, &pan, dim, &quad.inner())?;
        g[0] -= 2.0 * PI * res.values[0];
        for (gj, v) in g.iter_mut().zip(&res.values).skip(1) {
            *gj += 2.0 * PI * v;
        }
    }

    let mut d = vec![0.0; dim];
    d[0] = g[0].exp();
    for k in 1..dim {
        let mut acc = 0.0;
        let mut binom = 1.0; // C(k-1, j)
        for j in 0..k {
            acc += binom * g[k - j] * d[j];
            binom = binom * (k - 1 - j) as f64 / (j + 1) as f64;
        }
        d[k] = acc;
    }
    Ok(LaplaceEval {
        s,
        value: d[0],
        log_value: g[0],
        derivatives: d,
    })
}

/// Coverage probability conditioned on the serving BS.
///
/// `Σ_{k<m} (-1)^k q_k L^(k)(s)` with `s = m T / (P_tx g ζ_v(r_s))` and
/// `q_k = e^{-N0 s}/k! Σ_{j=k}^{m-1} N0^{j-k} s^j / (j-k)!`.
pub fn conditional_coverage(
    serving: &ServingContext,
    scenario: &Scenario,
    quad: &QuadratureSpec,
) -> Result<f64, NumericError> {
    let sets = exclusion_sets(serving, scenario);
    conditional_coverage_with(serving, &sets, scenario, quad)
}

fn conditional_coverage_with(
    serving: &ServingContext,
    sets: &StrongerSets,
    scenario: &Scenario,
    quad: &QuadratureSpec,
) -> Result<f64, NumericError> {
    check_fading_order(scenario, serving.link)?;
    let m = scenario.fading_m(serving.link) as usize;
    let s = m as f64 * scenario.threshold() / serving.serving_signal;
    let lap = laplace_with(sets, s, scenario, quad, m - 1)?;
    Ok(coverage_from_laplace(&lap, scenario.noise(), m))
}

fn coverage_from_laplace(lap: &LaplaceEval, n0: f64, m: usize) -> f64 {
    let s = lap.s;
    let y = n0 * s;
    // q_k L^(k) = e^{-y} [Σ_{i ≤ m-1-k} y^i / i!] · s^k L^(k) / k!
    let mut noise_poly = vec![0.0; m];
    let mut term = 1.0;
    let mut acc = 0.0;
    for (i, slot) in noise_poly.iter_mut().enumerate() {
        if i > 0 {
            term *= y / i as f64;
        }
        acc += term;
        *slot = acc;
    }
    let mut total = 0.0;
    let mut s_pow = 1.0; // s^k / k!
    for k in 0..m {
        if k > 0 {
            s_pow *= s / k as f64;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * noise_poly[m - 1 - k] * s_pow * lap.derivatives[k];
    }
    ((-y).exp() * total).clamp(0.0, 1.0)
}

/// Mean interference given the serving BS: `-L'(0)`.
pub fn mean_conditional_interference(
    serving: &ServingContext,
    scenario: &Scenario,
    quad: &QuadratureSpec,
) -> Result<f64, NumericError> {
    let lap = laplace_interference(serving, 0.0, scenario, quad, 1)?;
    Ok(-lap.derivatives[1])
}

fn outer_panels(scenario: &Scenario, quad: &QuadratureSpec) -> Vec<(f64, f64)> {
    let outer = scenario.outer_radius();
    if !quad.split_at_breakpoints {
        return vec![(0.0, outer)];
    }
    let mut bps = breakpoints(scenario, 0.0, outer);
    if !scenario.is_drone() {
        // resolve the decay of the serving density on the scale of the
        // typical nearest-BS distance
        let scale = 1.0 / (PI * scenario.lambda()).sqrt();
        bps.extend([0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0].map(|k| k * scale));
    }
    split_at(0.0, outer, &bps)
}

/// Runs the outer integral over the serving distance. `per_server` maps a
/// serving context and its exclusion sets (given a non-negligible density) to
/// `dim` values that are weighted by the density.
fn integrate_servers<F>(scenario: &Scenario, quad: &QuadratureSpec, dim: usize, per_server: F) -> Result<Vec<f64>, NumericError>
where
    F: Fn(&ServingContext, &StrongerSets, f64, &mut [f64]) -> Result<(), NumericError> + Sync,
{
    let failure: Mutex<Option<NumericError>> = Mutex::new(None);
    let outer = scenario.outer_radius();
    let integrand = |r_s: f64, out: &mut [f64]| {
        out.fill(0.0);
        for v in LinkType::ALL {
            if scenario.density(r_s, v) == 0.0 {
                continue;
            }
            let serving = match ServingContext::new(scenario, r_s, v) {
                Ok(sv) => sv,
                Err(ModelError::NoSignal(_)) => continue,
                Err(e) => {
                    failure.lock().unwrap().get_or_insert(e.into());
                    continue;
                }
            };
            let sets = exclusion_sets(&serving, scenario);
            let f = serving_pdf_with(&serving, &sets, scenario);
            if f * outer < NEGLIGIBLE_MASS {
                continue;
            }
            if let Err(e) = per_server(&serving, &sets, f, out) {
                failure.lock().unwrap().get_or_insert(e);
            }
        }
    };
    let res = integrate_panels(integrand, &outer_panels(scenario, quad), dim, &quad.outer())?;
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(res.values)
}

/// Exact coverage probability. For drones, realizations without any BS in the
/// antenna footprint count as outage.
pub fn coverage_probability(scenario: &Scenario, quad: &QuadratureSpec) -> Result<CoverageReport, NumericError> {
    for v in LinkType::ALL {
        if !(v == LinkType::Nlos && scenario.nlos_suppressed()) {
            check_fading_order(scenario, v)?;
        }
    }
    let vals = integrate_servers(scenario, quad, 4, |serving, sets, f, out| {
        let i = serving.link.index();
        out[2 + i] += f;
        out[i] += f * conditional_coverage_with(serving, sets, scenario, quad)?;
        Ok(())
    })?;
    Ok(CoverageReport {
        coverage: (vals[0] + vals[1]).clamp(0.0, 1.0),
        by_link: [vals[0], vals[1]],
        served_probability: (vals[2] + vals[3]).min(1.0),
    })
}

/// LoS-only, noiseless drone approximation: the exact expression evaluated
/// with the NLoS density and the noise set to zero.
pub fn drone_coverage_approx(scenario: &Scenario, quad: &QuadratureSpec) -> Result<CoverageReport, NumericError> {
    if !scenario.is_drone() {
        return Err(ModelError::ClosedFormUnavailable.into());
    }
    coverage_probability(&theorem2_scenario(scenario), quad)
}

/// The scenario the drone approximation evaluates.
pub fn theorem2_scenario(scenario: &Scenario) -> Scenario {
    scenario.with_nlos_suppressed().with_noise_linear(0.0)
}

/// Serving-distance and interference statistics used by the altitude profile.
pub fn interference_summary(scenario: &Scenario, quad: &QuadratureSpec) -> Result<InterferenceSummary, NumericError> {
    let vals = integrate_servers(scenario, quad, 3, |serving, sets, f, out| {
        out[0] += f;
        out[1] += f * serving.r_s;
        let lap = laplace_with(sets, 0.0, scenario, quad, 1)?;
        out[2] += f * -lap.derivatives[1];
        Ok(())
    })?;
    let served = vals[0];
    if served <= 0.0 {
        return Ok(InterferenceSummary {
            served_probability: 0.0,
            mean_serving_distance: 0.0,
            conditional_at_mean_distance: 0.0,
            mean_interference: 0.0,
        });
    }
    let r_bar = vals[1] / served;
    let mut weight = 0.0;
    let mut acc = 0.0;
    for v in LinkType::ALL {
        if let Ok(serving) = ServingContext::new(scenario, r_bar, v) {
            let f = serving_pdf(&serving, scenario);
            if f > 0.0 {
                weight += f;
                acc += f * mean_conditional_interference(&serving, scenario, quad)?;
            }
        }
    }
    Ok(InterferenceSummary {
        served_probability: served.min(1.0),
        mean_serving_distance: r_bar,
        conditional_at_mean_distance: if weight > 0.0 { acc / weight } else { 0.0 },
        mean_interference: vals[2] / served,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drone() -> Scenario {
        Scenario::new(&ScenarioConfig::reference_drone()).unwrap()
    }

    #[test]
    fn upsilon_examples() {
        let s = drone();
        assert_eq!(upsilon(300.0, 0.0, LinkType::Los, &s), 1.0);
        let c = mean_rx(&s, 300.0, LinkType::Los);
        let sv = 2.5 / c;
        assert!((upsilon(300.0, sv, LinkType::Los, &s) - 1.0 / 3.5).abs() < 1e-14);
        // m = 3 with s c = 3 gives (3/6)^3
        let c = mean_rx(&s, 300.0, LinkType::Nlos);
        assert!((upsilon(300.0, 3.0 / c, LinkType::Nlos, &s) - 0.125).abs() < 1e-14);
    }

    #[test]
    fn upsilon_derivative_closed_forms() {
        let s = drone();
        let c = mean_rx(&s, 150.0, LinkType::Los);
        let sv = 0.7 / c;
        let d = upsilon_derivatives(150.0, sv, LinkType::Los, &s, 1);
        assert!((d[0] - upsilon(150.0, sv, LinkType::Los, &s)).abs() < 1e-15);
        let expect = -c / (1.0 + sv * c).powi(2);
        assert!((d[1] / expect - 1.0).abs() < 1e-13);
    }

    #[test]
    fn upsilon_derivatives_match_finite_differences() {
        let s = drone();
        let r = 420.0;
        let c = mean_rx(&s, r, LinkType::Nlos);
        for x in [0.05, 0.8, 3.0, 17.0] {
            let sv = x / c;
            let d = upsilon_derivatives(r, sv, LinkType::Nlos, &s, 2);
            let f = |t: f64| upsilon(r, t, LinkType::Nlos, &s);
            // natural scale of Υ in s is (m + s c) / c
            let scale = (3.0 + x) / c;
            let h = 1e-5 * scale;
            let d1 = (f(sv + h) - f(sv - h)) / (2.0 * h);
            let h = 1e-3 * scale;
            let d2 = (f(sv + h) - 2.0 * f(sv) + f(sv - h)) / (h * h);
            assert!((d[1] / d1 - 1.0).abs() < 1e-6, "x={x}: {} vs {d1}", d[1]);
            assert!((d[2] / d2 - 1.0).abs() < 1e-5, "x={x}: {} vs {d2}", d[2]);
        }
    }

    #[test]
    fn laplace_at_zero_is_one() {
        let s = drone();
        let quad = QuadratureSpec::default();
        let serving = ServingContext::new(&s, 250.0, LinkType::Los).unwrap();
        let lap = laplace_interference(&serving, 0.0, &s, &quad, 2).unwrap();
        assert_eq!(lap.value, 1.0);
        assert!(lap.derivatives[1] < 0.0 && lap.derivatives[2] > 0.0);
    }

    #[test]
    fn rayleigh_collapse() {
        let s = drone();
        let quad = QuadratureSpec::default();
        // m_L = 1 in the reference channel
        let serving = ServingContext::new(&s, 250.0, LinkType::Los).unwrap();
        let sv = s.threshold() / serving.serving_signal;
        let lap = laplace_interference(&serving, sv, &s, &quad, 0).unwrap();
        let expect = (-s.noise() * sv).exp() * lap.value;
        let got = conditional_coverage(&serving, &s, &quad).unwrap();
        assert!((got - expect).abs() < 1e-15);
    }

    #[test]
    fn vanishing_threshold_and_impairments() {
        let mut cfg = ScenarioConfig::reference_drone();
        cfg.threshold_t = 1e-12;
        let s = Scenario::new(&cfg).unwrap();
        let quad = QuadratureSpec::default();
        for link in LinkType::ALL {
            let serving = ServingContext::new(&s, 300.0, link).unwrap();
            assert!((conditional_coverage(&serving, &s, &quad).unwrap() - 1.0).abs() < 1e-6);
        }
        let mut cfg = ScenarioConfig::reference_drone();
        cfg.n0_db = f64::NEG_INFINITY;
        cfg.lambda_bs = 1e-9;
        let s = Scenario::new(&cfg).unwrap();
        let serving = ServingContext::new(&s, 300.0, LinkType::Nlos).unwrap();
        assert!((conditional_coverage(&serving, &s, &quad).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn homogeneous_limit_of_serving_pdf() {
        // single class, equal gains, no blockage: nearest-BS Rayleigh density
        let mut cfg = ScenarioConfig::reference_ground();
        cfg.environment.a = 1e-12;
        cfg.antenna.g_main = cfg.antenna.g_side;
        cfg.channel.a_nlos_db = cfg.channel.a_los_db;
        cfg.channel.alpha_nlos = cfg.channel.alpha_los;
        let s = Scenario::new(&cfg).unwrap();
        let lam = s.lambda();
        for r in [10.0, 100.0, 250.0, 600.0] {
            let serving = ServingContext::new(&s, r, LinkType::Los).unwrap();
            let f = serving_pdf(&serving, &s);
            let expect = 2.0 * PI * lam * r * (-PI * lam * r * r).exp();
            assert!((f / expect - 1.0).abs() < 1e-12, "{r}: {f} vs {expect}");
            let nlos = ServingContext::new(&s, r, LinkType::Nlos).unwrap();
            assert_eq!(serving_pdf(&nlos, &s), 0.0);
        }
    }

    #[test]
    fn campbell_linearity() {
        let quad = QuadratureSpec::default();
        let base = ScenarioConfig::reference_drone();
        let mut dense = base;
        dense.lambda_bs *= 2.0;
        let (a, b) = (Scenario::new(&base).unwrap(), Scenario::new(&dense).unwrap());
        let sa = ServingContext::new(&a, 300.0, LinkType::Los).unwrap();
        let sb = ServingContext::new(&b, 300.0, LinkType::Los).unwrap();
        let ia = mean_conditional_interference(&sa, &a, &quad).unwrap();
        let ib = mean_conditional_interference(&sb, &b, &quad).unwrap();
        assert!((ib / ia - 2.0).abs() < 1e-6, "{ia} {ib}");
    }

    #[test]
    fn empty_network_gives_no_coverage() {
        let mut cfg = ScenarioConfig::reference_drone();
        cfg.lambda_bs = 1e-9;
        let s = Scenario::new(&cfg).unwrap();
        let quad = QuadratureSpec::default();
        let rep = coverage_probability(&s, &quad).unwrap();
        assert!(rep.coverage < 1e-5 && rep.served_probability < 1e-5);
        assert!(drone_coverage_approx(&s, &quad).unwrap().coverage < 1e-5);
    }

    #[test]
    fn large_fading_order_rejected() {
        let mut cfg = ScenarioConfig::reference_drone();
        cfg.channel.m_los = 11;
        let s = Scenario::new(&cfg).unwrap();
        assert!(matches!(
            coverage_probability(&s, &QuadratureSpec::default()),
            Err(NumericError::FadingOrderTooLarge(11))
        ));
    }

    #[test]
    fn approximation_requires_drone() {
        let s = Scenario::new(&ScenarioConfig::reference_ground()).unwrap();
        assert!(drone_coverage_approx(&s, &QuadratureSpec::default()).is_err());
    }
}
