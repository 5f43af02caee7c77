//! Monte Carlo simulation of the downlink.
//!
//! Each realization draws a Poisson number of BSs uniformly on a disk around
//! the user, an independent LoS flag per BS, optional per-BS height and tilt,
//! and a unit-mean Gamma (Nakagami power) fade. Realization `i` uses its own
//! ChaCha stream keyed by `(seed, i)`, and estimators only sum counts or
//! reduce per-realization values in index order, so results do not depend on
//! the thread schedule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::model::{LinkType, Scenario, Site};

/// Optional per-BS uniform randomization of height and downtilt.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomizationSpec {
    /// Uniform range of BS heights, meters.
    pub h_bs_range: Option<(f64, f64)>,
    /// Uniform range of downtilts, degrees.
    pub theta_t_range: Option<(f64, f64)>,
}

impl RandomizationSpec {
    pub fn fixed() -> Self {
        Self::default()
    }

    pub fn is_fixed(&self) -> bool {
        self.h_bs_range.is_none() && self.theta_t_range.is_none()
    }

    /// Checks the ranges against the scenario: every site they can produce
    /// must be a valid configuration.
    pub fn validate(&self, scenario: &Scenario) -> Result<(), ConfigError> {
        for (field, range) in [("randomization.h_bs_range", self.h_bs_range), ("randomization.theta_t_range", self.theta_t_range)] {
            if let Some((lo, hi)) = range {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(ConfigError::new(field, "needs finite bounds with lo <= hi"));
                }
            }
        }
        let cfg = scenario.config();
        for h in self.h_bs_range.map_or(vec![], |(lo, hi)| vec![lo, hi]) {
            let mut c = *cfg;
            c.antenna.h_bs = h;
            c.validate().map_err(|e| ConfigError::new("randomization.h_bs_range", e.to_string()))?;
        }
        for t in self.theta_t_range.map_or(vec![], |(lo, hi)| vec![lo, hi]) {
            let mut c = *cfg;
            c.antenna.theta_t_deg = t;
            c.validate().map_err(|e| ConfigError::new("randomization.theta_t_range", e.to_string()))?;
        }
        Ok(())
    }

    /// Radius of the sampling disk: the outer radius of the scenario, widened
    /// for drones to the footprint of the lowest possible BS.
    pub fn disk_radius(&self, scenario: &Scenario) -> f64 {
        match self.h_bs_range {
            Some((lo, _)) if scenario.is_drone() => (scenario.h_d() - lo) * (scenario.phi_b_rad() / 2.0).tan(),
            _ => scenario.outer_radius(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseStation {
    /// Ground distance to the user, meters.
    pub r: f64,
    pub link: LinkType,
    pub h_bs: f64,
    pub theta_t_deg: f64,
    /// Unit-mean small-scale fading power.
    pub fading: f64,
}

impl BaseStation {
    pub fn site(&self) -> Site {
        Site {
            h_bs: self.h_bs,
            theta_t_rad: self.theta_t_deg.to_radians(),
        }
    }

    /// Received power without fading: `P_tx g(r) ζ(r)`.
    pub fn mean_power(&self, scenario: &Scenario) -> f64 {
        let site = self.site();
        let g = scenario.site_gain(self.r, &site);
        if g == 0.0 {
            return 0.0;
        }
        scenario.p_tx() * g * scenario.site_path_loss(self.r, &site, self.link)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Realization {
    pub stations: Vec<BaseStation>,
}

/// The associated BS of a realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Serving {
    pub index: usize,
    pub r: f64,
    pub link: LinkType,
    pub mean_power: f64,
}

/// Serving power and impairments; coverage compares without dividing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrSample {
    pub signal: f64,
    pub interference: f64,
    pub noise: f64,
}

impl SinrSample {
    pub fn covered(&self, threshold: f64) -> bool {
        self.signal > threshold * (self.interference + self.noise)
    }

    /// SINR as a ratio; infinite without interference and noise.
    pub fn ratio(&self) -> f64 {
        let d = self.interference + self.noise;
        if d == 0.0 {
            f64::INFINITY
        } else {
            self.signal / d
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_count(hits: u64, n: u64, seed: u64) -> Self {
        let mean = hits as f64 / n as f64;
        Self {
            mean,
            stderr: (mean * (1.0 - mean) / n as f64).sqrt(),
            n,
            seed,
        }
    }

    /// Normal-approximation 95% confidence interval, clipped to `[0, 1]`.
    pub fn ci95(&self) -> (f64, f64) {
        ((self.mean - 1.96 * self.stderr).max(0.0), (self.mean + 1.96 * self.stderr).min(1.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcdfCurve {
    pub thresholds: Vec<f64>,
    pub estimates: Vec<McEstimate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    /// Probability density per bin, normalized over served realizations.
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn bin_center(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.bin_width
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServingStats {
    pub n: u64,
    /// Realizations with no BS able to serve; excluded from distance stats.
    pub empty: u64,
    pub mean_serving_distance: f64,
    /// Mean number of LoS BSs with positive gain.
    pub mean_los_in_footprint: f64,
    pub histogram: Histogram,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceEstimate {
    /// Mean interference over served realizations.
    pub mean: f64,
    pub stderr: f64,
    pub served: u64,
}

/// Per-realization RNG: stream `index` of the generator seeded by `seed`.
pub fn realization_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

struct Sampler {
    radius: f64,
    count: Option<Poisson<f64>>,
    fading: [Gamma<f64>; 2],
}

impl Sampler {
    fn new(scenario: &Scenario, spec: &RandomizationSpec) -> Self {
        let radius = spec.disk_radius(scenario);
        let mean = scenario.lambda() * std::f64::consts::PI * radius * radius;
        let gamma = |link| {
            let m = scenario.fading_m(link) as f64;
            Gamma::new(m, 1.0 / m).expect("validated fading order")
        };
        Self {
            radius,
            count: (mean > 0.0).then(|| Poisson::new(mean).expect("finite Poisson mean")),
            fading: [gamma(LinkType::Los), gamma(LinkType::Nlos)],
        }
    }

    fn sample(&self, scenario: &Scenario, spec: &RandomizationSpec, rng: &mut ChaCha8Rng) -> Realization {
        let Some(count) = &self.count else {
            return Realization::default();
        };
        let n = count.sample(rng) as usize;
        let mut stations = Vec::with_capacity(n);
        let base = scenario.site();
        for _ in 0..n {
            let r = self.radius * rng.random::<f64>().sqrt();
            let h_bs = spec.h_bs_range.map_or(base.h_bs, |(lo, hi)| uniform(rng, lo, hi));
            let theta_t_deg = spec
                .theta_t_range
                .map_or(base.theta_t_rad.to_degrees(), |(lo, hi)| uniform(rng, lo, hi));
            let site = Site {
                h_bs,
                theta_t_rad: theta_t_deg.to_radians(),
            };
            let p_los = scenario.site_los_probability(r, &site);
            let link = if rng.random::<f64>() < p_los { LinkType::Los } else { LinkType::Nlos };
            let fading = self.fading[link.index()].sample(rng);
            if link == LinkType::Nlos && scenario.nlos_suppressed() {
                continue;
            }
            stations.push(BaseStation {
                r,
                link,
                h_bs,
                theta_t_deg,
                fading,
            });
        }
        Realization { stations }
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Draws realization `index` of the run keyed by `seed`.
pub fn sample_realization(scenario: &Scenario, spec: &RandomizationSpec, seed: u64, index: u64) -> Realization {
    let mut rng = realization_rng(seed, index);
    Sampler::new(scenario, spec).sample(scenario, spec, &mut rng)
}

/// The BS with the largest mean received power. Ties go to the smaller
/// distance, then the smaller index. `None` when no BS has positive gain.
pub fn associate(real: &Realization, scenario: &Scenario) -> Option<Serving> {
    let mut best: Option<Serving> = None;
    for (index, bs) in real.stations.iter().enumerate() {
        let p = bs.mean_power(scenario);
        if p <= 0.0 {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => p > b.mean_power || (p == b.mean_power && bs.r < b.r),
        };
        if better {
            best = Some(Serving {
                index,
                r: bs.r,
                link: bs.link,
                mean_power: p,
            });
        }
    }
    best
}

/// Faded serving power against the faded power of every other BS with
/// positive gain.
pub fn sinr(real: &Realization, serving: &Serving, scenario: &Scenario) -> SinrSample {
    let mut interference = 0.0;
    for (k, bs) in real.stations.iter().enumerate() {
        if k != serving.index {
            interference += bs.fading * bs.mean_power(scenario);
        }
    }
    SinrSample {
        signal: real.stations[serving.index].fading * serving.mean_power,
        interference,
        noise: scenario.noise(),
    }
}

/// SINR sample of each realization (`None` without a server), in index order.
fn map_realizations<T, F>(scenario: &Scenario, spec: &RandomizationSpec, n: u64, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&Realization, Option<Serving>) -> T + Sync,
{
    let sampler = Sampler::new(scenario, spec);
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = realization_rng(seed, i);
            let real = sampler.sample(scenario, spec, &mut rng);
            let serving = associate(&real, scenario);
            f(&real, serving)
        })
        .collect()
}

pub fn estimate_coverage(scenario: &Scenario, spec: &RandomizationSpec, n: u64, seed: u64) -> McEstimate {
    let curve = estimate_ccdf(scenario, spec, &[scenario.threshold()], n, seed);
    curve.estimates[0]
}

/// Coverage at each threshold (linear), from one pass over the realizations.
pub fn estimate_ccdf(scenario: &Scenario, spec: &RandomizationSpec, thresholds: &[f64], n: u64, seed: u64) -> CcdfCurve {
    let sampler = Sampler::new(scenario, spec);
    let k = thresholds.len();
    let counts = (0..n)
        .into_par_iter()
        .fold(
            || vec![0u64; k],
            |mut acc, i| {
                let mut rng = realization_rng(seed, i);
                let real = sampler.sample(scenario, spec, &mut rng);
                if let Some(serving) = associate(&real, scenario) {
                    let s = sinr(&real, &serving, scenario);
                    for (c, &t) in acc.iter_mut().zip(thresholds) {
                        *c += s.covered(t) as u64;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; k],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    CcdfCurve {
        thresholds: thresholds.to_vec(),
        estimates: counts.into_iter().map(|c| McEstimate::from_count(c, n, seed)).collect(),
    }
}

/// Serving-distance statistics with a histogram of `bin_width` meters over
/// the sampling disk.
pub fn serving_stats(scenario: &Scenario, spec: &RandomizationSpec, n: u64, seed: u64, bin_width: f64) -> ServingStats {
    let per = map_realizations(scenario, spec, n, seed, |real, serving| {
        let los = real
            .stations
            .iter()
            .filter(|bs| bs.link == LinkType::Los && bs.mean_power(scenario) > 0.0)
            .count();
        (serving.map(|s| s.r), los)
    });
    let bins = (spec.disk_radius(scenario) / bin_width).ceil().max(1.0) as usize;
    let mut counts = vec![0u64; bins];
    let (mut served, mut dist_sum, mut los_sum) = (0u64, 0.0, 0u64);
    for (r, los) in &per {
        los_sum += *los as u64;
        if let Some(r) = r {
            served += 1;
            dist_sum += r;
            counts[((r / bin_width) as usize).min(bins - 1)] += 1;
        }
    }
    let norm = if served > 0 { served as f64 * bin_width } else { 1.0 };
    ServingStats {
        n,
        empty: n - served,
        mean_serving_distance: if served > 0 { dist_sum / served as f64 } else { 0.0 },
        mean_los_in_footprint: los_sum as f64 / n as f64,
        histogram: Histogram {
            bin_width,
            density: counts.into_iter().map(|c| c as f64 / norm).collect(),
        },
    }
}

/// Mean aggregate interference over realizations that have a server.
pub fn estimate_interference(scenario: &Scenario, spec: &RandomizationSpec, n: u64, seed: u64) -> InterferenceEstimate {
    let per = map_realizations(scenario, spec, n, seed, |real, serving| {
        serving.map(|s| sinr(real, &s, scenario).interference)
    });
    let values: Vec<f64> = per.into_iter().flatten().collect();
    let (mean, stderr) = mean_and_stderr(&values);
    InterferenceEstimate {
        mean,
        stderr,
        served: values.len() as u64,
    }
}

/// Interference draws conditioned on a serving BS of type `link` at ground
/// distance `r_s`: a BS is added at `r_s` and realizations where it is not the
/// associated BS are rejected. Returns the accepted interference values.
pub fn sample_conditional_interference(scenario: &Scenario, r_s: f64, link: LinkType, n: u64, seed: u64) -> Vec<f64> {
    let spec = RandomizationSpec::fixed();
    let sampler = Sampler::new(scenario, &spec);
    let base = scenario.site();
    let per: Vec<Option<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = realization_rng(seed, i);
            let mut real = sampler.sample(scenario, &spec, &mut rng);
            real.stations.push(BaseStation {
                r: r_s,
                link,
                h_bs: base.h_bs,
                theta_t_deg: base.theta_t_rad.to_degrees(),
                fading: 1.0,
            });
            let tagged = real.stations.len() - 1;
            let serving = associate(&real, scenario)?;
            (serving.index == tagged).then(|| sinr(&real, &serving, scenario).interference)
        })
        .collect();
    per.into_iter().flatten().collect()
}

/// Sample mean and its standard error.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
