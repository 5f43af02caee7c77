//! Exclusion sets: the ground distances at which a competing base station
//! would deliver a stronger average signal than the serving one.
//!
//! For a drone above the base stations the sets have closed forms built from
//! twelve boundary radii ([`z_values`]). [`stronger_sets_general`] solves the
//! same problem for any geometry by inverting the path loss separately on the
//! mainlobe region and its complement.

use crate::error::ModelError;
use crate::model::{LinkType, Lobe, Scenario};
use crate::region::RegionSet;

/// Candidate serving base station: distance, link type, lobe and received
/// power level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServingContext {
    pub r_s: f64,
    pub link: LinkType,
    pub lobe: Lobe,
    /// `P_tx g(r_s) ζ_v(r_s)`, fading excluded.
    pub serving_signal: f64,
}

impl ServingContext {
    pub fn new(scenario: &Scenario, r_s: f64, link: LinkType) -> Result<Self, ModelError> {
        let pl = scenario.path_loss(r_s, link)?;
        let g = scenario.bs_gain(r_s);
        if g == 0.0 {
            return Err(ModelError::NoSignal(r_s));
        }
        Ok(Self {
            r_s,
            link,
            lobe: scenario.lobe_at(r_s),
            serving_signal: scenario.p_tx() * g * pl,
        })
    }

    /// Association metric `g(r_s) ζ_v(r_s)`.
    pub fn level(&self, scenario: &Scenario) -> f64 {
        self.serving_signal / scenario.p_tx()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrongerSets {
    pub no_los: RegionSet,
    pub no_nlos: RegionSet,
    pub serving_type: LinkType,
    pub r_s: f64,
}

impl StrongerSets {
    pub fn set(&self, link: LinkType) -> &RegionSet {
        match link {
            LinkType::Los => &self.no_los,
            LinkType::Nlos => &self.no_nlos,
        }
    }

    /// Interferer domain for competitors of type `link`: the complement of the
    /// stronger set within `[0, r_max]`.
    pub fn complement(&self, link: LinkType, scenario: &Scenario) -> RegionSet {
        self.set(link).complement_within(0.0, scenario.r_max())
    }
}

/// The twelve boundary radii `z_1 ... z_12` for a drone above the BSs, with
/// the serving BS at ground distance `r_s`.
///
/// Radii bounding a sidelobe interval `[0, z]` are clamped to `[0, r_0]`;
/// radii bounding a mainlobe interval `[r_0, z]` are clamped to
/// `[r_0, r_max]`. Clamping acts on squared radii.
pub fn z_values(r_s: f64, scenario: &Scenario) -> Result<[f64; 12], ModelError> {
    if !scenario.is_drone() || scenario.delta_h() <= 0.0 {
        return Err(ModelError::ClosedFormUnavailable);
    }
    let dh2 = scenario.delta_h().powi(2);
    let d2 = r_s * r_s + dh2;
    let r_max = scenario.r_max();
    let r0 = scenario.r0().min(r_max);
    let (gm, gs) = (scenario.g_main(), scenario.g_side());
    let (al, an) = (scenario.alpha(LinkType::Los), scenario.alpha(LinkType::Nlos));
    let (a_l, a_n) = (scenario.a_lin(LinkType::Los), scenario.a_lin(LinkType::Nlos));

    let side = |rho: f64, kappa: f64| (rho * d2.powf(kappa) - dh2).clamp(0.0, r0 * r0).sqrt();
    let main = |rho: f64, kappa: f64| (rho * d2.powf(kappa) - dh2).clamp(r0 * r0, r_max * r_max).sqrt();

    let rho1 = (gm / gs).powf(2.0 / al);
    let rho2 = (a_n / a_l).powf(2.0 / an);
    let rho3 = (a_n * gm / (a_l * gs)).powf(2.0 / an);
    let rho5 = (a_n * gs / (a_l * gm)).powf(2.0 / an);
    let rho7 = (a_l / a_n).powf(2.0 / al);
    let rho8 = (a_l * gm / (a_n * gs)).powf(2.0 / al);
    let rho9 = (gm / gs).powf(2.0 / an);
    let rho10 = (a_l * gs / (a_n * gm)).powf(2.0 / al);
    let l_over_n = al / an;
    let n_over_l = an / al;

    Ok([
        main(rho1, 1.0),
        side(rho2, l_over_n),
        main(rho3, l_over_n),
        side(1.0 / rho1, 1.0),
        side(rho5, l_over_n),
        main(rho2, l_over_n),
        side(rho7, n_over_l),
        main(rho8, n_over_l),
        main(rho9, 1.0),
        side(rho10, n_over_l),
        main(rho7, n_over_l),
        side(1.0 / rho9, 1.0),
    ])
}

/// Closed-form exclusion sets for a drone above the BSs.
pub fn stronger_sets(serving: &ServingContext, scenario: &Scenario) -> Result<StrongerSets, ModelError> {
    let z = z_values(serving.r_s, scenario)?;
    let r_max = scenario.r_max();
    let r0 = scenario.r0().min(r_max);
    let r_s = serving.r_s;
    let zi = |i: usize| z[i - 1];
    let (no_los, no_nlos) = match (serving.link, serving.lobe) {
        (LinkType::Los, Lobe::Side) => ([(0.0, r_s), (r0, zi(1))], [(0.0, zi(2)), (r0, zi(3))]),
        (LinkType::Los, Lobe::Main) => ([(0.0, zi(4)), (r0, r_s)], [(0.0, zi(5)), (r0, zi(6))]),
        (LinkType::Nlos, Lobe::Side) => ([(0.0, zi(7)), (r0, zi(8))], [(0.0, r_s), (r0, zi(9))]),
        (LinkType::Nlos, Lobe::Main) => ([(0.0, zi(10)), (r0, zi(11))], [(0.0, zi(12)), (r0, r_s)]),
    };
    Ok(StrongerSets {
        no_los: RegionSet::from_intervals(no_los).clip(0.0, r_max),
        no_nlos: RegionSet::from_intervals(no_nlos).clip(0.0, r_max),
        serving_type: serving.link,
        r_s,
    })
}

/// Exclusion sets for arbitrary geometry.
///
/// On each constant-gain region the competitor level `g ζ_ξ(r)` is strictly
/// decreasing in `r`, so the stronger part of the region is the region
/// intersected with `[0, z*]`, where `z*` inverts the path loss at the
/// serving level.
pub fn stronger_sets_general(serving: &ServingContext, scenario: &Scenario) -> StrongerSets {
    let r_max = scenario.r_max();
    let main = scenario.mainlobe_region().clip(0.0, r_max);
    let side = main.complement_within(0.0, r_max);
    let dh2 = scenario.delta_h().powi(2);
    let d2_s = serving.r_s * serving.r_s + dh2;
    let g_s = scenario.lobe_gain(serving.lobe);
    let a_s = scenario.a_lin(serving.link);
    let alpha_s = scenario.alpha(serving.link);

    let solve = |link: LinkType| {
        let a = scenario.a_lin(link);
        let alpha = scenario.alpha(link);
        let mut pieces = Vec::new();
        for (region, lobe) in [(&main, Lobe::Main), (&side, Lobe::Side)] {
            // g a d^-alpha >= g_s a_s d_s^-alpha_s  <=>  d² <= rho (d_s²)^kappa
            let rho = (scenario.lobe_gain(lobe) * a / (g_s * a_s)).powf(2.0 / alpha);
            let z = (rho * d2_s.powf(alpha_s / alpha) - dh2).max(0.0).sqrt();
            for iv in region.intervals() {
                pieces.push((iv.lo, iv.hi.min(z)));
            }
        }
        RegionSet::from_intervals(pieces)
    };

    StrongerSets {
        no_los: solve(LinkType::Los),
        no_nlos: solve(LinkType::Nlos),
        serving_type: serving.link,
        r_s: serving.r_s,
    }
}

/// Closed forms for drones above the BSs, the general solver otherwise.
pub fn exclusion_sets(serving: &ServingContext, scenario: &Scenario) -> StrongerSets {
    match stronger_sets(serving, scenario) {
        Ok(sets) => sets,
        Err(_) => stronger_sets_general(serving, scenario),
    }
}

/// Brute-force reference for the stronger sets: the type-`link` distances on
/// the grid `0, pitch, 2 pitch, ...` up to `upper` whose mean received level
/// `g(r) ζ(r)` is at least `level`, merged into intervals.
pub fn scan_stronger_set(scenario: &Scenario, level: f64, link: LinkType, upper: f64, pitch: f64) -> RegionSet {
    let n = (upper / pitch).ceil() as usize;
    let mut out = Vec::new();
    let mut start: Option<f64> = None;
    for i in 0..=n {
        let r = (i as f64 * pitch).min(upper);
        let ok = scenario.bs_gain(r) * scenario.path_loss_unchecked(r, link) >= level;
        match (ok, start) {
            (true, None) => start = Some(r),
            (false, Some(s)) => {
                out.push((s, r - pitch));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, upper));
    }
    RegionSet::from_intervals(out)
}
