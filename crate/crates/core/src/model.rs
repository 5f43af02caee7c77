//! Physical model: geometry, path loss, antenna gains, blockage-driven LoS
//! probability and Nakagami fading.
//!
//! [`Scenario`] is the validated, unit-converted form of a
//! [`ScenarioConfig`]. Everything here is a pure function of immutable data.

use std::f64::consts::PI;

use crate::config::{db_to_linear, EnvironmentParams, ScenarioConfig, UserKind};
use crate::error::{ConfigError, ModelError};
use crate::region::RegionSet;

/// Largest radius considered for ground users, meters.
pub const MAX_GROUND_RADIUS: f64 = 50_000.0;

/// Default relative tail tolerance used to pick the ground truncation radius.
pub const DEFAULT_GROUND_TAIL_TOL: f64 = 1e-3;

/// LoS-probability steps smaller than this are not treated as breakpoints.
const STEP_JUMP_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkType {
    Los,
    Nlos,
}

impl LinkType {
    pub const ALL: [LinkType; 2] = [LinkType::Los, LinkType::Nlos];

    pub fn index(self) -> usize {
        match self {
            LinkType::Los => 0,
            LinkType::Nlos => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LinkType::Los => "los",
            LinkType::Nlos => "nlos",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lobe {
    Main,
    Side,
}

/// Height and downtilt of one base station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Site {
    pub h_bs: f64,
    pub theta_t_rad: f64,
}

/// Ground-distance interval `[lo, hi]` lit by the BS mainlobe, before the
/// user antenna footprint is applied. `None` when no distance qualifies.
///
/// A distance is in the mainlobe when the depression angle from the BS to
/// the user lies within `theta_t ± theta_b / 2`.
pub fn mainlobe_bounds(h_bs: f64, h_d: f64, theta_t_rad: f64, theta_b_rad: f64) -> Option<(f64, f64)> {
    let lo_ang = theta_t_rad - theta_b_rad / 2.0;
    let hi_ang = theta_t_rad + theta_b_rad / 2.0;
    let delta = h_bs - h_d;
    if delta > 0.0 {
        // depression angle falls from 90° at r = 0 towards 0
        if hi_ang <= 0.0 {
            return None;
        }
        let lower = delta / hi_ang.tan();
        let upper = if lo_ang <= 0.0 { f64::INFINITY } else { delta / lo_ang.tan() };
        Some((lower, upper))
    } else if delta < 0.0 {
        // user above the BS: angle rises from -90° towards 0
        if lo_ang >= 0.0 {
            return None;
        }
        let lower = -delta / (-lo_ang).tan();
        let upper = if hi_ang >= 0.0 { f64::INFINITY } else { -delta / (-hi_ang).tan() };
        Some((lower, upper))
    } else if lo_ang <= 0.0 && hi_ang >= 0.0 {
        Some((0.0, f64::INFINITY))
    } else {
        None
    }
}

/// Blockage-model LoS probability between a BS of height `h_bs` and a user at
/// `h_d`, `r` meters apart on the ground.
///
/// With `m = floor(r * sqrt(a b) / 1000 - 1)` the probability is the product
/// over `n = 0..=m` of `1 - exp(-h_n^2 / (2 c^2))`, where `h_n` is the ray
/// height above the n-th building row. For `m < 0` the product is empty.
pub fn los_probability_at(r: f64, h_bs: f64, h_d: f64, env: &EnvironmentParams) -> f64 {
    let m = los_step_index(r, env) as i64 - 1;
    los_probability_for_m(m, h_bs, h_d, env.c)
}

fn los_step_index(r: f64, env: &EnvironmentParams) -> usize {
    let x = (r * (env.a * env.b).sqrt() / 1000.0).floor();
    if x <= 0.0 {
        0
    } else {
        x as usize
    }
}

fn los_probability_for_m(m: i64, h_bs: f64, h_d: f64, c: f64) -> f64 {
    if m < 0 {
        return 1.0;
    }
    let rows = (m + 1) as f64;
    let two_c2 = 2.0 * c * c;
    let mut p = 1.0;
    for n in 0..=m {
        let h = h_bs - (n as f64 + 0.5) * (h_bs - h_d) / rows;
        p *= -(-h * h / two_c2).exp_m1();
        if p == 0.0 {
            break;
        }
    }
    p
}

/// Radius of the `n`-th LoS probability step (`n = 0, 1, ...`), meters.
pub fn los_step_radius(n: usize, env: &EnvironmentParams) -> f64 {
    1000.0 * (n as f64 + 1.0) / (env.a * env.b).sqrt()
}

/// Nakagami-m complementary CDF of the unit-mean fading power.
pub fn fading_ccdf(omega: f64, m: u32) -> f64 {
    if omega <= 0.0 {
        return 1.0;
    }
    let x = m as f64 * omega;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..m {
        term *= x / k as f64;
        sum += term;
    }
    sum * (-x).exp()
}

/// Tabulated LoS probabilities, one entry per step of the blockage model.
#[derive(Debug, Clone)]
struct LosProfile {
    env: EnvironmentParams,
    h_bs: f64,
    h_d: f64,
    /// `values[k]` holds the probability on `[r_{k-1}, r_k)`.
    values: Vec<f64>,
}

impl LosProfile {
    fn new(env: EnvironmentParams, h_bs: f64, h_d: f64, radius: f64) -> Self {
        let steps = if radius.is_finite() {
            los_step_index(radius, &env) + 2
        } else {
            1
        };
        let values = (0..steps)
            .map(|k| los_probability_for_m(k as i64 - 1, h_bs, h_d, env.c))
            .collect();
        Self { env, h_bs, h_d, values }
    }

    fn at(&self, r: f64) -> f64 {
        let k = los_step_index(r, &self.env);
        match self.values.get(k) {
            Some(&p) => p,
            None => los_probability_for_m(k as i64 - 1, self.h_bs, self.h_d, self.env.c),
        }
    }

    fn step_value(&self, k: usize) -> f64 {
        match self.values.get(k) {
            Some(&p) => p,
            None => los_probability_for_m(k as i64 - 1, self.h_bs, self.h_d, self.env.c),
        }
    }
}

/// Validated scenario in linear/SI units.
#[derive(Debug, Clone)]
pub struct Scenario {
    cfg: ScenarioConfig,
    /// BS density per m².
    lambda: f64,
    p_tx: f64,
    n0: f64,
    a_lin: [f64; 2],
    alpha: [f64; 2],
    m: [u32; 2],
    g_ue: f64,
    theta_b_rad: f64,
    theta_t_rad: f64,
    phi_b_rad: f64,
    delta_h: f64,
    r_max: f64,
    outer_radius: f64,
    mainlobe: RegionSet,
    los: LosProfile,
    nlos_suppressed: bool,
}

impl Scenario {
    /// Validates `cfg` and picks the ground truncation radius with the
    /// default tail tolerance.
    pub fn new(cfg: &ScenarioConfig) -> Result<Self, ConfigError> {
        Self::with_tail_tolerance(cfg, DEFAULT_GROUND_TAIL_TOL)
    }

    pub fn with_tail_tolerance(cfg: &ScenarioConfig, tail_tol: f64) -> Result<Self, ConfigError> {
        let mut s = Self::build(cfg)?;
        if !s.is_drone() {
            let r = s.ground_truncation_radius(tail_tol);
            s.set_outer_radius(r);
        }
        Ok(s)
    }

    /// Uses a fixed truncation radius for ground users. Drone scenarios ignore
    /// it and keep the antenna footprint radius.
    pub fn with_truncation_radius(cfg: &ScenarioConfig, radius: f64) -> Result<Self, ConfigError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(ConfigError::new("quadrature.truncation_radius_m", "must be positive and finite"));
        }
        let mut s = Self::build(cfg)?;
        if !s.is_drone() {
            s.set_outer_radius(radius);
        }
        Ok(s)
    }

    fn build(cfg: &ScenarioConfig) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let ch = &cfg.channel;
        let ant = &cfg.antenna;
        let drone = cfg.user.kind == UserKind::Drone;
        let phi_b_rad = cfg.user.phi_b_deg.to_radians();
        let delta_h = cfg.user.h_d - ant.h_bs;
        let (g_ue, r_max) = if drone {
            (29000.0 / (cfg.user.phi_b_deg * cfg.user.phi_b_deg), delta_h * (phi_b_rad / 2.0).tan())
        } else {
            (1.0, f64::INFINITY)
        };
        let theta_b_rad = ant.theta_b_deg.to_radians();
        let theta_t_rad = ant.theta_t_deg.to_radians();
        let mainlobe = match mainlobe_bounds(ant.h_bs, cfg.user.h_d, theta_t_rad, theta_b_rad) {
            Some((lo, hi)) => RegionSet::interval(lo, hi).clip(0.0, r_max),
            None => RegionSet::empty(),
        };
        let outer = if drone { r_max } else { MAX_GROUND_RADIUS };
        Ok(Self {
            cfg: *cfg,
            lambda: cfg.lambda_bs * 1e-6,
            p_tx: db_to_linear(cfg.p_tx_db),
            n0: db_to_linear(cfg.n0_db),
            a_lin: [db_to_linear(ch.a_los_db), db_to_linear(ch.a_nlos_db)],
            alpha: [ch.alpha_los, ch.alpha_nlos],
            m: [ch.m_los, ch.m_nlos],
            g_ue,
            theta_b_rad,
            theta_t_rad,
            phi_b_rad,
            delta_h,
            r_max,
            outer_radius: outer,
            mainlobe,
            los: LosProfile::new(cfg.environment, ant.h_bs, cfg.user.h_d, outer),
            nlos_suppressed: false,
        })
    }

    fn set_outer_radius(&mut self, r: f64) {
        self.outer_radius = r;
        self.los = LosProfile::new(self.cfg.environment, self.cfg.antenna.h_bs, self.cfg.user.h_d, r);
    }

    /// Same scenario with the NLoS process removed (zero NLoS density).
    pub fn with_nlos_suppressed(&self) -> Self {
        let mut s = self.clone();
        s.nlos_suppressed = true;
        s
    }

    /// Same scenario with a different linear noise power.
    pub fn with_noise_linear(&self, n0: f64) -> Self {
        let mut s = self.clone();
        s.n0 = n0;
        s
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn is_drone(&self) -> bool {
        self.cfg.user.kind == UserKind::Drone
    }

    pub fn nlos_suppressed(&self) -> bool {
        self.nlos_suppressed
    }

    /// BS density per m².
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn p_tx(&self) -> f64 {
        self.p_tx
    }

    pub fn noise(&self) -> f64 {
        self.n0
    }

    pub fn threshold(&self) -> f64 {
        self.cfg.threshold_t
    }

    pub fn alpha(&self, link: LinkType) -> f64 {
        self.alpha[link.index()]
    }

    /// Linear path loss at 1 m.
    pub fn a_lin(&self, link: LinkType) -> f64 {
        self.a_lin[link.index()]
    }

    pub fn fading_m(&self, link: LinkType) -> u32 {
        self.m[link.index()]
    }

    pub fn g_ue(&self) -> f64 {
        self.g_ue
    }

    pub fn g_main(&self) -> f64 {
        self.cfg.antenna.g_main
    }

    pub fn g_side(&self) -> f64 {
        self.cfg.antenna.g_side
    }

    pub fn h_bs(&self) -> f64 {
        self.cfg.antenna.h_bs
    }

    pub fn h_d(&self) -> f64 {
        self.cfg.user.h_d
    }

    /// `h_d - h_bs`.
    pub fn delta_h(&self) -> f64 {
        self.delta_h
    }

    pub fn theta_b_rad(&self) -> f64 {
        self.theta_b_rad
    }

    pub fn theta_t_rad(&self) -> f64 {
        self.theta_t_rad
    }

    pub fn phi_b_rad(&self) -> f64 {
        self.phi_b_rad
    }

    pub fn site(&self) -> Site {
        Site {
            h_bs: self.h_bs(),
            theta_t_rad: self.theta_t_rad,
        }
    }

    /// Drone antenna footprint radius; infinite for ground users.
    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Radius beyond which nothing is integrated or sampled: `r_max` for a
    /// drone, the truncation radius for a ground user.
    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    /// Start of the mainlobe region for a drone above the BSs: infinite when
    /// the whole mainlobe points below the horizon.
    pub fn r0(&self) -> f64 {
        let half_gap = self.theta_b_rad / 2.0 - self.theta_t_rad;
        if half_gap <= 0.0 {
            f64::INFINITY
        } else {
            self.delta_h.abs() / half_gap.tan()
        }
    }

    pub fn link_distance(&self, r: f64) -> f64 {
        r.hypot(self.delta_h)
    }

    /// Linear path gain `A_v d^-alpha_v`.
    pub fn path_loss(&self, r: f64, link: LinkType) -> Result<f64, ModelError> {
        if r < 0.0 {
            return Err(ModelError::NegativeDistance(r));
        }
        let d2 = r * r + self.delta_h * self.delta_h;
        if d2 == 0.0 {
            return Err(ModelError::ZeroDistance);
        }
        Ok(self.path_loss_d2(d2, link))
    }

    /// Path gain from a squared link distance. No singularity check.
    #[inline]
    pub fn path_loss_d2(&self, d2: f64, link: LinkType) -> f64 {
        let i = link.index();
        self.a_lin[i] * d2.powf(-self.alpha[i] / 2.0)
    }

    #[inline]
    pub fn path_loss_unchecked(&self, r: f64, link: LinkType) -> f64 {
        self.path_loss_d2(r * r + self.delta_h * self.delta_h, link)
    }

    /// Ground-distance region covered by the BS mainlobe, within `[0, r_max]`.
    pub fn mainlobe_region(&self) -> &RegionSet {
        &self.mainlobe
    }

    pub fn lobe_at(&self, r: f64) -> Lobe {
        if self.mainlobe.contains(r) {
            Lobe::Main
        } else {
            Lobe::Side
        }
    }

    /// Total antenna gain (BS times user) for a BS at ground distance `r`.
    pub fn bs_gain(&self, r: f64) -> f64 {
        if r >= self.r_max {
            return 0.0;
        }
        self.lobe_gain(self.lobe_at(r))
    }

    pub fn lobe_gain(&self, lobe: Lobe) -> f64 {
        let g = match lobe {
            Lobe::Main => self.g_main(),
            Lobe::Side => self.g_side(),
        };
        g * self.g_ue
    }

    /// Gain for a BS with its own height and downtilt, as used when these are
    /// randomized per site.
    pub fn site_gain(&self, r: f64, site: &Site) -> f64 {
        let h_d = self.h_d();
        if self.is_drone() {
            let reach = (h_d - site.h_bs) * (self.phi_b_rad / 2.0).tan();
            if r >= reach {
                return 0.0;
            }
        }
        let main = mainlobe_bounds(site.h_bs, h_d, site.theta_t_rad, self.theta_b_rad)
            .is_some_and(|(lo, hi)| lo <= r && r <= hi);
        self.lobe_gain(if main { Lobe::Main } else { Lobe::Side })
    }

    pub fn site_path_loss(&self, r: f64, site: &Site, link: LinkType) -> f64 {
        let dh = self.h_d() - site.h_bs;
        self.path_loss_d2(r * r + dh * dh, link)
    }

    pub fn site_los_probability(&self, r: f64, site: &Site) -> f64 {
        if site.h_bs == self.h_bs() {
            self.los.at(r)
        } else {
            los_probability_at(r, site.h_bs, self.h_d(), &self.cfg.environment)
        }
    }

    pub fn los_probability(&self, r: f64) -> f64 {
        self.los.at(r)
    }

    /// LoS and NLoS BS densities per m² at ground distance `r`.
    pub fn thinned_densities(&self, r: f64) -> (f64, f64) {
        let p = self.los.at(r);
        let nlos = if self.nlos_suppressed { 0.0 } else { self.lambda * (1.0 - p) };
        (self.lambda * p, nlos)
    }

    pub fn density(&self, r: f64, link: LinkType) -> f64 {
        let (l, n) = self.thinned_densities(r);
        match link {
            LinkType::Los => l,
            LinkType::Nlos => n,
        }
    }

    fn step_density(&self, k: usize, link: LinkType) -> f64 {
        let p = self.los.step_value(k);
        match link {
            LinkType::Los => self.lambda * p,
            LinkType::Nlos if self.nlos_suppressed => 0.0,
            LinkType::Nlos => self.lambda * (1.0 - p),
        }
    }

    /// Radii in `(lo, hi)` where the LoS probability jumps.
    pub fn los_breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let env = &self.cfg.environment;
        let mut out = Vec::new();
        let mut n = los_step_index(lo, env).saturating_sub(1);
        loop {
            let r = los_step_radius(n, env);
            if r >= hi || !r.is_finite() {
                break;
            }
            if r > lo && (self.los.step_value(n) - self.los.step_value(n + 1)).abs() > STEP_JUMP_FLOOR {
                out.push(r);
            }
            n += 1;
        }
        out
    }

    /// `∫_lo^hi λ_ξ(r) r dr`, exact for the piecewise-constant density.
    pub fn density_moment(&self, lo: f64, hi: f64, link: LinkType) -> f64 {
        let hi = hi.min(self.outer_radius);
        if hi <= lo {
            return 0.0;
        }
        let env = &self.cfg.environment;
        let mut total = 0.0;
        let mut k = los_step_index(lo, env);
        let mut a = lo;
        while a < hi {
            let b = los_step_radius(k, env).min(hi);
            if b > a {
                total += self.step_density(k, link) * (b * b - a * a) / 2.0;
            }
            a = a.max(b);
            k += 1;
        }
        total
    }

    /// `∫_set λ_ξ(r) r dr` over a region, clipped at the outer radius.
    pub fn region_density_moment(&self, set: &RegionSet, link: LinkType) -> f64 {
        set.intervals().iter().map(|iv| self.density_moment(iv.lo, iv.hi, link)).sum()
    }

    /// Smallest radius (capped at [`MAX_GROUND_RADIUS`]) such that an upper
    /// bound on the mean power received from beyond it is at most `tol` times
    /// a lower bound on the mean power from the annulus inside it.
    pub fn ground_truncation_radius(&self, tol: f64) -> f64 {
        let env = &self.cfg.environment;
        let inner = 0.5 / self.lambda.sqrt();
        let g_hi = self.g_main().max(self.g_side()) * self.g_ue;
        let g_lo = self.g_side() * self.g_ue;
        let dh2 = self.delta_h * self.delta_h;
        let p_los = |k: usize| los_probability_for_m(k as i64 - 1, self.h_bs(), self.h_d(), env.c);

        let mut reference = 0.0;
        let mut cursor = inner;
        let mut r = (4.0 * inner).max(500.0);
        while r < MAX_GROUND_RADIUS {
            // ∫ r (r²+Δ²)^(-α/2) dr has a closed form on every step
            let mut k = los_step_index(cursor, env);
            while cursor < r {
                let b = los_step_radius(k, env).min(r);
                let p = p_los(k);
                for link in LinkType::ALL {
                    let i = link.index();
                    let lam = match link {
                        LinkType::Los => self.lambda * p,
                        LinkType::Nlos => self.lambda * (1.0 - p),
                    };
                    if b > cursor && lam > 0.0 {
                        reference += 2.0 * PI * lam * g_lo * self.a_lin[i]
                            * power_moment(cursor, b, dh2, self.alpha[i]);
                    }
                }
                cursor = cursor.max(b);
                k += 1;
            }
            // non-increasing envelope of the LoS probability beyond r
            let k0 = los_step_index(r, env);
            let p_sup = (k0..k0 + 64).map(p_los).fold(0.0, f64::max);
            let tail: f64 = LinkType::ALL
                .iter()
                .map(|&link| {
                    let i = link.index();
                    let alpha = self.alpha[i];
                    let lam_bound = match link {
                        LinkType::Los => self.lambda * p_sup,
                        LinkType::Nlos => self.lambda,
                    };
                    if alpha > 2.0 {
                        2.0 * PI * lam_bound * g_hi * self.a_lin[i] * r.powf(2.0 - alpha) / (alpha - 2.0)
                    } else {
                        f64::INFINITY
                    }
                })
                .sum();
            if tail <= tol * reference {
                return r;
            }
            r *= 1.1;
        }
        MAX_GROUND_RADIUS
    }
}

/// `∫_a^b r (r² + dh2)^(-α/2) dr`.
fn power_moment(a: f64, b: f64, dh2: f64, alpha: f64) -> f64 {
    let ua = a * a + dh2;
    let ub = b * b + dh2;
    if (alpha - 2.0).abs() < 1e-12 {
        0.5 * (ub / ua).ln()
    } else {
        let e = 1.0 - alpha / 2.0;
        (ub.powf(e) - ua.powf(e)) / (2.0 * e)
    }
}
