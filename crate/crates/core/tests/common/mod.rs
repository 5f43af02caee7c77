#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use skycov::ScenarioConfig;

/// A valid drone scenario with every physical parameter drawn at random.
/// Altitudes above the BSs are capped at 150 m so footprints stay under
/// 1.8 km and dense scans remain cheap.
pub fn random_drone_config(rng: &mut ChaCha8Rng) -> ScenarioConfig {
    loop {
        let mut c = ScenarioConfig::reference_drone();
        c.lambda_bs = 10f64.powf(rng.random_range(0.0..2.0));
        c.environment.a = rng.random_range(0.1..0.6);
        c.environment.b = rng.random_range(100.0..750.0);
        c.environment.c = rng.random_range(5.0..25.0);
        c.channel.alpha_los = rng.random_range(2.0..3.0);
        c.channel.alpha_nlos = rng.random_range(2.5..4.5);
        c.channel.a_los_db = rng.random_range(-50.0..-30.0);
        c.channel.a_nlos_db = rng.random_range(-50.0..-30.0);
        c.channel.m_los = rng.random_range(1..=4);
        c.channel.m_nlos = rng.random_range(1..=4);
        c.antenna.theta_b_deg = rng.random_range(10.0..60.0);
        c.antenna.theta_t_deg = rng.random_range(-10.0..30.0);
        c.antenna.g_side = rng.random_range(0.1..2.0);
        c.antenna.g_main = c.antenna.g_side * rng.random_range(1.0..40.0);
        c.antenna.h_bs = rng.random_range(10.0..50.0);
        c.user.h_d = c.antenna.h_bs + rng.random_range(5.0..150.0);
        c.user.phi_b_deg = rng.random_range(60.0..170.0);
        if c.validate().is_ok() {
            return c;
        }
    }
}

pub fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}
