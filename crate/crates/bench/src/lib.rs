//! Fixtures shared by the benchmarks.

use vecc_core::{default_table1_config, generate_users, DemandResult, ScenarioConfig, Vehicle};

/// A table-default scenario with `users` vehicles at the given bandwidth.
pub fn scenario(bandwidth_mhz: u32, users: usize) -> ScenarioConfig {
    let mut config = default_table1_config(bandwidth_mhz).expect("supported bandwidth");
    config.user_count = users;
    config
}

/// Vehicles and their minimum demands for one seeded draw.
pub fn fixture(config: &ScenarioConfig, seed: u64) -> (Vec<Vehicle>, Vec<DemandResult>) {
    let vehicles: Vec<Vehicle> = generate_users(config, seed)
        .expect("valid scenario")
        .into_iter()
        .map(|u| u.vehicle)
        .collect();
    let demands = vehicles.iter().map(|v| v.demand(config.rb_capacity)).collect();
    (vehicles, demands)
}
