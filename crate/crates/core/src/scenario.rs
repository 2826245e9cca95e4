//! Experiment instances: a single cell with users scattered uniformly over a
//! disk, each drawing a task, an onboard speed and a time/energy preference
//! from small catalogs.
//!
//! Scenario documents are JSON in table units (kB, Megacycles, GHz, mW, dBm,
//! seconds) and are converted to SI on load.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ComputeProfile, ComputeTask, RadioLink, Vehicle, Weights};
use crate::units;

/// PRNG stream used for user generation.
pub const SCENARIO_STREAM: u64 = 0;

pub const SUPPORTED_BANDWIDTHS_MHZ: [u32; 3] = [10, 15, 20];

/// Resource blocks available at a given LTE bandwidth.
pub fn rb_capacity_for_bandwidth(mhz: u32) -> Option<u32> {
    match mhz {
        10 => Some(50),
        15 => Some(75),
        20 => Some(100),
        _ => None,
    }
}

/// One catalog entry, in SI units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TaskKind {
    pub input_bits: f64,
    pub compute_units: f64,
    pub deadline_s: f64,
}

/// A fully resolved scenario, SI units throughout.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub cell_radius_m: f64,
    pub user_count: usize,
    pub bandwidth_mhz: Option<u32>,
    pub rb_capacity: u32,
    pub carriers: u32,
    pub tx_power_w: f64,
    pub noise_w: f64,
    pub path_loss_exponent: f64,
    pub min_distance_m: f64,
    pub task_catalog: Vec<TaskKind>,
    pub local_speed_choices: Vec<f64>,
    pub energy_per_unit: f64,
    pub edge_speed: f64,
    pub tail_energy_j: f64,
    pub weight_choices: Vec<Weights>,
    pub seed: u64,
}

/// The four task kinds, index-paired: small uploads come with small work and
/// tight deadlines.
pub fn table1_task_catalog() -> Vec<TaskKind> {
    ScenarioFile::default().task_catalog.iter().map(TaskKindFile::to_si).collect()
}

pub fn default_table1_config(bandwidth_mhz: u32) -> Result<ScenarioConfig> {
    if rb_capacity_for_bandwidth(bandwidth_mhz).is_none() {
        return Err(Error::Config(format!(
            "unsupported bandwidth {bandwidth_mhz} MHz (expected one of 10, 15, 20)"
        )));
    }
    ScenarioFile {
        bandwidth_mhz: Some(bandwidth_mhz),
        ..ScenarioFile::default()
    }
    .into_config()
}

impl ScenarioConfig {
    /// Same scenario at another bandwidth, with the matching block count.
    pub fn with_bandwidth(&self, mhz: u32) -> Result<ScenarioConfig> {
        let rb_capacity = rb_capacity_for_bandwidth(mhz)
            .ok_or_else(|| Error::Config(format!("unsupported bandwidth {mhz} MHz")))?;
        Ok(ScenarioConfig {
            bandwidth_mhz: Some(mhz),
            rb_capacity,
            ..self.clone()
        })
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be > 0, got {v}")))
            }
        };
        positive("cell_radius_m", self.cell_radius_m)?;
        positive("tx_power", self.tx_power_w)?;
        positive("noise", self.noise_w)?;
        positive("path_loss_exponent", self.path_loss_exponent)?;
        positive("min_distance_m", self.min_distance_m)?;
        positive("edge_speed", self.edge_speed)?;
        if self.user_count == 0 {
            return Err(Error::Config("user_count must be >= 1".into()));
        }
        if self.rb_capacity == 0 {
            return Err(Error::Config("rb_capacity must be >= 1".into()));
        }
        if self.carriers == 0 {
            return Err(Error::Config("carriers must be >= 1".into()));
        }
        if let Some(mhz) = self.bandwidth_mhz {
            match rb_capacity_for_bandwidth(mhz) {
                None => return Err(Error::Config(format!("unsupported bandwidth {mhz} MHz"))),
                Some(rb) if rb != self.rb_capacity => {
                    return Err(Error::Config(format!(
                        "rb_capacity {} is inconsistent with {mhz} MHz (expected {rb})",
                        self.rb_capacity
                    )))
                }
                Some(_) => {}
            }
        }
        if self.task_catalog.is_empty() || self.local_speed_choices.is_empty() || self.weight_choices.is_empty() {
            return Err(Error::Config(
                "task_catalog, local_speed choices and weight_choices must be non-empty".into(),
            ));
        }
        for t in &self.task_catalog {
            ComputeTask::new(t.input_bits, t.compute_units, t.deadline_s)
                .map_err(|e| Error::Config(format!("task_catalog: {e}")))?;
        }
        for &f in &self.local_speed_choices {
            ComputeProfile::new(f, self.energy_per_unit, self.edge_speed)
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        RadioLink::new(self.tx_power_w, 1.0, self.noise_w, self.carriers)
            .and_then(|l| l.with_tail_energy(self.tail_energy_j))
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<ScenarioConfig> {
        let file: ScenarioFile =
            serde_json::from_str(s).map_err(|e| Error::Config(format!("malformed scenario JSON: {e}")))?;
        file.into_config()
    }

    pub fn load(path: &Path) -> Result<ScenarioConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        ScenarioConfig::from_json_str(&text)
    }

    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            cell_radius_m: self.cell_radius_m,
            user_count: self.user_count,
            bandwidth_mhz: self.bandwidth_mhz,
            rb_capacity: Some(self.rb_capacity),
            carriers: self.carriers,
            tx_power_mw: units::w_to_mw(self.tx_power_w),
            noise_dbm: units::w_to_dbm(self.noise_w),
            path_loss_exponent: self.path_loss_exponent,
            min_distance_m: self.min_distance_m,
            task_catalog: self
                .task_catalog
                .iter()
                .map(|t| TaskKindFile {
                    input_kb: units::bits_to_kb(t.input_bits),
                    compute_megacycles: units::cycles_to_megacycles(t.compute_units),
                    deadline_s: t.deadline_s,
                })
                .collect(),
            local_speed_ghz: self.local_speed_choices.iter().map(|&f| units::hz_to_ghz(f)).collect(),
            energy_per_megacycle_j: units::j_per_cycle_to_j_per_megacycle(self.energy_per_unit),
            edge_speed_ghz: units::hz_to_ghz(self.edge_speed),
            tail_energy_j: self.tail_energy_j,
            weight_choices: self.weight_choices.iter().map(|w| [w.time(), w.energy()]).collect(),
            seed: self.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskKindFile {
    pub input_kb: f64,
    pub compute_megacycles: f64,
    pub deadline_s: f64,
}

/// On-disk scenario document. Missing keys take the 20 MHz table defaults;
/// when only `bandwidth_mhz` is given the block count follows from it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioFile {
    pub cell_radius_m: f64,
    pub user_count: usize,
    pub bandwidth_mhz: Option<u32>,
    pub rb_capacity: Option<u32>,
    pub carriers: u32,
    pub tx_power_mw: f64,
    pub noise_dbm: f64,
    pub path_loss_exponent: f64,
    pub min_distance_m: f64,
    pub task_catalog: Vec<TaskKindFile>,
    pub local_speed_ghz: Vec<f64>,
    pub energy_per_megacycle_j: f64,
    pub edge_speed_ghz: f64,
    pub tail_energy_j: f64,
    /// `[time_weight, energy_weight]` pairs.
    pub weight_choices: Vec<[f64; 2]>,
    pub seed: u64,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        ScenarioFile {
            cell_radius_m: 50.0,
            user_count: 30,
            bandwidth_mhz: None,
            rb_capacity: None,
            carriers: 5,
            tx_power_mw: 100.0,
            noise_dbm: -100.0,
            path_loss_exponent: 2.0,
            min_distance_m: 1.0,
            task_catalog: [(1000.0, 100.0, 0.2), (2000.0, 300.0, 0.6), (5000.0, 1000.0, 1.0), (10000.0, 2000.0, 2.0)]
                .into_iter()
                .map(|(input_kb, compute_megacycles, deadline_s)| TaskKindFile {
                    input_kb,
                    compute_megacycles,
                    deadline_s,
                })
                .collect(),
            local_speed_ghz: vec![0.5, 0.8, 1.0],
            energy_per_megacycle_j: 0.0025,
            edge_speed_ghz: 10.0,
            tail_energy_j: 0.0,
            weight_choices: vec![[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]],
            seed: 0,
        }
    }
}

impl TaskKindFile {
    fn to_si(&self) -> TaskKind {
        TaskKind {
            input_bits: units::kb_to_bits(self.input_kb),
            compute_units: units::megacycles_to_cycles(self.compute_megacycles),
            deadline_s: self.deadline_s,
        }
    }
}

impl ScenarioFile {
    pub fn into_config(self) -> Result<ScenarioConfig> {
        let rb_capacity = match (self.bandwidth_mhz, self.rb_capacity) {
            (_, Some(rb)) => rb,
            (Some(mhz), None) => rb_capacity_for_bandwidth(mhz)
                .ok_or_else(|| Error::Config(format!("unsupported bandwidth {mhz} MHz (expected 10, 15 or 20)")))?,
            (None, None) => 100,
        };
        let bandwidth_mhz = match (self.bandwidth_mhz, self.rb_capacity) {
            (None, None) => Some(20),
            (b, _) => b,
        };
        let weight_choices = self
            .weight_choices
            .iter()
            .map(|&[t, e]| Weights::new(t, e).map_err(|err| Error::Config(format!("weight_choices: {err}"))))
            .collect::<Result<Vec<_>>>()?;
        let config = ScenarioConfig {
            cell_radius_m: self.cell_radius_m,
            user_count: self.user_count,
            bandwidth_mhz,
            rb_capacity,
            carriers: self.carriers,
            tx_power_w: units::mw_to_w(self.tx_power_mw),
            noise_w: units::dbm_to_w(self.noise_dbm),
            path_loss_exponent: self.path_loss_exponent,
            min_distance_m: self.min_distance_m,
            task_catalog: self.task_catalog.iter().map(TaskKindFile::to_si).collect(),
            local_speed_choices: self.local_speed_ghz.iter().map(|&g| units::ghz_to_hz(g)).collect(),
            energy_per_unit: units::j_per_megacycle_to_j_per_cycle(self.energy_per_megacycle_j),
            edge_speed: units::ghz_to_hz(self.edge_speed_ghz),
            tail_energy_j: self.tail_energy_j,
            weight_choices,
            seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratedUser {
    pub id: usize,
    pub position: [f64; 2],
    pub distance_m: f64,
    /// Index into the scenario's task catalog.
    pub task_type: usize,
    pub vehicle: Vehicle,
}

/// A point uniform over the disk of radius `radius` around the origin.
pub fn sample_position<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> [f64; 2] {
    let r = radius * rng.random::<f64>().sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    [r * theta.cos(), r * theta.sin()]
}

/// Power-law channel gain `distance^(-exponent)`, distance clamped below.
pub fn channel_gain(distance_m: f64, exponent: f64, min_distance_m: f64) -> f64 {
    distance_m.max(min_distance_m).powf(-exponent)
}

/// Draw the user population. Each user consumes, in order: radius, angle,
/// task kind, onboard speed, weights.
pub fn generate_users(config: &ScenarioConfig, seed: u64) -> Result<Vec<GeneratedUser>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SCENARIO_STREAM);
    let mut users = Vec::with_capacity(config.user_count);
    for id in 0..config.user_count {
        let position = sample_position(&mut rng, config.cell_radius_m);
        let distance_m = position[0].hypot(position[1]).max(config.min_distance_m);
        let task_type = rng.random_range(0..config.task_catalog.len());
        let local_speed = config.local_speed_choices[rng.random_range(0..config.local_speed_choices.len())];
        let weights = config.weight_choices[rng.random_range(0..config.weight_choices.len())];

        let kind = config.task_catalog[task_type];
        let vehicle = Vehicle {
            task: ComputeTask::new(kind.input_bits, kind.compute_units, kind.deadline_s)?,
            profile: ComputeProfile::new(local_speed, config.energy_per_unit, config.edge_speed)?,
            link: RadioLink::new(
                config.tx_power_w,
                channel_gain(distance_m, config.path_loss_exponent, config.min_distance_m),
                config.noise_w,
                config.carriers,
            )?
            .with_tail_energy(config.tail_energy_j)?,
            weights,
        };
        users.push(GeneratedUser {
            id,
            position,
            distance_m,
            task_type,
            vehicle,
        });
    }
    Ok(users)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table1_defaults() {
        for (mhz, rb) in [(10, 50), (15, 75), (20, 100)] {
            let c = default_table1_config(mhz).unwrap();
            assert_eq!(c.rb_capacity, rb);
            assert_eq!(c.user_count, 30);
            assert_eq!(c.cell_radius_m, 50.0);
            assert_eq!(c.carriers, 5);
            c.validate().unwrap();
        }
        assert!(matches!(default_table1_config(5), Err(Error::Config(_))));
    }

    #[test]
    fn table1_catalog_in_si() {
        let c = default_table1_config(20).unwrap();
        let got: Vec<_> = c
            .task_catalog
            .iter()
            .map(|t| (t.input_bits, t.compute_units, t.deadline_s))
            .collect();
        assert_eq!(
            got,
            vec![(8e6, 1e8, 0.2), (1.6e7, 3e8, 0.6), (4e7, 1e9, 1.0), (8e7, 2e9, 2.0)]
        );
        assert_eq!(c.local_speed_choices, vec![0.5e9, 0.8e9, 1.0e9]);
        assert!((c.energy_per_unit - 2.5e-9).abs() < 1e-24);
        assert_eq!(c.edge_speed, 1e10);
        assert_eq!(c.tx_power_w, 0.1);
        assert!((c.noise_w - 1e-13).abs() < 1e-25);
    }

    #[test]
    fn gains() {
        assert!((channel_gain(10.0, 2.0, 1.0) - 0.01).abs() < 1e-15);
        assert_eq!(channel_gain(0.3, 2.0, 1.0), 1.0);
    }

    #[test]
    fn generation_is_deterministic() {
        let c = default_table1_config(20).unwrap();
        assert_eq!(generate_users(&c, 5).unwrap(), generate_users(&c, 5).unwrap());
        assert_ne!(generate_users(&c, 5).unwrap(), generate_users(&c, 6).unwrap());
    }

    #[test]
    fn generated_users_stay_in_cell() {
        let c = default_table1_config(10).unwrap();
        for u in generate_users(&c, 1).unwrap() {
            assert!(u.distance_m >= 1.0 && u.distance_m <= 50.0);
            assert!(u.task_type < 4);
        }
    }

    #[test]
    fn json_uses_table_units() {
        let c = ScenarioConfig::from_json_str(r#"{"bandwidth_mhz": 10, "tx_power_mw": 200, "noise_dbm": -90}"#).unwrap();
        assert_eq!(c.rb_capacity, 50);
        assert_eq!(c.tx_power_w, 0.2);
        assert!((c.noise_w - 1e-12).abs() < 1e-24);

        let empty = ScenarioConfig::from_json_str("{}").unwrap();
        assert_eq!(empty, default_table1_config(20).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let c = default_table1_config(15).unwrap();
        let text = serde_json::to_string(&c.to_file()).unwrap();
        let back = ScenarioConfig::from_json_str(&text).unwrap();
        assert_eq!(back.rb_capacity, 75);
        assert_eq!(back.task_catalog.len(), 4);
        for (a, b) in back.task_catalog.iter().zip(&c.task_catalog) {
            assert!((a.input_bits - b.input_bits).abs() <= 1e-12 * b.input_bits);
        }
    }

    #[test]
    fn json_rejections() {
        for bad in [
            r#"{"bandwidth_mhz": 12}"#,
            r#"{"bandwidth_mhz": 10, "rb_capacity": 100}"#,
            r#"{"weight_choices": [[0.5, 0.6]]}"#,
            r#"{"task_catalog": [{"input_kb": 1, "compute_megacycles": 1, "deadline_s": 0}]}"#,
            r#"{"user_count": 0}"#,
            r#"{"unknown_key": 1}"#,
            r#"{"cell_radius_m": "far"}"#,
            "not json",
        ] {
            let err = ScenarioConfig::from_json_str(bad).unwrap_err();
            assert!(err.is_config(), "{bad}: {err}");
        }
    }
}
