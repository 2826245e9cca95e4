//! Domain types and the local/offload overhead equations.
//!
//! All quantities are SI: bits, cycles, seconds, joules, watts, hertz.
//! The weighted overhead adds seconds and joules directly, with no
//! normalization.

use serde::Serialize;

use crate::error::{Error, Result};

/// Bandwidth of one LTE resource block: 12 subcarriers of 15 kHz.
pub const RB_BANDWIDTH_HZ: f64 = 180_000.0;

/// Tolerance used when checking that two weights sum to one.
const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

fn non_negative(field: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(field, format!("must be finite and >= 0, got {v}")))
    }
}

fn positive(field: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(field, format!("must be finite and > 0, got {v}")))
    }
}

/// A computation task: input size, required work and completion deadline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComputeTask {
    input_bits: f64,
    compute_units: f64,
    deadline: f64,
}

impl ComputeTask {
    pub fn new(input_bits: f64, compute_units: f64, deadline: f64) -> Result<Self> {
        Ok(ComputeTask {
            input_bits: non_negative("input_bits", input_bits)?,
            compute_units: non_negative("compute_units", compute_units)?,
            deadline: positive("deadline", deadline)?,
        })
    }

    /// Size of the data uploaded when offloading, in bits.
    pub fn input_bits(&self) -> f64 {
        self.input_bits
    }

    /// Work required, in cycles.
    pub fn compute_units(&self) -> f64 {
        self.compute_units
    }

    /// Latency limit, in seconds.
    pub fn deadline(&self) -> f64 {
        self.deadline
    }
}

/// Where and how fast a task can be computed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComputeProfile {
    local_speed: f64,
    energy_per_unit: f64,
    edge_speed: f64,
}

impl ComputeProfile {
    pub fn new(local_speed: f64, energy_per_unit: f64, edge_speed: f64) -> Result<Self> {
        Ok(ComputeProfile {
            local_speed: positive("local_speed", local_speed)?,
            energy_per_unit: non_negative("energy_per_unit", energy_per_unit)?,
            edge_speed: positive("edge_speed", edge_speed)?,
        })
    }

    /// Onboard speed in cycles/second.
    pub fn local_speed(&self) -> f64 {
        self.local_speed
    }

    /// Onboard energy in joules per cycle.
    pub fn energy_per_unit(&self) -> f64 {
        self.energy_per_unit
    }

    /// Edge-server speed granted to the user, in cycles/second.
    pub fn edge_speed(&self) -> f64 {
        self.edge_speed
    }
}

/// Time/energy preference of a user. The two weights always sum to one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Weights {
    time: f64,
    energy: f64,
}

impl Weights {
    pub fn new(time: f64, energy: f64) -> Result<Self> {
        for (field, v) in [("time_weight", time), ("energy_weight", energy)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(field, format!("must lie in [0, 1], got {v}")));
            }
        }
        if (time + energy - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::invalid(
                "weights",
                format!("time + energy must equal 1, got {time} + {energy}"),
            ));
        }
        Ok(Weights { time, energy })
    }

    pub fn time_only() -> Self {
        Weights { time: 1.0, energy: 0.0 }
    }

    pub fn energy_only() -> Self {
        Weights { time: 0.0, energy: 1.0 }
    }

    pub fn balanced() -> Self {
        Weights { time: 0.5, energy: 0.5 }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn combine(&self, time_s: f64, energy_j: f64) -> f64 {
        self.time * time_s + self.energy * energy_j
    }
}

/// Uplink radio parameters of one user.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadioLink {
    tx_power: f64,
    channel_gain: f64,
    noise_power: f64,
    carriers: u32,
    rb_bandwidth: f64,
    tail_energy: f64,
}

impl RadioLink {
    /// Link with the standard 180 kHz resource block and no tail energy.
    pub fn new(tx_power: f64, channel_gain: f64, noise_power: f64, carriers: u32) -> Result<Self> {
        if carriers == 0 {
            return Err(Error::invalid("carriers", "must be >= 1"));
        }
        Ok(RadioLink {
            tx_power: positive("tx_power", tx_power)?,
            channel_gain: positive("channel_gain", channel_gain)?,
            noise_power: positive("noise_power", noise_power)?,
            carriers,
            rb_bandwidth: RB_BANDWIDTH_HZ,
            tail_energy: 0.0,
        })
    }

    pub fn with_tail_energy(mut self, joules: f64) -> Result<Self> {
        self.tail_energy = non_negative("tail_energy", joules)?;
        Ok(self)
    }

    pub fn with_rb_bandwidth(mut self, hz: f64) -> Result<Self> {
        self.rb_bandwidth = positive("rb_bandwidth", hz)?;
        Ok(self)
    }

    pub fn tx_power(&self) -> f64 {
        self.tx_power
    }

    pub fn channel_gain(&self) -> f64 {
        self.channel_gain
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn carriers(&self) -> u32 {
        self.carriers
    }

    pub fn rb_bandwidth(&self) -> f64 {
        self.rb_bandwidth
    }

    pub fn tail_energy(&self) -> f64 {
        self.tail_energy
    }

    pub fn snr(&self) -> f64 {
        self.tx_power * self.channel_gain / self.noise_power
    }

    /// Shannon-Hartley rate carried by a single resource block, bits/second.
    pub fn per_rb_rate(&self) -> f64 {
        f64::from(self.carriers) * self.rb_bandwidth * (1.0 + self.snr()).log2()
    }
}

/// Time, energy and weighted cost of executing a task in one mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OverheadBreakdown {
    pub time_s: f64,
    pub energy_j: f64,
    pub weighted: f64,
}

impl OverheadBreakdown {
    fn new(time_s: f64, energy_j: f64, w: Weights) -> Self {
        OverheadBreakdown {
            time_s,
            energy_j,
            weighted: w.combine(time_s, energy_j),
        }
    }
}

/// Overhead of running the task on the vehicle.
pub fn local_overhead(task: &ComputeTask, profile: &ComputeProfile, w: Weights) -> OverheadBreakdown {
    let time = task.compute_units / profile.local_speed;
    let energy = profile.energy_per_unit * task.compute_units;
    OverheadBreakdown::new(time, energy, w)
}

/// Uplink rate over `rb_count` resource blocks. Linear in `rb_count`.
pub fn uplink_rate(link: &RadioLink, rb_count: u32) -> f64 {
    if rb_count == 0 {
        return 0.0;
    }
    f64::from(rb_count) * link.per_rb_rate()
}

/// Overhead of offloading over `rb_count` resource blocks.
///
/// Only the upload of the task input is charged; results are assumed small.
pub fn offload_overhead(
    task: &ComputeTask,
    profile: &ComputeProfile,
    link: &RadioLink,
    w: Weights,
    rb_count: u32,
) -> Result<OverheadBreakdown> {
    if rb_count == 0 {
        return Err(Error::invalid(
            "rb_count",
            "offload overhead needs at least one resource block",
        ));
    }
    Ok(offload_overhead_at_rate(task, profile, link, w, uplink_rate(link, rb_count)))
}

/// Offload overhead at an arbitrary positive uplink rate (bits/second).
///
/// Useful for evaluating fractional resource-block counts.
pub fn offload_overhead_at_rate(
    task: &ComputeTask,
    profile: &ComputeProfile,
    link: &RadioLink,
    w: Weights,
    rate: f64,
) -> OverheadBreakdown {
    let transmit = task.input_bits / rate;
    let execute = task.compute_units / profile.edge_speed;
    let energy = task.input_bits * link.tx_power / rate + link.tail_energy;
    OverheadBreakdown::new(transmit + execute, energy, w)
}

/// Everything needed to describe one user's offloading problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Vehicle {
    pub task: ComputeTask,
    pub profile: ComputeProfile,
    pub link: RadioLink,
    pub weights: Weights,
}

impl Vehicle {
    pub fn local(&self) -> OverheadBreakdown {
        local_overhead(&self.task, &self.profile, self.weights)
    }

    pub fn offload(&self, rb_count: u32) -> Result<OverheadBreakdown> {
        offload_overhead(&self.task, &self.profile, &self.link, self.weights, rb_count)
    }
}
