//! Conversions between the experiment-table units and the SI units used
//! everywhere inside the crate.
//!
//! Kilobytes are decimal (1 kB = 8 000 bits). Compute work is counted in
//! cycles; "Megacycles" and "GHz" map onto cycles and cycles/second.

pub const BITS_PER_KB: f64 = 8_000.0;
pub const CYCLES_PER_MEGACYCLE: f64 = 1e6;
pub const HZ_PER_GHZ: f64 = 1e9;

pub fn kb_to_bits(kb: f64) -> f64 {
    kb * BITS_PER_KB
}

pub fn bits_to_kb(bits: f64) -> f64 {
    bits / BITS_PER_KB
}

pub fn megacycles_to_cycles(mc: f64) -> f64 {
    mc * CYCLES_PER_MEGACYCLE
}

pub fn cycles_to_megacycles(cycles: f64) -> f64 {
    cycles / CYCLES_PER_MEGACYCLE
}

pub fn ghz_to_hz(ghz: f64) -> f64 {
    ghz * HZ_PER_GHZ
}

pub fn hz_to_ghz(hz: f64) -> f64 {
    hz / HZ_PER_GHZ
}

pub fn mw_to_w(mw: f64) -> f64 {
    mw / 1_000.0
}

pub fn w_to_mw(w: f64) -> f64 {
    w * 1_000.0
}

pub fn dbm_to_w(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn w_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// Joules per Megacycle to joules per cycle.
pub fn j_per_megacycle_to_j_per_cycle(j: f64) -> f64 {
    j / CYCLES_PER_MEGACYCLE
}

pub fn j_per_cycle_to_j_per_megacycle(j: f64) -> f64 {
    j * CYCLES_PER_MEGACYCLE
}
