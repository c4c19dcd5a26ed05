//! Data behind the headline results, with fixed parameters.

use anyhow::Result;
use serde_json::Value;

use fermi_cavity::entanglement::doktorsky_check_2d;
use fermi_cavity::kinetics::{CollisionKernel, KineticState};
use fermi_cavity::partitions::McmcConfig;
use fermi_cavity::thermo::{solve_thermal, SpectrumModel};

use crate::args::{CavityArgs, Panel, ReproArgs, ReproId, StateArgs};
use crate::commands::{cavity, continuum_state, density_records, double_step, kinetics_table, pattern_table};
use crate::output::{Output, Table};
use crate::UsageError;

/// Finite-temperature state and lattice of the volume-law and continuum
/// data: T = 1, μ = 0, a = 1.5 in a cavity of side 1000.
const STATE: StateArgs = StateArgs {
    temperature: 1.0,
    chemical_potential: 0.0,
};
const LATTICE_A: f64 = 1.5;
const CAVITY: CavityArgs = CavityArgs {
    linear_size: 1000.0,
    hbar: 1.0,
    mass: 1.0,
};

pub fn run(a: &ReproArgs, seed: u64) -> Result<Output> {
    let panel = match (a.id, a.panel) {
        (ReproId::Fig4, Some(p)) => Some(p),
        (ReproId::Fig4, None) | (ReproId::Fig4b, None) => Some(Panel::B),
        (ReproId::Fig4d, None) => Some(Panel::D),
        (_, Some(_)) => return Err(UsageError("--panel only applies to `fig4`".into()).into()),
        _ => None,
    };
    let table = match (a.id, panel) {
        (_, Some(Panel::B)) => partition_figure(21_900, 200, 20, a.samples, seed)?,
        (_, Some(Panel::D)) => partition_figure(87_800, 400, 40, a.samples, seed)?,
        (ReproId::VolumeLaw, _) => volume_law()?,
        (ReproId::ContinuumLimit, _) => continuum_limit()?,
        (ReproId::KineticsRelax, _) => kinetics_relax()?,
        _ => unreachable!("partition figures are handled above"),
    };
    Ok(Output::Table(table))
}

/// Columns m, eps_m, ratio_mean, fd_fit; the fit and the independent
/// thermal solution of the same (E, N) go in the metadata.
fn partition_figure(energy: u64, count: u64, group_size: usize, samples: usize, seed: u64) -> Result<Table> {
    let cfg = McmcConfig {
        seed,
        ..McmcConfig::default()
    };
    let full = pattern_table(energy, count, group_size, samples, &cfg, true)?;
    let mut t = Table::new(&["m", "eps_m", "ratio_mean", "fd_fit"]);
    t.meta = full.meta;
    for row in &full.rows {
        t.push(vec![row[0], row[1], row[2], row[4]]);
    }
    let thermal = solve_thermal(&SpectrumModel::harmonic(), energy as f64, count as f64)?;
    t.meta("thermal_temperature", thermal.temperature);
    t.meta("thermal_chemical_potential", thermal.chemical_potential);
    Ok(t)
}

/// Entropy per site of squares of side 12, 20, 30 against the symbol.
fn volume_law() -> Result<Table> {
    let cav = cavity(&CAVITY)?.with_lattice(LATTICE_A)?;
    let ts = continuum_state(&cav, &STATE)?;
    let mut t = Table::new(&["side", "n_a", "entropy", "s_per_site", "formula", "gap"]);
    t.meta("temperature", STATE.temperature);
    t.meta("chemical_potential", STATE.chemical_potential);
    t.meta("lattice_a", LATTICE_A);
    let mut per_site = Vec::new();
    for side in [12usize, 20, 30] {
        let c = doktorsky_check_2d(&ts, &cav, side)?;
        per_site.push(c.entropy_per_site);
        t.push(vec![side as f64, c.sites as f64, c.entropy, c.entropy_per_site, c.formula, c.gap]);
    }
    let max = per_site.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = per_site.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = per_site.iter().sum::<f64>() / per_site.len() as f64;
    t.meta("relative_spread", (max - min) / mean);
    Ok(t)
}

/// S_a/a² against the continuum entropy density for a = 1.5, 1, 0.5 and
/// a tenth of the thermal wavelength.
fn continuum_limit() -> Result<Table> {
    let cav = cavity(&CAVITY)?;
    let tenth = cav.thermal_wavelength(STATE.temperature) / 10.0;
    let records = density_records(&cav, &STATE, &[1.5, 1.0, 0.5, tenth])?;
    let mut t = Table::new(&["a", "s_per_site", "s_per_area", "s0", "rel_gap"]);
    t.meta("temperature", STATE.temperature);
    t.meta("chemical_potential", STATE.chemical_potential);
    let num = |r: &Value, k: &str| r[k].as_f64().unwrap_or(f64::NAN);
    for r in &records {
        t.push(vec![num(r, "a"), num(r, "S_per_site"), num(r, "S_per_area"), num(r, "S0"), num(r, "rel_gap")]);
    }
    Ok(t)
}

/// 64 levels from two filled blocks, W = 0.01 inside |δ| ≤ 8, dt = 0.1.
fn kinetics_relax() -> Result<Table> {
    let s0 = KineticState::on_ladder(64, 1.0, double_step(64))?;
    let w = CollisionKernel::constant(8, 0.01)?;
    kinetics_table(&s0, &w, 0.1, 1000)
}
