//! Regenerates the bundled motor maps from the surrogate machine.
//!
//! `cargo run --release --example calibrate -- [CONFIG] [SURROGATE]`

use drivesim::calibration::{calibrate, write_maps, Surrogate};
use drivesim::{Overrides, RunConfig};

fn main() -> drivesim::Result<()> {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data");
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .unwrap_or_else(|| format!("{root}/reference.toml"));
    let surrogate = args
        .next()
        .unwrap_or_else(|| format!("{root}/motor/surrogate.toml"));
    let run = RunConfig::parse(&config, Overrides::default())?;
    let cal = calibrate(&run, &Surrogate::load(&surrogate)?)?;
    let b = cal.calibrated;
    println!(
        "fundamental scale {:.6}, harmonic scale {:.6}",
        cal.fundamental_scale, cal.harmonic_scale
    );
    println!(
        "B6_SiC kWh/100 km: inv_sw {:.4} inv_cond {:.4} mot_f {:.4} mot_h {:.4} total {:.4}",
        b.inv_sw,
        b.inv_cond,
        b.mot_f,
        b.mot_h,
        b.total()
    );
    for p in write_maps(&run, &cal.model)? {
        println!("{}", p.display());
    }
    Ok(())
}
