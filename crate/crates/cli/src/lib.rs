//! Support code for the `decodoku` binary: argument parsing helpers and the
//! HTTP game service.

pub mod server;

use decodoku_core::LatticeSpec;

/// Parses `WxH`, e.g. `8x8` or `12x6`.
pub fn parse_lattice(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got `{s}`"))?;
    let w = w.trim().parse().map_err(|_| format!("bad width in `{s}`"))?;
    let h = h.trim().parse().map_err(|_| format!("bad height in `{s}`"))?;
    Ok((w, h))
}

/// Parses one probability in `[0, 1]`.
pub fn parse_probability(s: &str) -> Result<f64, String> {
    let p: f64 = s.trim().parse().map_err(|_| format!("bad probability `{s}`"))?;
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(format!("probability {p} outside [0, 1]"))
    }
}

pub fn lattice_spec(lattice: (usize, usize), d: u32) -> anyhow::Result<LatticeSpec> {
    Ok(LatticeSpec::new(lattice.0, lattice.1, d)?)
}
