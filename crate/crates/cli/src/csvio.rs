//! CSV output: '.' decimal separator, 17-significant-digit round-trip
//! formatting, header row, newline-terminated rows. Identical inputs produce
//! byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use kinalign::{Domain1D, EntropyReport};

/// 17 significant digits: one leading digit plus 16 after the point.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_series(path: &Path, reports: &[EntropyReport]) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "t,mass,momentum,F,D,Erel,residual_24,minimization_worst,dissipation_budget"
    )?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            fmt_f64(r.t),
            fmt_f64(r.mass),
            fmt_f64(r.momentum),
            fmt_f64(r.kinetic_entropy),
            fmt_f64(r.dissipation),
            fmt_f64(r.rel_entropy),
            fmt_f64(r.entropy_residual),
            fmt_f64(r.minimization_worst),
            fmt_f64(r.dissipation_budget),
        )?;
    }
    Ok(())
}

pub fn write_snapshot(
    path: &Path,
    dom: &Domain1D,
    rho_eps: &[f64],
    u_eps: &[f64],
    reference: &[(f64, f64)],
) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "x,rho_eps,u_eps,rho_ref,u_ref")?;
    for j in 0..dom.nx() {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_f64(dom.node(j)),
            fmt_f64(rho_eps[j]),
            fmt_f64(u_eps[j]),
            fmt_f64(reference[j].0),
            fmt_f64(reference[j].1),
        )?;
    }
    Ok(())
}

pub fn write_reference(path: &Path, dom: &Domain1D, values: &[(f64, f64)]) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "x,rho,u")?;
    for (j, &(rho, u)) in values.iter().enumerate() {
        writeln!(w, "{},{},{}", fmt_f64(dom.node(j)), fmt_f64(rho), fmt_f64(u))?;
    }
    Ok(())
}

/// Short tag for snapshot file names: the time as given, with '.' kept.
pub fn time_tag(t: f64) -> String {
    let s = format!("{t}");
    s.replace('-', "m")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_round_trips() {
        for &x in &[0.0, 1.0, -0.25, 1.0 / 3.0, 6.02e23, 3.18e-7, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x} -> {s} -> {back}");
        }
    }
}
