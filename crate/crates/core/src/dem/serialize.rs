use std::fmt::Write;

use super::DetectorErrorModel;

/// Writes a model in flattened text form (no repeat blocks).
///
/// Every detector is declared so that the detector count and coordinates
/// survive a round trip; every observable is declared for the same reason.
/// Rounds supplied out-of-band (without coordinates) are not representable
/// in the text form and are dropped.
pub fn serialize_dem(dem: &DetectorErrorModel) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# detector error model: {} detectors, {} observables, {} mechanisms",
        dem.num_detectors,
        dem.num_observables,
        dem.mechanisms.len()
    );
    for m in &dem.mechanisms {
        let _ = write!(out, "error({})", m.probability);
        for d in &m.detectors {
            let _ = write!(out, " D{d}");
        }
        for o in &m.observables {
            let _ = write!(out, " L{o}");
        }
        out.push('\n');
    }
    for d in &dem.detectors {
        match &d.coords {
            Some(coords) => {
                let joined: Vec<String> = coords.iter().map(|c| format!("{c}")).collect();
                let _ = writeln!(out, "detector({}) D{}", joined.join(", "), d.index);
            }
            None => {
                let _ = writeln!(out, "detector D{}", d.index);
            }
        }
    }
    for o in 0..dem.num_observables {
        let _ = writeln!(out, "logical_observable L{o}");
    }
    out
}
