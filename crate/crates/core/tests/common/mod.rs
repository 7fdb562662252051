#![allow(dead_code)]

use std::path::PathBuf;

use qpredec::dem::{parse_dem, CssCodeSpec, DetectorErrorModel, NoiseConfig, Sector};
use qpredec::flow::ModelSource;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub fn surface_dem(d: usize) -> DetectorErrorModel {
    parse_dem(&read_fixture(&format!("surface_d{d}_nz_si1000_p0.001.dem"))).unwrap()
}

/// Phenomenological source over a bundled code, Z sector, three rounds.
pub fn code_source(file: &str, p_data: f64, p_meas: f64) -> ModelSource {
    ModelSource::Code {
        code: CssCodeSpec::from_json(&read_fixture(file)).unwrap(),
        sector: Sector::Z,
        noise: NoiseConfig {
            p_data,
            p_meas,
            p_hook: 0.0,
            rounds: 3,
        },
    }
}

pub fn steane(p: f64) -> ModelSource {
    code_source("steane.json", p, p)
}

pub fn repetition(p: f64) -> ModelSource {
    code_source("repetition_n3.json", p, p)
}
