//! Byte-stable CSV dumps of the complexity and storage comparisons.

use std::fmt::Write as _;

use cpm_core::analysis::{complexity, storage, ComplexityRecord, DetectionMethod, StorageRecord};
use cpm_core::Scheme;

/// Column order of both tables: the six method/scheme combinations
/// compared throughout.
const COLUMNS: [(DetectionMethod, bool, usize); 6] = [
    (DetectionMethod::Msd, true, 1),
    (DetectionMethod::Mlsd, true, 1),
    (DetectionMethod::Mlsd, false, 1),
    (DetectionMethod::Proposed, true, 1),
    (DetectionMethod::Proposed, false, 1),
    (DetectionMethod::Proposed, false, 2),
];

const HEADER: &str =
    "quantity,bqcr_msd_pcmfm,mlsd_pcmfm,mlsd_artm_cpm,proposed_pcmfm,proposed_artm_cpm_np1,proposed_artm_cpm_np2";

fn scheme_for(pcmfm: bool) -> Scheme {
    if pcmfm {
        Scheme::pcmfm()
    } else {
        Scheme::artm_cpm()
    }
}

fn complexity_columns(k: usize) -> anyhow::Result<Vec<ComplexityRecord>> {
    COLUMNS
        .iter()
        .map(|&(method, pcmfm, n_p)| Ok(complexity(method, &scheme_for(pcmfm), k, n_p)?))
        .collect()
}

fn storage_columns(k: usize) -> anyhow::Result<Vec<StorageRecord>> {
    COLUMNS
        .iter()
        .map(|&(method, pcmfm, n_p)| Ok(storage(method, &scheme_for(pcmfm), k, n_p)?))
        .collect()
}

/// Renders the per-symbol operation counts as CSV.
pub fn complexity_table_csv(k: usize) -> anyhow::Result<String> {
    let records = complexity_columns(k)?;
    let mut out = String::new();
    writeln!(out, "{HEADER}")?;
    let row = |out: &mut String, name: &str, cells: Vec<String>| -> anyhow::Result<()> {
        writeln!(out, "{},{}", name, cells.join(","))?;
        Ok(())
    };
    row(
        &mut out,
        "n_mf",
        records.iter().map(|r| r.n_mf.to_string()).collect(),
    )?;
    row(
        &mut out,
        "n_s",
        records
            .iter()
            .map(|r| r.n_s.map_or("-".into(), |v| v.to_string()))
            .collect(),
    )?;
    row(
        &mut out,
        "n_mul",
        records.iter().map(|r| r.n_mul.to_string()).collect(),
    )?;
    row(
        &mut out,
        "n_add",
        records.iter().map(|r| r.n_add.to_string()).collect(),
    )?;
    Ok(out)
}

/// Renders the storage comparison as CSV; survivor paths stay symbolic in
/// the traceback length and a final row evaluates the totals at
/// `traceback_n`.
pub fn storage_table_csv(k: usize, traceback_n: usize) -> anyhow::Result<String> {
    let records = storage_columns(k)?;
    let mut out = String::new();
    writeln!(out, "{HEADER}")?;
    let row = |out: &mut String, name: &str, cells: Vec<String>| -> anyhow::Result<()> {
        writeln!(out, "{},{}", name, cells.join(","))?;
        Ok(())
    };
    row(
        &mut out,
        "local_signal",
        records.iter().map(|r| r.local_signal.to_string()).collect(),
    )?;
    row(
        &mut out,
        "rotation_angle",
        records
            .iter()
            .map(|r| r.rotation_angle.to_string())
            .collect(),
    )?;
    row(
        &mut out,
        "survived_path",
        records.iter().map(|r| r.survived_path_symbolic()).collect(),
    )?;
    row(
        &mut out,
        "survived_phase",
        records
            .iter()
            .map(|r| r.survived_phase_symbolic())
            .collect(),
    )?;
    row(
        &mut out,
        &format!("total_units_n{traceback_n}"),
        records
            .iter()
            .map(|r| r.total_units(traceback_n).to_string())
            .collect(),
    )?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complexity_table_matches_the_reference_cells() {
        let csv = complexity_table_csv(4).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], HEADER);
        assert_eq!(lines[1], "n_mf,8,8,64,8,64,64");
        assert_eq!(lines[2], "n_s,-,80,512,8,64,64");
        assert_eq!(lines[3], "n_mul,896,768,9216,224,2560,4096");
        assert_eq!(lines[4], "n_add,912,784,9344,240,2688,4224");
    }

    #[test]
    fn storage_table_matches_the_reference_cells() {
        let csv = storage_table_csv(4, 1000).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[1], "local_signal,64,64,512,64,512,512");
        assert_eq!(lines[2], "rotation_angle,10,40,64,40,64,64");
        assert_eq!(lines[3], "survived_path,-,80N,512N,16N,128N,256N");
        assert_eq!(lines[4], "survived_phase,-,0,0,8,64,64");
        assert!(lines[5].starts_with("total_units_n1000,"));
    }

    #[test]
    fn repeated_renders_are_identical() {
        assert_eq!(
            complexity_table_csv(4).unwrap(),
            complexity_table_csv(4).unwrap()
        );
        assert_eq!(
            storage_table_csv(4, 100).unwrap(),
            storage_table_csv(4, 100).unwrap()
        );
    }
}
