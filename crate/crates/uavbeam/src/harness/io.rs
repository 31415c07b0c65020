//! CSV writers for experiment outputs and the binary codebook format for
//! persisting sensing matrices.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::Path;

use super::experiments::{PathlossStep, TrialRecord};
use crate::geometry::{AoaPair, UpaGeometry};
use crate::sensing::{sensing_matrix, BeamspaceMap, SensingMatrix, SensingSpec};
use crate::{Error, Result};

/// Nine significant digits; enough to reconstruct the f64 for plotting
/// while keeping reruns byte-comparable.
fn fmt(x: f64) -> String {
    format!("{:.8e}", x)
}

const CRLF: &str = "\r\n";

/// One row per trial record, fields flattened in declaration order.
pub fn trial_records_csv(records: &[TrialRecord]) -> String {
    let mut out = String::with_capacity(64 + records.len() * 256);
    out.push_str(
        "trial,method,tx_power_dbm,n_train,\
         true_psi_uav,true_omega_uav,true_psi_bs,true_omega_bs,\
         nav_psi_uav,nav_omega_uav,nav_psi_bs,nav_omega_bs,\
         est_psi_uav,est_omega_uav,sq_error,received_power_dbm,\
         misaligned,data_rate_bps_hz,trial_seed",
    );
    out.push_str(CRLF);
    for r in records {
        let fields = [
            r.trial.to_string(),
            r.method.name().to_string(),
            fmt(r.tx_power_dbm),
            r.n_train.to_string(),
            fmt(r.true_uav.psi()),
            fmt(r.true_uav.omega()),
            fmt(r.true_bs.psi()),
            fmt(r.true_bs.omega()),
            fmt(r.nav_uav.psi()),
            fmt(r.nav_uav.omega()),
            fmt(r.nav_bs.psi()),
            fmt(r.nav_bs.omega()),
            fmt(r.estimate.psi()),
            fmt(r.estimate.omega()),
            fmt(r.sq_error),
            fmt(r.received_power_dbm),
            u8::from(r.misaligned).to_string(),
            fmt(r.data_rate_bps_hz),
            r.trial_seed.to_string(),
        ];
        out.push_str(&fields.join(","));
        out.push_str(CRLF);
    }
    out
}

pub fn pathloss_csv(steps: &[PathlossStep]) -> String {
    let mut out = String::with_capacity(32 + steps.len() * 64);
    out.push_str("step,scheme1_db,scheme2_db,scheme3_db");
    out.push_str(CRLF);
    for s in steps {
        out.push_str(&format!(
            "{},{},{},{}{CRLF}",
            s.step,
            fmt(s.scheme1_db),
            fmt(s.scheme2_db),
            fmt(s.scheme3_db)
        ));
    }
    out
}

/// Long-format dump: one row per (Ψ, Ω) grid cell.
pub fn beamspace_csv(map: &BeamspaceMap) -> String {
    let mut out = String::with_capacity(32 + map.psi_grid.len() * map.omega_grid.len() * 48);
    out.push_str("psi,omega,normalized_gain");
    out.push_str(CRLF);
    for (i, &psi) in map.psi_grid.iter().enumerate() {
        for (j, &omega) in map.omega_grid.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}{CRLF}",
                fmt(psi),
                fmt(omega),
                fmt(map.values[i][j])
            ));
        }
    }
    out
}

pub fn write_text(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("cannot write {}: {e}", path.display()),
        ))
    })
}

pub const CODEBOOK_VERSION: u32 = 1;

/// Codebook layout, all little-endian:
/// u32 version, u32 N_Ux, u32 N_Uy, u32 N, u32 N_a,
/// f64 half_width, f64 center Ψ, f64 center Ω, u64 seed,
/// then the N columns (column-major, each antenna entry as re/im f64 pair).
/// The wavelength is not stored: the factors depend only on counts, and the
/// reader supplies it.
const HEADER_LEN: usize = 5 * 4 + 3 * 8 + 8;

fn column_bytes(matrix: &SensingMatrix) -> Vec<u8> {
    let mut out =
        Vec::with_capacity(matrix.n_measurements() * matrix.n_antennas() * 16);
    for n in 0..matrix.n_measurements() {
        for c in matrix.column(n) {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    out
}

/// Generates the matrix for (spec, seed), writes it, and returns it.
pub fn write_codebook(path: &Path, spec: &SensingSpec, seed: u64) -> Result<SensingMatrix> {
    let matrix = sensing_matrix(spec, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let geom = spec.uav_geom;
    let mut bytes = Vec::with_capacity(HEADER_LEN);
    bytes.extend_from_slice(&CODEBOOK_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(geom.n_x as u32).to_le_bytes());
    bytes.extend_from_slice(&(geom.n_second as u32).to_le_bytes());
    bytes.extend_from_slice(&(spec.n_measurements as u32).to_le_bytes());
    bytes.extend_from_slice(&(spec.n_subarrays as u32).to_le_bytes());
    bytes.extend_from_slice(&spec.half_width.to_le_bytes());
    bytes.extend_from_slice(&spec.center.psi().to_le_bytes());
    bytes.extend_from_slice(&spec.center.omega().to_le_bytes());
    bytes.extend_from_slice(&seed.to_le_bytes());
    bytes.extend_from_slice(&column_bytes(&matrix));
    std::fs::write(path, &bytes).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("cannot write codebook {}: {e}", path.display()),
        ))
    })?;
    Ok(matrix)
}

fn take_u32(bytes: &[u8], at: &mut usize) -> u32 {
    let v = u32::from_le_bytes(bytes[*at..*at + 4].try_into().unwrap());
    *at += 4;
    v
}

fn take_u64(bytes: &[u8], at: &mut usize) -> u64 {
    let v = u64::from_le_bytes(bytes[*at..*at + 8].try_into().unwrap());
    *at += 8;
    v
}

fn take_f64(bytes: &[u8], at: &mut usize) -> f64 {
    let v = f64::from_le_bytes(bytes[*at..*at + 8].try_into().unwrap());
    *at += 8;
    v
}

/// Reads a codebook, regenerates the matrix from the stored (spec, seed),
/// and verifies the stored columns are bit-identical to the regenerated
/// ones; any divergence means the file or the generator changed.
pub fn read_codebook(path: &Path, wavelength: f64) -> Result<SensingMatrix> {
    let bytes = std::fs::read(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("cannot read codebook {}: {e}", path.display()),
        ))
    })?;
    let truncated = || {
        Error::Io(std::io::Error::new(
            std::io::ErrorKind::UnexpectedEof,
            format!("codebook {} is truncated", path.display()),
        ))
    };
    if bytes.len() < HEADER_LEN {
        return Err(truncated());
    }
    let mut at = 0;
    let version = take_u32(&bytes, &mut at);
    if version != CODEBOOK_VERSION {
        return Err(Error::Config(format!(
            "codebook {} has unsupported version {version} (expected {CODEBOOK_VERSION})",
            path.display()
        )));
    }
    let n_x = take_u32(&bytes, &mut at) as usize;
    let n_y = take_u32(&bytes, &mut at) as usize;
    let n = take_u32(&bytes, &mut at) as usize;
    let n_a = take_u32(&bytes, &mut at) as usize;
    let half_width = take_f64(&bytes, &mut at);
    let c_psi = take_f64(&bytes, &mut at);
    let c_omega = take_f64(&bytes, &mut at);
    let seed = take_u64(&bytes, &mut at);

    let expected_len = HEADER_LEN + n * n_x * n_y * 16;
    if bytes.len() != expected_len {
        if bytes.len() < expected_len {
            return Err(truncated());
        }
        return Err(Error::Config(format!(
            "codebook {} has {} trailing bytes",
            path.display(),
            bytes.len() - expected_len
        )));
    }

    let geom = UpaGeometry::new(n_x, n_y, wavelength, true)?;
    let spec = SensingSpec::new(n, n_a, half_width, AoaPair::new(c_psi, c_omega), geom)?;
    let matrix = sensing_matrix(&spec, &mut ChaCha8Rng::seed_from_u64(seed))?;
    if column_bytes(&matrix) != bytes[HEADER_LEN..] {
        return Err(Error::Config(format!(
            "codebook {} does not match its seed (corrupted file or changed generator)",
            path.display()
        )));
    }
    Ok(matrix)
}
