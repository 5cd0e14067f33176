//! CSV serialization of step logs: fixed header, floats at 17 significant
//! digits, byte-identical across runs of the same scenario and seed.

use crate::harness::runner::StepLog;
use crate::Result;
use std::io::Write;
use std::path::Path;

/// Column layout of the per-step CSV. Quaternions are `[w, x, y, z]` in the
/// inertial-to-body convention used throughout the crate.
pub const CSV_HEADER: &str = "t,\
qw,qx,qy,qz,omega_x,omega_y,omega_z,px,py,pz,vx,vy,vz,\
est_qw,est_qx,est_qy,est_qz,est_bx,est_by,est_bz,est_px,est_py,est_pz,est_vx,est_vy,est_vz,\
des_qw,des_qx,des_qy,des_qz,des_omega_x,des_omega_y,des_omega_z,des_px,des_py,des_pz,des_vx,des_vy,des_vz,\
err_att_obs,err_bias,err_pos_obs,err_vel_obs,err_att_trk,err_rate_trk,err_pos_trk,err_vel_trk,\
torque_x,torque_y,torque_z,thrust";

fn push_f64(out: &mut String, x: f64) {
    use std::fmt::Write as _;
    // 17 significant digits reproduce any f64 exactly on read-back.
    write!(out, ",{:.16e}", x).expect("writing to a String cannot fail");
}

/// Formats one row (without trailing newline).
fn format_row(r: &StepLog) -> String {
    let mut line = format!("{:.16e}", r.t);
    for v in [&r.true_quat[..], &r.true_omega, &r.true_position, &r.true_velocity].concat() {
        push_f64(&mut line, v);
    }
    for v in [&r.est_quat[..], &r.est_bias, &r.est_position, &r.est_velocity].concat() {
        push_f64(&mut line, v);
    }
    for v in [&r.des_quat[..], &r.des_omega, &r.des_position, &r.des_velocity].concat() {
        push_f64(&mut line, v);
    }
    for v in [
        r.err_att_obs,
        r.err_bias,
        r.err_pos_obs,
        r.err_vel_obs,
        r.err_att_trk,
        r.err_rate_trk,
        r.err_pos_trk,
        r.err_vel_trk,
    ] {
        push_f64(&mut line, v);
    }
    for v in r.torque {
        push_f64(&mut line, v);
    }
    push_f64(&mut line, r.thrust);
    line
}

/// Writes the full log to a writer.
pub fn write_csv_to(log: &[StepLog], out: &mut impl Write) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in log {
        writeln!(out, "{}", format_row(row))?;
    }
    Ok(())
}

/// Writes the full log to a file, creating parent directories.
pub fn write_csv(log: &[StepLog], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_csv_to(log, &mut file)?;
    Ok(())
}

/// Writes a downsampled copy (every `stride`-th row, last row always
/// included) for plotting; same columns as the full log.
pub fn write_plot_data(log: &[StepLog], stride: usize, path: &Path) -> Result<()> {
    let stride = stride.max(1);
    let mut rows: Vec<StepLog> = log.iter().step_by(stride).cloned().collect();
    if let Some(last) = log.last() {
        if rows.last() != Some(last) {
            rows.push(last.clone());
        }
    }
    write_csv(&rows, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64) -> StepLog {
        StepLog {
            t,
            true_quat: [1.0, 0.0, 0.0, 0.0],
            true_omega: [0.1, 0.2, 0.3],
            true_position: [1.0, 2.0, 3.0],
            true_velocity: [0.0; 3],
            est_quat: [1.0, 0.0, 0.0, 0.0],
            est_bias: [0.0; 3],
            est_position: [0.0; 3],
            est_velocity: [0.0; 3],
            des_quat: [1.0, 0.0, 0.0, 0.0],
            des_omega: [0.0; 3],
            des_position: [0.0; 3],
            des_velocity: [0.0; 3],
            err_att_obs: 1e-7,
            err_bias: 0.15,
            err_pos_obs: 0.0,
            err_vel_obs: 0.0,
            err_att_trk: 0.0,
            err_rate_trk: 0.0,
            err_pos_trk: 0.0,
            err_vel_trk: 0.0,
            torque: [0.0; 3],
            thrust: 29.43,
        }
    }

    #[test]
    fn header_has_one_name_per_column() {
        let mut buf = Vec::new();
        write_csv_to(&[row(0.001)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header_cols = lines.next().unwrap().split(',').count();
        let data_cols = lines.next().unwrap().split(',').count();
        assert_eq!(header_cols, data_cols);
        assert_eq!(header_cols, 52);
    }

    #[test]
    fn round_trip_precision() {
        let mut buf = Vec::new();
        let r = row(0.123456789012345678);
        write_csv_to(&[r.clone()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let data = text.lines().nth(1).unwrap();
        let t_back: f64 = data.split(',').next().unwrap().parse().unwrap();
        assert_eq!(t_back, r.t);
    }

    #[test]
    fn plot_data_downsampling_keeps_last_row() {
        let rows: Vec<StepLog> = (1..=10).map(|k| row(k as f64 * 0.001)).collect();
        let dir = std::env::temp_dir().join("vtol_nav_csv_test");
        let path = dir.join("plot.csv");
        write_plot_data(&rows, 4, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let n = text.lines().count() - 1;
        assert_eq!(n, 4); // rows 1, 5, 9, 10
        assert!(text.lines().last().unwrap().starts_with("1.0000000000000000e-2"));
        std::fs::remove_dir_all(&dir).ok();
    }
}
