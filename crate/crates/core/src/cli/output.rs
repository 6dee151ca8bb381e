use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::dynamics::{Frame, Trajectory};
use crate::hamiltonian::{DarbouxPoint, RealPhasePoint};

pub const CSV_HEADER: &str = "t,x,y,p,q,x1,p1,x2,p2,Hr,Hi";

/// Write `contents` to a sibling temporary file, then rename it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = dir.join(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Report destination: a file written atomically, or standard output.
pub fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> io::Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => stdout.write_all(text.as_bytes()),
    }
}

/// 17 significant digits; `-0` prints as `0`.
pub fn num(v: f64) -> String {
    format!("{:.16e}", v + 0.0)
}

pub fn summary_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// One row: time, `(x, y, p, q)`, `(x₁, p₁, x₂, p₂)`, `H_r`, `H_i`.
pub fn push_row(
    buf: &mut String,
    t: f64,
    w: RealPhasePoint,
    xi: DarbouxPoint,
    hr: f64,
    hi: f64,
) {
    let [x, p, y, q] = w.0;
    let [x1, p1, x2, p2] = xi.0;
    let cols = [t, x, y, p, q, x1, p1, x2, p2, hr, hi];
    let line: Vec<String> = cols.iter().map(|v| num(*v)).collect();
    let _ = writeln!(buf, "{}", line.join(","));
}

/// CSV of a single trajectory, both coordinate sets obtained by the exact
/// frame map.
pub fn trajectory_csv(traj: &Trajectory, time_label: &str) -> String {
    let mut buf = String::new();
    buf.push_str(&CSV_HEADER.replacen('t', time_label, 1));
    buf.push('\n');
    for (i, s) in traj.samples.iter().enumerate() {
        let (w, xi) = match traj.frame {
            Frame::Complex => (RealPhasePoint(s.state), traj.darboux_point(i)),
            Frame::Darboux => (traj.complex_point(i), DarbouxPoint(s.state)),
        };
        push_row(&mut buf, s.t, w, xi, s.hr, s.hi);
    }
    buf
}
