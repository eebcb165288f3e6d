//! Plot data: one whitespace-separated series file per strategy and a matplotlib
//! script that draws throughput (or sum-rate) against SNR.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::output::{CsvRow, OutputError};

/// Series file body: `snr_db sum_rate throughput ci95`, throughput `nan` when absent.
pub fn series_body(rows: &[&CsvRow]) -> String {
    let mut s = String::from("# snr_db sum_rate throughput ci95\n");
    for r in rows {
        let t = r.throughput.map_or("nan".to_string(), |t| t.to_string());
        s.push_str(&format!("{} {} {} {}\n", r.snr_db, r.sum_rate, t, r.ci95));
    }
    s
}

pub fn plot_script(files: &[(String, String)], title: &str) -> String {
    let mut s = String::from("import numpy as np\nimport matplotlib.pyplot as plt\n\nseries = [\n");
    for (label, file) in files {
        s.push_str(&format!("    ({label:?}, {file:?}),\n"));
    }
    s.push_str(&format!(
        r#"]

fig, ax = plt.subplots()
for label, path in series:
    d = np.loadtxt(path, ndmin=2)
    y = d[:, 2] if not np.isnan(d[:, 2]).all() else d[:, 1]
    ax.errorbar(d[:, 0], y, yerr=d[:, 3], marker="o", capsize=3, label=label.upper())
ax.set_xlabel("SNR (dB)")
ax.set_ylabel("Throughput (bps/Hz)")
ax.set_title({title:?})
ax.grid(True)
ax.legend()
fig.savefig("throughput.png", dpi=150)
"#
    ));
    s
}

/// Writes `<strategy>.dat` files and `plot.py` into `dir`; returns the written paths.
pub fn emit_plot(rows: &[CsvRow], dir: &Path) -> Result<Vec<PathBuf>, OutputError> {
    let io_err = |p: &Path| {
        let path = p.display().to_string();
        move |source| OutputError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut groups: BTreeMap<String, Vec<&CsvRow>> = BTreeMap::new();
    for r in rows {
        groups.entry(r.strategy.to_string()).or_default().push(r);
    }
    let mut written = Vec::new();
    let mut files = Vec::new();
    for (name, mut rs) in groups {
        rs.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
        let file = format!("{name}.dat");
        let path = dir.join(&file);
        fs::write(&path, series_body(&rs)).map_err(io_err(&path))?;
        written.push(path);
        files.push((name, file));
    }
    let title = rows.first().map_or(String::new(), |r| format!("alpha = {}, R0 = {} bps/Hz", r.alpha, r.r0));
    let script = dir.join("plot.py");
    fs::write(&script, plot_script(&files, &title)).map_err(io_err(&script))?;
    written.push(script);
    Ok(written)
}
