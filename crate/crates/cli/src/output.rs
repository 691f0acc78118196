//! Result files: CSV tables, the resolved config and SVG charts.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use c2lse::harness::{CurvePoint, RunRecord};

/// An output directory known to be writable. Files land via write-then-rename
/// so a reader never observes a partial file.
pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    /// Create the directory and prove it writable before any work starts.
    pub fn prepare(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating output directory {}", root.display()))?;
        let probe = root.join(".c2lse-write-probe");
        fs::write(&probe, b"probe").with_context(|| format!("output directory {} is not writable", root.display()))?;
        fs::remove_file(&probe)?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn subdir(&self, name: &str) -> Result<Self> {
        Self::prepare(&self.root.join(name))
    }

    pub fn write(&self, name: &str, contents: &[u8]) -> Result<PathBuf> {
        let target = self.root.join(name);
        let tmp = self.root.join(format!(".{name}.tmp"));
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(contents)?;
        f.sync_all()?;
        drop(f);
        fs::rename(&tmp, &target).with_context(|| format!("renaming into {}", target.display()))?;
        Ok(target)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn trace_header(dim: usize) -> Vec<String> {
    let mut h = vec!["iteration".to_string(), "seed".to_string()];
    h.extend((1..=dim).map(|i| format!("x{i}")));
    h.extend(["y", "acq_value", "cum_info_gain", "f1_macro", "wall_ms", "gp_inferences"].map(String::from));
    h
}

/// One row per active query, seeds in config order.
pub fn trace_csv(records: &[RunRecord], dim: usize) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(trace_header(dim))?;
    for rec in records {
        for row in &rec.rows {
            let mut fields = vec![row.iteration.to_string(), rec.seed.to_string()];
            fields.extend(row.query.iter().map(f64::to_string));
            fields.push(row.observation.to_string());
            fields.push(opt(row.acquisition_value));
            fields.push(row.cumulative_info_gain.to_string());
            fields.push(opt(row.metrics.map(|m| m.f1_macro)));
            fields.push(opt(row.wall_ms));
            fields.push(row.gp_inferences.to_string());
            w.write_record(&fields)?;
        }
    }
    Ok(w.into_inner()?)
}

pub fn summary_csv(curve: &[CurvePoint]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["iteration", "mean_f1", "std_f1", "runs"])?;
    for p in curve {
        w.write_record([
            p.iteration.to_string(),
            p.mean_f1.to_string(),
            p.std_f1.to_string(),
            p.runs.to_string(),
        ])?;
    }
    Ok(w.into_inner()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_leaves_no_temp_file() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutputDir::prepare(&dir.path().join("nested/out")).unwrap();
        out.write("a.txt", b"one").unwrap();
        out.write("a.txt", b"two").unwrap();
        let names: Vec<_> = fs::read_dir(out.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names, vec!["a.txt"]);
        assert_eq!(fs::read(out.path().join("a.txt")).unwrap(), b"two");
    }

    #[test]
    fn unwritable_directory_fails_up_front() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain");
        fs::write(&file, b"").unwrap();
        assert!(OutputDir::prepare(&file.join("sub")).is_err());
    }

    #[test]
    fn trace_header_golden() {
        assert_eq!(
            trace_header(2).join(","),
            "iteration,seed,x1,x2,y,acq_value,cum_info_gain,f1_macro,wall_ms,gp_inferences"
        );
    }
}
