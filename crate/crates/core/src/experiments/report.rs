use std::fs;
use std::path::Path;

use crate::bifidelity::ErrorDiagnostics;
use crate::error::Result;
use crate::report::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub e_mean: f64,
    pub e_std: f64,
    pub bound: f64,
    pub re: f64,
}

/// Wall-clock seconds per phase. Never written to the CSV files.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimings {
    pub reference: f64,
    pub candidate_sweep: f64,
    pub selection: f64,
    pub high_fidelity: f64,
    pub reconstruction: f64,
    pub validation: f64,
    pub report: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub preset_id: u8,
    pub n_requested: usize,
    /// Surrogate size actually used; smaller than requested when the
    /// selection stopped on the pivot tolerance.
    pub n_effective: usize,
    pub selected: Vec<usize>,
    pub pivots: Vec<f64>,
    pub stopped_on_tolerance: bool,
    pub x: Vec<f64>,
    pub mean_bf: Vec<f64>,
    pub std_bf: Vec<f64>,
    pub mean_ref: Vec<f64>,
    pub std_ref: Vec<f64>,
    pub e_mean: f64,
    pub e_std: f64,
    /// Low-fidelity-only statistics against the same reference.
    pub lf_e_mean: f64,
    pub lf_e_std: f64,
    pub convergence: Vec<ConvergenceRow>,
    pub diagnostics: ErrorDiagnostics,
    pub sparse_nodes: usize,
    pub timings: PhaseTimings,
}

fn row(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

impl ExperimentReport {
    pub fn profiles_csv(&self) -> String {
        let mut out = String::from("x,mean_bf,std_bf,mean_ref,std_ref\n");
        for i in 0..self.x.len() {
            out.push_str(&row(&[
                fmt_f64(self.x[i]),
                fmt_f64(self.mean_bf[i]),
                fmt_f64(self.std_bf[i]),
                fmt_f64(self.mean_ref[i]),
                fmt_f64(self.std_ref[i]),
            ]));
        }
        out
    }

    pub fn convergence_csv(&self) -> String {
        let mut out = String::from("n,e_mean,e_std,bound,Re\n");
        for r in &self.convergence {
            out.push_str(&row(&[
                r.n.to_string(),
                fmt_f64(r.e_mean),
                fmt_f64(r.e_std),
                fmt_f64(r.bound),
                fmt_f64(r.re),
            ]));
        }
        out
    }

    pub fn diagnostics_csv(&self) -> String {
        let mut out = String::from("k,true_err_mean,bound,Rs_median,Re\n");
        for r in &self.diagnostics.rows {
            out.push_str(&row(&[
                r.k.to_string(),
                fmt_f64(r.true_err_mean),
                fmt_f64(r.bound),
                fmt_f64(r.rs_median),
                fmt_f64(r.re),
            ]));
        }
        out
    }

    /// Writes `config.echo`, `profiles.csv`, `convergence.csv` and
    /// `diagnostics.csv` into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path, config_echo: &str) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("config.echo"), config_echo)?;
        fs::write(dir.join("profiles.csv"), self.profiles_csv())?;
        fs::write(dir.join("convergence.csv"), self.convergence_csv())?;
        fs::write(dir.join("diagnostics.csv"), self.diagnostics_csv())?;
        Ok(())
    }

    /// Human-readable summary for the terminal.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "preset {}: n = {} (requested {}), sparse nodes = {}\n",
            self.preset_id, self.n_effective, self.n_requested, self.sparse_nodes
        );
        if self.stopped_on_tolerance {
            s.push_str(&format!(
                "selection stopped on the pivot tolerance after {} points\n",
                self.selected.len()
            ));
        }
        s.push_str(&format!(
            "bi-fidelity  e_mean = {:.3e}  e_std = {:.3e}\n",
            self.e_mean, self.e_std
        ));
        s.push_str(&format!(
            "low-fidelity e_mean = {:.3e}  e_std = {:.3e}\n",
            self.lf_e_mean, self.lf_e_std
        ));
        if let Some(first) = self.diagnostics.rows.first() {
            s.push_str(&format!(
                "R_s over validation set at k = {}: median {:.3} [min {:.3}, max {:.3}]\n",
                first.k, first.rs_median, first.rs_min, first.rs_max
            ));
        }
        let t = &self.timings;
        s.push_str(&format!(
            "time [s]: reference {:.2}, candidates {:.2}, selection {:.2}, hf {:.2}, reconstruction {:.2}, validation {:.2}, report {:.2}\n",
            t.reference, t.candidate_sweep, t.selection, t.high_fidelity, t.reconstruction, t.validation, t.report
        ));
        s
    }
}
