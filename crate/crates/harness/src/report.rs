//! Comparison tables across frameworks, init modes and transfers.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use l1ilc_core::experiment::Framework;

use crate::error::{io_err, HarnessError, Result};
use crate::runner::{converged, ScenarioResult};

/// Mean error per iteration of one framework under one init mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub init_mode: String,
    pub framework: Framework,
    pub plant: String,
    pub n: usize,
    pub errors: Vec<f64>,
}

impl ReportEntry {
    pub fn from_result(r: &ScenarioResult) -> Self {
        Self {
            init_mode: r.init.clone(),
            framework: r.framework,
            plant: r.plant.clone(),
            n: r.n,
            errors: r.errors(),
        }
    }
}

/// A donor's converged error and the recipient's first error after import.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferEntry {
    pub framework: Framework,
    pub donor: String,
    pub recipient: String,
    pub donor_converged: f64,
    pub post_transfer: f64,
}

impl TransferEntry {
    pub fn new(donor: &ScenarioResult, recipient: &ScenarioResult) -> Self {
        Self {
            framework: recipient.framework,
            donor: donor.plant.clone(),
            recipient: recipient.plant.clone(),
            donor_converged: donor.converged_error(),
            post_transfer: recipient.first_error(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub init_mode: String,
    pub framework: Framework,
    pub first_error: f64,
    /// Mean of iterations 8 to 10.
    pub converged_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorRow {
    pub framework: Framework,
    pub donor: String,
    pub recipient: String,
    pub donor_converged: f64,
    pub post_transfer: f64,
    /// `post_transfer / donor_converged`.
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Report {
    pub plant: Option<String>,
    pub cells: Vec<TableCell>,
    pub factors: Vec<FactorRow>,
}

/// Builds the error matrix of `entries`, which must share plant and
/// trajectory length and run at least ten iterations, plus the transfer
/// factors.
pub fn compare_report(entries: &[ReportEntry], transfers: &[TransferEntry]) -> Result<Report> {
    let mut report = Report::default();
    if let Some(first) = entries.first() {
        report.plant = Some(first.plant.clone());
        for e in entries {
            if e.plant != first.plant || e.n != first.n {
                return Err(HarnessError::Shape(format!(
                    "`{}` with N = {} against `{}` with N = {}",
                    e.plant, e.n, first.plant, first.n
                )));
            }
            if e.errors.len() < 10 {
                return Err(HarnessError::Shape(format!(
                    "{} / {} ran {} iterations; ten are needed",
                    e.init_mode,
                    e.framework.name(),
                    e.errors.len()
                )));
            }
            if report.cells.iter().any(|c| c.init_mode == e.init_mode && c.framework == e.framework) {
                return Err(HarnessError::Shape(format!("duplicate {} / {}", e.init_mode, e.framework.name())));
            }
            report.cells.push(TableCell {
                init_mode: e.init_mode.clone(),
                framework: e.framework,
                first_error: e.errors[0],
                converged_error: converged(&e.errors),
            });
        }
    }
    for t in transfers {
        if !(t.donor_converged > 0.0) {
            return Err(HarnessError::Shape(format!("donor `{}` has no positive converged error", t.donor)));
        }
        report.factors.push(FactorRow {
            framework: t.framework,
            donor: t.donor.clone(),
            recipient: t.recipient.clone(),
            donor_converged: t.donor_converged,
            post_transfer: t.post_transfer,
            factor: t.post_transfer / t.donor_converged,
        });
    }
    Ok(report)
}

impl Report {
    pub fn cell(&self, init_mode: &str, fw: Framework) -> Option<&TableCell> {
        self.cells.iter().find(|c| c.init_mode == init_mode && c.framework == fw)
    }

    pub fn factor(&self, fw: Framework, donor: &str, recipient: &str) -> Option<f64> {
        self.factors
            .iter()
            .find(|f| f.framework == fw && f.donor == donor && f.recipient == recipient)
            .map(|f| f.factor)
    }

    fn modes(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for c in &self.cells {
            if !out.contains(&c.init_mode.as_str()) {
                out.push(&c.init_mode);
            }
        }
        out
    }

    fn frameworks(&self) -> Vec<Framework> {
        let mut out = Vec::new();
        for c in &self.cells {
            if !out.contains(&c.framework) {
                out.push(c.framework);
            }
        }
        out
    }

    /// One row per table cell and one per transfer factor.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["table", "plant", "init_mode", "framework", "donor", "recipient", "first", "converged", "factor"])?;
        let plant = self.plant.clone().unwrap_or_default();
        for c in &self.cells {
            w.write_record([
                "error",
                &plant,
                &c.init_mode,
                c.framework.name(),
                "",
                "",
                &c.first_error.to_string(),
                &c.converged_error.to_string(),
                "",
            ])?;
        }
        for f in &self.factors {
            w.write_record([
                "transfer",
                "",
                "",
                f.framework.name(),
                &f.donor,
                &f.recipient,
                &f.post_transfer.to_string(),
                &f.donor_converged.to_string(),
                &f.factor.to_string(),
            ])?;
        }
        w.flush().map_err(io_err(path))
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.cells.is_empty() {
            let fws = self.frameworks();
            writeln!(f, "Tracking error on plant `{}` (e1 / mean e8..e10)", self.plant.as_deref().unwrap_or("?"))?;
            write!(f, "{:<16}", "init")?;
            for fw in &fws {
                write!(f, "{:>22}", fw.name())?;
            }
            writeln!(f)?;
            for mode in self.modes() {
                write!(f, "{mode:<16}")?;
                for fw in &fws {
                    match self.cell(mode, *fw) {
                        Some(c) => write!(f, "{:>22}", format!("{:.4} / {:.4}", c.first_error, c.converged_error))?,
                        None => write!(f, "{:>22}", "-")?,
                    }
                }
                writeln!(f)?;
            }
        }
        if !self.factors.is_empty() {
            if !self.cells.is_empty() {
                writeln!(f)?;
            }
            writeln!(f, "Factor of error increase after transfer")?;
            writeln!(f, "{:<10}{:<14}{:<14}{:>12}{:>12}{:>10}", "framework", "donor", "recipient", "donor e", "post e", "factor")?;
            for r in &self.factors {
                writeln!(
                    f,
                    "{:<10}{:<14}{:<14}{:>12.4}{:>12.4}{:>10.3}",
                    r.framework.name(),
                    r.donor,
                    r.recipient,
                    r.donor_converged,
                    r.post_transfer,
                    r.factor
                )?;
            }
        }
        Ok(())
    }
}

/// Reads every `result.json` below `dir` and reports one error table per
/// plant and disturbance condition plus the factors of all transferred
/// runs.
pub fn report_directory(dir: &Path) -> Result<Vec<Report>> {
    let mut results = Vec::new();
    collect_results(dir, &mut results)?;
    results.sort_by(|a, b| a.name.cmp(&b.name));
    if results.is_empty() {
        return Err(HarnessError::Shape(format!("no result.json below {}", dir.display())));
    }
    let mut groups: Vec<(String, bool)> = Vec::new();
    for r in &results {
        let key = (r.plant.clone(), r.scheduled);
        if r.donor.is_none() && r.summary.len() >= 10 && !groups.contains(&key) {
            groups.push(key);
        }
    }
    let mut reports = Vec::new();
    for (plant, scheduled) in &groups {
        let entries: Vec<ReportEntry> = results
            .iter()
            .filter(|r| r.donor.is_none() && &r.plant == plant && r.scheduled == *scheduled && r.summary.len() >= 10)
            .map(ReportEntry::from_result)
            .collect();
        let mut rep = compare_report(&entries, &[])?;
        if *scheduled {
            rep.plant = Some(format!("{plant}, scheduled disturbance"));
        }
        reports.push(rep);
    }
    let transfers: Vec<TransferEntry> = results
        .iter()
        .filter_map(|r| {
            r.donor.as_ref().map(|d| TransferEntry {
                framework: r.framework,
                donor: d.scenario.clone(),
                recipient: r.name.clone(),
                donor_converged: d.converged_error,
                post_transfer: r.first_error(),
            })
        })
        .collect();
    if !transfers.is_empty() {
        reports.push(compare_report(&[], &transfers)?);
    }
    Ok(reports)
}

fn collect_results(dir: &Path, out: &mut Vec<ScenarioResult>) -> Result<()> {
    for entry in std::fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.is_dir() {
            collect_results(&path, out)?;
        } else if path.file_name().is_some_and(|n| n == "result.json") {
            out.push(crate::runner::read_result(&path)?);
        }
    }
    Ok(())
}
