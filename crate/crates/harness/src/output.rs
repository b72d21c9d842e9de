//! CSV result bundle: `summary.csv`, `runs.csv`, `allan_<algo>.csv`,
//! `trace_<algo>_<seed>.csv` and `limits.csv`.
//!
//! Files are rewritten per point as results arrive, so an interrupted run keeps
//! every completed point.

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use qa_hybrid_core::estimator::Coefficient;
use qa_hybrid_core::pipeline::Trace;

use crate::error::RunError;
use crate::runner::{PointOutcome, SeriesOutcome};

/// Float formatting shared by every file: shortest round-trip representation.
fn f(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_owned()
    } else {
        format!("{v:e}")
    }
}

/// Writes a result bundle into one directory.
#[derive(Debug)]
pub struct BundleWriter {
    dir: PathBuf,
    started: bool,
}

const SUMMARY_HEADER: &str = "point,params,series,seeds,converged,level_median,level_mad,level_1s_median,\
slope_median,residual_std_median,dropped_fraction_median,b_hat_median,eta_hat_median,config_hash";
const RUNS_HEADER: &str = "point,series,seed,converged,level,slope,residual_std,dropped_fraction,b_hat,eta_hat,\
eta_prime,eta_dprime,eta_x,eta_y,v_x0,v_y0";
const ALLAN_HEADER: &str = "point,seed,tau,sigma,n";
const LIMITS_HEADER: &str = "point,params,pulse_separation,detection_1cycle,detection_1s,uncorrelated_1cycle,\
coriolis_1cycle,coriolis_1s,contrast_1s";

impl BundleWriter {
    pub fn create(dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_owned(), started: false })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn append(&self, name: &str, header: &str, rows: &[String]) -> Result<(), RunError> {
        let path = self.dir.join(name);
        let fresh = !self.started || !path.exists();
        let file = if fresh { File::create(&path)? } else { OpenOptions::new().append(true).open(&path)? };
        let mut w = BufWriter::new(file);
        if fresh {
            writeln!(w, "{header}")?;
        }
        for r in rows {
            writeln!(w, "{r}")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Append one finished point to every file.
    pub fn write_point(&mut self, p: &PointOutcome) -> Result<(), RunError> {
        if !self.started {
            // a new run replaces stale per-series files from earlier runs
            for entry in fs::read_dir(&self.dir)? {
                let name = entry?.file_name().to_string_lossy().into_owned();
                if name.starts_with("allan_") && name.ends_with(".csv") {
                    fs::remove_file(self.dir.join(name))?;
                }
            }
        }
        let label = quote(&p.point.label());
        let idx = p.point.index;
        let tc = p.point.config.interferometer.cycle_time;

        let summary: Vec<String> = p.series.iter().map(|s| summary_row(idx, &label, s, tc, &p.hash)).collect();
        let runs: Vec<String> = p.series.iter().flat_map(|s| run_rows(idx, s)).collect();
        let l = &p.limits;
        let sq = tc.sqrt();
        let limits = vec![format!(
            "{idx},{label},{},{},{},{},{},{},{}",
            f(l.pulse_separation),
            f(l.detection_1cycle),
            f(l.detection_1cycle * sq),
            f(l.uncorrelated_1cycle),
            f(l.coriolis_1cycle),
            f(l.coriolis_1cycle * sq),
            f(l.contrast_1s)
        )];
        self.append("summary.csv", SUMMARY_HEADER, &summary)?;
        self.append("runs.csv", RUNS_HEADER, &runs)?;
        self.append("limits.csv", LIMITS_HEADER, &limits)?;
        if !self.started {
            // allan files are created lazily per series
            self.started = true;
        }
        for s in &p.series {
            let rows: Vec<String> = s
                .seeds
                .iter()
                .filter_map(|seed| seed.allan.as_ref().map(|c| (seed.seed, c)))
                .flat_map(|(seed, c)| {
                    c.taus
                        .iter()
                        .zip(&c.sigma)
                        .zip(&c.counts)
                        .map(move |((t, sg), n)| format!("{idx},{seed},{},{},{n}", f(*t), f(*sg)))
                })
                .collect();
            if !rows.is_empty() {
                self.append(&format!("allan_{}.csv", s.label), ALLAN_HEADER, &rows)?;
            }
            for seed in &s.seeds {
                if let Some(t) = &seed.trace {
                    let name = if p.point.params.is_empty() {
                        format!("trace_{}_{}.csv", s.label, seed.seed)
                    } else {
                        format!("trace_{}_p{idx}_{}.csv", s.label, seed.seed)
                    };
                    write_trace(&self.dir.join(name), t)?;
                }
            }
        }
        Ok(())
    }
}

fn quote(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn summary_row(idx: usize, label: &str, s: &SeriesOutcome, tc: f64, hash: &str) -> String {
    let level = s.median_level();
    format!(
        "{idx},{label},{},{},{},{},{},{},{},{},{},{},{},{hash}",
        s.label,
        s.seeds.len(),
        s.converged(),
        f(level),
        f(s.mad_level()),
        f(level * tc.sqrt()),
        f(s.median_slope()),
        f(s.median_residual_std()),
        f(s.median_dropped_fraction()),
        f(s.median_final(|st| st.b_hat)),
        f(s.median_final(|st| st.eta_hat)),
    )
}

fn run_rows(idx: usize, s: &SeriesOutcome) -> Vec<String> {
    s.seeds
        .iter()
        .map(|o| {
            let th: Vec<String> = o.final_state.theta.iter().map(|v| f(*v)).collect();
            format!(
                "{idx},{},{},{},{},{},{},{},{},{},{}",
                s.label,
                o.seed,
                o.converged,
                f(o.level),
                f(o.slope),
                f(o.residual_std),
                f(o.dropped_fraction),
                f(o.final_state.b_hat),
                f(o.final_state.eta_hat),
                th.join(",")
            )
        })
        .collect()
}

/// Per-cycle trace with columns
/// `i,t,P,phi_control,a_ca,a_q_hat,a_c_hat,b_hat,eta_hat,<coefficients>,dropped,N,D`.
pub fn write_trace(path: &Path, trace: &Trace) -> Result<(), RunError> {
    let mut w = BufWriter::new(File::create(path)?);
    let names: Vec<&str> = Coefficient::ALL.iter().map(|c| c.name()).collect();
    writeln!(w, "i,t,P,phi_control,a_ca,a_q_hat,a_c_hat,b_hat,eta_hat,{},dropped,N,D", names.join(","))?;
    for r in &trace.records {
        write!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.index,
            f(r.time),
            f(r.p),
            f(r.phi_control),
            f(r.a_ca),
            f(r.a_q),
            f(r.a_c),
            f(r.b_hat),
            f(r.eta_hat)
        )?;
        for v in r.theta {
            write!(w, ",{}", f(v))?;
        }
        writeln!(w, ",{},{},{}", u8::from(r.dropped), f(r.n), f(r.d))?;
    }
    w.flush()?;
    Ok(())
}
