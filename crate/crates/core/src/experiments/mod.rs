//! Parameter sweeps over the decohering Werner pair, anchor verification,
//! and sudden-change detection on the resulting series.

mod anchors;
mod config;
mod sudden;

use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use anchors::{verify_anchors, verify_appendix, AnchorCheck, AnchorReport, AppendixCell};
pub use config::{default_spec, seed_from_env, RunConfig, SEED_ENV};
pub use sudden::{detect_sudden_change, detect_sudden_change_with, SuddenChangeOptions, SuddenChangeReport};

use crate::channels::{evolve_global, ChannelKind, TimeParam, WernerParams};
use crate::classical_search::SearchConfig;
use crate::error::{Error, Result};
use crate::genuine_correlations::{
    genuine_total_in, genuine_total_in_with, genuine_total_ik_with,
    multipartite_quantum_q, MultipartiteQuantum, SubsetSelection, Symmetry,
};
use crate::linalg::{DensityMatrix, Tolerances};
use crate::states::{fidelity, ghz4_target, w4};

/// Series computed by a sweep. Subsystems are ordered `(a, E_a, b, E_b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    /// Genuine 4-partite total correlation.
    I4,
    /// Genuine 3-partite total correlation, max over triples.
    I3,
    /// `I_3` of `(a, E_a, b)`.
    I3AbEa,
    /// `I_3` of `(a, E_a, E_b)`.
    I3AEaEb,
    /// Closest-classical distance, one cell per subsystem.
    Q4,
    /// As `Q4` on three-party marginals, max over triples.
    Q3,
    /// Genuine 4-partite total correlation of the closest classical state.
    C4,
    /// Genuine 3-partite total correlation of its three-party marginals.
    C3,
    /// Fidelity with the W-type target.
    FW,
    /// Fidelity with the GHZ-type target.
    FGhz,
}

impl Measure {
    pub const ALL: [Measure; 10] = [
        Measure::I4,
        Measure::I3,
        Measure::I3AbEa,
        Measure::I3AEaEb,
        Measure::Q4,
        Measure::Q3,
        Measure::C4,
        Measure::C3,
        Measure::FW,
        Measure::FGhz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::I4 => "I4",
            Measure::I3 => "I3",
            Measure::I3AbEa => "I3_abEa",
            Measure::I3AEaEb => "I3_aEaEb",
            Measure::Q4 => "Q4",
            Measure::Q3 => "Q3",
            Measure::C4 => "C4",
            Measure::C3 => "C3",
            Measure::FW => "F_W",
            Measure::FGhz => "F_GHZ",
        }
    }

    /// Measures that run a closest-classical-state search.
    pub fn needs_search(self) -> bool {
        matches!(self, Measure::Q4 | Measure::Q3 | Measure::C4 | Measure::C3)
    }

    /// Genuine total correlation series.
    pub fn is_genuine_total(self) -> bool {
        matches!(
            self,
            Measure::I4 | Measure::I3 | Measure::I3AbEa | Measure::I3AEaEb
        )
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .iter()
            .copied()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownMeasure(s.to_string()))
    }
}

impl Serialize for Measure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Measure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub const DEFAULT_POINTS: usize = 101;
pub const DEFAULT_SEARCH_POINTS: usize = 41;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub channel: ChannelKind,
    pub c_values: Vec<f64>,
    /// Equally spaced points on `[0, 1]`; `None` picks 41 when a search
    /// measure is present and 101 otherwise.
    pub p_points: Option<usize>,
    pub measures: Vec<Measure>,
    pub search: SearchConfig,
    /// Evaluate only one representative per orbit of `(a,E_a) <-> (b,E_b)`.
    pub symmetry: bool,
    pub output: Option<PathBuf>,
}

impl SweepSpec {
    pub fn new(channel: ChannelKind, c_values: Vec<f64>, measures: Vec<Measure>) -> Self {
        SweepSpec {
            channel,
            c_values,
            p_points: None,
            measures,
            search: SearchConfig::default(),
            symmetry: false,
            output: None,
        }
    }

    pub fn points(&self) -> usize {
        self.p_points.unwrap_or_else(|| {
            if self.measures.iter().any(|m| m.needs_search()) {
                DEFAULT_SEARCH_POINTS
            } else {
                DEFAULT_POINTS
            }
        })
    }

    pub fn p_grid(&self) -> Vec<f64> {
        uniform_grid(self.points())
    }

    pub fn validate(&self) -> Result<()> {
        if self.points() < 2 {
            return Err(Error::InvalidParameter(format!(
                "p grid needs at least 2 points, got {}",
                self.points()
            )));
        }
        if self.measures.is_empty() {
            return Err(Error::InvalidParameter("no measures requested".into()));
        }
        if self.c_values.is_empty() {
            return Err(Error::InvalidParameter("no c values given".into()));
        }
        for &c in &self.c_values {
            WernerParams::new(c)?;
        }
        self.search.validate()
    }
}

/// `n` equally spaced points from 0 to 1 inclusive.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub c: f64,
    pub p: f64,
    /// One value per requested measure; `NaN` where evaluation failed.
    pub values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub channel: ChannelKind,
    pub measures: Vec<Measure>,
    pub rows: Vec<SweepRow>,
}

fn swap_symmetry(enabled: bool) -> Option<Symmetry> {
    enabled.then(Symmetry::two_party_swap)
}

/// All requested measures on one four-party state. Failures become `NaN`
/// entries and a flag message.
pub fn evaluate_measures(
    rho: &DensityMatrix,
    measures: &[Measure],
    search: &SearchConfig,
    symmetry: bool,
) -> (Vec<f64>, Option<String>) {
    let sym = swap_symmetry(symmetry);
    let sym = sym.as_ref();
    let mut chi: Option<Result<MultipartiteQuantum>> = None;
    let mut flags = Vec::new();
    let mut values = Vec::with_capacity(measures.len());
    for &m in measures {
        let v = match m {
            Measure::I4 => genuine_total_in_with(rho, sym).map(|r| r.value_bits),
            Measure::I3 => genuine_total_ik_with(rho, 3, sym).map(|r| r.value_bits),
            Measure::I3AbEa => subset_total(rho, &[0, 1, 2]),
            Measure::I3AEaEb => subset_total(rho, &[0, 1, 3]),
            Measure::Q4 | Measure::C4 | Measure::C3 => {
                let q = chi.get_or_insert_with(|| multipartite_quantum_q(rho, search));
                match q {
                    Ok(q) => match m {
                        Measure::Q4 => Ok(q.report.value_bits),
                        Measure::C4 => genuine_total_in_with(&q.chi, sym).map(|r| r.value_bits),
                        _ => genuine_total_ik_with(&q.chi, 3, sym).map(|r| r.value_bits),
                    },
                    Err(e) => Err(Error::OptimizerFailed(e.to_string())),
                }
            }
            Measure::Q3 => triple_quantum(rho, search, sym),
            Measure::FW => fidelity(&w4(), rho).map(|f| f.value()),
            Measure::FGhz => fidelity(&ghz4_target(), rho).map(|f| f.value()),
        };
        match v {
            Ok(v) if v >= -1e-9 => values.push(v),
            Ok(v) => {
                flags.push(format!("{m}: negative value {v}"));
                values.push(f64::NAN);
            }
            Err(e) => {
                flags.push(format!("{m}: {e}"));
                values.push(f64::NAN);
            }
        }
    }
    let flag = (!flags.is_empty()).then(|| flags.join("; "));
    (values, flag)
}

fn subset_total(rho: &DensityMatrix, subset: &[usize]) -> Result<f64> {
    genuine_total_in(&rho.partial_trace(subset)?).map(|r| r.value_bits)
}

fn triple_quantum(rho: &DensityMatrix, search: &SearchConfig, sym: Option<&Symmetry>) -> Result<f64> {
    let triples = match sym {
        Some(s) => s.subsets(3)?,
        None => SubsetSelection::all(rho.n_subsystems(), 3)?,
    };
    let mut best = f64::NEG_INFINITY;
    for t in triples {
        let q = multipartite_quantum_q(&rho.partial_trace(t.indices())?, search)?;
        best = best.max(q.report.value_bits);
    }
    Ok(best)
}

/// Evaluates every `(c, p)` row. Rows come out ordered by `c` (as given)
/// then `p`, independent of scheduling.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let grid = spec.p_grid();
    let cells: Vec<(f64, f64)> = spec
        .c_values
        .iter()
        .flat_map(|&c| grid.iter().map(move |&p| (c, p)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(c, p)| {
            let rho = evolve_global(WernerParams::new(c)?, TimeParam::new(p)?, spec.channel);
            let (values, flag) = evaluate_measures(&rho, &spec.measures, &spec.search, spec.symmetry);
            Ok(SweepRow { c, p, values, flag })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        channel: spec.channel,
        measures: spec.measures.clone(),
        rows,
    })
}

impl SweepTable {
    pub fn column(&self, measure: Measure) -> Option<usize> {
        self.measures.iter().position(|&m| m == measure)
    }

    /// `(p, value)` pairs for one `c`, in row order.
    pub fn series(&self, measure: Measure, c: f64) -> Result<Vec<(f64, f64)>> {
        let col = self
            .column(measure)
            .ok_or_else(|| Error::UnknownMeasure(format!("{measure} is not in this table")))?;
        Ok(self
            .rows
            .iter()
            .filter(|r| r.c == c)
            .map(|r| (r.p, r.values[col]))
            .collect())
    }

    /// Distinct `c` values in first-appearance order.
    pub fn c_values(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.c) {
                out.push(r.c);
            }
        }
        out
    }

    pub fn flagged(&self) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.flag.is_some()).collect()
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["channel".to_string(), "c".to_string(), "p".to_string()];
        h.extend(self.measures.iter().map(|m| m.name().to_string()));
        h
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.header())?;
        for r in &self.rows {
            let mut rec = vec![self.channel.label().to_string(), r.c.to_string(), r.p.to_string()];
            rec.extend(r.values.iter().map(|v| v.to_string()));
            out.write_record(rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<SweepTable> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers()?.clone();
        if header.len() < 4 || &header[0] != "channel" || &header[1] != "c" || &header[2] != "p" {
            return Err(Error::Config(
                "expected a header starting with channel,c,p followed by measures".into(),
            ));
        }
        let measures = header
            .iter()
            .skip(3)
            .map(Measure::from_str)
            .collect::<Result<Vec<_>>>()?;
        let mut channel = None;
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let kind: ChannelKind = rec[0].parse()?;
            if *channel.get_or_insert(kind) != kind {
                return Err(Error::Config("table mixes channels".into()));
            }
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad number `{s}`: {e}")))
            };
            let values = rec.iter().skip(3).map(num).collect::<Result<Vec<_>>>()?;
            rows.push(SweepRow {
                c: num(&rec[1])?,
                p: num(&rec[2])?,
                values,
                flag: None,
            });
        }
        let channel = channel.ok_or_else(|| Error::Config("table has no rows".into()))?;
        Ok(SweepTable {
            channel,
            measures,
            rows,
        })
    }

    pub fn load_csv(path: &Path) -> Result<SweepTable> {
        SweepTable::read_csv(File::open(path)?)
    }
}

/// Everything needed to reproduce a sweep's CSV.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub spec: &'a SweepSpec,
    pub points: usize,
    pub rng_seed: u64,
    pub tolerances: Tolerances,
    pub version: &'static str,
    pub rows: usize,
    pub flagged: Vec<&'a SweepRow>,
}

impl<'a> Manifest<'a> {
    pub fn new(spec: &'a SweepSpec, table: &'a SweepTable) -> Self {
        Manifest {
            spec,
            points: spec.points(),
            rng_seed: spec.search.rng_seed,
            tolerances: Tolerances::default(),
            version: env!("CARGO_PKG_VERSION"),
            rows: table.rows.len(),
            flagged: table.flagged(),
        }
    }
}

/// Writes `path` (CSV) and `path` with extension `json` (manifest).
pub fn write_outputs(spec: &SweepSpec, table: &SweepTable, path: &Path) -> Result<PathBuf> {
    table.write_csv(File::create(path)?)?;
    let manifest_path = path.with_extension("json");
    let f = File::create(&manifest_path)?;
    serde_json::to_writer_pretty(f, &Manifest::new(spec, table))?;
    Ok(manifest_path)
}
