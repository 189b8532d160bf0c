//! JSON, CSV and plain-text renderings of command results.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CliError, Format, InstanceArgs};
use crate::delivery::{Codeword, Construction, TransmissionSchedule};
use crate::model::{SubpacketId, SystemParams};
use crate::multiaccess::{CcdnParams, OptimalityRow, RowFamily};
use crate::rational::{to_decimal_string, to_f64, to_fraction_string, Rational};
use crate::verifier::{SimulationReport, VerificationReport, ViolationReason};

pub const SCHEMA: &str = "cachecode/1";

const DIGITS: usize = 12;

#[derive(Serialize)]
struct Exact {
    exact: String,
    value: f64,
}

impl From<Rational> for Exact {
    fn from(r: Rational) -> Self {
        Self {
            exact: to_fraction_string(&r),
            value: to_f64(&r),
        }
    }
}

fn json<T: Serialize>(doc: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(doc).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

fn text_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    out += &line(
        widths
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .iter()
            .map(String::as_str)
            .collect(),
    );
    for row in rows {
        out += &line(row.iter().map(String::as_str).collect());
    }
    out
}

fn dec(r: &Rational) -> String {
    to_decimal_string(r, DIGITS)
}

fn frac(r: &Rational) -> String {
    to_fraction_string(r)
}

/// `r` written over the denominator `k` when that is exact (`3/12`).
fn over_k(r: &Rational, k: usize) -> String {
    let scaled = *r * Rational::from_integer(k as i64);
    if scaled.is_integer() {
        format!("{}/{k}", scaled.to_integer())
    } else {
        frac(r)
    }
}

/// Fields shared by the per-instance commands.
#[derive(Serialize)]
struct InstanceHeader {
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "N")]
    n: usize,
    i: usize,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    l: Option<usize>,
    /// Cached run length of the equivalent dedicated instance under `--L`.
    #[serde(skip_serializing_if = "Option::is_none")]
    i_eff: Option<usize>,
}

impl InstanceHeader {
    fn new(args: &InstanceArgs, params: &SystemParams) -> Self {
        Self {
            k: params.n_users(),
            n: params.n_files(),
            i: args.i,
            l: args.l,
            i_eff: args.l.map(|_| params.cache_units()),
        }
    }

    fn csv_cells(&self) -> Vec<String> {
        vec![
            self.k.to_string(),
            self.n.to_string(),
            self.i.to_string(),
            self.l.map(|l| l.to_string()).unwrap_or_default(),
        ]
    }
}

#[derive(Serialize)]
pub(super) struct ScheduleDoc<'a> {
    schema: &'static str,
    command: &'static str,
    #[serde(flatten)]
    header: InstanceHeader,
    demand: &'a [usize],
    demand_seed: Option<u64>,
    gamma: Option<usize>,
    t: Option<usize>,
    lambda: Option<usize>,
    rate: String,
    rate_value: f64,
    subpacketization: usize,
    construction: Construction,
    codewords: &'a [Codeword],
    diagnostics: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<VerificationReport>,
}

impl<'a> ScheduleDoc<'a> {
    pub(super) fn new(
        args: &InstanceArgs,
        params: &SystemParams,
        s: &'a TransmissionSchedule,
        verification: Option<VerificationReport>,
    ) -> Self {
        let c = s.constants();
        Self {
            schema: SCHEMA,
            command: "schedule",
            header: InstanceHeader::new(args, params),
            demand: s.demand().as_slice(),
            demand_seed: args.demand.seed(),
            gamma: c.map(|c| c.gamma),
            t: c.map(|c| c.t),
            lambda: c.map(|c| c.lambda),
            rate: frac(&s.rate()),
            rate_value: to_f64(&s.rate()),
            subpacketization: params.n_users(),
            construction: s.construction(),
            codewords: s.codewords(),
            diagnostics: s.diagnostics(),
            verification,
        }
    }
}

pub(super) fn schedule(doc: &ScheduleDoc<'_>, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => json(doc),
        Format::Csv => {
            let rows: Vec<Vec<String>> = doc
                .codewords
                .iter()
                .enumerate()
                .flat_map(|(idx, cw)| {
                    cw.terms().iter().map(move |t| {
                        vec![
                            (idx + 1).to_string(),
                            t.user.to_string(),
                            t.packet.to_string(),
                            doc.demand[t.user - 1].to_string(),
                        ]
                    })
                })
                .collect();
            csv_text(&["codeword", "user", "packet", "file"], &rows)
        }
        Format::Table => {
            let h = &doc.header;
            let mut out = format!(
                "K={} N={} i={}{} rate={} construction={}\n",
                h.k,
                h.n,
                h.i,
                h.l.map(|l| format!(" L={l}")).unwrap_or_default(),
                doc.rate,
                doc.construction
            );
            for (idx, cw) in doc.codewords.iter().enumerate() {
                out += &format!("{:>4}  {cw}\n", idx + 1);
            }
            if let Some(v) = &doc.verification {
                out += &format!(
                    "decodable={} coverage_ok={} violations={}\n",
                    v.decodable,
                    v.coverage_ok,
                    v.violations.len()
                );
            }
            Ok(out)
        }
    }
}

#[derive(Deserialize)]
struct CodewordInput {
    codewords: Vec<Vec<SubpacketId>>,
}

/// Codewords from a `schedule` JSON document.
pub(super) fn read_codewords(text: &str) -> Result<Vec<Codeword>, CliError> {
    let input: CodewordInput = serde_json::from_str(text)
        .map_err(|e| CliError::Usage(format!("cannot read schedule: {e}")))?;
    input
        .codewords
        .into_iter()
        .enumerate()
        .map(|(idx, mut terms)| {
            let n = terms.len();
            terms.sort();
            terms.dedup();
            if n == 0 || terms.len() != n {
                return Err(CliError::Usage(format!(
                    "codeword {} is empty or repeats a term",
                    idx + 1
                )));
            }
            Ok(terms)
        })
        .map(|terms| terms.map(Codeword::new))
        .collect()
}

#[derive(Serialize)]
struct VerifyDoc<'a> {
    schema: &'static str,
    command: &'static str,
    #[serde(flatten)]
    header: InstanceHeader,
    source: &'a str,
    transmissions: usize,
    #[serde(flatten)]
    report: &'a VerificationReport,
}

pub(super) fn verification(
    args: &InstanceArgs,
    params: &SystemParams,
    source: &str,
    transmissions: usize,
    report: &VerificationReport,
    format: Format,
) -> Result<String, CliError> {
    match format {
        Format::Json => json(&VerifyDoc {
            schema: SCHEMA,
            command: "verify",
            header: InstanceHeader::new(args, params),
            source,
            transmissions,
            report,
        }),
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .violations
                .iter()
                .map(|v| {
                    let (kind, other) = match v.reason {
                        ViolationReason::MissingSideInformation { other } => {
                            ("missing-side-information", Some(other))
                        }
                        ViolationReason::NotDemanded => ("not-demanded", None),
                        ViolationReason::OutOfRange => ("out-of-range", None),
                        ViolationReason::Duplicate => ("duplicate", None),
                        ViolationReason::NeverDelivered => ("never-delivered", None),
                    };
                    vec![
                        v.codeword.map(|c| (c + 1).to_string()).unwrap_or_default(),
                        v.term.user.to_string(),
                        v.term.packet.to_string(),
                        kind.to_string(),
                        other.map(|o| o.user.to_string()).unwrap_or_default(),
                        other.map(|o| o.packet.to_string()).unwrap_or_default(),
                    ]
                })
                .collect();
            csv_text(
                &[
                    "codeword",
                    "user",
                    "packet",
                    "reason",
                    "other_user",
                    "other_packet",
                ],
                &rows,
            )
        }
        Format::Table => {
            let mut out = format!(
                "{source} schedule, {transmissions} transmissions: decodable={} coverage_ok={}\n",
                report.decodable, report.coverage_ok
            );
            for v in &report.violations {
                out += &format!("  {v}\n");
            }
            Ok(out)
        }
    }
}

#[derive(Serialize)]
struct SimulateDoc<'a> {
    schema: &'static str,
    command: &'static str,
    #[serde(flatten)]
    header: InstanceHeader,
    demand: &'a [usize],
    demand_seed: Option<u64>,
    slice_bytes: usize,
    construction: Construction,
    rate: String,
    rate_value: f64,
    #[serde(flatten)]
    report: &'a SimulationReport,
}

pub(super) fn simulation(
    args: &InstanceArgs,
    s: &TransmissionSchedule,
    slice_bytes: usize,
    report: &SimulationReport,
    format: Format,
) -> Result<String, CliError> {
    let doc = SimulateDoc {
        schema: SCHEMA,
        command: "simulate",
        header: InstanceHeader::new(args, s.params()),
        demand: s.demand().as_slice(),
        demand_seed: args.demand.seed(),
        slice_bytes,
        construction: s.construction(),
        rate: frac(&s.rate()),
        rate_value: to_f64(&s.rate()),
        report,
    };
    let header = [
        "K",
        "N",
        "i",
        "L",
        "seed",
        "slice_bytes",
        "construction",
        "transmissions",
        "bytes_sent",
        "rate",
        "rate_exact",
        "users_ok",
        "peeling_passes",
    ];
    let mut row = doc.header.csv_cells();
    row.extend([
        report.seed.to_string(),
        slice_bytes.to_string(),
        doc.construction.to_string(),
        report.transmissions.to_string(),
        report.bytes_sent.to_string(),
        dec(&s.rate()),
        doc.rate.clone(),
        report.users_ok.to_string(),
        report.peeling_passes.to_string(),
    ]);
    match format {
        Format::Json => json(&doc),
        Format::Csv => csv_text(&header, &[row]),
        Format::Table => Ok(header
            .iter()
            .zip(&row)
            .map(|(h, v)| format!("{h:<15}{v}\n"))
            .collect()),
    }
}

pub(super) struct CurveRow {
    pub i: usize,
    pub memory: Rational,
    pub fraction: Rational,
    pub r_new: Rational,
    pub r_mn: Rational,
    pub subpacketization_new: u64,
    pub subpacketization_mn: Option<u64>,
}

#[derive(Serialize)]
struct CurveRowDoc {
    i: usize,
    #[serde(rename = "M")]
    memory: Exact,
    #[serde(rename = "M_over_N")]
    fraction: Exact,
    #[serde(rename = "R_new")]
    r_new: Exact,
    #[serde(rename = "R_MN")]
    r_mn: Exact,
    subpacketization_new: u64,
    #[serde(rename = "subpacketization_MN")]
    subpacketization_mn: Option<u64>,
}

#[derive(Serialize)]
struct CurveDoc {
    schema: &'static str,
    command: &'static str,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "N")]
    n: usize,
    rows: Vec<CurveRowDoc>,
}

pub(super) fn rate_curve(
    k: usize,
    n: usize,
    rows: &[CurveRow],
    format: Format,
) -> Result<String, CliError> {
    let header = [
        "i",
        "M",
        "M_over_N",
        "R_new",
        "R_MN",
        "subpacketization_new",
        "subpacketization_MN",
        "M_exact",
        "R_new_exact",
        "R_MN_exact",
    ];
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.i.to_string(),
                dec(&r.memory),
                dec(&r.fraction),
                dec(&r.r_new),
                dec(&r.r_mn),
                r.subpacketization_new.to_string(),
                r.subpacketization_mn
                    .map(|s| s.to_string())
                    .unwrap_or_default(),
                frac(&r.memory),
                frac(&r.r_new),
                frac(&r.r_mn),
            ]
        })
        .collect();
    match format {
        Format::Json => json(&CurveDoc {
            schema: SCHEMA,
            command: "rate-curve",
            k,
            n,
            rows: rows
                .iter()
                .map(|r| CurveRowDoc {
                    i: r.i,
                    memory: r.memory.into(),
                    fraction: r.fraction.into(),
                    r_new: r.r_new.into(),
                    r_mn: r.r_mn.into(),
                    subpacketization_new: r.subpacketization_new,
                    subpacketization_mn: r.subpacketization_mn,
                })
                .collect(),
        }),
        Format::Csv => csv_text(&header, &cells),
        Format::Table => Ok(text_table(&header, &cells)),
    }
}

/// One row of an external comparison curve, passed through verbatim.
#[derive(Debug, Clone, Serialize)]
pub(super) struct OverlayPoint {
    series: String,
    #[serde(rename = "M")]
    memory: String,
    #[serde(rename = "R")]
    rate: String,
}

/// Reads a CSV with `M` and `R` columns and an optional `series` column.
pub(super) fn read_overlay(path: &Path) -> Result<Vec<OverlayPoint>, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Io(e.to_string()))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
    };
    let (Some(m_col), Some(r_col)) = (column("M"), column("R")) else {
        return Err(CliError::Usage(
            "overlay needs columns named M and R".into(),
        ));
    };
    let series_col = column("series");
    let mut points = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Io(e.to_string()))?;
        let field = |c: usize| record.get(c).unwrap_or("").trim().to_string();
        let (memory, rate) = (field(m_col), field(r_col));
        if memory.parse::<f64>().is_err() || rate.parse::<f64>().is_err() {
            return Err(CliError::Usage(format!(
                "overlay row {}: M and R must be numbers",
                line + 1
            )));
        }
        points.push(OverlayPoint {
            series: series_col
                .map(field)
                .filter(|s| !s.is_empty())
                .unwrap_or_else(|| "overlay".into()),
            memory,
            rate,
        });
    }
    Ok(points)
}

#[derive(Serialize)]
struct BoundPoint {
    #[serde(rename = "M")]
    memory: Exact,
    #[serde(rename = "R")]
    rate: Exact,
}

#[derive(Serialize)]
struct BoundDoc<'a> {
    schema: &'static str,
    command: &'static str,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "L")]
    l: usize,
    breakpoints: Vec<BoundPoint>,
    samples: Vec<BoundPoint>,
    overlay: &'a [OverlayPoint],
}

pub(super) fn ccdn_bound(
    params: &CcdnParams,
    breakpoints: &[(Rational, Rational)],
    samples: &[(Rational, Rational)],
    overlay: &[OverlayPoint],
    format: Format,
) -> Result<String, CliError> {
    let points = |pts: &[(Rational, Rational)]| -> Vec<BoundPoint> {
        pts.iter()
            .map(|&(m, r)| BoundPoint {
                memory: m.into(),
                rate: r.into(),
            })
            .collect()
    };
    let header = ["series", "M", "R_UB", "M_exact", "R_UB_exact"];
    let mut cells: Vec<Vec<String>> = Vec::new();
    for (series, pts) in [("breakpoint", breakpoints), ("bound", samples)] {
        cells.extend(
            pts.iter()
                .map(|(m, r)| vec![series.into(), dec(m), dec(r), frac(m), frac(r)]),
        );
    }
    cells.extend(overlay.iter().map(|p| {
        vec![
            p.series.clone(),
            p.memory.clone(),
            p.rate.clone(),
            String::new(),
            String::new(),
        ]
    }));
    match format {
        Format::Json => json(&BoundDoc {
            schema: SCHEMA,
            command: "ccdn-bound",
            k: params.n_users(),
            n: params.n_files(),
            l: params.access_degree(),
            breakpoints: points(breakpoints),
            samples: points(samples),
            overlay,
        }),
        Format::Csv => csv_text(&header, &cells),
        Format::Table => Ok(text_table(&header, &cells)),
    }
}

#[derive(Serialize)]
struct TableRowDoc {
    #[serde(rename = "L")]
    l: usize,
    row: String,
    family: RowFamily,
    #[serde(rename = "R_optimal")]
    r_optimal: Exact,
    #[serde(rename = "R_new")]
    r_new: Exact,
    #[serde(rename = "R_listed")]
    r_listed: Exact,
    optimal: bool,
    reproduces: bool,
}

#[derive(Serialize)]
struct TableDoc {
    schema: &'static str,
    command: &'static str,
    #[serde(rename = "K")]
    k: usize,
    rows: Vec<TableRowDoc>,
}

pub(super) fn optimality(
    k: usize,
    rows: &[OptimalityRow],
    format: Format,
) -> Result<String, CliError> {
    match format {
        Format::Json => json(&TableDoc {
            schema: SCHEMA,
            command: "optimality-table",
            k,
            rows: rows
                .iter()
                .map(|r| TableRowDoc {
                    l: r.l,
                    row: r.family.to_string(),
                    family: r.family,
                    r_optimal: r.r_optimal.into(),
                    r_new: r.r_new.into(),
                    r_listed: r.r_listed.into(),
                    optimal: r.optimal,
                    reproduces: r.reproduces,
                })
                .collect(),
        }),
        Format::Csv => {
            let header = [
                "L",
                "row",
                "R_optimal",
                "R_new",
                "R_listed",
                "optimal",
                "reproduces",
                "R_optimal_exact",
                "R_new_exact",
                "R_listed_exact",
            ];
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.l.to_string(),
                        r.family.to_string(),
                        dec(&r.r_optimal),
                        dec(&r.r_new),
                        dec(&r.r_listed),
                        r.optimal.to_string(),
                        r.reproduces.to_string(),
                        frac(&r.r_optimal),
                        frac(&r.r_new),
                        frac(&r.r_listed),
                    ]
                })
                .collect();
            csv_text(&header, &cells)
        }
        Format::Table => {
            let header = ["L", "row", "R*", "R_new", "listed", "match"];
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.l.to_string(),
                        r.family.to_string(),
                        over_k(&r.r_optimal, k),
                        over_k(&r.r_new, k),
                        over_k(&r.r_listed, k),
                        if r.optimal { "match" } else { "gap" }.to_string(),
                    ]
                })
                .collect();
            Ok(format!("K={k}, M=N/K\n") + &text_table(&header, &cells))
        }
    }
}
