//! Corpus measurements: sparsity, burst-length distributions, value
//! histograms, parameter sweeps and whole-corpus compression ratios.
//!
//! Every ratio reported here comes from a stream that was decoded again and
//! compared against its input. Aggregate ratios are ratios of bit sums, so
//! they do not depend on the order tensors are processed in.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::EbpcParams;
use crate::container::Method;
use crate::error::{Error, Result};
use crate::tensor::{permute_layout, Layout, TensorRecord};
use crate::{compress_with, decompress_any};

pub const DEFAULT_HISTOGRAM_BINS: usize = 64;

pub fn sparsity(t: &TensorRecord) -> Result<f64> {
    if t.is_empty() {
        return Err(Error::InvalidParams("sparsity of an empty tensor".into()));
    }
    let zeros = t.data.iter().filter(|&&v| v == 0).count();
    Ok(zeros as f64 / t.len() as f64)
}

/// Counts of maximal zero and non-zero runs, keyed by run length.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BurstCounts {
    pub zero: BTreeMap<u64, u64>,
    pub nonzero: BTreeMap<u64, u64>,
}

impl BurstCounts {
    pub fn scan(data: &[u32]) -> Self {
        let mut counts = Self::default();
        let mut iter = data.iter().peekable();
        while let Some(&first) = iter.next() {
            let mut len = 1u64;
            while iter.next_if(|&&v| (v == 0) == (first == 0)).is_some() {
                len += 1;
            }
            let map = if first == 0 {
                &mut counts.zero
            } else {
                &mut counts.nonzero
            };
            *map.entry(len).or_default() += 1;
        }
        counts
    }

    pub fn merge(&mut self, other: &BurstCounts) {
        for (len, n) in &other.zero {
            *self.zero.entry(*len).or_default() += n;
        }
        for (len, n) in &other.nonzero {
            *self.nonzero.entry(*len).or_default() += n;
        }
    }

    pub fn cdf(&self) -> BurstCdf {
        BurstCdf {
            zero: Cdf::from_counts(&self.zero),
            nonzero: Cdf::from_counts(&self.nonzero),
        }
    }
}

/// Empirical CDF over run lengths, one point per observed length.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Cdf {
    pub points: Vec<(u64, f64)>,
}

impl Cdf {
    fn from_counts(counts: &BTreeMap<u64, u64>) -> Self {
        let total: u64 = counts.values().sum();
        let mut acc = 0;
        let points = counts
            .iter()
            .map(|(&len, &n)| {
                acc += n;
                (len, acc as f64 / total as f64)
            })
            .collect();
        Self { points }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// P(run length <= len).
    pub fn at(&self, len: u64) -> f64 {
        match self.points.partition_point(|&(l, _)| l <= len) {
            0 => 0.0,
            i => self.points[i - 1].1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BurstCdf {
    pub zero: Cdf,
    pub nonzero: Cdf,
}

pub fn burst_cdf(t: &TensorRecord, layout: Layout) -> BurstCdf {
    BurstCounts::scan(&permute_layout(t, layout).data).cdf()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// Equal-width bins over `[0, 2^m - 1]`.
    pub bins: Vec<u64>,
    pub bin_width: f64,
    /// Exact zeros, also counted in `bins[0]`.
    pub zero_count: u64,
}

pub fn value_histogram(t: &TensorRecord, bin_count: usize) -> Result<Histogram> {
    histogram_words(&t.data, t.m, bin_count)
}

/// Histogram of raw `m`-bit words.
pub fn histogram_words(data: &[u32], m: u32, bin_count: usize) -> Result<Histogram> {
    if bin_count == 0 {
        return Err(Error::InvalidParams(
            "histogram needs at least one bin".into(),
        ));
    }
    let span = 1u128 << m;
    let mut bins = vec![0u64; bin_count];
    for &v in data {
        let bin = (u128::from(v) * bin_count as u128 / span) as usize;
        bins[bin.min(bin_count - 1)] += 1;
    }
    Ok(Histogram {
        bins,
        bin_width: span as f64 / bin_count as f64,
        zero_count: data.iter().filter(|&&v| v == 0).count() as u64,
    })
}

/// Rescale a tensor to another word width by proportional rounding.
pub fn requantize(t: &TensorRecord, m: u32) -> Result<TensorRecord> {
    if t.m == m {
        return Ok(t.clone());
    }
    let from = (1u128 << t.m) - 1;
    let to = (1u128 << m) - 1;
    let data = t
        .data
        .iter()
        .map(|&v| ((2 * u128::from(v) * to + from) / (2 * from)) as u32)
        .collect();
    Ok(TensorRecord::new(t.dims, t.layout, m, data)?
        .with_meta(t.meta.network.clone(), t.meta.layer.clone()))
}

/// The corpus at word width `m`, per network: records stored at `m` when the
/// network has any, otherwise its widest records requantized to `m`.
pub fn corpus_at_width(corpus: &[TensorRecord], m: u32) -> Result<Vec<TensorRecord>> {
    let mut networks: Vec<&str> = Vec::new();
    for t in corpus {
        if !networks.contains(&t.meta.network.as_str()) {
            networks.push(&t.meta.network);
        }
    }
    let mut out = Vec::new();
    for net in networks {
        let records: Vec<&TensorRecord> = corpus.iter().filter(|t| t.meta.network == net).collect();
        if records.iter().any(|t| t.m == m) {
            out.extend(records.into_iter().filter(|t| t.m == m).cloned());
        } else {
            let widest = records.iter().map(|t| t.m).max().unwrap_or(m);
            for t in records.into_iter().filter(|t| t.m == widest) {
                out.push(requantize(t, m)?);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub network: String,
    pub layer: String,
    pub method: Method,
    pub m: u32,
    /// Block size, for methods that use one.
    pub n: Option<usize>,
    /// Zero-run field width, for methods that use one.
    pub k: Option<u32>,
    pub layout: Layout,
    pub uncompressed_bits: u64,
    pub compressed_bits: u64,
    pub ratio: f64,
}

fn method_uses(method: Method) -> (bool, bool) {
    match method {
        Method::Ebpc => (true, true),
        Method::Zvc => (false, false),
        Method::ZeroRle => (false, true),
        Method::Bpc => (true, false),
    }
}

/// Compress one tensor in `layout`, verify the round trip and report sizes.
pub fn measure(
    t: &TensorRecord,
    method: Method,
    params: EbpcParams,
    layout: Layout,
) -> Result<RatioRow> {
    let params = EbpcParams { m: t.m, ..params };
    let data = permute_layout(t, layout).data;
    let stream = compress_with(method, &data, params)?;
    if decompress_any(&stream)? != data {
        return Err(Error::RoundTripMismatch { method });
    }
    let (uses_n, uses_k) = method_uses(method);
    let uncompressed_bits = data.len() as u64 * u64::from(t.m);
    let compressed_bits = stream.payload_bits();
    Ok(RatioRow {
        network: t.meta.network.clone(),
        layer: t.meta.layer.clone(),
        method,
        m: t.m,
        n: uses_n.then_some(params.n),
        k: uses_k.then_some(params.k),
        layout,
        uncompressed_bits,
        compressed_bits,
        ratio: uncompressed_bits as f64 / compressed_bits as f64,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub rows: Vec<RatioRow>,
}

impl RatioReport {
    /// Ratio of summed bits over the rows matching `keep`; `None` if no row
    /// matches or nothing was emitted.
    pub fn aggregate(&self, keep: impl Fn(&RatioRow) -> bool) -> Option<f64> {
        let (u, c) = self
            .rows
            .iter()
            .filter(|r| keep(r))
            .fold((0u64, 0u64), |(u, c), r| {
                (u + r.uncompressed_bits, c + r.compressed_bits)
            });
        (c > 0).then(|| u as f64 / c as f64)
    }

    fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            (&a.network, &a.layer, a.method, a.m, a.n, a.k)
                .cmp(&(&b.network, &b.layer, b.method, b.m, b.n, b.k))
        });
    }
}

/// Run `f` over `items` on `jobs` worker threads, keeping input order.
fn run_parallel<T: Sync, R: Send>(
    items: &[T],
    jobs: usize,
    f: impl Fn(&T) -> Result<R> + Sync + Send,
) -> Result<Vec<R>> {
    if jobs <= 1 {
        return items.iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParams(format!("worker pool: {e}")))?;
    pool.install(|| items.par_iter().map(f).collect())
}

#[derive(Debug, Clone, Copy)]
pub struct AnalysisOptions {
    pub layout: Layout,
    pub jobs: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            layout: Layout::Nchw,
            jobs: 1,
        }
    }
}

fn measure_all(
    corpus: &[TensorRecord],
    configs: &[(Method, EbpcParams)],
    opts: AnalysisOptions,
) -> Result<RatioReport> {
    let work: Vec<(&TensorRecord, Method, EbpcParams)> = corpus
        .iter()
        .flat_map(|t| configs.iter().map(move |&(method, p)| (t, method, p)))
        .collect();
    let rows = run_parallel(&work, opts.jobs, |&(t, method, p)| {
        measure(t, method, p, opts.layout)
    })?;
    let mut report = RatioReport { rows };
    report.sort();
    Ok(report)
}

/// EBPC at each block size in `n_set`, word width `m`, run field width `k`.
pub fn sweep_block_size(
    corpus: &[TensorRecord],
    m: u32,
    k: u32,
    n_set: &[usize],
    opts: AnalysisOptions,
) -> Result<RatioReport> {
    let configs = n_set
        .iter()
        .map(|&n| EbpcParams::new(m, n, k).map(|p| (Method::Ebpc, p)))
        .collect::<Result<Vec<_>>>()?;
    measure_all(&corpus_at_width(corpus, m)?, &configs, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxBurstRow {
    pub m: u32,
    pub zvc: f64,
    /// One ratio per entry of the table's `k_set`.
    pub zero_rle: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxBurstTable {
    pub k_set: Vec<u32>,
    pub rows: Vec<MaxBurstRow>,
}

/// ZVC and zero-run-only ratios per word width and run field width.
pub fn sweep_max_burst(
    corpus: &[TensorRecord],
    m_set: &[u32],
    k_set: &[u32],
    opts: AnalysisOptions,
) -> Result<MaxBurstTable> {
    let mut rows = Vec::with_capacity(m_set.len());
    for &m in m_set {
        let mut configs = vec![(
            Method::Zvc,
            EbpcParams {
                m,
                ..EbpcParams::default()
            },
        )];
        for &k in k_set {
            configs.push((Method::ZeroRle, EbpcParams::new(m, 16, k)?));
        }
        let report = measure_all(&corpus_at_width(corpus, m)?, &configs, opts)?;
        let ratio = |method: Method, k: Option<u32>| {
            report
                .aggregate(|r| r.method == method && r.k == k)
                .ok_or_else(|| Error::InvalidParams("sweep over an empty corpus".into()))
        };
        rows.push(MaxBurstRow {
            m,
            zvc: ratio(Method::Zvc, None)?,
            zero_rle: k_set
                .iter()
                .map(|&k| ratio(Method::ZeroRle, Some(k)))
                .collect::<Result<_>>()?,
        });
    }
    Ok(MaxBurstTable {
        k_set: k_set.to_vec(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkRatio {
    pub network: String,
    pub method: Method,
    pub m: u32,
    pub uncompressed_bits: u64,
    pub compressed_bits: u64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TotalReport {
    pub per_tensor: RatioReport,
    pub per_network: Vec<NetworkRatio>,
    /// Findings that contradict the usual narrower-is-better ordering.
    pub warnings: Vec<String>,
}

/// Aggregate ratio per network, method and word width.
pub fn total_compression(
    corpus: &[TensorRecord],
    methods: &[Method],
    widths: &[u32],
    params: EbpcParams,
    opts: AnalysisOptions,
) -> Result<TotalReport> {
    let mut per_tensor = RatioReport::default();
    for &m in widths {
        let configs: Vec<_> = methods
            .iter()
            .map(|&method| (method, EbpcParams { m, ..params }))
            .collect();
        per_tensor
            .rows
            .extend(measure_all(&corpus_at_width(corpus, m)?, &configs, opts)?.rows);
    }
    per_tensor.sort();

    let mut sums: BTreeMap<(String, Method, u32), (u64, u64)> = BTreeMap::new();
    for r in &per_tensor.rows {
        let e = sums.entry((r.network.clone(), r.method, r.m)).or_default();
        e.0 += r.uncompressed_bits;
        e.1 += r.compressed_bits;
    }
    let per_network: Vec<NetworkRatio> = sums
        .into_iter()
        .map(|((network, method, m), (u, c))| NetworkRatio {
            network,
            method,
            m,
            uncompressed_bits: u,
            compressed_bits: c,
            ratio: u as f64 / c as f64,
        })
        .collect();

    let mut warnings = Vec::new();
    for a in &per_network {
        for b in &per_network {
            if a.network == b.network && a.method == b.method && a.m < b.m && a.ratio < b.ratio {
                warnings.push(format!(
                    "{} {}: {}-bit ratio {:.3} below {}-bit ratio {:.3}",
                    a.network, a.method, a.m, a.ratio, b.m, b.ratio
                ));
            }
        }
    }
    Ok(TotalReport {
        per_tensor,
        per_network,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::InvalidParams(format!("unknown report format '{s}'"))),
        }
    }
}

/// Flat CSV record for [`RatioRow`]; missing parameters become empty cells.
#[derive(Serialize)]
struct RatioCsv<'a> {
    network: &'a str,
    layer: &'a str,
    method: &'static str,
    m: u32,
    n: Option<usize>,
    k: Option<u32>,
    layout: &'static str,
    uncompressed_bits: u64,
    compressed_bits: u64,
    ratio: f64,
}

pub fn write_ratio_rows(rows: &[RatioRow], out: impl Write, format: ReportFormat) -> Result<()> {
    match format {
        ReportFormat::Json => serde_json::to_writer_pretty(out, rows)?,
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(RatioCsv {
                    network: &r.network,
                    layer: &r.layer,
                    method: r.method.name(),
                    m: r.m,
                    n: r.n,
                    k: r.k,
                    layout: r.layout.name(),
                    uncompressed_bits: r.uncompressed_bits,
                    compressed_bits: r.compressed_bits,
                    ratio: r.ratio,
                })?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Serialize plain records as CSV or a JSON array.
pub fn write_records<T: Serialize>(
    records: &[T],
    out: impl Write,
    format: ReportFormat,
) -> Result<()> {
    match format {
        ReportFormat::Json => serde_json::to_writer_pretty(out, records)?,
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in records {
                w.serialize(r)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn write_max_burst_table(
    table: &MaxBurstTable,
    out: impl Write,
    format: ReportFormat,
) -> Result<()> {
    match format {
        ReportFormat::Json => serde_json::to_writer_pretty(out, table)?,
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let mut header = vec!["wordwidth".to_string(), "zvc".to_string()];
            header.extend(
                table
                    .k_set
                    .iter()
                    .map(|k| format!("zero_rle_{}", 1u64 << k)),
            );
            w.write_record(&header)?;
            for row in &table.rows {
                let mut rec = vec![row.m.to_string(), format!("{:.4}", row.zvc)];
                rec.extend(row.zero_rle.iter().map(|r| format!("{r:.4}")));
                w.write_record(&rec)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn write_to_file(path: &Path, f: impl FnOnce(&mut std::fs::File) -> Result<()>) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    f(&mut file)
}
