use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ebpc::analysis::{self, AnalysisOptions, BurstCounts, RatioRow, ReportFormat};
use ebpc::tensor::{self, check_word_width, permute_layout, CorpusManifest};
use ebpc::{
    compress_with, decompress_any, CompressedStream, EbpcParams, Error, Layout, Method, Result,
    TensorRecord,
};

const ALL_LAYOUTS: [Layout; 4] = [Layout::Nchw, Layout::Nhwc, Layout::Chwn, Layout::Hwcn];

#[derive(Parser)]
#[command(
    name = "ebpc",
    version,
    about = "Compress sparse fixed-point tensors and analyse tensor corpora"
)]
struct Cli {
    /// Print human-readable text instead of JSON/CSV.
    #[arg(long, global = true)]
    human: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a TNSR tensor file into a container.
    Compress {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Ebpc)]
        method: MethodArg,
        /// Order in which the words are streamed.
        #[arg(long, value_enum, default_value_t = LayoutArg::Nchw)]
        layout: LayoutArg,
    },
    /// Decompress a container back into a TNSR tensor file.
    Decompress {
        input: PathBuf,
        output: PathBuf,
        /// Logical N,C,H,W of the tensor; defaults to 1,1,1,<count>.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        /// Layout the words were streamed in.
        #[arg(long, value_enum, default_value_t = LayoutArg::Nchw)]
        layout: LayoutArg,
    },
    /// Run a corpus analysis over a manifest.
    Analyze(AnalyzeArgs),
}

#[derive(Args, Clone, Copy)]
struct CodecArgs {
    /// Word width in bits. `compress` requires it to match the tensor;
    /// `analyze` measures only this width instead of 8, 16 and 32.
    #[arg(long, value_parser = parse_width)]
    wordwidth: Option<u32>,
    #[arg(long, default_value_t = 16)]
    block_size: usize,
    /// log2 of the longest zero burst one run symbol covers.
    #[arg(long, default_value_t = 4)]
    max_burst_log: u32,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(value_enum)]
    which: Which,
    #[arg(long)]
    manifest: PathBuf,
    /// Report file; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    codec: CodecArgs,
    /// Method for `total`; all four when omitted.
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Defaults to nchw; `bursts` covers all four layouts when omitted.
    #[arg(long, value_enum)]
    layout: Option<LayoutArg>,
    #[arg(long, default_value_t = analysis::DEFAULT_HISTOGRAM_BINS)]
    bins: usize,
    /// Block sizes for `sweep-n`.
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32,64")]
    block_sizes: Vec<usize>,
    /// Run field widths for `sweep-k`.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6")]
    burst_logs: Vec<u32>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Sparsity,
    Bursts,
    Hist,
    SweepN,
    SweepK,
    Total,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Ebpc,
    Zvc,
    ZeroRle,
    Bpc,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Ebpc => Method::Ebpc,
            MethodArg::Zvc => Method::Zvc,
            MethodArg::ZeroRle => Method::ZeroRle,
            MethodArg::Bpc => Method::Bpc,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutArg {
    Nchw,
    Nhwc,
    Chwn,
    Hwcn,
}

impl From<LayoutArg> for Layout {
    fn from(l: LayoutArg) -> Self {
        match l {
            LayoutArg::Nchw => Layout::Nchw,
            LayoutArg::Nhwc => Layout::Nhwc,
            LayoutArg::Chwn => Layout::Chwn,
            LayoutArg::Hwcn => Layout::Hwcn,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
        }
    }
}

fn parse_width(s: &str) -> std::result::Result<u32, String> {
    let m: u32 = s.parse().map_err(|e| format!("{e}"))?;
    check_word_width(m).map_err(|e| e.to_string())?;
    Ok(m)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ebpc: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Compress {
            input,
            output,
            codec,
            method,
            layout,
        } => cmd_compress(
            input,
            output,
            *codec,
            (*method).into(),
            (*layout).into(),
            cli.human,
        ),
        Command::Decompress {
            input,
            output,
            dims,
            layout,
        } => cmd_decompress(input, output, dims.as_deref(), (*layout).into(), cli.human),
        Command::Analyze(args) => cmd_analyze(args, cli.human),
    }
}

impl CodecArgs {
    /// Parameters for words of width `m`; fails up front on bad combinations.
    fn params(&self, m: u32) -> Result<EbpcParams> {
        EbpcParams::new(m, self.block_size, self.max_burst_log)
    }

    fn check(&self) -> Result<EbpcParams> {
        self.params(self.wordwidth.unwrap_or(16))
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct StreamSummary {
    method: Method,
    element_count: u64,
    m: u32,
    payload_bits: u64,
    header_bytes: usize,
    ratio: f64,
}

impl StreamSummary {
    fn of(s: &CompressedStream) -> Self {
        Self {
            method: s.header.method,
            element_count: s.element_count(),
            m: u32::from(s.header.m),
            payload_bits: s.payload_bits(),
            header_bytes: ebpc::container::HEADER_LEN,
            ratio: s.ratio(),
        }
    }

    fn print(&self, human: bool) -> Result<()> {
        let mut out = io::stdout().lock();
        if human {
            writeln!(
                out,
                "{}: {} x {}-bit words, {} payload bits (+{} header bytes), ratio {:.3}",
                self.method,
                self.element_count,
                self.m,
                self.payload_bits,
                self.header_bytes,
                self.ratio
            )?;
        } else {
            serde_json::to_writer(&mut out, self)?;
            writeln!(out)?;
        }
        Ok(())
    }
}

fn cmd_compress(
    input: &Path,
    output: &Path,
    codec: CodecArgs,
    method: Method,
    layout: Layout,
    human: bool,
) -> Result<()> {
    codec.check()?;
    let t = tensor::load_tensor(input)?;
    if let Some(m) = codec.wordwidth.filter(|&m| m != t.m) {
        return Err(Error::InvalidParams(format!(
            "--wordwidth {m} does not match the {}-bit tensor",
            t.m
        )));
    }
    let words = permute_layout(&t, layout).data;
    let stream = compress_with(method, &words, codec.params(t.m)?)?;
    fs::write(output, stream.to_bytes())?;
    StreamSummary::of(&stream).print(human)
}

fn cmd_decompress(
    input: &Path,
    output: &Path,
    dims: Option<&[usize]>,
    layout: Layout,
    human: bool,
) -> Result<()> {
    let stream = CompressedStream::from_bytes(&fs::read(input)?)?;
    let m = u32::from(stream.header.m);
    check_word_width(m)
        .map_err(|e| Error::BadFormat(format!("container cannot become a tensor file: {e}")))?;
    let words = decompress_any(&stream)?;
    let dims = match dims {
        Some(&[n, c, h, w]) => [n, c, h, w],
        Some(other) => {
            return Err(Error::InvalidParams(format!(
                "--dims takes N,C,H,W, got {} values",
                other.len()
            )))
        }
        None => [1, 1, 1, words.len()],
    };
    if dims.iter().product::<usize>() != words.len() {
        return Err(Error::InvalidParams(format!(
            "--dims {dims:?} hold {} words, stream has {}",
            dims.iter().product::<usize>(),
            words.len()
        )));
    }
    let t = TensorRecord::new(dims, layout, m, words)?;
    tensor::store_tensor(&t, output)?;
    StreamSummary::of(&stream).print(human)
}

#[derive(Serialize)]
struct SparsityRow {
    network: String,
    layer: String,
    elements: usize,
    zeros: usize,
    sparsity: f64,
}

#[derive(Serialize)]
struct BurstRow {
    network: String,
    layout: Layout,
    kind: &'static str,
    length: u64,
    count: u64,
    cdf: f64,
}

#[derive(Serialize)]
struct HistRow {
    network: String,
    layer: String,
    m: u32,
    bin: usize,
    lower: f64,
    upper: f64,
    count: u64,
    zero_count: u64,
}

fn cmd_analyze(args: &AnalyzeArgs, human: bool) -> Result<()> {
    args.codec.check()?;
    if args.jobs == 0 {
        return Err(Error::InvalidParams("--jobs must be at least 1".into()));
    }
    for &n in &args.block_sizes {
        args.codec
            .params(16)
            .and_then(|p| EbpcParams { n, ..p }.validate())?;
    }
    for &k in &args.burst_logs {
        EbpcParams::new(16, args.codec.block_size, k)?;
    }
    let format: ReportFormat = args.format.into();
    let opts = AnalysisOptions {
        layout: args.layout.map_or(Layout::Nchw, Layout::from),
        jobs: args.jobs,
    };
    let manifest = CorpusManifest::load(&args.manifest)?;
    let corpus = manifest.load_all()?;
    let widths: Vec<u32> = match args.codec.wordwidth {
        Some(m) => vec![m],
        None => vec![8, 16, 32],
    };

    let mut buf = Vec::new();
    match args.which {
        Which::Sparsity => {
            let rows = corpus
                .iter()
                .map(|t| {
                    Ok(SparsityRow {
                        network: t.meta.network.clone(),
                        layer: t.meta.layer.clone(),
                        elements: t.len(),
                        zeros: t.data.iter().filter(|&&v| v == 0).count(),
                        sparsity: analysis::sparsity(t)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            analysis::write_records(&rows, &mut buf, format)?;
        }
        Which::Bursts => {
            let layouts = match args.layout {
                Some(l) => vec![l.into()],
                None => ALL_LAYOUTS.to_vec(),
            };
            analysis::write_records(&burst_rows(&corpus, &layouts), &mut buf, format)?;
        }
        Which::Hist => {
            let mut rows = Vec::new();
            for t in &corpus {
                let h = analysis::value_histogram(t, args.bins)?;
                rows.extend(h.bins.iter().enumerate().map(|(bin, &count)| HistRow {
                    network: t.meta.network.clone(),
                    layer: t.meta.layer.clone(),
                    m: t.m,
                    bin,
                    lower: bin as f64 * h.bin_width,
                    upper: (bin + 1) as f64 * h.bin_width,
                    count,
                    zero_count: h.zero_count,
                }));
            }
            analysis::write_records(&rows, &mut buf, format)?;
        }
        Which::SweepN => {
            let mut rows = Vec::new();
            for &m in &widths {
                let report = analysis::sweep_block_size(
                    &corpus,
                    m,
                    args.codec.max_burst_log,
                    &args.block_sizes,
                    opts,
                )?;
                rows.extend(report.rows.iter().cloned());
                for &n in &args.block_sizes {
                    rows.extend(aggregate_row(&report.rows, |r| r.n == Some(n)));
                }
            }
            analysis::write_ratio_rows(&rows, &mut buf, format)?;
        }
        Which::SweepK => {
            let table = analysis::sweep_max_burst(&corpus, &widths, &args.burst_logs, opts)?;
            analysis::write_max_burst_table(&table, &mut buf, format)?;
        }
        Which::Total => {
            let methods: Vec<Method> = match args.method {
                Some(m) => vec![m.into()],
                None => Method::ALL.to_vec(),
            };
            let params = args.codec.params(16)?;
            let report = analysis::total_compression(&corpus, &methods, &widths, params, opts)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            match format {
                ReportFormat::Json => serde_json::to_writer_pretty(&mut buf, &report)?,
                ReportFormat::Csv => {
                    analysis::write_records(&report.per_network, &mut buf, format)?
                }
            }
        }
    }
    if human {
        buf = align_columns(&buf, format);
    }
    match &args.out {
        Some(path) => fs::write(path, &buf)?,
        None => io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}

/// Burst-length distributions pooled per network and layout.
fn burst_rows(corpus: &[TensorRecord], layouts: &[Layout]) -> Vec<BurstRow> {
    let mut networks: Vec<&str> = Vec::new();
    for t in corpus {
        if !networks.contains(&t.meta.network.as_str()) {
            networks.push(&t.meta.network);
        }
    }
    let mut rows = Vec::new();
    for net in networks {
        for &layout in layouts {
            let mut counts = BurstCounts::default();
            for t in corpus.iter().filter(|t| t.meta.network == net) {
                counts.merge(&BurstCounts::scan(&permute_layout(t, layout).data));
            }
            let cdf = counts.cdf();
            for (kind, map, cdf) in [
                ("zero", &counts.zero, &cdf.zero),
                ("nonzero", &counts.nonzero, &cdf.nonzero),
            ] {
                rows.extend(map.iter().map(|(&length, &count)| BurstRow {
                    network: net.to_string(),
                    layout,
                    kind,
                    length,
                    count,
                    cdf: cdf.at(length),
                }));
            }
        }
    }
    rows
}

/// Whole-corpus row over `rows` matching `keep`, labelled layer "all".
fn aggregate_row(rows: &[RatioRow], keep: impl Fn(&RatioRow) -> bool) -> Option<RatioRow> {
    let matching: Vec<&RatioRow> = rows.iter().filter(|r| keep(r)).collect();
    let first = *matching.first()?;
    let uncompressed_bits: u64 = matching.iter().map(|r| r.uncompressed_bits).sum();
    let compressed_bits: u64 = matching.iter().map(|r| r.compressed_bits).sum();
    Some(RatioRow {
        network: "all".into(),
        layer: "all".into(),
        uncompressed_bits,
        compressed_bits,
        ratio: uncompressed_bits as f64 / compressed_bits as f64,
        ..first.clone()
    })
}

/// Render CSV output as a space-padded table; JSON passes through.
fn align_columns(csv_bytes: &[u8], format: ReportFormat) -> Vec<u8> {
    if format == ReportFormat::Json {
        return csv_bytes.to_vec();
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(csv_bytes);
    let rows: Vec<Vec<String>> = reader
        .records()
        .filter_map(|r| r.ok())
        .map(|r| r.iter().map(str::to_string).collect())
        .collect();
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(String::len)
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out.into_bytes()
}
