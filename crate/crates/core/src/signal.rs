//! Scan and time-series data model shared by the whole pipeline.
//!
//! A [`Scan`] is one complete multistatic measurement of one breast during
//! one visit: one [`TimeSeries`] per ordered antenna pair. Scans are stored
//! on disk as NDJSON, one scan per line.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Number of antennas in the radar array.
pub const N_ANTENNAS: u8 = 16;

#[derive(Debug, thiserror::Error)]
pub enum SignalError {
    #[error("time series must have at least 2 samples, got {0}")]
    TooShort(usize),
    #[error("time series contains a non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("sample interval must be positive, got {0}")]
    BadDt(f64),
    #[error("window [{start}, {end}] out of range for signal of length {len}")]
    WindowOutOfRange { start: usize, end: usize, len: usize },
    #[error("invalid window: start {start} must satisfy 1 <= start <= end = {end}")]
    BadWindow { start: usize, end: usize },
    #[error("invalid antenna pair: {0}")]
    BadPair(String),
    #[error("invalid scan: {0}")]
    InvalidScan(String),
    #[error("empty scan list")]
    EmptyScanList,
    #[error("scans do not share a common antenna-pair set")]
    PairSetMismatch,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// One antenna-pair recording: fixed-rate real samples in volts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    samples: Vec<f64>,
    dt: f64,
}

impl TimeSeries {
    pub fn new(samples: Vec<f64>, dt: f64) -> Result<Self, SignalError> {
        if samples.len() < 2 {
            return Err(SignalError::TooShort(samples.len()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(SignalError::NonFinite(i));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(SignalError::BadDt(dt));
        }
        Ok(Self { samples, dt })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Ordered (transmitter, receiver) antenna combination.
///
/// Antenna indices are 1-based; with 16 antennas there are exactly
/// 16*15 = 240 ordered pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AntennaPairId {
    pub tx: u8,
    pub rx: u8,
}

impl AntennaPairId {
    pub fn new(tx: u8, rx: u8) -> Result<Self, SignalError> {
        if tx == 0 || tx > N_ANTENNAS || rx == 0 || rx > N_ANTENNAS {
            return Err(SignalError::BadPair(format!(
                "antenna indices must be in [1, {N_ANTENNAS}], got {tx}-{rx}"
            )));
        }
        if tx == rx {
            return Err(SignalError::BadPair(format!(
                "transmitter and receiver must differ, got {tx}-{rx}"
            )));
        }
        Ok(Self { tx, rx })
    }

    /// All ordered pairs among the first `n_antennas` antennas.
    pub fn all(n_antennas: u8) -> Vec<AntennaPairId> {
        let n = n_antennas.min(N_ANTENNAS);
        let mut pairs = Vec::new();
        for tx in 1..=n {
            for rx in 1..=n {
                if tx != rx {
                    pairs.push(AntennaPairId { tx, rx });
                }
            }
        }
        pairs
    }
}

impl fmt::Display for AntennaPairId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.tx, self.rx)
    }
}

impl FromStr for AntennaPairId {
    type Err = SignalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (tx, rx) = s
            .split_once('-')
            .ok_or_else(|| SignalError::BadPair(format!("expected \"tx-rx\", got {s:?}")))?;
        let tx: u8 = tx
            .parse()
            .map_err(|_| SignalError::BadPair(format!("bad transmitter index in {s:?}")))?;
        let rx: u8 = rx
            .parse()
            .map_err(|_| SignalError::BadPair(format!("bad receiver index in {s:?}")))?;
        AntennaPairId::new(tx, rx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn code(self) -> &'static str {
        match self {
            Side::Left => "L",
            Side::Right => "R",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Label {
    Healthy,
    Tumour,
}

impl Label {
    pub fn code(self) -> &'static str {
        match self {
            Label::Healthy => "H",
            Label::Tumour => "T",
        }
    }

    /// Signed class label: tumour is the positive class.
    pub fn sign(self) -> i8 {
        match self {
            Label::Healthy => -1,
            Label::Tumour => 1,
        }
    }
}

/// One complete multistatic measurement of one breast during one visit.
#[derive(Debug, Clone, PartialEq)]
pub struct Scan {
    pub volunteer: u32,
    pub visit: u32,
    pub side: Side,
    pub label: Label,
    pub tumour_pos: Option<[f64; 3]>,
    pub signals: BTreeMap<AntennaPairId, TimeSeries>,
}

impl Scan {
    pub fn new(
        volunteer: u32,
        visit: u32,
        side: Side,
        label: Label,
        tumour_pos: Option<[f64; 3]>,
        signals: BTreeMap<AntennaPairId, TimeSeries>,
    ) -> Result<Self, SignalError> {
        if signals.is_empty() {
            return Err(SignalError::InvalidScan("scan has no signals".into()));
        }
        let first = signals.values().next().unwrap();
        let (len, dt) = (first.len(), first.dt());
        for (pair, ts) in &signals {
            if ts.len() != len || ts.dt() != dt {
                return Err(SignalError::InvalidScan(format!(
                    "signal {pair} has length {} dt {}, expected length {len} dt {dt}",
                    ts.len(),
                    ts.dt()
                )));
            }
        }
        match (label, tumour_pos) {
            (Label::Tumour, None) => {
                return Err(SignalError::InvalidScan(
                    "tumour-labelled scan without tumour position".into(),
                ))
            }
            (Label::Healthy, Some(_)) => {
                return Err(SignalError::InvalidScan(
                    "healthy scan carries a tumour position".into(),
                ))
            }
            _ => {}
        }
        Ok(Self { volunteer, visit, side, label, tumour_pos, signals })
    }

    pub fn signal_len(&self) -> usize {
        self.signals.values().next().map_or(0, TimeSeries::len)
    }

    pub fn dt(&self) -> f64 {
        self.signals.values().next().map_or(0.0, TimeSeries::dt)
    }

    pub fn pairs(&self) -> BTreeSet<AntennaPairId> {
        self.signals.keys().copied().collect()
    }
}

/// 1-based inclusive sample window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub start: usize,
    pub end: usize,
}

impl WindowSpec {
    pub fn new(start: usize, end: usize) -> Result<Self, SignalError> {
        if start == 0 || start > end {
            return Err(SignalError::BadWindow { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Truncates `x` to the samples `w.start..=w.end` (1-based inclusive).
pub fn window(x: &TimeSeries, w: WindowSpec) -> Result<TimeSeries, SignalError> {
    if w.end > x.len() {
        return Err(SignalError::WindowOutOfRange { start: w.start, end: w.end, len: x.len() });
    }
    let samples = x.samples[w.start - 1..w.end].to_vec();
    TimeSeries::new(samples, x.dt)
}

/// Windowed slice of a raw sample buffer, for callers that have already
/// validated the window against the buffer length.
pub fn window_slice(samples: &[f64], w: WindowSpec) -> &[f64] {
    &samples[w.start - 1..w.end]
}

/// Peak amplitude of a signal inside a window: max of |sample|.
pub fn peak_amplitude(x: &TimeSeries, w: WindowSpec) -> Result<f64, SignalError> {
    let windowed = window_slice_checked(x, w)?;
    Ok(windowed.iter().fold(0.0f64, |m, s| m.max(s.abs())))
}

fn window_slice_checked(x: &TimeSeries, w: WindowSpec) -> Result<&[f64], SignalError> {
    if w.end > x.len() {
        return Err(SignalError::WindowOutOfRange { start: w.start, end: w.end, len: x.len() });
    }
    Ok(&x.samples[w.start - 1..w.end])
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Retains antenna pairs whose median peak amplitude over the training scans
/// (within `w`) reaches `threshold_volts`.
///
/// Every scan must contain the same antenna-pair set.
pub fn filter_pairs(
    training_scans: &[Scan],
    w: WindowSpec,
    threshold_volts: f64,
) -> Result<BTreeSet<AntennaPairId>, SignalError> {
    if training_scans.is_empty() {
        return Err(SignalError::EmptyScanList);
    }
    let pairs = training_scans[0].pairs();
    for scan in &training_scans[1..] {
        if scan.pairs() != pairs {
            return Err(SignalError::PairSetMismatch);
        }
    }
    let mut retained = BTreeSet::new();
    for pair in pairs {
        let mut peaks = training_scans
            .iter()
            .map(|s| peak_amplitude(&s.signals[&pair], w))
            .collect::<Result<Vec<_>, _>>()?;
        if median(&mut peaks) >= threshold_volts {
            retained.insert(pair);
        }
    }
    Ok(retained)
}

/// NDJSON wire format for one scan.
#[derive(Debug, Serialize, Deserialize)]
struct ScanRecord {
    volunteer: u32,
    visit: u32,
    side: String,
    label: String,
    tumour_pos: Option<[f64; 3]>,
    dt: f64,
    signals: BTreeMap<String, Vec<f64>>,
}

impl ScanRecord {
    fn from_scan(scan: &Scan) -> Self {
        ScanRecord {
            volunteer: scan.volunteer,
            visit: scan.visit,
            side: scan.side.code().to_string(),
            label: scan.label.code().to_string(),
            tumour_pos: scan.tumour_pos,
            dt: scan.dt(),
            signals: scan
                .signals
                .iter()
                .map(|(pair, ts)| (pair.to_string(), ts.samples().to_vec()))
                .collect(),
        }
    }

    fn into_scan(self) -> Result<Scan, SignalError> {
        let side = match self.side.as_str() {
            "L" => Side::Left,
            "R" => Side::Right,
            other => {
                return Err(SignalError::InvalidScan(format!(
                    "side must be \"L\" or \"R\", got {other:?}"
                )))
            }
        };
        let label = match self.label.as_str() {
            "H" => Label::Healthy,
            "T" => Label::Tumour,
            other => {
                return Err(SignalError::InvalidScan(format!(
                    "label must be \"H\" or \"T\", got {other:?}"
                )))
            }
        };
        let mut signals = BTreeMap::new();
        for (key, samples) in self.signals {
            let pair: AntennaPairId = key.parse()?;
            signals.insert(pair, TimeSeries::new(samples, self.dt)?);
        }
        Scan::new(self.volunteer, self.visit, side, label, self.tumour_pos, signals)
    }
}

/// Reads scans from an NDJSON file, one scan per line.
pub fn read_scans(path: impl AsRef<Path>) -> Result<Vec<Scan>, SignalError> {
    let file = fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut scans = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        scans.push(parse_scan_line(&line, idx + 1)?);
    }
    Ok(scans)
}

/// Parses one NDJSON scan record; `line_no` is 1-based and used in errors.
pub fn parse_scan_line(line: &str, line_no: usize) -> Result<Scan, SignalError> {
    let record: ScanRecord = serde_json::from_str(line)
        .map_err(|e| SignalError::Parse { line: line_no, msg: e.to_string() })?;
    record
        .into_scan()
        .map_err(|e| SignalError::Parse { line: line_no, msg: e.to_string() })
}

/// Writes scans as NDJSON via a temp file + atomic rename.
pub fn write_scans(scans: &[Scan], path: impl AsRef<Path>) -> Result<(), SignalError> {
    let path = path.as_ref();
    let tmp = path.with_extension("tmp");
    {
        let mut file = fs::File::create(&tmp)?;
        for scan in scans {
            let record = ScanRecord::from_scan(scan);
            let json = serde_json::to_string(&record)
                .map_err(|e| SignalError::InvalidScan(e.to_string()))?;
            writeln!(file, "{json}")?;
        }
        file.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
