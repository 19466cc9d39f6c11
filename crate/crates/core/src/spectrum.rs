//! Spectrum allocation registry: records of (service, band, region, status)
//! with union-measure, overlap and candidate-band queries. Frequencies are
//! integer Hz; bands are half-open `[low, high)`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

pub const MIN_FREQUENCY_HZ: u64 = 1_000_000_000;
pub const MAX_FREQUENCY_HZ: u64 = 100_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Service {
    Ms,
    Fs,
    Fss,
    Rls,
    Sr,
    Eess,
    MetSat,
    Ra,
    Is,
    Other(String),
}

impl FromStr for Service {
    type Err = Error;
    fn from_str(s: &str) -> Result<Service> {
        Ok(match s {
            "MS" => Service::Ms,
            "FS" => Service::Fs,
            "FSS" => Service::Fss,
            "RLS" => Service::Rls,
            "SR" => Service::Sr,
            "EESS" => Service::Eess,
            "MetSat" => Service::MetSat,
            "RA" => Service::Ra,
            "IS" => Service::Is,
            _ => match s.strip_prefix("other:") {
                Some(name) if !name.trim().is_empty() => Service::Other(name.trim().to_string()),
                _ => return Err(Error::Validation(format!("unknown service {s:?}"))),
            },
        })
    }
}

impl fmt::Display for Service {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Service::Ms => f.write_str("MS"),
            Service::Fs => f.write_str("FS"),
            Service::Fss => f.write_str("FSS"),
            Service::Rls => f.write_str("RLS"),
            Service::Sr => f.write_str("SR"),
            Service::Eess => f.write_str("EESS"),
            Service::MetSat => f.write_str("MetSat"),
            Service::Ra => f.write_str("RA"),
            Service::Is => f.write_str("IS"),
            Service::Other(n) => write!(f, "other:{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Region {
    ItuR2,
    Fcc,
    Ntia,
}

impl FromStr for Region {
    type Err = Error;
    fn from_str(s: &str) -> Result<Region> {
        match s {
            "ITU-R2" => Ok(Region::ItuR2),
            "FCC" => Ok(Region::Fcc),
            "NTIA" => Ok(Region::Ntia),
            _ => Err(Error::Validation(format!("unknown region {s:?}"))),
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::ItuR2 => "ITU-R2",
            Region::Fcc => "FCC",
            Region::Ntia => "NTIA",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Primary,
    Secondary,
}

impl FromStr for Status {
    type Err = Error;
    fn from_str(s: &str) -> Result<Status> {
        match s {
            "primary" => Ok(Status::Primary),
            "secondary" => Ok(Status::Secondary),
            _ => Err(Error::Validation(format!("unknown status {s:?}"))),
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Primary => "primary",
            Status::Secondary => "secondary",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Proposer {
    Fcc,
    Atis,
    ThreeGpp,
    Wrc23,
    Paper,
}

impl FromStr for Proposer {
    type Err = Error;
    fn from_str(s: &str) -> Result<Proposer> {
        match s {
            "FCC" => Ok(Proposer::Fcc),
            "ATIS" => Ok(Proposer::Atis),
            "3GPP" => Ok(Proposer::ThreeGpp),
            "WRC23" => Ok(Proposer::Wrc23),
            "paper" => Ok(Proposer::Paper),
            _ => Err(Error::Validation(format!("unknown proposer {s:?}"))),
        }
    }
}

impl fmt::Display for Proposer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Proposer::Fcc => "FCC",
            Proposer::Atis => "ATIS",
            Proposer::ThreeGpp => "3GPP",
            Proposer::Wrc23 => "WRC23",
            Proposer::Paper => "paper",
        })
    }
}

/// Half-open band in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Band {
    pub low_hz: u64,
    pub high_hz: u64,
}

impl Band {
    pub fn new(low_hz: u64, high_hz: u64) -> Result<Band> {
        if low_hz >= high_hz {
            return Err(Error::Validation(format!(
                "band low {low_hz} Hz must be below high {high_hz} Hz"
            )));
        }
        Ok(Band { low_hz, high_hz })
    }

    pub fn width_hz(&self) -> u64 {
        self.high_hz - self.low_hz
    }

    pub fn intersects(&self, other: &Band) -> bool {
        self.low_hz < other.high_hz && other.low_hz < self.high_hz
    }

    fn checked(self) -> Result<Band> {
        if self.low_hz < MIN_FREQUENCY_HZ || self.high_hz > MAX_FREQUENCY_HZ {
            return Err(Error::Validation(format!(
                "band {self} lies outside the 1-100 GHz sanity range"
            )));
        }
        Ok(self)
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{} GHz", ghz(self.low_hz), ghz(self.high_hz))
    }
}

/// Hz as a GHz string without trailing zeros.
pub fn ghz(hz: u64) -> String {
    let whole = hz / 1_000_000_000;
    let frac = hz % 1_000_000_000;
    if frac == 0 {
        return whole.to_string();
    }
    let s = format!("{whole}.{frac:09}");
    s.trim_end_matches('0').to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AllocationRecord {
    pub service: Service,
    pub band: Band,
    pub region: Region,
    pub status: Status,
    pub notes: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CandidateBand {
    pub band: Band,
    pub proposer: Proposer,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordSpec {
    pub service: String,
    pub low_mhz: f64,
    pub high_mhz: f64,
    pub region: String,
    pub status: String,
    #[serde(default)]
    pub notes: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateSpec {
    pub low_mhz: f64,
    pub high_mhz: f64,
    pub proposer: String,
    #[serde(default)]
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationFile {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    #[serde(default)]
    pub records: Vec<RecordSpec>,
    #[serde(default)]
    pub candidates: Vec<CandidateSpec>,
}

fn mhz_to_hz(mhz: f64) -> Result<u64> {
    let hz = mhz * 1e6;
    if !hz.is_finite() || hz < 0.0 || (hz - hz.round()).abs() > 1e-3 {
        return Err(Error::Validation(format!(
            "{mhz} MHz is not a whole number of Hz"
        )));
    }
    Ok(hz.round() as u64)
}

fn hz_to_mhz(hz: u64) -> f64 {
    hz as f64 / 1e6
}

/// Immutable after construction; records are kept sorted by band.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AllocationRegistry {
    records: Vec<AllocationRecord>,
    /// `reach[i]` = max `high_hz` over `records[..=i]`, for interval pruning.
    reach: Vec<u64>,
    candidates: Vec<CandidateBand>,
}

impl AllocationRegistry {
    pub fn new(
        records: Vec<AllocationRecord>,
        candidates: Vec<CandidateBand>,
    ) -> Result<AllocationRegistry> {
        let mut records = records;
        for r in &records {
            r.band.checked()?;
        }
        for c in &candidates {
            c.band.checked()?;
        }
        records.sort_by(|a, b| {
            (a.band, &a.service, a.region, a.status, &a.notes)
                .cmp(&(b.band, &b.service, b.region, b.status, &b.notes))
        });
        for w in records.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Validation(format!(
                    "duplicate record {} {}",
                    w[0].service, w[0].band
                )));
            }
        }
        let mut reach = Vec::with_capacity(records.len());
        let mut m = 0;
        for r in &records {
            m = m.max(r.band.high_hz);
            reach.push(m);
        }
        Ok(AllocationRegistry {
            records,
            reach,
            candidates,
        })
    }

    pub fn from_file(file: &AllocationFile) -> Result<AllocationRegistry> {
        let records = file
            .records
            .iter()
            .map(|r| {
                Ok(AllocationRecord {
                    service: r.service.parse()?,
                    band: Band::new(mhz_to_hz(r.low_mhz)?, mhz_to_hz(r.high_mhz)?)?,
                    region: r.region.parse()?,
                    status: r.status.parse()?,
                    notes: r.notes.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let candidates = file
            .candidates
            .iter()
            .map(|c| {
                Ok(CandidateBand {
                    band: Band::new(mhz_to_hz(c.low_mhz)?, mhz_to_hz(c.high_mhz)?)?,
                    proposer: c.proposer.parse()?,
                    rationale: c.rationale.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        AllocationRegistry::new(records, candidates)
    }

    pub fn to_file(&self) -> AllocationFile {
        AllocationFile {
            description: String::new(),
            records: self
                .records
                .iter()
                .map(|r| RecordSpec {
                    service: r.service.to_string(),
                    low_mhz: hz_to_mhz(r.band.low_hz),
                    high_mhz: hz_to_mhz(r.band.high_hz),
                    region: r.region.to_string(),
                    status: r.status.to_string(),
                    notes: r.notes.clone(),
                })
                .collect(),
            candidates: self
                .candidates
                .iter()
                .map(|c| CandidateSpec {
                    low_mhz: hz_to_mhz(c.band.low_hz),
                    high_mhz: hz_to_mhz(c.band.high_hz),
                    proposer: c.proposer.to_string(),
                    rationale: c.rationale.clone(),
                })
                .collect(),
        }
    }

    /// An empty or whitespace-only document is an empty registry.
    pub fn parse_str(text: &str, context: &str) -> Result<AllocationRegistry> {
        if text.trim().is_empty() {
            return Ok(AllocationRegistry::default());
        }
        let file: AllocationFile =
            serde_json::from_str(text).map_err(|e| Error::parse(context, e))?;
        AllocationRegistry::from_file(&file)
    }

    pub fn records(&self) -> &[AllocationRecord] {
        &self.records
    }

    pub fn candidates(&self) -> &[CandidateBand] {
        &self.candidates
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty() && self.candidates.is_empty()
    }

    fn matching(&self, service: &Service, region: Region, status: Status) -> Vec<Band> {
        self.records
            .iter()
            .filter(|r| &r.service == service && r.region == region && r.status == status)
            .map(|r| r.band)
            .collect()
    }

    /// Measure of the union of all matching bands, in Hz.
    pub fn total_allocated_hz(&self, service: &Service, region: Region, status: Status) -> u64 {
        union(self.matching(service, region, status))
            .iter()
            .map(Band::width_hz)
            .sum()
    }

    /// Number of disjoint bands in the union of matching records.
    pub fn band_count(&self, service: &Service, region: Region, status: Status) -> usize {
        union(self.matching(service, region, status)).len()
    }

    /// Share of `a`'s allocated bandwidth that is also allocated to `b`;
    /// `None` when `a` has nothing allocated.
    pub fn overlap_fraction(
        &self,
        a: &Service,
        b: &Service,
        region: Region,
        status: Status,
    ) -> Option<f64> {
        let ua = union(self.matching(a, region, status));
        let total: u64 = ua.iter().map(Band::width_hz).sum();
        if total == 0 {
            return None;
        }
        let ub = union(self.matching(b, region, status));
        let shared: u64 = intersect(&ua, &ub).iter().map(Band::width_hz).sum();
        Some(shared as f64 / total as f64)
    }

    /// Records whose band intersects `query`, in band order.
    pub fn records_at(&self, query: Band) -> Vec<&AllocationRecord> {
        // records[i] with low < query.high; skip the prefix that ends before query.low
        let end = self
            .records
            .partition_point(|r| r.band.low_hz < query.high_hz);
        let start = self.reach[..end].partition_point(|&h| h <= query.low_hz);
        self.records[start..end]
            .iter()
            .filter(|r| r.band.intersects(&query))
            .collect()
    }

    pub fn services_at(&self, query: Band) -> BTreeSet<(Service, Region, Status)> {
        self.records_at(query)
            .into_iter()
            .map(|r| (r.service.clone(), r.region, r.status))
            .collect()
    }

    /// Bands proposed by every proposer in the set.
    pub fn candidate_intersection(&self, proposers: &BTreeSet<Proposer>) -> Result<Vec<Band>> {
        let mut it = proposers.iter();
        let Some(first) = it.next() else {
            return Err(Error::Domain("at least one proposer is required".into()));
        };
        let of = |p: &Proposer| {
            union(
                self.candidates
                    .iter()
                    .filter(|c| c.proposer == *p)
                    .map(|c| c.band)
                    .collect(),
            )
        };
        let mut acc = of(first);
        for p in it {
            acc = intersect(&acc, &of(p));
        }
        Ok(acc)
    }
}

pub fn load_allocations(path: &Path) -> Result<AllocationRegistry> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    AllocationRegistry::parse_str(&text, &path.display().to_string())
}

/// Sorted, merged union; touching bands merge.
pub fn union(mut bands: Vec<Band>) -> Vec<Band> {
    bands.sort();
    let mut out: Vec<Band> = Vec::with_capacity(bands.len());
    for b in bands {
        match out.last_mut() {
            Some(last) if b.low_hz <= last.high_hz => last.high_hz = last.high_hz.max(b.high_hz),
            _ => out.push(b),
        }
    }
    out
}

/// Intersection of two sorted disjoint band lists.
pub fn intersect(a: &[Band], b: &[Band]) -> Vec<Band> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        let lo = a[i].low_hz.max(b[j].low_hz);
        let hi = a[i].high_hz.min(b[j].high_hz);
        if lo < hi {
            out.push(Band {
                low_hz: lo,
                high_hz: hi,
            });
        }
        if a[i].high_hz < b[j].high_hz {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Frequency such as `12.2GHz`, `7125MHz`, `3.5e9` (Hz) or `10.5 GHz`.
pub fn parse_frequency(s: &str) -> Result<u64> {
    let t = s.trim();
    let lower = t.to_ascii_lowercase();
    let (num, scale) = if let Some(n) = lower.strip_suffix("ghz") {
        (n, 1e9)
    } else if let Some(n) = lower.strip_suffix("mhz") {
        (n, 1e6)
    } else if let Some(n) = lower.strip_suffix("khz") {
        (n, 1e3)
    } else if let Some(n) = lower.strip_suffix("hz") {
        (n, 1.0)
    } else {
        (lower.as_str(), 1.0)
    };
    let v: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse frequency {s:?}")))?;
    let hz = v * scale;
    if !hz.is_finite() || hz <= 0.0 {
        return Err(Error::Config(format!("frequency {s:?} must be positive")));
    }
    Ok(hz.round() as u64)
}

/// `LOW:HIGH`, each accepted by [`parse_frequency`].
pub fn parse_band(s: &str) -> Result<Band> {
    let (a, b) = s.split_once(':').ok_or_else(|| {
        Error::Config(format!(
            "band {s:?} must look like LOW:HIGH, e.g. 12.2GHz:13.25GHz"
        ))
    })?;
    Band::new(parse_frequency(a)?, parse_frequency(b)?)
        .map_err(|_| Error::Config(format!("band {s:?} has low >= high")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const GHZ: u64 = 1_000_000_000;
    const MHZ: u64 = 1_000_000;

    fn rec(service: Service, lo: u64, hi: u64) -> AllocationRecord {
        AllocationRecord {
            service,
            band: Band::new(lo, hi).unwrap(),
            region: Region::ItuR2,
            status: Status::Primary,
            notes: String::new(),
        }
    }

    #[test]
    fn overlap_fraction_of_two_services() {
        let reg = AllocationRegistry::new(
            vec![
                rec(Service::Fs, 10 * GHZ, 12 * GHZ),
                rec(Service::Fss, 11 * GHZ, 14 * GHZ),
                rec(Service::Fss, 11 * GHZ, 11 * GHZ + 500 * MHZ),
            ],
            vec![],
        )
        .unwrap();
        let (r, p) = (Region::ItuR2, Status::Primary);
        assert_eq!(
            reg.overlap_fraction(&Service::Fs, &Service::Fss, r, p),
            Some(0.5)
        );
        assert_eq!(
            reg.overlap_fraction(&Service::Fss, &Service::Fs, r, p),
            Some(1.0 / 3.0)
        );
        assert_eq!(reg.overlap_fraction(&Service::Ms, &Service::Fs, r, p), None);
        assert_eq!(
            reg.overlap_fraction(&Service::Fs, &Service::Ms, r, p),
            Some(0.0)
        );
    }

    fn cand(p: Proposer, lo: u64, hi: u64) -> CandidateBand {
        CandidateBand {
            band: Band::new(lo, hi).unwrap(),
            proposer: p,
            rationale: String::new(),
        }
    }

    #[test]
    fn empty_document() {
        let r = AllocationRegistry::parse_str("", "t").unwrap();
        assert!(r.is_empty());
        assert_eq!(
            r.total_allocated_hz(&Service::Ms, Region::ItuR2, Status::Primary),
            0
        );
        assert!(r
            .services_at(Band::new(7 * GHZ, 8 * GHZ).unwrap())
            .is_empty());
        assert!(r
            .candidate_intersection(&[Proposer::Paper].into_iter().collect())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn union_semantics() {
        let r = AllocationRegistry::new(
            vec![
                rec(Service::Fs, 10 * GHZ, 10 * GHZ + 100 * MHZ),
                rec(Service::Fs, 11 * GHZ, 11 * GHZ + 100 * MHZ),
            ],
            vec![],
        )
        .unwrap();
        assert_eq!(
            r.total_allocated_hz(&Service::Fs, Region::ItuR2, Status::Primary),
            200 * MHZ
        );
        let mut same = rec(Service::Fs, 10 * GHZ, 11 * GHZ);
        let mut other = same.clone();
        other.notes = "second source".into();
        same.notes = "first".into();
        let r = AllocationRegistry::new(vec![same, other], vec![]).unwrap();
        assert_eq!(
            r.total_allocated_hz(&Service::Fs, Region::ItuR2, Status::Primary),
            GHZ
        );
        assert_eq!(
            r.band_count(&Service::Fs, Region::ItuR2, Status::Primary),
            1
        );
    }

    #[test]
    fn validation() {
        assert!(Band::new(5, 5).is_err());
        let dup = rec(Service::Ms, 8 * GHZ, 9 * GHZ);
        assert!(AllocationRegistry::new(vec![dup.clone(), dup], vec![]).is_err());
        assert!(
            AllocationRegistry::new(vec![rec(Service::Ms, 500 * MHZ, 2 * GHZ)], vec![]).is_err()
        );
        let bad = r#"{"records":[{"service":"XYZ","low_mhz":8000,"high_mhz":9000,"region":"ITU-R2","status":"primary"}]}"#;
        assert!(matches!(
            AllocationRegistry::parse_str(bad, "t"),
            Err(Error::Validation(_))
        ));
        let inverted = r#"{"records":[{"service":"FS","low_mhz":9000,"high_mhz":8000,"region":"ITU-R2","status":"primary"}]}"#;
        assert!(matches!(
            AllocationRegistry::parse_str(inverted, "t"),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            AllocationRegistry::parse_str("{", "t"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn services_at_queries() {
        let r = AllocationRegistry::new(
            vec![
                rec(Service::Fs, 7 * GHZ, 8 * GHZ),
                rec(Service::Eess, 8 * GHZ, 9 * GHZ),
            ],
            vec![],
        )
        .unwrap();
        assert!(r
            .services_at(Band::new(20 * GHZ, 21 * GHZ).unwrap())
            .is_empty());
        let exact = r.services_at(Band::new(7 * GHZ, 8 * GHZ).unwrap());
        assert_eq!(exact.len(), 1);
        assert!(exact.contains(&(Service::Fs, Region::ItuR2, Status::Primary)));
        assert_eq!(
            r.services_at(Band::new(7 * GHZ + 1, 8 * GHZ + 1).unwrap())
                .len(),
            2
        );
    }

    #[test]
    fn candidate_intersections() {
        let r = AllocationRegistry::new(
            vec![],
            vec![
                cand(Proposer::Fcc, 7 * GHZ, 8 * GHZ),
                cand(Proposer::Fcc, 12 * GHZ, 13 * GHZ),
                cand(Proposer::Atis, 7 * GHZ + 500 * MHZ, 9 * GHZ),
                cand(Proposer::Wrc23, 20 * GHZ, 21 * GHZ),
            ],
        )
        .unwrap();
        let one: BTreeSet<_> = [Proposer::Fcc].into_iter().collect();
        assert_eq!(
            r.candidate_intersection(&one).unwrap(),
            vec![
                Band::new(7 * GHZ, 8 * GHZ).unwrap(),
                Band::new(12 * GHZ, 13 * GHZ).unwrap()
            ]
        );
        let two: BTreeSet<_> = [Proposer::Fcc, Proposer::Atis].into_iter().collect();
        assert_eq!(
            r.candidate_intersection(&two).unwrap(),
            vec![Band::new(7 * GHZ + 500 * MHZ, 8 * GHZ).unwrap()]
        );
        let disjoint: BTreeSet<_> = [Proposer::Fcc, Proposer::Wrc23].into_iter().collect();
        assert!(r.candidate_intersection(&disjoint).unwrap().is_empty());
        assert!(r.candidate_intersection(&BTreeSet::new()).is_err());
    }

    #[test]
    fn frequency_parsing() {
        assert_eq!(parse_frequency("12.2GHz").unwrap(), 12_200_000_000);
        assert_eq!(parse_frequency("7125 MHz").unwrap(), 7_125_000_000);
        assert_eq!(parse_frequency("3.5e9").unwrap(), 3_500_000_000);
        assert!(parse_frequency("fast").is_err());
        assert_eq!(
            parse_band("12.2GHz:13.25GHz").unwrap(),
            Band::new(12_200_000_000, 13_250_000_000).unwrap()
        );
        assert!(parse_band("12.2GHz-13.25GHz").is_err());
        assert!(parse_band("13GHz:12GHz").is_err());
        assert_eq!(ghz(11_305_000_000), "11.305");
        assert_eq!(ghz(9_000_000_000), "9");
    }

    fn arb_records() -> impl Strategy<Value = Vec<(u8, u64, u64)>> {
        prop::collection::vec((0u8..3, 1000u64..20000, 1u64..3000), 0..25)
    }

    fn build(rs: &[(u8, u64, u64)]) -> AllocationRegistry {
        let svc = [Service::Ms, Service::Fs, Service::Sr];
        let mut v: Vec<AllocationRecord> = rs
            .iter()
            .map(|&(s, lo, w)| {
                rec(
                    svc[s as usize].clone(),
                    (1000 + lo) * MHZ,
                    (1000 + lo + w) * MHZ,
                )
            })
            .collect();
        v.sort();
        v.dedup();
        AllocationRegistry::new(v, vec![]).unwrap()
    }

    proptest! {
        #[test]
        fn union_invariant_to_order_and_splitting(rs in arb_records(), cut in 0.0f64..1.0) {
            let a = build(&rs);
            let mut rev = rs.clone();
            rev.reverse();
            let b = build(&rev);
            let mut split = Vec::new();
            for &(s, lo, w) in &rs {
                let k = ((w as f64 * cut) as u64).clamp(1, w);
                if k < w {
                    split.push((s, lo, k));
                    split.push((s, lo + k, w - k));
                } else {
                    split.push((s, lo, w));
                }
            }
            let c = build(&split);
            for s in [Service::Ms, Service::Fs, Service::Sr] {
                let t = a.total_allocated_hz(&s, Region::ItuR2, Status::Primary);
                prop_assert_eq!(t, b.total_allocated_hz(&s, Region::ItuR2, Status::Primary));
                prop_assert_eq!(t, c.total_allocated_hz(&s, Region::ItuR2, Status::Primary));
            }
        }

        #[test]
        fn services_at_matches_linear_scan(rs in arb_records(), lo in 1000u64..22000, w in 1u64..4000) {
            let r = build(&rs);
            let q = Band::new((1000 + lo) * MHZ, (1000 + lo + w) * MHZ).unwrap();
            let fast: Vec<_> = r.records_at(q).into_iter().cloned().collect();
            let slow: Vec<_> = r.records().iter().filter(|x| x.band.intersects(&q)).cloned().collect();
            prop_assert_eq!(fast, slow);
        }

        #[test]
        fn services_at_consistent_with_total(rs in arb_records()) {
            let r = build(&rs);
            for s in [Service::Ms, Service::Fs, Service::Sr] {
                for b in union(r.matching(&s, Region::ItuR2, Status::Primary)) {
                    // every point of a union band reports the service
                    for q in [b.low_hz, (b.low_hz + b.high_hz) / 2, b.high_hz - 1] {
                        let at = r.services_at(Band::new(q, q + 1).unwrap());
                        prop_assert!(at.contains(&(s.clone(), Region::ItuR2, Status::Primary)));
                    }
                }
            }
        }

        #[test]
        fn file_round_trip(rs in arb_records()) {
            let r = build(&rs);
            let text = serde_json::to_string(&r.to_file()).unwrap();
            prop_assert_eq!(AllocationRegistry::parse_str(&text, "t").unwrap(), r);
        }
    }
}
