//! CSV formats: frozen masks, flip plans, E1 and LLR profiles, FER tables.
//!
//! Metadata travels in leading `#` comment lines of the form `# key=value`.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::campaign::{ErrorProfile, FerPoint, LlrProfile};
use crate::cost::CostBreakdown;
use crate::error::{Error, Result};
use crate::flip::{FlipPlan, PlanMode};

/// `# key=value` lines written ahead of a CSV table.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Header(BTreeMap<String, String>);

impl Header {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.0.insert(key.to_string(), value.to_string());
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn write<W: Write + ?Sized>(&self, out: &mut W) -> Result<()> {
        for (k, v) in &self.0 {
            writeln!(out, "# {k}={v}")?;
        }
        Ok(())
    }
}

/// Splits an input into its `#` header and the remaining CSV text.
fn split_header<R: Read>(input: R) -> Result<(Header, String)> {
    let mut header = Header::new();
    let mut body = String::new();
    for line in BufReader::new(input).lines() {
        let line = line?;
        if let Some(meta) = line.trim_start().strip_prefix('#') {
            if let Some((k, v)) = meta.split_once('=') {
                header.0.insert(k.trim().to_string(), v.trim().to_string());
            }
        } else if !line.trim().is_empty() {
            body.push_str(&line);
            body.push('\n');
        }
    }
    Ok((header, body))
}

fn reader(body: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.as_bytes())
}

#[derive(Serialize, Deserialize)]
struct MaskRow {
    index: usize,
    frozen: u8,
}

pub fn write_mask<W: Write>(out: W, header: &Header, mask: &[bool]) -> Result<()> {
    let mut out = out;
    header.write(&mut out)?;
    let mut w = csv::Writer::from_writer(out);
    for (index, &f) in mask.iter().enumerate() {
        w.serialize(MaskRow { index, frozen: u8::from(f) })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an `index,frozen` mask; rows must cover 0..N exactly once.
pub fn read_mask<R: Read>(input: R) -> Result<Vec<bool>> {
    let (_, body) = split_header(input)?;
    let mut rows: Vec<MaskRow> = reader(&body).deserialize().collect::<std::result::Result<_, _>>()?;
    rows.sort_by_key(|r| r.index);
    let mut mask = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        if r.index != i {
            return Err(Error::Parse(format!("mask rows skip or repeat index {i}")));
        }
        match r.frozen {
            0 => mask.push(false),
            1 => mask.push(true),
            v => return Err(Error::Parse(format!("mask index {i}: frozen must be 0 or 1, got {v}"))),
        }
    }
    if mask.is_empty() || !mask.len().is_power_of_two() {
        return Err(Error::Parse(format!("mask length {} is not a power of two", mask.len())));
    }
    Ok(mask)
}

#[derive(Serialize, Deserialize)]
struct PlanRow {
    rank: usize,
    leaf_index: usize,
    weight: Option<f64>,
}

pub fn write_plan<W: Write>(out: W, header: &Header, plan: &FlipPlan) -> Result<()> {
    let mut out = out;
    header.clone().with("mode", plan.mode()).write(&mut out)?;
    let mut w = csv::Writer::from_writer(out);
    for (rank, &leaf_index) in plan.ordered_indices().iter().enumerate() {
        let weight = plan.weights().map(|ws| ws[rank]);
        w.serialize(PlanRow { rank, leaf_index, weight })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `rank,leaf_index,weight` plan. A plan is fixed-mode when every
/// weight is empty and candidate-set otherwise; a `# mode=` header, when
/// present, must agree.
pub fn read_plan<R: Read>(input: R) -> Result<FlipPlan> {
    let (header, body) = split_header(input)?;
    let mut rows: Vec<PlanRow> = reader(&body).deserialize().collect::<std::result::Result<_, _>>()?;
    rows.sort_by_key(|r| r.rank);
    let indices: Vec<usize> = rows.iter().map(|r| r.leaf_index).collect();
    let weighted = rows.iter().filter(|r| r.weight.is_some()).count();
    let mode = if weighted == 0 { PlanMode::Fixed } else { PlanMode::CandidateSet };
    if let Some(m) = header.get("mode") {
        if m != mode.to_string() {
            return Err(Error::Parse(format!("plan header says mode={m} but rows imply {mode}")));
        }
    }
    match mode {
        PlanMode::Fixed => FlipPlan::fixed(indices),
        PlanMode::CandidateSet => {
            if weighted != rows.len() {
                return Err(Error::Parse("candidate-set plan has rows without a weight".into()));
            }
            FlipPlan::candidate_set(indices, rows.iter().map(|r| r.weight.unwrap()).collect())
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ProfileRow {
    rank: usize,
    leaf_index: usize,
    e1_count: u64,
    e1_prob_normalized: f64,
}

pub fn write_profile<W: Write>(out: W, header: &Header, profile: &ErrorProfile) -> Result<()> {
    let mut out = out;
    header
        .clone()
        .with("code", profile.code_id())
        .with("ebn0_db", profile.ebn0_db())
        .with("frames", profile.frames_simulated())
        .with("multi_error_frames", profile.multi_error_frames())
        .with("zero_error_frames", profile.zero_error_frames())
        .write(&mut out)?;
    let mut w = csv::Writer::from_writer(out);
    let probs = profile.normalized();
    for (rank, (&leaf_index, &e1_count)) in profile.leaf_indices().iter().zip(profile.e1_counts()).enumerate() {
        w.serialize(ProfileRow { rank, leaf_index, e1_count, e1_prob_normalized: probs[rank] })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_profile<R: Read>(input: R) -> Result<ErrorProfile> {
    let (header, body) = split_header(input)?;
    let mut rows: Vec<ProfileRow> = reader(&body).deserialize().collect::<std::result::Result<_, _>>()?;
    rows.sort_by_key(|r| r.rank);
    if rows.iter().enumerate().any(|(i, r)| r.rank != i) {
        return Err(Error::Parse("profile ranks must run 0..K+C without gaps".into()));
    }
    let num = |key: &str| -> Result<u64> {
        header.get(key).map_or(Ok(0), |v| v.parse().map_err(|e| Error::Parse(format!("header {key}: {e}"))))
    };
    let ebn0_db = header
        .get("ebn0_db")
        .map_or(Ok(f64::NAN), |v| v.parse().map_err(|e| Error::Parse(format!("header ebn0_db: {e}"))))?;
    let counts: Vec<u64> = rows.iter().map(|r| r.e1_count).collect();
    let frames = match num("frames")? {
        0 => counts.iter().sum(),
        f => f,
    };
    Ok(ErrorProfile::from_counts(
        header.get("code").unwrap_or("unknown").to_string(),
        ebn0_db,
        frames,
        counts,
        rows.iter().map(|r| r.leaf_index).collect(),
        num("multi_error_frames")?,
        num("zero_error_frames")?,
    ))
}

#[derive(Serialize)]
struct LlrRow {
    rank: usize,
    leaf_index: usize,
    mean_abs_llr: f64,
    normalized: f64,
}

pub fn write_llr_profile<W: Write>(out: W, header: &Header, profile: &LlrProfile) -> Result<()> {
    let mut out = out;
    header.clone().with("ebn0_db", profile.ebn0_db).with("frames", profile.frames).write(&mut out)?;
    let mut w = csv::Writer::from_writer(out);
    let norm = profile.normalized();
    for (rank, (&leaf_index, &mean_abs_llr)) in profile.leaf_indices.iter().zip(&profile.mean_abs_llr).enumerate() {
        w.serialize(LlrRow { rank, leaf_index, mean_abs_llr, normalized: norm[rank] })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct FerRow {
    ebn0_db: f64,
    decoder: String,
    frames: u64,
    frame_errors: u64,
    fer: f64,
    avg_iterations: f64,
    avg_attempts: f64,
    undetected: u64,
    tmax_exhausted: u64,
}

/// Writes the header line and metadata; rows follow via [`FerWriter::row`].
pub struct FerWriter<W: Write> {
    w: csv::Writer<W>,
}

impl<W: Write> FerWriter<W> {
    pub fn new(mut out: W, header: &Header) -> Result<Self> {
        header.write(&mut out)?;
        Ok(Self { w: csv::Writer::from_writer(out) })
    }

    pub fn row(&mut self, p: &FerPoint) -> Result<()> {
        self.w.serialize(FerRow {
            ebn0_db: p.ebn0_db,
            decoder: p.decoder.clone(),
            frames: p.frames,
            frame_errors: p.frame_errors,
            fer: p.fer,
            avg_iterations: p.avg_iterations,
            avg_attempts: p.avg_attempts,
            undetected: p.undetected_error_frames,
            tmax_exhausted: p.tmax_exhausted_frames,
        })?;
        self.w.flush()?;
        Ok(())
    }
}

pub fn read_fer<R: Read>(input: R) -> Result<Vec<FerPoint>> {
    let (_, body) = split_header(input)?;
    reader(&body)
        .deserialize::<FerRow>()
        .map(|r| {
            let r = r?;
            Ok(FerPoint {
                ebn0_db: r.ebn0_db,
                decoder: r.decoder,
                frames: r.frames,
                frame_errors: r.frame_errors,
                fer: r.fer,
                avg_iterations: r.avg_iterations,
                avg_attempts: r.avg_attempts,
                undetected_error_frames: r.undetected,
                tmax_exhausted_frames: r.tmax_exhausted,
            })
        })
        .collect()
}

pub fn write_cost<W: Write>(out: W, header: &Header, b: &CostBreakdown) -> Result<()> {
    let mut out = out;
    header.write(&mut out)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["block", "scflip", "scflip_fis"])?;
    let fmt = |v: f64| format!("{v}");
    for (name, v, in_fis) in [("F", b.f, true), ("G", b.g, true), ("C", b.c, true), ("Sorter", b.sorter, false)] {
        w.write_record([name.to_string(), fmt(v), if in_fis { fmt(v) } else { "0".into() }])?;
    }
    w.write_record(["total".to_string(), fmt(b.scflip_total), fmt(b.fis_total)])?;
    w.write_record(["sorter_fraction".to_string(), format!("{:.6}", b.sorter_fraction), "0".into()])?;
    w.flush()?;
    Ok(())
}

/// Reals separated by commas, whitespace or newlines; `#` lines ignored.
pub fn read_llrs<R: Read>(input: R) -> Result<Vec<f64>> {
    let (_, body) = split_header(input)?;
    body.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("LLR {t:?}: {e}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_round_trip() {
        let mask = vec![true, true, false, true, false, false, false, false];
        let mut buf = Vec::new();
        write_mask(&mut buf, &Header::new().with("seed", 1), &mask).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# seed=1\nindex,frozen\n0,1\n"));
        assert_eq!(read_mask(buf.as_slice()).unwrap(), mask);
    }

    #[test]
    fn mask_errors() {
        assert!(read_mask("index,frozen\n0,1\n2,0\n".as_bytes()).is_err());
        assert!(read_mask("index,frozen\n0,1\n1,3\n".as_bytes()).is_err());
        assert!(read_mask("index,frozen\n0,1\n1,0\n2,0\n".as_bytes()).is_err());
    }

    #[test]
    fn plan_round_trip() {
        let fixed = FlipPlan::fixed(vec![9, 3, 7]).unwrap();
        let mut buf = Vec::new();
        write_plan(&mut buf, &Header::new(), &fixed).unwrap();
        assert!(String::from_utf8_lossy(&buf).contains("rank,leaf_index,weight\n0,9,\n"));
        assert_eq!(read_plan(buf.as_slice()).unwrap(), fixed);

        let cand = FlipPlan::candidate_set(vec![4, 8], vec![0.75, 0.25]).unwrap();
        let mut buf = Vec::new();
        write_plan(&mut buf, &Header::new(), &cand).unwrap();
        assert_eq!(read_plan(buf.as_slice()).unwrap(), cand);
    }

    #[test]
    fn plan_rejects_partial_weights() {
        assert!(read_plan("rank,leaf_index,weight\n0,4,0.5\n1,5,\n".as_bytes()).is_err());
        assert!(read_plan("# mode=fixed\nrank,leaf_index,weight\n0,4,0.5\n".as_bytes()).is_err());
    }

    #[test]
    fn llr_list_parsing() {
        assert_eq!(read_llrs("# x=1\n1.5, -2\n3e-1\n".as_bytes()).unwrap(), vec![1.5, -2.0, 0.3]);
        assert!(read_llrs("1.5, abc".as_bytes()).is_err());
    }
}
