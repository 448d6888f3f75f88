//! Plain-text MDP format.
//!
//! ```text
//! # polymix-mdp v1
//! states 2
//! actions 2
//! r_max 1
//! layout dense            # or: sparse
//! smoothing 0             # sparse layout only
//! transitions
//! 0 0 1 0                 # dense: s a T(0|s,a) T(1|s,a) ...
//! 0 1 0 1                 # sparse: s a s'=p s'=p ...
//! 1 0 0 1
//! 1 1 1 0
//! rewards
//! 0 0 0                   # s R(s,0) R(s,1) ...
//! 1 1 1
//! end
//! ```
//!
//! Rows appear in row-major `(s, a)` order. Numbers are written with Rust's
//! shortest round-trip formatting, so write → read is lossless and output is
//! byte-identical for identical MDPs.

use std::fmt::Write as _;
use std::path::Path;

use super::TabularMdp;
use crate::{Error, Result};

const MAGIC: &str = "# polymix-mdp v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MdpLayout {
    /// Every effective probability, `|S|` numbers per row.
    #[default]
    Dense,
    /// Base support plus the smoothing weight.
    Sparse,
}

pub fn write_mdp(mdp: &TabularMdp, layout: MdpLayout) -> String {
    let n = mdp.n_states();
    let m = mdp.n_actions();
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "states {n}");
    let _ = writeln!(out, "actions {m}");
    let _ = writeln!(out, "r_max {}", mdp.r_max());
    match layout {
        MdpLayout::Dense => {
            let _ = writeln!(out, "layout dense");
        }
        MdpLayout::Sparse => {
            let _ = writeln!(out, "layout sparse");
            let _ = writeln!(out, "smoothing {}", mdp.smoothing());
        }
    }
    out.push_str("transitions\n");
    for s in 0..n {
        for a in 0..m {
            let _ = write!(out, "{s} {a}");
            match layout {
                MdpLayout::Dense => {
                    for p in mdp.dense_row(s, a) {
                        let _ = write!(out, " {p}");
                    }
                }
                MdpLayout::Sparse => {
                    for &(j, p) in mdp.base_row(s, a) {
                        let _ = write!(out, " {j}={p}");
                    }
                }
            }
            out.push('\n');
        }
    }
    out.push_str("rewards\n");
    for s in 0..n {
        let _ = write!(out, "{s}");
        for a in 0..m {
            let _ = write!(out, " {}", mdp.reward(s, a));
        }
        out.push('\n');
    }
    out.push_str("end\n");
    out
}

pub fn write_mdp_file(mdp: &TabularMdp, layout: MdpLayout, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_mdp(mdp, layout))?;
    Ok(())
}

pub fn read_mdp_file(path: impl AsRef<Path>) -> Result<TabularMdp> {
    read_mdp(&std::fs::read_to_string(path)?)
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn num<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("cannot parse `{tok}`")))
}

enum Section {
    Header,
    Transitions,
    Rewards,
    Done,
}

pub fn read_mdp(text: &str) -> Result<TabularMdp> {
    let mut n: Option<usize> = None;
    let mut m: Option<usize> = None;
    let mut r_max: Option<f64> = None;
    let mut layout = MdpLayout::Dense;
    let mut smoothing = 0.0;
    let mut rows: Vec<Option<Vec<(usize, f64)>>> = Vec::new();
    let mut rewards: Vec<Option<Vec<f64>>> = Vec::new();
    let mut section = Section::Header;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match section {
            Section::Header => match toks[0] {
                "states" if toks.len() == 2 => n = Some(num(toks[1], line_no)?),
                "actions" if toks.len() == 2 => m = Some(num(toks[1], line_no)?),
                "r_max" if toks.len() == 2 => r_max = Some(num(toks[1], line_no)?),
                "smoothing" if toks.len() == 2 => smoothing = num(toks[1], line_no)?,
                "layout" if toks.len() == 2 => {
                    layout = match toks[1] {
                        "dense" => MdpLayout::Dense,
                        "sparse" => MdpLayout::Sparse,
                        other => return Err(parse_err(line_no, format!("unknown layout `{other}`"))),
                    }
                }
                "transitions" => {
                    let (nn, mm) = match (n, m) {
                        (Some(a), Some(b)) => (a, b),
                        _ => return Err(parse_err(line_no, "shape header must precede transitions")),
                    };
                    rows = vec![None; nn * mm];
                    rewards = vec![None; nn];
                    section = Section::Transitions;
                }
                other => return Err(parse_err(line_no, format!("unexpected header line `{other}`"))),
            },
            Section::Transitions | Section::Rewards if toks[0] == "rewards" => {
                section = Section::Rewards;
            }
            Section::Transitions => {
                let (nn, mm) = (n.unwrap_or(0), m.unwrap_or(0));
                if toks.len() < 2 {
                    return Err(parse_err(line_no, "transition row needs `s a ...`"));
                }
                let s: usize = num(toks[0], line_no)?;
                let a: usize = num(toks[1], line_no)?;
                if s >= nn || a >= mm {
                    return Err(parse_err(line_no, format!("row ({s}, {a}) out of range")));
                }
                let row = match layout {
                    MdpLayout::Dense => {
                        if toks.len() != nn + 2 {
                            return Err(parse_err(
                                line_no,
                                format!("expected {nn} probabilities, found {}", toks.len() - 2),
                            ));
                        }
                        toks[2..]
                            .iter()
                            .enumerate()
                            .map(|(j, t)| Ok((j, num::<f64>(t, line_no)?)))
                            .collect::<Result<Vec<_>>>()?
                            .into_iter()
                            .filter(|&(_, p)| p != 0.0)
                            .collect()
                    }
                    MdpLayout::Sparse => toks[2..]
                        .iter()
                        .map(|t| {
                            let (j, p) = t
                                .split_once('=')
                                .ok_or_else(|| parse_err(line_no, format!("expected s'=p, got `{t}`")))?;
                            Ok((num::<usize>(j, line_no)?, num::<f64>(p, line_no)?))
                        })
                        .collect::<Result<Vec<_>>>()?,
                };
                let slot = &mut rows[s * mm + a];
                if slot.is_some() {
                    return Err(parse_err(line_no, format!("duplicate row ({s}, {a})")));
                }
                *slot = Some(row);
            }
            Section::Rewards => {
                if toks[0] == "end" {
                    section = Section::Done;
                    continue;
                }
                let (nn, mm) = (n.unwrap_or(0), m.unwrap_or(0));
                let s: usize = num(toks[0], line_no)?;
                if s >= nn || toks.len() != mm + 1 {
                    return Err(parse_err(line_no, "reward row must be `s r_0 ... r_{m-1}`"));
                }
                let vals = toks[1..]
                    .iter()
                    .map(|t| num::<f64>(t, line_no))
                    .collect::<Result<Vec<_>>>()?;
                rewards[s] = Some(vals);
            }
            Section::Done => return Err(parse_err(line_no, "content after `end`")),
        }
    }
    if !matches!(section, Section::Done) {
        return Err(parse_err(text.lines().count(), "missing `end`"));
    }
    let (nn, mm) = (n.unwrap_or(0), m.unwrap_or(0));
    let rows = rows
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.ok_or_else(|| parse_err(0, format!("missing row ({}, {})", i / mm, i % mm))))
        .collect::<Result<Vec<_>>>()?;
    let flat: Vec<f64> = rewards
        .into_iter()
        .enumerate()
        .map(|(s, r)| r.ok_or_else(|| parse_err(0, format!("missing rewards for state {s}"))))
        .collect::<Result<Vec<_>>>()?
        .concat();
    let r_max = r_max.unwrap_or_else(|| flat.iter().copied().fold(0.0, f64::max));
    let mdp = TabularMdp::new(nn, mm, rows, flat, r_max)?;
    if smoothing > 0.0 {
        super::smooth_ergodic(&mdp, smoothing)
    } else {
        Ok(mdp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::smooth_ergodic;

    fn sample() -> TabularMdp {
        TabularMdp::from_dense(
            &[
                vec![vec![0.25, 0.75], vec![1.0, 0.0]],
                vec![vec![0.5, 0.5], vec![0.0, 1.0]],
            ],
            &[vec![0.0, 0.5], vec![1.0, 0.125]],
            Some(1.0),
        )
        .unwrap()
    }

    #[test]
    fn dense_round_trip() {
        let mdp = sample();
        let text = write_mdp(&mdp, MdpLayout::Dense);
        assert!(text.starts_with(MAGIC));
        assert_eq!(read_mdp(&text).unwrap(), mdp);
    }

    #[test]
    fn sparse_round_trip_keeps_smoothing() {
        let mdp = smooth_ergodic(&sample(), 1e-3).unwrap();
        let back = read_mdp(&write_mdp(&mdp, MdpLayout::Sparse)).unwrap();
        assert_eq!(back, mdp);
    }

    #[test]
    fn reports_line_of_bad_token() {
        let text = "states 1\nactions 1\ntransitions\n0 0 x\nrewards\n0 0\nend\n";
        match read_mdp(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_rows_are_errors() {
        let text = "states 2\nactions 1\ntransitions\n0 0 1 0\nrewards\n0 0\n1 0\nend\n";
        assert!(read_mdp(text).is_err());
    }
}
