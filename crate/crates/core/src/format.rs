//! Canonical one-line text format, shared by every module and the CLI:
//!
//! ```text
//! <n> <k> <l> | s:<c1,...,ck> | t:<d1,...,dl> | <a1><b1 <a2><b2 ...
//! ```
//!
//! Points are 1..n. The edge list is the transitive *reduction*, written
//! as `a<b` tokens separated by single spaces. The `s:`/`t:` lists are
//! comma-separated with no spaces and omitted entirely (including the bar)
//! when empty, as is the edge segment. Example:
//! `4 1 2 | s:1 | t:3,4 | 1<3 2<4`. Parsing recomputes the closure and
//! validates all invariants.

use crate::iposet::{bits, Error, Iposet};

/// Cover pairs of the closed order (its transitive reduction), 0-based,
/// sorted ascending.
pub fn covers(ip: &Iposet) -> Vec<(u8, u8)> {
    let mut out = Vec::new();
    for a in 0..ip.n() {
        for b in bits(ip.up_mask(a)) {
            if ip.up_mask(a) & ip.down_mask(b) == 0 {
                out.push((a as u8, b as u8));
            }
        }
    }
    out
}

/// Renders an iposet in the canonical line format.
pub fn to_line(ip: &Iposet) -> String {
    let mut line = format!("{} {} {}", ip.n(), ip.src(), ip.tgt());
    let seq = |s: &[u8]| -> String {
        s.iter()
            .map(|&x| (x as usize + 1).to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    if ip.src() > 0 {
        line.push_str(&format!(" | s:{}", seq(ip.sources())));
    }
    if ip.tgt() > 0 {
        line.push_str(&format!(" | t:{}", seq(ip.targets())));
    }
    let edges = covers(ip);
    if !edges.is_empty() {
        line.push_str(" | ");
        let toks: Vec<String> = edges
            .iter()
            .map(|&(a, b)| format!("{}<{}", a + 1, b + 1))
            .collect();
        line.push_str(&toks.join(" "));
    }
    line
}

/// Parses one canonical line back into an iposet, recomputing the closure
/// and validating all invariants.
pub fn parse_line(line: &str) -> Result<Iposet, Error> {
    let line = line.trim();
    let mut segments = line.split(" | ");
    let head = segments
        .next()
        .ok_or_else(|| Error::Format("empty line".into()))?;
    let nums: Vec<&str> = head.split_whitespace().collect();
    if nums.len() != 3 {
        return Err(Error::Format(format!(
            "header must be `<n> <k> <l>`, got `{head}`"
        )));
    }
    let parse_num = |s: &str| -> Result<usize, Error> {
        s.parse()
            .map_err(|_| Error::Format(format!("bad number `{s}`")))
    };
    let n = parse_num(nums[0])?;
    let k = parse_num(nums[1])?;
    let l = parse_num(nums[2])?;

    let mut sources = Vec::new();
    let mut targets = Vec::new();
    let mut relation = Vec::new();
    // Segments must appear in canonical order: s, then t, then edges.
    let mut stage = 0;
    for seg in segments {
        if let Some(rest) = seg.strip_prefix("s:") {
            if stage >= 1 {
                return Err(Error::Format("misplaced or repeated `s:` segment".into()));
            }
            stage = 1;
            sources = parse_seq(rest)?;
        } else if let Some(rest) = seg.strip_prefix("t:") {
            if stage >= 2 {
                return Err(Error::Format("misplaced or repeated `t:` segment".into()));
            }
            stage = 2;
            targets = parse_seq(rest)?;
        } else {
            if stage >= 3 {
                return Err(Error::Format("repeated edge segment".into()));
            }
            stage = 3;
            for tok in seg.split(' ') {
                let (a, b) = tok
                    .split_once('<')
                    .ok_or_else(|| Error::Format(format!("bad edge token `{tok}`")))?;
                relation.push((parse_num(a)?, parse_num(b)?));
            }
        }
    }
    if sources.len() != k || targets.len() != l {
        return Err(Error::Format(format!(
            "interface lengths {}/{} do not match declared {k}/{l}",
            sources.len(),
            targets.len()
        )));
    }
    Iposet::new(n, &relation, &sources, &targets)
}

fn parse_seq(s: &str) -> Result<Vec<usize>, Error> {
    if s.is_empty() {
        return Err(Error::Format("empty interface list".into()));
    }
    s.split(',')
        .map(|tok| {
            tok.parse()
                .map_err(|_| Error::Format(format!("bad label `{tok}`")))
        })
        .collect()
}
