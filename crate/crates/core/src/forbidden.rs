//! Forbidden-substructure search: induced-subposet containment, the
//! non-gluing-parallel corpus, the minimal-obstruction semi-algorithm,
//! and a direct gluing-parallel decision procedure for single iposets.

use std::collections::HashMap;
use std::io::{self, BufReader};
use std::path::Path;

use rayon::prelude::*;

use crate::enumerate::{all_posets, GenMode, GpMemo};
use crate::iposet::{bits, mask_all, Iposet};
use crate::iso::{self, diff_up_to_iso, isomorphic};

/// A list of posets pairwise incomparable under the induced-subposet
/// relation, none of them gluing-parallel.
#[derive(Clone, Debug, Default)]
pub struct ForbiddenSet {
    members: Vec<Iposet>,
}

impl ForbiddenSet {
    pub fn members(&self) -> &[Iposet] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// True iff some injection of the pattern's points into the host both
/// preserves and reflects the order (an induced subposet embedding).
pub fn contains_induced(host: &Iposet, pattern: &Iposet) -> bool {
    let hn = host.n();
    let pn = pattern.n();
    if pn > hn {
        return false;
    }
    if pn == 0 {
        return true;
    }
    // Cheap rejection: sorted degree sequences must dominate.
    let degs = |ip: &Iposet, down: bool| -> Vec<u32> {
        let mut d: Vec<u32> = (0..ip.n())
            .map(|i| {
                if down {
                    ip.down_mask(i).count_ones()
                } else {
                    ip.up_mask(i).count_ones()
                }
            })
            .collect();
        d.sort_unstable_by(|a, b| b.cmp(a));
        d
    };
    for down in [false, true] {
        let hd = degs(host, down);
        let pd = degs(pattern, down);
        if pd.iter().zip(&hd).any(|(p, h)| p > h) {
            return false;
        }
    }

    // Most constrained pattern point first.
    let mut order: Vec<usize> = (0..pn).collect();
    order.sort_by_key(|&x| {
        std::cmp::Reverse(pattern.up_mask(x).count_ones() + pattern.down_mask(x).count_ones())
    });
    let mut image = vec![0usize; pn];
    embed(host, pattern, &order, 0, 0, &mut image)
}

fn embed(
    host: &Iposet,
    pattern: &Iposet,
    order: &[usize],
    idx: usize,
    used: u64,
    image: &mut Vec<usize>,
) -> bool {
    if idx == order.len() {
        return true;
    }
    let x = order[idx];
    'cand: for v in 0..host.n() {
        if used & (1 << v) != 0 {
            continue;
        }
        if pattern.up_mask(x).count_ones() > host.up_mask(v).count_ones()
            || pattern.down_mask(x).count_ones() > host.down_mask(v).count_ones()
        {
            continue;
        }
        for j in 0..idx {
            let (u, w) = (order[j], image[order[j]]);
            if pattern.less(x, u) != host.less(v, w) || pattern.less(u, x) != host.less(w, v) {
                continue 'cand;
            }
        }
        image[x] = v;
        if embed(host, pattern, order, idx + 1, used | (1 << v), image) {
            return true;
        }
    }
    false
}

/// The isomorphism classes of posets on `n` points that are not
/// gluing-parallel: `diff_up_to_iso(all_posets(n), G_n(0,0))`.
pub fn posets_not_gp(n: usize, memo: &GpMemo) -> Vec<Iposet> {
    assert_eq!(memo.mode(), GenMode::Gp);
    let gp = memo.cell(n, 0, 0);
    diff_up_to_iso(&all_posets(n), &gp)
}

/// The minimal-obstruction semi-algorithm: for `n = 6..=max_n`, keep the
/// non-gp posets containing no previously found member, and append the
/// survivors. The result is pairwise incomparable under induced
/// containment.
pub fn minimal_forbidden(max_n: usize, memo: &GpMemo) -> ForbiddenSet {
    let mut members: Vec<Iposet> = Vec::new();
    for n in 6..=max_n {
        let candidates = posets_not_gp(n, memo);
        let mut new: Vec<Iposet> = candidates
            .into_par_iter()
            .filter(|p| !members.iter().any(|s| contains_induced(p, s)))
            .collect();
        members.append(&mut new);
    }
    ForbiddenSet { members }
}

/// The eleven known forbidden substructures, shipped as fixtures
/// (transcribed cover-edge lists; five 6-point, one 8-point, five
/// 10-point posets).
pub fn known_forbidden() -> Vec<Iposet> {
    let text = include_str!("../fixtures/forbidden_known.txt");
    iso::read_classes(BufReader::new(text.as_bytes()))
        .expect("embedded fixture file is well-formed")
}

/// Streaming filter over class files: drops every candidate isomorphic to
/// some class in some file, returning the survivors. This is the
/// single-node version of the staged subtraction used to isolate large
/// obstructions from precomputed gluing/parallel corpora.
pub fn filter_not_gp_stream<P: AsRef<Path>>(
    mut candidates: Vec<Iposet>,
    class_files: &[P],
) -> io::Result<Vec<Iposet>> {
    for path in class_files {
        let file = std::fs::File::open(path.as_ref())?;
        let classes = iso::read_classes(BufReader::new(file)).map_err(io::Error::other)?;
        candidates = diff_up_to_iso(&candidates, &classes);
        if candidates.is_empty() {
            break;
        }
    }
    Ok(candidates)
}

/// Decides whether a single iposet is gluing-parallel, without generating
/// its whole class family.
///
/// An iposet on more than one point is gp iff it splits as a nontrivial
/// parallel composition of gp parts (a component bipartition whose
/// interface positions split as prefixes) or as a nontrivial gluing of gp
/// parts. Gluings correspond exactly to cuts (A, M, B): an antichain M
/// with all predecessors in A and successors in B, A x B completely
/// ordered, A and B non-empty, the cut interface taken in some common
/// order on both sides. Subproblems are memoized up to isomorphism.
pub fn is_gp(ip: &Iposet) -> bool {
    let mut memo = DecisionMemo::default();
    gp_rec(ip, &mut memo)
}

/// Verdicts bucketed by (points, sources, targets, edges).
type VerdictBucket = Vec<(Iposet, bool)>;

#[derive(Default)]
struct DecisionMemo {
    verdicts: HashMap<(usize, usize, usize, usize), VerdictBucket>,
}

impl DecisionMemo {
    fn get(&self, ip: &Iposet) -> Option<bool> {
        let bucket = self
            .verdicts
            .get(&(ip.n(), ip.src(), ip.tgt(), ip.edge_count()))?;
        bucket
            .iter()
            .find(|(stored, _)| isomorphic(stored, ip))
            .map(|&(_, v)| v)
    }

    fn insert(&mut self, ip: &Iposet, verdict: bool) {
        self.verdicts
            .entry((ip.n(), ip.src(), ip.tgt(), ip.edge_count()))
            .or_default()
            .push((ip.clone(), verdict));
    }
}

fn gp_rec(ip: &Iposet, memo: &mut DecisionMemo) -> bool {
    if ip.n() <= 1 {
        return true;
    }
    if let Some(v) = memo.get(ip) {
        return v;
    }
    let verdict = parallel_split(ip, memo) || glue_split(ip, memo);
    memo.insert(ip, verdict);
    verdict
}

/// Component masks of the comparability graph.
fn components(ip: &Iposet) -> Vec<u64> {
    let n = ip.n();
    let mut seen = 0u64;
    let mut out = Vec::new();
    for start in 0..n {
        if seen & (1 << start) != 0 {
            continue;
        }
        let mut comp = 1u64 << start;
        loop {
            let mut grown = comp;
            for i in bits(comp) {
                grown |= ip.up_mask(i) | ip.down_mask(i);
            }
            if grown == comp {
                break;
            }
            comp = grown;
        }
        seen |= comp;
        out.push(comp);
    }
    out
}

/// Positions of the sequence falling inside the mask, required to form a
/// prefix for the split to be a parallel decomposition.
fn seq_splits_as_prefix(seq: &[u8], mask: u64) -> bool {
    let inside = seq.iter().filter(|&&x| mask & (1 << x) != 0).count();
    seq[..inside].iter().all(|&x| mask & (1 << x) != 0)
}

fn restrict_seq(seq: &[u8], mask: u64) -> Vec<u8> {
    seq.iter()
        .copied()
        .filter(|&x| mask & (1 << x) != 0)
        .collect()
}

fn parallel_split(ip: &Iposet, memo: &mut DecisionMemo) -> bool {
    let comps = components(ip);
    if comps.len() < 2 {
        return false;
    }
    // Bipartitions of the components, the first component pinned left.
    let rest = &comps[1..];
    for pick in 0..(1u64 << rest.len()) {
        let mut left = comps[0];
        for (i, c) in rest.iter().enumerate() {
            if pick & (1 << i) != 0 {
                left |= c;
            }
        }
        let right = mask_all(ip.n()) & !left;
        if right == 0 {
            continue;
        }
        for first in [left, right] {
            let second = if first == left { right } else { left };
            if !seq_splits_as_prefix(ip.sources(), first)
                || !seq_splits_as_prefix(ip.targets(), first)
            {
                continue;
            }
            let a = ip.induced(
                first,
                &restrict_seq(ip.sources(), first),
                &restrict_seq(ip.targets(), first),
            );
            let b = ip.induced(
                second,
                &restrict_seq(ip.sources(), second),
                &restrict_seq(ip.targets(), second),
            );
            if gp_rec(&a, memo) && gp_rec(&b, memo) {
                return true;
            }
        }
    }
    false
}

fn glue_split(ip: &Iposet, memo: &mut DecisionMemo) -> bool {
    let n = ip.n();
    let all = mask_all(n);
    let comparable: Vec<u64> = (0..n).map(|i| ip.up_mask(i) | ip.down_mask(i)).collect();
    let downs: Vec<u64> = (0..n).map(|i| ip.down_mask(i)).collect();

    let mut antichain_stack = vec![(0usize, 0u64)];
    let mut cuts: Vec<u64> = Vec::new();
    while let Some((i, cur)) = antichain_stack.pop() {
        if i == n {
            cuts.push(cur);
            continue;
        }
        antichain_stack.push((i + 1, cur));
        if comparable[i] & cur == 0 {
            antichain_stack.push((i + 1, cur | 1 << i));
        }
    }

    for m_mask in cuts {
        let mut a0 = 0u64;
        let mut b0 = 0u64;
        for m in bits(m_mask) {
            a0 |= downs[m];
            b0 |= ip.up_mask(m);
        }
        debug_assert_eq!(a0 & b0, 0);
        let rest = all & !m_mask & !a0 & !b0;
        let rest_bits: Vec<usize> = bits(rest).collect();
        // Assign the unconstrained points to either side.
        for pick in 0..(1u64 << rest_bits.len()) {
            let mut a = a0;
            for (i, &x) in rest_bits.iter().enumerate() {
                if pick & (1 << i) != 0 {
                    a |= 1 << x;
                }
            }
            let b = all & !m_mask & !a;
            if a == 0 || b == 0 {
                continue;
            }
            // A x B must be completely ordered.
            if bits(a).any(|x| ip.up_mask(x) & b != b) {
                continue;
            }
            debug_assert_eq!(ip.source_mask() & b, 0);
            debug_assert_eq!(ip.target_mask() & a, 0);
            let mid: Vec<u8> = bits(m_mask).map(|x| x as u8).collect();
            if try_cut_orders(ip, a | m_mask, m_mask | b, &mid, memo) {
                return true;
            }
        }
    }
    false
}

/// Tries every ordering of the cut interface, shared by both sides.
fn try_cut_orders(
    ip: &Iposet,
    left_mask: u64,
    right_mask: u64,
    mid: &[u8],
    memo: &mut DecisionMemo,
) -> bool {
    let mut perm = mid.to_vec();
    permute(&mut perm, 0, &mut |order: &[u8]| {
        let left = ip.induced(left_mask, ip.sources(), order);
        let right = ip.induced(right_mask, order, ip.targets());
        gp_rec(&left, memo) && gp_rec(&right, memo)
    })
}

fn permute(items: &mut [u8], k: usize, visit: &mut impl FnMut(&[u8]) -> bool) -> bool {
    if k == items.len() {
        return visit(items);
    }
    for i in k..items.len() {
        items.swap(k, i);
        if permute(items, k + 1, visit) {
            return true;
        }
        items.swap(k, i);
    }
    false
}
