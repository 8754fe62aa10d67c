//! The iposet type and its algebra: construction, gluing and parallel
//! composition, reversal, and the singleton/identity generators.
//!
//! Points are stored 0-based with the strict order kept transitively
//! closed as one bitset row per point, so order queries, degrees and the
//! hash invariant read directly off the matrix. The text format and the
//! `new` constructor speak the 1-based labels used everywhere in the
//! literature.

use thiserror::Error;

/// Hard cap on the number of points, so a row of the order relation
/// always fits in a single `u64`.
pub const MAX_POINTS: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Error {
    /// The transitive closure of the given relation would relate a point
    /// to itself.
    #[error("relation is cyclic: closure forces a point below itself")]
    Cycle,
    /// Sources/targets repeat a label, or a source is non-minimal, a
    /// target non-maximal, or a label is out of range.
    #[error("invalid interface: {0}")]
    Interface(String),
    /// Gluing requires `|targets| = |sources|` across the composition.
    #[error("gluing arity mismatch: left has {left} targets, right has {right} sources")]
    Arity { left: usize, right: usize },
    /// A line of the canonical text format could not be parsed.
    #[error("format error: {0}")]
    Format(String),
    /// An in/out hash does not fit in 64 bits.
    #[error("hash overflow: value exceeds 64 bits")]
    Overflow,
}

/// All bits `0..n` set.
#[inline]
pub(crate) fn mask_all(n: usize) -> u64 {
    debug_assert!(n <= 64);
    if n == 64 {
        !0
    } else {
        (1u64 << n) - 1
    }
}

/// Iterate the set bit positions of a mask, ascending.
#[inline]
pub(crate) fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}

/// A poset with interfaces: a finite strict order plus ordered source and
/// target sequences. A plain poset is the special case of both interfaces
/// empty. Values are immutable after construction; all operations are pure.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Iposet {
    /// `up[i]` bit `j` set iff `i < j`; transitively closed, irreflexive.
    up: Vec<u64>,
    /// Pairwise distinct minimal points, 0-based.
    sources: Vec<u8>,
    /// Pairwise distinct maximal points, 0-based.
    targets: Vec<u8>,
}

impl Iposet {
    /// Builds an iposet from 1-based labels: a relation as ordered pairs,
    /// plus the source and target sequences. The relation is transitively
    /// closed here; all invariants are validated.
    pub fn new(
        n: usize,
        relation: &[(usize, usize)],
        sources: &[usize],
        targets: &[usize],
    ) -> Result<Iposet, Error> {
        if n > MAX_POINTS {
            return Err(Error::Interface(format!(
                "{n} points exceeds the {MAX_POINTS}-point cap"
            )));
        }
        let check = |label: usize| -> Result<usize, Error> {
            if label == 0 || label > n {
                Err(Error::Interface(format!(
                    "label {label} out of range 1..={n}"
                )))
            } else {
                Ok(label - 1)
            }
        };
        let mut up = vec![0u64; n];
        for &(a, b) in relation {
            let (a, b) = (check(a)?, check(b)?);
            if a == b {
                return Err(Error::Cycle);
            }
            up[a] |= 1 << b;
        }
        transitive_close(&mut up);
        for (i, row) in up.iter().enumerate() {
            if row & (1 << i) != 0 {
                return Err(Error::Cycle);
            }
        }
        let sources = validate_interface(&up, sources, n, true)?;
        let targets = validate_interface(&up, targets, n, false)?;
        Ok(Iposet {
            up,
            sources,
            targets,
        })
    }

    /// Internal constructor for compositions; expects 0-based data that
    /// already satisfies all invariants.
    pub(crate) fn from_parts(up: Vec<u64>, sources: Vec<u8>, targets: Vec<u8>) -> Iposet {
        let ip = Iposet {
            up,
            sources,
            targets,
        };
        debug_assert!(ip.check_invariants().is_ok(), "invalid internal iposet");
        ip
    }

    pub(crate) fn check_invariants(&self) -> Result<(), Error> {
        let n = self.n();
        if n > MAX_POINTS {
            return Err(Error::Interface("too many points".into()));
        }
        let mut closed = self.up.clone();
        transitive_close(&mut closed);
        if closed != self.up {
            return Err(Error::Interface("order not transitively closed".into()));
        }
        for (i, row) in self.up.iter().enumerate() {
            if row & !mask_all(n) != 0 {
                return Err(Error::Interface("order bit out of range".into()));
            }
            if row & (1 << i) != 0 {
                return Err(Error::Cycle);
            }
        }
        let src: Vec<usize> = self.sources.iter().map(|&x| x as usize + 1).collect();
        let tgt: Vec<usize> = self.targets.iter().map(|&x| x as usize + 1).collect();
        validate_interface(&self.up, &src, n, true)?;
        validate_interface(&self.up, &tgt, n, false)?;
        Ok(())
    }

    /// The empty iposet, `id_0`.
    pub fn empty() -> Iposet {
        Iposet {
            up: Vec::new(),
            sources: Vec::new(),
            targets: Vec::new(),
        }
    }

    /// A one-point iposet; `src`/`tgt` choose whether the point is in the
    /// source resp. target interface.
    pub fn singleton(src: bool, tgt: bool) -> Iposet {
        Iposet {
            up: vec![0],
            sources: if src { vec![0] } else { vec![] },
            targets: if tgt { vec![0] } else { vec![] },
        }
    }

    /// The identity iposet `id_n`: discrete with both interfaces the
    /// identity sequence.
    pub fn identity(n: usize) -> Iposet {
        assert!(n <= MAX_POINTS);
        let seq: Vec<u8> = (0..n as u8).collect();
        Iposet {
            up: vec![0; n],
            sources: seq.clone(),
            targets: seq,
        }
    }

    /// The discrete poset on `n` points, no interfaces.
    pub fn antichain(n: usize) -> Iposet {
        assert!(n <= MAX_POINTS);
        Iposet {
            up: vec![0; n],
            sources: Vec::new(),
            targets: Vec::new(),
        }
    }

    /// The total order on `n` points, no interfaces.
    pub fn chain(n: usize) -> Iposet {
        assert!(n <= MAX_POINTS);
        let up = (0..n).map(|i| mask_all(n) & !mask_all(i + 1)).collect();
        Iposet {
            up,
            sources: Vec::new(),
            targets: Vec::new(),
        }
    }

    /// The four iposets on the singleton poset, the generators of the
    /// gluing-parallel class: 0→0, 0→1, 1→0, 1→1.
    pub fn generators() -> [Iposet; 4] {
        [
            Iposet::singleton(false, false),
            Iposet::singleton(false, true),
            Iposet::singleton(true, false),
            Iposet::singleton(true, true),
        ]
    }

    /// Number of points.
    #[inline]
    pub fn n(&self) -> usize {
        self.up.len()
    }

    /// Source arity (length of the source sequence).
    #[inline]
    pub fn src(&self) -> usize {
        self.sources.len()
    }

    /// Target arity.
    #[inline]
    pub fn tgt(&self) -> usize {
        self.targets.len()
    }

    /// Source sequence, 0-based point indices.
    #[inline]
    pub fn sources(&self) -> &[u8] {
        &self.sources
    }

    /// Target sequence, 0-based point indices.
    #[inline]
    pub fn targets(&self) -> &[u8] {
        &self.targets
    }

    /// `i < j` in the closed order (0-based).
    #[inline]
    pub fn less(&self, i: usize, j: usize) -> bool {
        self.up[i] & (1 << j) != 0
    }

    /// Bitmask of strict successors of `i`.
    #[inline]
    pub fn up_mask(&self, i: usize) -> u64 {
        self.up[i]
    }

    /// Bitmask of strict predecessors of `i`.
    pub fn down_mask(&self, i: usize) -> u64 {
        let mut m = 0;
        for (j, row) in self.up.iter().enumerate() {
            m |= ((row >> i) & 1) << j;
        }
        m
    }

    /// Number of pairs in the closed order.
    pub fn edge_count(&self) -> usize {
        self.up.iter().map(|r| r.count_ones() as usize).sum()
    }

    /// Bitmask of minimal points.
    pub fn minimal_mask(&self) -> u64 {
        let mut covered = 0;
        for row in &self.up {
            covered |= row;
        }
        mask_all(self.n()) & !covered
    }

    /// Bitmask of maximal points.
    pub fn maximal_mask(&self) -> u64 {
        let mut m = mask_all(self.n());
        for (i, row) in self.up.iter().enumerate() {
            if *row != 0 {
                m &= !(1 << i);
            }
        }
        m
    }

    pub fn source_mask(&self) -> u64 {
        self.sources.iter().fold(0, |m, &x| m | 1 << x)
    }

    pub fn target_mask(&self) -> u64 {
        self.targets.iter().fold(0, |m, &x| m | 1 << x)
    }

    /// Parallel composition: disjoint union with the right operand's
    /// points shifted up and the interface sequences concatenated.
    pub fn parallel(&self, other: &Iposet) -> Iposet {
        let p = self.n();
        let rn = p + other.n();
        assert!(rn <= MAX_POINTS, "parallel composition exceeds point cap");
        let mut up = Vec::with_capacity(rn);
        up.extend_from_slice(&self.up);
        up.extend(other.up.iter().map(|row| row << p));
        let shift = |seq: &[u8], extra: &[u8]| -> Vec<u8> {
            seq.iter()
                .copied()
                .chain(extra.iter().map(|&x| x + p as u8))
                .collect()
        };
        Iposet::from_parts(
            up,
            shift(&self.sources, &other.sources),
            shift(&self.targets, &other.targets),
        )
    }

    /// Gluing composition. The left operand's targets are identified with
    /// the right operand's sources, pointwise in sequence order; every
    /// remaining left point is placed below every remaining right point.
    ///
    /// The carrier keeps the left operand's labels, then appends the right
    /// operand's non-source points in ascending original order, so repeated
    /// runs produce identical representatives.
    pub fn glue(&self, other: &Iposet) -> Result<Iposet, Error> {
        let m = self.targets.len();
        if other.sources.len() != m {
            return Err(Error::Arity {
                left: m,
                right: other.sources.len(),
            });
        }
        let p = self.n();
        let q = other.n();
        let rn = p + q - m;
        assert!(rn <= MAX_POINTS, "gluing composition exceeds point cap");

        // Map the right operand's points into the result.
        let qsrc = other.source_mask();
        let mut qmap = vec![0u8; q];
        for (i, &s) in other.sources.iter().enumerate() {
            qmap[s as usize] = self.targets[i];
        }
        let mut fresh = p as u8;
        for (j, slot) in qmap.iter_mut().enumerate() {
            if qsrc & (1 << j) == 0 {
                *slot = fresh;
                fresh += 1;
            }
        }

        let mut up = vec![0u64; rn];
        up[..p].copy_from_slice(&self.up);
        // Cross order: non-target left points below all fresh right points.
        let cross = mask_all(rn) & !mask_all(p);
        let tmask = self.target_mask();
        for (x, row) in up.iter_mut().enumerate().take(p) {
            if tmask & (1 << x) == 0 {
                *row |= cross;
            }
        }
        // Transport the right operand's order.
        for (j, row) in other.up.iter().enumerate() {
            let jm = qmap[j] as usize;
            for jj in bits(*row) {
                up[jm] |= 1 << qmap[jj];
            }
        }

        let targets = other.targets.iter().map(|&t| qmap[t as usize]).collect();
        Ok(Iposet::from_parts(up, self.sources.clone(), targets))
    }

    /// Order transposed, interfaces swapped. An exact involution:
    /// `p.reverse().reverse() == p`.
    pub fn reverse(&self) -> Iposet {
        let n = self.n();
        let mut up = vec![0u64; n];
        for (i, row) in self.up.iter().enumerate() {
            for j in bits(*row) {
                up[j] |= 1 << i;
            }
        }
        Iposet {
            up,
            sources: self.targets.clone(),
            targets: self.sources.clone(),
        }
    }

    /// Same carrier and order with replaced interface sequences (0-based;
    /// must be valid for this order).
    pub(crate) fn with_interfaces(&self, sources: Vec<u8>, targets: Vec<u8>) -> Iposet {
        Iposet::from_parts(self.up.clone(), sources, targets)
    }

    /// Induced subposet on the points of `mask` (interfaces dropped,
    /// points relabeled ascending).
    pub fn induced_poset(&self, mask: u64) -> Iposet {
        self.induced(mask & mask_all(self.n()), &[], &[])
    }

    /// The underlying poset: same carrier and order, interfaces dropped.
    pub fn as_poset(&self) -> Iposet {
        Iposet {
            up: self.up.clone(),
            sources: Vec::new(),
            targets: Vec::new(),
        }
    }

    /// Induced sub-iposet on the points of `mask` (ascending order,
    /// relabeled to 0..), with the given source/target sequences over the
    /// original indices. Callers must pass interface points inside `mask`
    /// that are minimal resp. maximal in the restriction.
    pub(crate) fn induced(&self, mask: u64, sources: &[u8], targets: &[u8]) -> Iposet {
        let mut remap = [0u8; MAX_POINTS];
        let mut order: Vec<usize> = Vec::with_capacity(mask.count_ones() as usize);
        for (new, old) in bits(mask).enumerate() {
            remap[old] = new as u8;
            order.push(old);
        }
        let up = order
            .iter()
            .map(|&old| {
                let mut row = 0;
                for j in bits(self.up[old] & mask) {
                    row |= 1 << remap[j];
                }
                row
            })
            .collect();
        let map_seq = |seq: &[u8]| seq.iter().map(|&x| remap[x as usize]).collect();
        Iposet::from_parts(up, map_seq(sources), map_seq(targets))
    }
}

impl std::fmt::Debug for Iposet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Iposet({})", crate::format::to_line(self))
    }
}

impl std::fmt::Display for Iposet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&crate::format::to_line(self))
    }
}

/// Warshall closure on bitset rows.
pub(crate) fn transitive_close(up: &mut [u64]) {
    for k in 0..up.len() {
        let row_k = up[k];
        for row in up.iter_mut() {
            if *row & (1 << k) != 0 {
                *row |= row_k;
            }
        }
    }
}

fn validate_interface(
    up: &[u64],
    seq: &[usize],
    n: usize,
    minimal: bool,
) -> Result<Vec<u8>, Error> {
    let kind = if minimal { "source" } else { "target" };
    let mut seen = 0u64;
    let mut out = Vec::with_capacity(seq.len());
    for &label in seq {
        if label == 0 || label > n {
            return Err(Error::Interface(format!(
                "{kind} label {label} out of range 1..={n}"
            )));
        }
        let x = label - 1;
        if seen & (1 << x) != 0 {
            return Err(Error::Interface(format!("{kind} label {label} repeated")));
        }
        seen |= 1 << x;
        let ok = if minimal {
            up.iter().all(|row| row & (1 << x) == 0)
        } else {
            up[x] == 0
        };
        if !ok {
            return Err(Error::Interface(format!(
                "{kind} label {label} is not {}",
                if minimal { "minimal" } else { "maximal" }
            )));
        }
        out.push(x as u8);
    }
    Ok(out)
}
