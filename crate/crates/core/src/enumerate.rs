//! Isomorphism-reduced generation.
//!
//! The heart is the memoized recursion for the gluing-parallel classes
//! `G_n(k,l)`: base cases are the four singleton generators, and for
//! `n > 1` the cell is the union of all gluings `G_p(k,m) ⋇ G_q(m,l)`
//! with `m = p+q-n`, `0 ≤ m < p,q`, plus all parallel splits
//! `G_p(k1,l1) ⊗ G_q(k2,l2)` with `p+q = n`, `k1+k2 = k`, `l1+l2 = l`,
//! everything deduplicated through [`IsoClassStore`]. The Winkowski
//! refinement runs the same loops over Winkowski cells, widened on the
//! glue side by the combinatorially generated gp-terminators (left) and
//! gp-starters (right).
//!
//! Also here: sp-closure of generator posets, generation of all posets on
//! `n` points, decoration of posets into iposets, closed-form counts of
//! discrete iposets, and checkpointing of memo cells to a directory.

use std::collections::HashMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::iposet::{bits, Iposet, MAX_POINTS};
use crate::iso::{self, IsoClassStore};

/// Which class family a memo generates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenMode {
    /// All gluing-parallel iposets.
    Gp,
    /// Gluing-parallel Winkowski iposets only.
    Winkowski,
}

impl GenMode {
    fn file_prefix(self) -> &'static str {
        match self {
            GenMode::Gp => "g",
            GenMode::Winkowski => "w",
        }
    }
}

type Cell = (usize, usize, usize);

#[derive(Default)]
struct CellSlot(Mutex<Option<Arc<Vec<Iposet>>>>);

/// Memoization table for the recursion, indexed by `(n, k, l)`.
///
/// Only canonical cells with `k ≤ l` are computed, locked and
/// checkpointed; a mirrored cell is served by pointwise reversal. Each
/// cell is computed at most once under exclusive ownership even when
/// requested from several threads; dependencies strictly decrease `n`,
/// so the per-cell locks cannot cycle.
pub struct GpMemo {
    mode: GenMode,
    cells: Mutex<HashMap<Cell, Arc<CellSlot>>>,
    computed: AtomicUsize,
}

impl GpMemo {
    pub fn new(mode: GenMode) -> GpMemo {
        GpMemo {
            mode,
            cells: Mutex::new(HashMap::new()),
            computed: AtomicUsize::new(0),
        }
    }

    pub fn mode(&self) -> GenMode {
        self.mode
    }

    /// Number of cells actually computed (mirrors and memo hits excluded).
    pub fn computed_cells(&self) -> usize {
        self.computed.load(Ordering::Relaxed)
    }

    /// The classes of cell `(n, k, l)`, computing it if needed.
    pub fn cell(&self, n: usize, k: usize, l: usize) -> Arc<Vec<Iposet>> {
        assert!(n <= MAX_POINTS && k <= n && l <= n, "cell out of range");
        if k > l {
            let canonical = self.cell(n, l, k);
            return Arc::new(canonical.iter().map(Iposet::reverse).collect());
        }
        let slot = {
            let mut cells = self.cells.lock().unwrap();
            cells.entry((n, k, l)).or_default().clone()
        };
        let mut guard = slot.0.lock().unwrap();
        if let Some(v) = guard.as_ref() {
            return v.clone();
        }
        let v = Arc::new(self.compute(n, k, l));
        self.computed.fetch_add(1, Ordering::Relaxed);
        *guard = Some(v.clone());
        v
    }

    /// Class count of a cell; mirrored cells are counted without
    /// materializing the reversal.
    pub fn cell_count(&self, n: usize, k: usize, l: usize) -> usize {
        self.cell(n, k.min(l), k.max(l)).len()
    }

    /// Full `(n+1) x (n+1)` matrix of cell counts at level `n`.
    pub fn count_matrix(&self, n: usize) -> Vec<Vec<usize>> {
        (0..=n)
            .map(|k| (0..=n).map(|l| self.cell_count(n, k, l)).collect())
            .collect()
    }

    /// Total number of classes on `n` points across all cells.
    pub fn total(&self, n: usize) -> usize {
        self.count_matrix(n).iter().flatten().sum()
    }

    /// Snapshot of the filled canonical cells.
    pub fn filled_cells(&self) -> Vec<(Cell, Arc<Vec<Iposet>>)> {
        let slots: Vec<(Cell, Arc<CellSlot>)> = {
            let cells = self.cells.lock().unwrap();
            cells.iter().map(|(c, s)| (*c, s.clone())).collect()
        };
        let mut out: Vec<(Cell, Arc<Vec<Iposet>>)> = slots
            .into_iter()
            .filter_map(|(c, slot)| {
                let guard = slot.0.lock().unwrap();
                guard.as_ref().map(|v| (c, v.clone()))
            })
            .collect();
        out.sort_by_key(|(c, _)| *c);
        out
    }

    /// Installs a cell loaded from a checkpoint. Returns false (leaving
    /// the existing contents) if the cell was already filled.
    fn install_cell(&self, n: usize, k: usize, l: usize, classes: Vec<Iposet>) -> bool {
        debug_assert!(k <= l);
        let slot = {
            let mut cells = self.cells.lock().unwrap();
            cells.entry((n, k, l)).or_default().clone()
        };
        let mut guard = slot.0.lock().unwrap();
        if guard.is_some() {
            return false;
        }
        *guard = Some(Arc::new(classes));
        true
    }

    fn base_cell(&self, n: usize, k: usize, l: usize) -> Vec<Iposet> {
        match (self.mode, n) {
            (_, 0) => {
                if k == 0 && l == 0 {
                    vec![Iposet::empty()]
                } else {
                    vec![]
                }
            }
            (GenMode::Gp, 1) => vec![Iposet::singleton(k == 1, l == 1)],
            (GenMode::Winkowski, 1) => {
                if k == 1 && l == 1 {
                    vec![Iposet::identity(1)]
                } else {
                    vec![]
                }
            }
            _ => unreachable!(),
        }
    }

    fn compute(&self, n: usize, k: usize, l: usize) -> Vec<Iposet> {
        if n <= 1 {
            return self.base_cell(n, k, l);
        }
        let store = IsoClassStore::new();

        // Gluings G_p(k,m) ⋇ G_q(m,l) with m = p+q-n, both sides keeping a
        // point outside the glued interface.
        for p in 1..n {
            for q in 1..n {
                if p + q < n {
                    continue;
                }
                let m = p + q - n;
                if m >= p || m >= q || k > p || l > q {
                    continue;
                }
                let lefts = self.glue_side(p, k, m, true);
                let rights = self.glue_side(q, m, l, false);
                for left in &lefts {
                    for right in &rights {
                        left.par_iter().for_each(|a| {
                            for b in right.iter() {
                                let glued = a.glue(b).expect("glue arities match");
                                store.push(glued);
                            }
                        });
                    }
                }
            }
        }

        // Parallel splits. Both orders are required: interface sequences
        // concatenate, so P ⊗ Q and Q ⊗ P are not isomorphic as iposets
        // in general (G_2(1,2) already needs both).
        for p in 1..n {
            let q = n - p;
            for k1 in 0..=k.min(p) {
                let k2 = k - k1;
                if k2 > q {
                    continue;
                }
                for l1 in 0..=l.min(p) {
                    let l2 = l - l1;
                    if l2 > q {
                        continue;
                    }
                    let left = self.cell(p, k1, l1);
                    let right = self.cell(q, k2, l2);
                    left.par_iter().for_each(|a| {
                        for b in right.iter() {
                            store.push(a.parallel(b));
                        }
                    });
                }
            }
        }

        store.into_vec()
    }

    /// The class sets feeding one side of the glue loop. In Winkowski
    /// mode the left side is widened by gp-terminators (when `k = p`) and
    /// the right side by gp-starters (when `l = q`); those cells are
    /// produced combinatorially, not recursively.
    fn glue_side(&self, pts: usize, k: usize, l: usize, left: bool) -> Vec<Arc<Vec<Iposet>>> {
        let mut sets = vec![self.cell(pts, k, l)];
        if self.mode == GenMode::Winkowski {
            if left && k == pts {
                sets.push(Arc::new(gp_terminator_classes(pts, l)));
            }
            if !left && l == pts {
                sets.push(Arc::new(gp_starter_classes(pts, k)));
            }
        }
        sets
    }
}

/// The isomorphism classes of gluing-parallel iposets on `n` points with
/// `k` sources and `l` targets. The memo must be in [`GenMode::Gp`].
pub fn gp_closure(memo: &GpMemo, n: usize, k: usize, l: usize) -> Arc<Vec<Iposet>> {
    assert_eq!(memo.mode(), GenMode::Gp);
    memo.cell(n, k, l)
}

/// The gluing-parallel Winkowski classes `G_n^W(k,l)`. The memo must be
/// in [`GenMode::Winkowski`].
pub fn gp_winkowski_closure(memo: &GpMemo, n: usize, k: usize, l: usize) -> Arc<Vec<Iposet>> {
    assert_eq!(memo.mode(), GenMode::Winkowski);
    memo.cell(n, k, l)
}

/// The `binom(n, k)` interface-consistent (equivalently gluing-parallel)
/// starters on `n` points with `k` sources: discrete, target map the
/// identity, source sequence an ascending subset.
pub fn gp_starter_classes(n: usize, k: usize) -> Vec<Iposet> {
    let mut out = Vec::new();
    let antichain = Iposet::antichain(n);
    let targets: Vec<u8> = (0..n as u8).collect();
    for sub in k_subsets(n, k) {
        out.push(antichain.with_interfaces(sub, targets.clone()));
    }
    out
}

/// Reversals of [`gp_starter_classes`]: the gp-terminators on `n` points
/// with `k` targets.
pub fn gp_terminator_classes(n: usize, k: usize) -> Vec<Iposet> {
    gp_starter_classes(n, k)
        .iter()
        .map(Iposet::reverse)
        .collect()
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..n {
            if n - x < k - cur.len() {
                break;
            }
            cur.push(x as u8);
            rec(x + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Closure of the generator posets under serial and parallel composition,
/// as classes per point count `0..=max_n`. Generators must be non-empty
/// posets (no interfaces); the empty poset is counted at `n = 0`.
pub fn sp_closure(generators: &[Iposet], max_n: usize) -> Vec<Vec<Iposet>> {
    assert!(
        generators
            .iter()
            .all(|g| g.n() > 0 && g.src() == 0 && g.tgt() == 0),
        "generators must be non-empty posets"
    );
    let mut levels: Vec<Vec<Iposet>> = vec![vec![Iposet::empty()]];
    for n in 1..=max_n {
        let store = IsoClassStore::new();
        for g in generators.iter().filter(|g| g.n() == n) {
            store.push(g.clone());
        }
        for p in 1..=n / 2 {
            let q = n - p;
            let (small, big) = (&levels[p], &levels[q]);
            small.par_iter().for_each(|a| {
                for b in big.iter() {
                    store.push(a.parallel(b));
                    store.push(a.glue(b).expect("posets glue at arity 0"));
                    if p != q {
                        store.push(b.glue(a).expect("posets glue at arity 0"));
                    }
                }
            });
        }
        levels.push(store.into_vec());
    }
    levels
}

/// Every isomorphism class of posets on `0..=max_n` points, generated by
/// extending each smaller class with a new maximal point over each of its
/// down-sets. Down-sets are enumerated as downward closures of antichains.
pub fn all_posets_up_to(max_n: usize) -> Vec<Vec<Iposet>> {
    let mut levels = vec![vec![Iposet::empty()]];
    for _ in 1..=max_n {
        let prev = levels.last().unwrap();
        let store = IsoClassStore::new();
        prev.par_iter().for_each(|p| {
            for antichain in antichains(p) {
                let downset = antichain | bits(antichain).fold(0, |m, a| m | p.down_mask(a));
                store.push(extend_with_maximal(p, downset));
            }
        });
        levels.push(store.into_vec());
    }
    levels
}

/// The classes of posets on exactly `n` points.
pub fn all_posets(n: usize) -> Vec<Iposet> {
    all_posets_up_to(n).pop().unwrap()
}

/// All antichain masks of the underlying poset, the empty one included.
fn antichains(ip: &Iposet) -> Vec<u64> {
    let n = ip.n();
    let comparable: Vec<u64> = (0..n).map(|i| ip.up_mask(i) | ip.down_mask(i)).collect();
    let mut out = Vec::new();
    fn rec(i: usize, n: usize, cur: u64, comparable: &[u64], out: &mut Vec<u64>) {
        if i == n {
            out.push(cur);
            return;
        }
        rec(i + 1, n, cur, comparable, out);
        if comparable[i] & cur == 0 {
            rec(i + 1, n, cur | 1 << i, comparable, out);
        }
    }
    rec(0, n, 0, &comparable, &mut out);
    out
}

fn extend_with_maximal(p: &Iposet, downset: u64) -> Iposet {
    let n = p.n();
    let mut up: Vec<u64> = (0..n)
        .map(|i| p.up_mask(i) | if downset & (1 << i) != 0 { 1 << n } else { 0 })
        .collect();
    up.push(0);
    Iposet::from_parts(up, Vec::new(), Vec::new())
}

/// Decorates each poset with every injective source sequence into its
/// minimal points and target sequence into its maximal points, reduced up
/// to iposet isomorphism. `ic_only` keeps interface-consistent results
/// only.
pub fn decorate_iposets(posets: &[Iposet], ic_only: bool) -> Vec<Iposet> {
    let store = IsoClassStore::new();
    posets.par_iter().for_each(|p| {
        debug_assert!(p.src() == 0 && p.tgt() == 0, "decoration expects posets");
        let sources = injective_sequences(p.minimal_mask());
        let targets = injective_sequences(p.maximal_mask());
        for s in &sources {
            for t in &targets {
                let ip = p.with_interfaces(s.clone(), t.clone());
                if ic_only && !ip.is_interface_consistent() {
                    continue;
                }
                store.push(ip);
            }
        }
    });
    store.into_vec()
}

/// All ordered sequences of distinct elements of `mask`, the empty one
/// included.
fn injective_sequences(mask: u64) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    fn rec(remaining: u64, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        out.push(cur.clone());
        for x in bits(remaining) {
            cur.push(x as u8);
            rec(remaining & !(1 << x), cur, out);
            cur.pop();
        }
    }
    rec(mask, &mut Vec::new(), &mut out);
    out
}

/// Closed-form counts of discrete iposet families on `n` points, exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiscreteCounts {
    pub n: usize,
    /// `2^n` (equals the number of gp-terminators as well).
    pub gp_starters: u64,
    /// `sum_{k=0..n} n!/k!`.
    pub starters: u64,
    /// Double-binomial sum over source/target/overlap sizes.
    pub gp_discrete: u64,
    /// Same sum with a factor `u!` for the overlap matching.
    pub discrete: u64,
    /// `n!`.
    pub symmetries: u64,
}

pub fn discrete_counts(n: usize) -> DiscreteCounts {
    let starters: u128 = (0..=n).map(|k| falling(n, n - k)).sum();
    let mut gp_discrete: u128 = 0;
    let mut discrete: u128 = 0;
    for s in 0..=n {
        for t in 0..=n {
            let lo = (s + t).saturating_sub(n);
            for u in lo..=s.min(t) {
                let ways = binom(s, u) * binom(t, u);
                gp_discrete += ways;
                discrete += ways * factorial(u);
            }
        }
    }
    DiscreteCounts {
        n,
        gp_starters: 1u64.checked_shl(n as u32).expect("2^n overflows u64"),
        starters: as_u64(starters),
        gp_discrete: as_u64(gp_discrete),
        discrete: as_u64(discrete),
        symmetries: as_u64(factorial(n)),
    }
}

/// The Vandermonde simplification of the gp-discrete count:
/// `sum_{i=0..n} binom(n+2+i, n-i)`.
pub fn gp_discrete_vandermonde(n: usize) -> u64 {
    as_u64((0..=n).map(|i| binom(n + 2 + i, n - i)).sum())
}

fn as_u64(x: u128) -> u64 {
    u64::try_from(x).expect("count overflows u64")
}

fn factorial(k: usize) -> u128 {
    (1..=k as u128).product()
}

/// Falling factorial `n * (n-1) * ... * (n-k+1)`, i.e. `n!/(n-k)!`.
fn falling(n: usize, k: usize) -> u128 {
    ((n - k + 1)..=n).map(|x| x as u128).product()
}

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Writes each filled canonical cell of the memo as one file
/// `<prefix>_<n>_<k>_<l>.txt` ('g' for gp mode, 'w' for Winkowski) in the
/// canonical line format.
pub fn checkpoint_save(memo: &GpMemo, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let prefix = memo.mode().file_prefix();
    for ((n, k, l), classes) in memo.filled_cells() {
        let path = dir.join(format!("{prefix}_{n}_{k}_{l}.txt"));
        let mut w = BufWriter::new(fs::File::create(path)?);
        if classes.is_empty() {
            writeln!(w, "# n={n} classes=0")?;
        } else {
            iso::write_classes(&mut w, &classes)?;
        }
    }
    Ok(())
}

/// Reconstructs a memo from a checkpoint directory, validating every
/// line. Cells that fail validation are discarded and reported; loading
/// never fails on malformed content, only on I/O errors.
pub fn checkpoint_load(dir: &Path, mode: GenMode) -> io::Result<(GpMemo, Vec<String>)> {
    let memo = GpMemo::new(mode);
    let mut reports = Vec::new();
    let mut names: Vec<String> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().into_string().ok())
        .collect();
    names.sort_unstable();
    for name in names {
        let Some((n, k, l)) = parse_cell_name(&name, mode.file_prefix()) else {
            continue;
        };
        match load_cell_file(&dir.join(&name), n, k, l) {
            Ok(classes) => {
                // Canonicalize mirrored cells by reversal.
                let (k2, l2, classes) = if k > l {
                    (l, k, classes.iter().map(Iposet::reverse).collect())
                } else {
                    (k, l, classes)
                };
                if !memo.install_cell(n, k2, l2, classes) {
                    reports.push(format!(
                        "{name}: duplicate of an already loaded cell, ignored"
                    ));
                }
            }
            Err(msg) => reports.push(format!("{name}: {msg}; cell left unfilled")),
        }
    }
    Ok((memo, reports))
}

fn parse_cell_name(name: &str, prefix: &str) -> Option<Cell> {
    let rest = name
        .strip_prefix(prefix)?
        .strip_prefix('_')?
        .strip_suffix(".txt")?;
    let mut parts = rest.split('_').map(str::parse::<usize>);
    match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some(Ok(n)), Some(Ok(k)), Some(Ok(l)), None) if n <= MAX_POINTS && k <= n && l <= n => {
            Some((n, k, l))
        }
        _ => None,
    }
}

fn load_cell_file(path: &Path, n: usize, k: usize, l: usize) -> Result<Vec<Iposet>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("read failed: {e}"))?;
    let mut declared: Option<usize> = None;
    let store = IsoClassStore::new();
    let mut classes = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            for field in rest.split_whitespace() {
                if let Some(c) = field.strip_prefix("classes=") {
                    declared = c.parse().ok();
                }
            }
            continue;
        }
        let ip = crate::format::parse_line(line).map_err(|e| format!("bad line `{line}`: {e}"))?;
        if ip.n() != n || ip.src() != k || ip.tgt() != l {
            return Err(format!(
                "line `{line}` does not belong to cell ({n},{k},{l})"
            ));
        }
        if !store.push(ip.clone()) {
            return Err(format!("line `{line}` duplicates an earlier class"));
        }
        classes.push(ip);
    }
    if let Some(d) = declared {
        if d != classes.len() {
            return Err(format!(
                "header declares {d} classes, found {}",
                classes.len()
            ));
        }
    }
    Ok(classes)
}
