//! Isomorphism machinery: the in/out hash invariant, the hash-isomorphism
//! prefilter, exact isomorphism with interface pinning, the in-out
//! bisimulation check, and the concurrent isomorphism-reduced store.
//!
//! Degrees and hash sums are taken over the transitively closed relation,
//! not Hasse edges. Hashes use exact 64-bit arithmetic; overflow is a hard
//! error, never silent wraparound (unreachable below a dozen points, so
//! the enumeration paths simply expect success).

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::io::{self, BufRead, Write};
use std::sync::Mutex;

use crate::format;
use crate::iposet::{bits, Error, Iposet};

/// Per-point isomorphism invariant: the two degree-weighted hashes plus
/// the interface positions (1-based, 0 when absent).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexProfile {
    pub inhash: u64,
    pub outhash: u64,
    pub src_pos: u8,
    pub tgt_pos: u8,
}

/// Per-point profiles in point order. `inhash(x)` is the least fixed point
/// of `indeg(x) + |P| * sum of inhash over strict predecessors`, dually for
/// `outhash`; both over the closed order.
pub fn vertex_profiles(ip: &Iposet) -> Result<Vec<VertexProfile>, Error> {
    let n = ip.n();
    let mult = n as u64;
    let mut order: Vec<usize> = (0..n).collect();

    // Down-set sizes increase strictly along the order, so sorting by them
    // yields a linear extension.
    let down: Vec<u64> = (0..n).map(|i| ip.down_mask(i)).collect();
    order.sort_by_key(|&i| down[i].count_ones());
    let mut inhash = vec![0u64; n];
    for &x in &order {
        let mut sum: u64 = 0;
        for y in bits(down[x]) {
            sum = sum.checked_add(inhash[y]).ok_or(Error::Overflow)?;
        }
        inhash[x] = sum
            .checked_mul(mult)
            .and_then(|s| s.checked_add(down[x].count_ones() as u64))
            .ok_or(Error::Overflow)?;
    }

    order.sort_by_key(|&i| ip.up_mask(i).count_ones());
    let mut outhash = vec![0u64; n];
    for &x in &order {
        let mut sum: u64 = 0;
        for y in bits(ip.up_mask(x)) {
            sum = sum.checked_add(outhash[y]).ok_or(Error::Overflow)?;
        }
        outhash[x] = sum
            .checked_mul(mult)
            .and_then(|s| s.checked_add(ip.up_mask(x).count_ones() as u64))
            .ok_or(Error::Overflow)?;
    }

    let mut profiles = Vec::with_capacity(n);
    for x in 0..n {
        let pos = |seq: &[u8]| {
            seq.iter()
                .position(|&s| s as usize == x)
                .map_or(0, |p| p as u8 + 1)
        };
        profiles.push(VertexProfile {
            inhash: inhash[x],
            outhash: outhash[x],
            src_pos: pos(ip.sources()),
            tgt_pos: pos(ip.targets()),
        });
    }
    Ok(profiles)
}

fn profiles_or_panic(ip: &Iposet) -> Vec<VertexProfile> {
    vertex_profiles(ip).expect("hash overflow: iposet too large for the 64-bit invariant")
}

/// True iff the profile multisets of the two iposets coincide. Necessary
/// but not sufficient for isomorphism.
pub fn hash_isomorphic(p: &Iposet, q: &Iposet) -> bool {
    if p.n() != q.n() {
        return false;
    }
    let mut pp = profiles_or_panic(p);
    let mut qq = profiles_or_panic(q);
    pp.sort_unstable();
    qq.sort_unstable();
    pp == qq
}

/// Exact isomorphism: an order isomorphism that also transports both
/// interface sequences pointwise.
pub fn isomorphic(p: &Iposet, q: &Iposet) -> bool {
    isomorphic_with_stats(p, q).0
}

/// As [`isomorphic`], also reporting how many candidate point-to-image
/// assignments the backtracking search attempted.
pub fn isomorphic_with_stats(p: &Iposet, q: &Iposet) -> (bool, u64) {
    let mut steps = 0;
    if p.n() != q.n()
        || p.src() != q.src()
        || p.tgt() != q.tgt()
        || p.edge_count() != q.edge_count()
    {
        return (false, steps);
    }
    if p == q {
        return (true, steps);
    }
    let pprof = profiles_or_panic(p);
    let qprof = profiles_or_panic(q);
    let ok = isomorphic_given(p, &pprof, q, &qprof, &mut steps);
    (ok, steps)
}

/// Isomorphism with precomputed profiles; sizes, arities and edge counts
/// must already be known equal.
pub(crate) fn isomorphic_given(
    p: &Iposet,
    pprof: &[VertexProfile],
    q: &Iposet,
    qprof: &[VertexProfile],
    steps: &mut u64,
) -> bool {
    let n = p.n();
    const UNSET: u8 = u8::MAX;
    let mut map = vec![UNSET; n];
    let mut used: u64 = 0;

    // Interface points are pinned: sources[i] must map to sources[i],
    // targets[j] to targets[j].
    for (a, b) in p
        .sources()
        .iter()
        .zip(q.sources())
        .chain(p.targets().iter().zip(q.targets()))
    {
        let (a, b) = (*a as usize, *b);
        if map[a] != UNSET {
            if map[a] != b {
                return false;
            }
            continue;
        }
        if used & (1 << b) != 0 || pprof[a] != qprof[b as usize] {
            return false;
        }
        map[a] = b;
        used |= 1 << b;
    }
    let mut assigned: Vec<(usize, usize)> = map
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != UNSET)
        .map(|(x, &v)| (x, v as usize))
        .collect();
    for i in 0..assigned.len() {
        for j in 0..i {
            if !pair_compatible(p, q, assigned[i], assigned[j]) {
                return false;
            }
        }
    }

    // Remaining points are enumerated only among profile-equal candidates.
    let mut cands: HashMap<VertexProfile, Vec<usize>> = HashMap::new();
    for (v, prof) in qprof.iter().enumerate() {
        if used & (1 << v) == 0 {
            cands.entry(*prof).or_default().push(v);
        }
    }
    let mut free: Vec<(usize, &[usize])> = Vec::new();
    for (x, slot) in map.iter().enumerate() {
        if *slot == UNSET {
            match cands.get(&pprof[x]) {
                Some(c) => free.push((x, c)),
                None => return false,
            }
        }
    }
    // Most constrained first.
    free.sort_by_key(|(_, c)| c.len());
    search(p, q, &free, 0, &mut used, &mut assigned, steps)
}

fn pair_compatible(p: &Iposet, q: &Iposet, (x, v): (usize, usize), (u, w): (usize, usize)) -> bool {
    p.less(x, u) == q.less(v, w) && p.less(u, x) == q.less(w, v)
}

fn search(
    p: &Iposet,
    q: &Iposet,
    free: &[(usize, &[usize])],
    idx: usize,
    used: &mut u64,
    assigned: &mut Vec<(usize, usize)>,
    steps: &mut u64,
) -> bool {
    if idx == free.len() {
        return true;
    }
    let (x, cands) = free[idx];
    for &v in cands {
        if *used & (1 << v) != 0 {
            continue;
        }
        *steps += 1;
        if !assigned
            .iter()
            .all(|&prev| pair_compatible(p, q, (x, v), prev))
        {
            continue;
        }
        *used |= 1 << v;
        assigned.push((x, v));
        if search(p, q, free, idx + 1, used, assigned, steps) {
            return true;
        }
        assigned.pop();
        *used &= !(1 << v);
    }
    false
}

/// In-out bisimilarity of the underlying posets (interfaces ignored).
///
/// Partition refinement over the disjoint union: initial blocks keyed by
/// (indeg, outdeg) of the closed order, refined by successor-block
/// signatures until stable. The largest in-out bisimulation relates the
/// cross pairs inside each stable block, so the posets are bisimilar iff
/// some block contains points of both (two empty posets are bisimilar).
pub fn in_out_bisimilar(p: &Iposet, q: &Iposet) -> bool {
    let (np, nq) = (p.n(), q.n());
    if np == 0 || nq == 0 {
        return np == nq;
    }
    let total = np + nq;
    let side = |node: usize| node >= np;
    let succ = |node: usize| -> Vec<usize> {
        if node < np {
            bits(p.up_mask(node)).collect()
        } else {
            bits(q.up_mask(node - np)).map(|j| j + np).collect()
        }
    };

    let mut block = vec![0usize; total];
    let mut ids: HashMap<(u32, u32), usize> = HashMap::new();
    for (node, slot) in block.iter_mut().enumerate() {
        let deg = if node < np {
            (p.down_mask(node).count_ones(), p.up_mask(node).count_ones())
        } else {
            let i = node - np;
            (q.down_mask(i).count_ones(), q.up_mask(i).count_ones())
        };
        let next = ids.len();
        *slot = *ids.entry(deg).or_insert(next);
    }
    let mut count = ids.len();

    loop {
        let mut ids: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        let mut next_block = vec![0usize; total];
        for (node, slot) in next_block.iter_mut().enumerate() {
            let mut sig: Vec<usize> = succ(node).into_iter().map(|s| block[s]).collect();
            sig.sort_unstable();
            sig.dedup();
            let next = ids.len();
            *slot = *ids.entry((block[node], sig)).or_insert(next);
        }
        let new_count = ids.len();
        block = next_block;
        if new_count == count {
            break;
        }
        count = new_count;
    }

    let mut seen = vec![(false, false); count];
    for node in 0..total {
        if side(node) {
            seen[block[node]].1 = true;
        } else {
            seen[block[node]].0 = true;
        }
    }
    seen.iter().any(|&(a, b)| a && b)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct BucketKey {
    n: u8,
    src: u8,
    tgt: u8,
    edges: u16,
    profiles: u64,
}

fn bucket_key(ip: &Iposet) -> BucketKey {
    let mut sorted = profiles_or_panic(ip);
    sorted.sort_unstable();
    let mut h = DefaultHasher::new();
    sorted.hash(&mut h);
    BucketKey {
        n: ip.n() as u8,
        src: ip.src() as u8,
        tgt: ip.tgt() as u8,
        edges: ip.edge_count() as u16,
        profiles: h.finish(),
    }
}

const SHARDS: usize = 64;

/// A bucketed collection of pairwise non-isomorphic iposets with
/// concurrent insert support. Buckets are keyed by point count, interface
/// arities, closed edge count, and a hash of the sorted profile multiset —
/// all isomorphism invariants, so isomorphic iposets always meet in the
/// same bucket. Inserts to different buckets proceed independently (up to
/// shard granularity); inserts to one bucket are serialized.
///
/// The stored class set is run-independent; representative choice and
/// iteration order may vary under concurrency.
pub struct IsoClassStore {
    shards: Vec<Mutex<HashMap<BucketKey, Vec<Iposet>>>>,
}

impl Default for IsoClassStore {
    fn default() -> Self {
        Self::new()
    }
}

impl IsoClassStore {
    pub fn new() -> IsoClassStore {
        IsoClassStore {
            shards: (0..SHARDS).map(|_| Mutex::new(HashMap::new())).collect(),
        }
    }

    fn shard(&self, key: &BucketKey) -> &Mutex<HashMap<BucketKey, Vec<Iposet>>> {
        let mut h = DefaultHasher::new();
        key.hash(&mut h);
        &self.shards[(h.finish() % SHARDS as u64) as usize]
    }

    /// Inserts unless the store already holds an isomorphic element.
    /// Returns true iff the iposet was inserted.
    pub fn push(&self, ip: Iposet) -> bool {
        let key = bucket_key(&ip);
        let prof = profiles_or_panic(&ip);
        let mut shard = self.shard(&key).lock().unwrap();
        let bucket = shard.entry(key).or_default();
        let mut steps = 0;
        for stored in bucket.iter() {
            let sprof = profiles_or_panic(stored);
            if isomorphic_given(&ip, &prof, stored, &sprof, &mut steps) {
                return false;
            }
        }
        bucket.push(ip);
        true
    }

    /// Membership test up to isomorphism.
    pub fn contains_isomorphic(&self, ip: &Iposet) -> bool {
        let key = bucket_key(ip);
        let prof = profiles_or_panic(ip);
        let shard = self.shard(&key).lock().unwrap();
        let Some(bucket) = shard.get(&key) else {
            return false;
        };
        let mut steps = 0;
        bucket.iter().any(|stored| {
            let sprof = profiles_or_panic(stored);
            isomorphic_given(ip, &prof, stored, &sprof, &mut steps)
        })
    }

    pub fn len(&self) -> usize {
        self.shards
            .iter()
            .map(|s| s.lock().unwrap().values().map(Vec::len).sum::<usize>())
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drains the store into a plain class list.
    pub fn into_vec(self) -> Vec<Iposet> {
        let mut out = Vec::new();
        for shard in self.shards {
            for (_, bucket) in shard.into_inner().unwrap() {
                out.extend(bucket);
            }
        }
        out
    }

    pub fn to_vec(&self) -> Vec<Iposet> {
        let mut out = Vec::new();
        for shard in &self.shards {
            for bucket in shard.lock().unwrap().values() {
                out.extend(bucket.iter().cloned());
            }
        }
        out
    }
}

impl FromIterator<Iposet> for IsoClassStore {
    fn from_iter<T: IntoIterator<Item = Iposet>>(iter: T) -> Self {
        let store = IsoClassStore::new();
        for ip in iter {
            store.push(ip);
        }
        store
    }
}

/// Elements of `a` with no isomorphic partner in `b`. `a` is expected to
/// be internally non-isomorphic.
pub fn diff_up_to_iso(a: &[Iposet], b: &[Iposet]) -> Vec<Iposet> {
    let store: IsoClassStore = b.iter().cloned().collect();
    a.iter()
        .filter(|ip| !store.contains_isomorphic(ip))
        .cloned()
        .collect()
}

/// Serializes classes in the canonical line format, one block per point
/// count, each preceded by a `# n=<n> classes=<count>` header. Lines are
/// sorted for run-to-run stability.
pub fn write_classes<W: Write>(w: &mut W, classes: &[Iposet]) -> io::Result<()> {
    let mut by_n: Vec<(usize, Vec<String>)> = Vec::new();
    for ip in classes {
        let n = ip.n();
        match by_n.iter_mut().find(|(m, _)| *m == n) {
            Some((_, lines)) => lines.push(format::to_line(ip)),
            None => by_n.push((n, vec![format::to_line(ip)])),
        }
    }
    by_n.sort_by_key(|(n, _)| *n);
    for (n, mut lines) in by_n {
        lines.sort_unstable();
        writeln!(w, "# n={} classes={}", n, lines.len())?;
        for line in lines {
            writeln!(w, "{line}")?;
        }
    }
    Ok(())
}

/// Parses a class file written by [`write_classes`]; `#` lines and blank
/// lines are skipped, every other line must be a canonical iposet line.
pub fn read_classes<R: BufRead>(r: R) -> Result<Vec<Iposet>, Error> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line.map_err(|e| Error::Format(format!("io error: {e}")))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(format::parse_line(line)?);
    }
    Ok(out)
}
