//! Structural classification predicates: series-parallel and interval
//! (by their forbidden substructures), discrete/starter/terminator/
//! symmetry, left/right Winkowski, and interface consistency.

use crate::iposet::{bits, Iposet};

/// Boolean classification record for one iposet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassFlags {
    /// No induced N in the underlying poset.
    pub is_sp: bool,
    /// No induced 2+2 in the underlying poset.
    pub is_interval: bool,
    /// Empty order.
    pub is_discrete: bool,
    /// Discrete with bijective target map.
    pub is_starter: bool,
    /// Discrete with bijective source map.
    pub is_terminator: bool,
    /// Both starter and terminator.
    pub is_symmetry: bool,
    /// Sources are exactly the minimal points.
    pub is_left_winkowski: bool,
    /// Targets are exactly the maximal points.
    pub is_right_winkowski: bool,
    /// Source and target preimage orders agree on shared interface points.
    pub is_interface_consistent: bool,
}

impl Iposet {
    pub fn classify(&self) -> ClassFlags {
        let is_discrete = self.edge_count() == 0;
        let is_starter = is_discrete && self.tgt() == self.n();
        let is_terminator = is_discrete && self.src() == self.n();
        ClassFlags {
            is_sp: !self.contains_induced_n(),
            is_interval: !self.contains_two_plus_two(),
            is_discrete,
            is_starter,
            is_terminator,
            is_symmetry: is_starter && is_terminator,
            is_left_winkowski: self.source_mask() == self.minimal_mask(),
            is_right_winkowski: self.target_mask() == self.maximal_mask(),
            is_interface_consistent: self.is_interface_consistent(),
        }
    }

    /// Interface consistency: for points in both interfaces, the source
    /// positions and target positions induce the same order.
    pub fn is_interface_consistent(&self) -> bool {
        let shared = self.source_mask() & self.target_mask();
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for x in bits(shared) {
            let sp = self
                .sources()
                .iter()
                .position(|&s| s as usize == x)
                .unwrap();
            let tp = self
                .targets()
                .iter()
                .position(|&t| t as usize == x)
                .unwrap();
            pairs.push((sp, tp));
        }
        pairs.sort_unstable();
        pairs.windows(2).all(|w| w[0].1 < w[1].1)
    }

    /// Induced N: points a,b,c,d with exactly a<c, b<c, b<d.
    fn contains_induced_n(&self) -> bool {
        let n = self.n();
        for c in 0..n {
            for d in 0..n {
                if c == d || self.less(c, d) || self.less(d, c) {
                    continue;
                }
                let dc = self.down_mask(c);
                let dd = self.down_mask(d);
                let bs = dc & dd;
                if bs == 0 {
                    continue;
                }
                // a below c only, incomparable with d and with some b.
                for a in bits(dc & !dd) {
                    if self.less(d, a) {
                        continue;
                    }
                    for b in bits(bs) {
                        if !self.less(a, b) && !self.less(b, a) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    /// Induced 2+2: edges w<y and x<z with neither w<z nor x<y. By
    /// Fishburn's characterization this is exactly non-interval.
    fn contains_two_plus_two(&self) -> bool {
        let n = self.n();
        for w in 0..n {
            for y in bits(self.up_mask(w)) {
                for x in 0..n {
                    if x == w || x == y {
                        continue;
                    }
                    for z in bits(self.up_mask(x)) {
                        if z != w && z != y && !self.less(w, z) && !self.less(x, y) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}
