use serde::Serialize;

use crate::error::{Error, Result};
use crate::ideals::{IntervalCert, Mode};
use crate::ledger::Ledger;
use crate::seq::{Center, Cuts, FreeSet, Thinning};
use crate::trees::{make_subtree, SilverSpec, TreeSpec};
use crate::words::{word_add, Word};

/// Words beyond this length are not built; blocks needing them are dropped.
const MAX_LEN: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RigidInterval {
    /// Index of the interval in the input partition.
    pub index: u64,
    pub from: u64,
    pub to: u64,
    /// Frontier positions summed on this interval (a multiset of size n).
    pub multiset: Vec<usize>,
    pub center: Word,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Block {
    pub start: u64,
    pub end: u64,
    /// Nodes of the subtree at the first rigid cut, one per branch.
    pub frontier: Vec<Word>,
    pub rigid: Vec<RigidInterval>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MminusShrink {
    pub n: usize,
    pub blocks: Vec<Block>,
    pub cert: IntervalCert,
    pub ledger: Ledger,
    #[serde(skip_serializing)]
    pub subtree: TreeSpec,
}

fn first_cut_at_or_after(cuts: &Cuts, pos: u64) -> u64 {
    let mut j = cuts.interval_of(pos);
    if cuts.cut(j) < pos {
        j += 1;
    }
    j
}

/// Multisets of size `n` over `0..p`, as sorted index vectors in lexicographic order.
pub fn multisets(p: usize, n: usize) -> Vec<Vec<usize>> {
    fn go(p: usize, n: usize, lo: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in lo..p {
            cur.push(i);
            go(p, n, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(p, n, 0, &mut Vec::new(), &mut out);
    out
}

fn split_ext(t: &TreeSpec, node: &Word, limit: usize) -> Result<Word> {
    t.shortest_split_extension(node, limit)
}

/// Shrinks a perfect tree so that `F + [T′] + … + [T′]` (n summands) lies in
/// a coarsened certificate.
///
/// The subtree is built in blocks. In each block every branch splits once
/// (into the two first successors of its next splitting node) and the
/// branches are brought to a common cut; then come `C(p+n-1, n)` intervals on
/// which no branch splits, one for each multiset of the `p` branches. The
/// new center on the interval of multiset μ is the old center plus the sum of
/// the branch patterns in μ, so a sum through μ differs from the new center
/// on the block exactly when the `F`-point differs from the old one there.
pub fn mminus_shrink_perfect(
    t: &TreeSpec,
    c: &IntervalCert,
    n: usize,
    depth: usize,
) -> Result<MminusShrink> {
    mminus_shrink_perfect_with(t, c, n, depth, false)
}

pub fn mminus_shrink_perfect_with(
    t: &TreeSpec,
    c: &IntervalCert,
    n: usize,
    depth: usize,
    aligned: bool,
) -> Result<MminusShrink> {
    if c.mode != Mode::Cofinite {
        return Err(Error::Mode(
            "the shrink needs a cofinite certificate".into(),
        ));
    }
    c.validate()?;
    let mut frontier = vec![Word::empty()];
    let mut blocks: Vec<Block> = Vec::new();
    let mut start = 0u64;
    let mut tips: Vec<Word> = Vec::new();
    let mut threshold: Option<u64> = None;
    while start < depth as u64 || threshold.is_none() {
        let mut split: Vec<Word> = Vec::new();
        for v in &frontier {
            split.push(split_ext(t, v, MAX_LEN as usize)?);
        }
        if aligned {
            let mut len = split.iter().map(Word::len).max().unwrap_or(0);
            loop {
                let ext: Vec<Word> = split
                    .iter()
                    .map(|s| t.leftmost_extension(s, len))
                    .collect::<Result<_>>()?;
                if ext.iter().all(|e| t.is_split(e)) {
                    split = ext;
                    break;
                }
                len += 1;
                if len as u64 > MAX_LEN {
                    return Err(Error::WindowTooSmall("no common splitting length".into()));
                }
            }
        }
        let need = split.iter().map(|s| s.len() as u64 + 1).max().unwrap_or(1);
        let j = first_cut_at_or_after(&c.cuts, need);
        let boundary = c.cuts.cut(j);
        let ms = multisets(2 * split.len(), n);
        let end = c.cuts.cut(j + ms.len() as u64);
        if end > MAX_LEN {
            break;
        }
        let mut branches = Vec::new();
        for s in &split {
            let succ = t.successors(s, 2);
            if succ.values.len() < 2 {
                return Err(Error::NotPerfect(s.clone()));
            }
            for &v in &succ.values {
                branches.push(t.leftmost_extension(&s.child(v), boundary as usize)?);
            }
        }
        let paths: Vec<Word> = branches
            .iter()
            .map(|b| t.leftmost_extension(b, end as usize))
            .collect::<Result<_>>()?;
        let mut rigid = Vec::new();
        for (i, mu) in ms.into_iter().enumerate() {
            let index = j + i as u64;
            let (a, b) = c.cuts.interval(index);
            let mut center = c.center.segment(a, b);
            for &k in &mu {
                center = word_add(&center, &paths[k].slice(a as usize, b as usize))?;
            }
            rigid.push(RigidInterval {
                index,
                from: a,
                to: b,
                multiset: mu,
                center,
            });
        }
        if n == 0 || rigid.first().is_some_and(|r| r.index >= c.threshold) {
            threshold.get_or_insert(blocks.len() as u64);
        }
        tips.extend(paths.iter().cloned());
        blocks.push(Block {
            start,
            end,
            frontier: branches,
            rigid,
        });
        frontier = paths;
        start = end;
    }
    let Some(threshold) = threshold else {
        return Err(Error::WindowTooSmall(format!(
            "no block with split-free intervals past {} fits below length {}",
            c.threshold, MAX_LEN
        )));
    };
    let subtree = make_subtree(t, &tips, &frontier, "mminus-shrink");
    let cert = if n == 0 {
        c.clone()
    } else {
        let mut center = c.center.clone();
        for b in &blocks {
            let values: Vec<i64> = b
                .rigid
                .iter()
                .flat_map(|r| r.center.entries().to_vec())
                .collect();
            let from = b.rigid.first().map(|r| r.from).unwrap_or(b.end);
            center = Center::Patched {
                base: Box::new(center),
                start: from,
                values,
            };
        }
        let mut points = vec![0];
        points.extend(blocks.iter().map(|b| b.end));
        IntervalCert::cofinite(
            center,
            Cuts::Spliced {
                points,
                base: Box::new(c.cuts.clone()),
            },
            threshold,
        )
    };
    let mut ledger = Ledger::new();
    ledger.record_all(
        "block-rigid",
        blocks.iter().flat_map(|b| {
            b.rigid.iter().map(move |r| {
                let ok = b.frontier.len() >= 2 && (r.from as usize) >= b.frontier[0].len();
                (ok, format!("interval {}", r.index))
            })
        }),
    );
    ledger.record(
        "blocks",
        true,
        format!("{} blocks, threshold {}", blocks.len(), threshold),
    );
    Ok(MminusShrink {
        n,
        blocks,
        cert,
        ledger,
        subtree,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MminusSilver {
    pub n: usize,
    pub spec: SilverSpec,
    pub cert: IntervalCert,
    /// Designated interval indices below the window.
    pub designated: Vec<u64>,
}

/// Removes every designated interval of `thinning(A, cuts)` from the free set.
/// All branches of the new tree follow the center there, so the new
/// certificate adds `n · x_T` to the old center on those intervals and groups
/// the intervals into blocks ending at each designated one.
pub fn mminus_shrink_silver(
    t: &SilverSpec,
    c: &IntervalCert,
    n: usize,
    depth: usize,
) -> Result<MminusSilver> {
    if c.mode != Mode::Cofinite {
        return Err(Error::Mode(
            "the shrink needs a cofinite certificate".into(),
        ));
    }
    c.validate()?;
    let thinning = Thinning::new(t.free_set.clone(), c.cuts.clone());
    let first = thinning.designated(0);
    if c.cuts.cut(first + 1) > depth as u64 {
        return Err(Error::WindowTooSmall(format!(
            "first designated interval I_{} ends past depth {}",
            first, depth
        )));
    }
    let spec = SilverSpec::new(
        FreeSet::Thinned {
            thinning: Box::new(thinning.clone()),
        },
        t.center.clone(),
    )?;
    let mut designated = Vec::new();
    let mut k = 0;
    loop {
        let m = thinning.designated(k);
        if c.cuts.cut(m) >= depth as u64 {
            break;
        }
        designated.push(m);
        k += 1;
    }
    let cert = if n == 0 {
        c.clone()
    } else {
        let center = Center::Thinned {
            base: Box::new(c.center.clone()),
            addend: Box::new(t.center.clone()),
            coef: n as i64,
            thinning: thinning.clone(),
        };
        let mut threshold = 0;
        while thinning.designated(threshold) < c.threshold {
            threshold += 1;
        }
        IntervalCert::cofinite(
            center,
            Cuts::Blocks {
                thinning: Box::new(thinning),
            },
            threshold,
        )
    };
    Ok(MminusSilver {
        n,
        spec,
        cert,
        designated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::{make_full, make_silver, truncate};

    #[test]
    fn multiset_counts() {
        assert_eq!(multisets(2, 2), vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
        assert_eq!(multisets(4, 2).len(), 10);
        assert_eq!(multisets(3, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn n_zero_keeps_cert() {
        let c = IntervalCert::cofinite(Center::zero(), Cuts::uniform(1), 0);
        let r = mminus_shrink_perfect(&make_full(), &c, 0, 6).unwrap();
        assert_eq!(r.cert, c);
        assert!(truncate(&r.subtree, 6, 3).is_subset_of(&truncate(&make_full(), 6, 3)));
    }

    #[test]
    fn full_tree_first_block() {
        let c = IntervalCert::cofinite(Center::zero(), Cuts::uniform(1), 0);
        let r = mminus_shrink_perfect(&make_full(), &c, 2, 6).unwrap();
        let b = &r.blocks[0];
        assert_eq!((b.start, b.end), (0, 4));
        assert_eq!(b.rigid.len(), 3);
        // branches (0,0,0,0) and (1,0,0,0); multiset {1,1} doubles the 0 tail
        assert_eq!(b.rigid[2].center, Word::from([0]));
        assert_eq!(r.cert.cuts.cut(1), 4);
        assert!(truncate(&r.subtree, 6, 2).is_perfect(2));
    }

    #[test]
    fn rejects_forall_mode() {
        let c = IntervalCert::forall(Center::zero(), Cuts::uniform(1));
        assert!(matches!(
            mminus_shrink_perfect(&make_full(), &c, 1, 4),
            Err(Error::Mode(_))
        ));
    }

    #[test]
    fn silver_thinning_powers_of_two() {
        let spec = SilverSpec::new(FreeSet::all(), Center::constant(1)).unwrap();
        let c = IntervalCert::cofinite(Center::zero(), Cuts::Geometric { ratio: 2 }, 0);
        let r = mminus_shrink_silver(&spec, &c, 1, 64).unwrap();
        assert_eq!(r.designated, vec![1, 3, 5]);
        // I_1 = [1,2) and I_3 = [4,8) are gone from the free set
        for p in [1, 4, 5, 6, 7] {
            assert!(!r.spec.free_set.contains(p));
        }
        for p in [0, 2, 3, 8] {
            assert!(r.spec.free_set.contains(p));
        }
        assert_eq!(r.cert.center.segment(4, 8), Word::repeat(1, 4));
        assert_eq!(r.cert.center.value(2), 0);
        let t = make_silver(spec.clone());
        let t2 = make_silver(r.spec.clone());
        assert!(truncate(&t2, 8, 3).is_subset_of(&truncate(&t, 8, 3)));
    }
}
