use proptest::prelude::*;
use ultrametric_core::hierarchy::{ball, blocks, distance, HierarchyIndex, MAX_LEVEL};
use ultrametric_core::Error;

/// Smallest `r` with `ceil(x / 2^r) == ceil(y / 2^r)`, by scanning partitions.
fn scan_distance(x: u32, y: u32, n: u32) -> u32 {
    (0..=n)
        .find(|&r| x.div_ceil(1 << r) == y.div_ceil(1 << r))
        .expect("P_n is one block")
}

fn idx(v: u32, n: u32) -> HierarchyIndex {
    HierarchyIndex::new(v, n).unwrap()
}

#[test]
fn xor_distance_matches_partition_scan_exhaustively() {
    for n in 0..=8 {
        for x in 1..=1u32 << n {
            for y in 1..=1u32 << n {
                assert_eq!(distance(idx(x, n), idx(y, n)).unwrap(), scan_distance(x, y, n), "n={n} x={x} y={y}");
            }
        }
    }
}

#[test]
fn listed_examples() {
    assert_eq!(distance(idx(5, 3), idx(5, 3)).unwrap(), 0);
    assert_eq!(distance(idx(1, 3), idx(2, 3)).unwrap(), 1);
    assert_eq!(distance(idx(3, 3), idx(5, 3)).unwrap(), 3);
    let b = ball(idx(3, 3), 2).unwrap();
    assert_eq!((b.start, b.end), (1, 4));
    let b = ball(idx(3, 3), 3).unwrap();
    assert_eq!((b.start, b.end), (1, 8));
    let b = ball(idx(1, 3), 0).unwrap();
    assert_eq!((b.start, b.end), (1, 1));
    let p: Vec<(u32, u32)> = blocks(3, 1).unwrap().iter().map(|b| (b.start, b.end)).collect();
    assert_eq!(p, vec![(1, 2), (3, 4), (5, 6), (7, 8)]);
    assert_eq!(blocks(2, 2).unwrap().len(), 1);
    assert_eq!(blocks(3, 0).unwrap().len(), 8);
}

#[test]
fn errors() {
    assert!(matches!(distance(idx(1, 3), idx(1, 4)), Err(Error::LevelMismatch(3, 4))));
    assert!(HierarchyIndex::new(0, 3).is_err());
    assert!(HierarchyIndex::new(9, 3).is_err());
    assert!(HierarchyIndex::new(1, MAX_LEVEL + 1).is_err());
    assert!(ball(idx(1, 3), 4).is_err());
    assert!(blocks(3, 4).is_err());
}

fn same_level_triple() -> impl Strategy<Value = (u32, u32, u32, u32)> {
    (0u32..=13).prop_flat_map(|n| {
        let hi = 1u32 << n;
        (Just(n), 1..=hi, 1..=hi, 1..=hi)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn ultrametric_symmetric_and_separating((n, x, y, z) in same_level_triple()) {
        let (a, b, c) = (idx(x, n), idx(y, n), idx(z, n));
        let dxy = distance(a, b).unwrap();
        let dyz = distance(b, c).unwrap();
        let dxz = distance(a, c).unwrap();
        prop_assert!(dxz <= dxy.max(dyz));
        prop_assert_eq!(dxy, distance(b, a).unwrap());
        prop_assert_eq!(dxy == 0, x == y);
        prop_assert!(dxy <= n);
    }

    #[test]
    fn balls_agree_with_distance((n, x, y, _z) in same_level_triple(), r in 0u32..=13) {
        let r = r.min(n);
        let b = ball(idx(x, n), r).unwrap();
        prop_assert_eq!(b.len(), 1usize << r);
        prop_assert_eq!((b.start - 1) % (1u32 << r), 0);
        prop_assert_eq!(distance(idx(x, n), idx(y, n)).unwrap() <= r, b.contains(idx(y, n)));
    }

    #[test]
    fn partitions_tile_the_space(n in 0u32..=12, r in 0u32..=12) {
        let r = r.min(n);
        let p = blocks(n, r).unwrap();
        prop_assert_eq!(p.len(), 1usize << (n - r));
        let mut next = 1u32;
        for b in &p {
            prop_assert_eq!(b.start, next);
            prop_assert_eq!(b.end - b.start + 1, 1u32 << r);
            next = b.end + 1;
        }
        prop_assert_eq!(next - 1, 1u32 << n);
    }
}
