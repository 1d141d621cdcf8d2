use std::collections::BTreeMap;

use ddm_spmv::{
    compute_stats, coo_to_csr, csr_to_coo, csr_to_csc, decode_half, encode_half, generate,
    operational_intensity, roofline_bound, storage_size, traffic, CooMatrix, IndexWidth,
    LayoutBytes, MachineSpec, MatrixDims, MatrixProfile, ValuePrecision,
};
use proptest::prelude::*;

/// Distinct-position COO entries inside a `rows x cols` shape.
fn coo_strategy() -> impl Strategy<Value = CooMatrix> {
    (1usize..40, 1usize..40).prop_flat_map(|(rows, cols)| {
        proptest::collection::btree_map((0..rows, 0..cols), -1.0e4f64..1.0e4, 0..120).prop_map(
            move |map| {
                let entries = map.into_iter().map(|((r, c), v)| (r, c, v)).collect();
                CooMatrix::new(rows, cols, entries).unwrap()
            },
        )
    })
}

fn precision_strategy() -> impl Strategy<Value = ValuePrecision> {
    prop_oneof![
        Just(ValuePrecision::Half),
        Just(ValuePrecision::Single),
        Just(ValuePrecision::Double)
    ]
}

fn rounded(v: f64, p: ValuePrecision) -> f64 {
    match p {
        ValuePrecision::Half => decode_half(encode_half(v).unwrap()),
        ValuePrecision::Single => f64::from(v as f32),
        ValuePrecision::Double => v,
    }
}

fn layout_strategy() -> impl Strategy<Value = LayoutBytes> {
    (
        prop::sample::select(vec![2u32, 4, 8]),
        prop::sample::select(vec![2u32, 4]),
        prop::sample::select(vec![4u32, 8]),
        prop::sample::select(vec![4u32, 8]),
        prop::sample::select(vec![4u32, 8]),
    )
        .prop_map(|(v, c, r, o, i)| LayoutBytes::new(v, c, r, o, i).unwrap())
}

fn dims_strategy() -> impl Strategy<Value = MatrixDims> {
    (1u64..10_000_000, 1u64..1_000_000, 0u64..u32::MAX as u64)
        .prop_map(|(nr, nc, nnz)| MatrixDims::new(nr, nc, nnz.min(nr * nc)).unwrap())
}

proptest! {
    #[test]
    fn coo_csr_round_trip_is_bit_exact(coo in coo_strategy()) {
        let m = coo_to_csr(&coo, ValuePrecision::Double, IndexWidth::U32).unwrap();
        prop_assert!(m.validate().is_valid());
        let mut canonical = coo.clone();
        canonical.canonicalize();
        prop_assert_eq!(csr_to_coo(&m).entry_bits(), canonical.entry_bits());
    }

    #[test]
    fn values_are_rounded_per_precision(coo in coo_strategy(), p in precision_strategy()) {
        let m = coo_to_csr(&coo, p, IndexWidth::U16).unwrap();
        let mut canonical = coo.clone();
        canonical.canonicalize();
        for ((r, c, v), (r2, c2, got)) in canonical.entries().iter().zip(m.iter()) {
            prop_assert_eq!((*r, *c), (r2, c2));
            prop_assert_eq!(got.to_bits(), rounded(*v, p).to_bits());
        }
    }

    #[test]
    fn csc_preserves_entries(coo in coo_strategy(), p in precision_strategy()) {
        let m = coo_to_csr(&coo, p, IndexWidth::U32).unwrap();
        let csc = csr_to_csc(&m).unwrap();
        prop_assert!(csc.validate().is_valid());
        let a: BTreeMap<(usize, usize), u64> = m.iter().map(|(r, c, v)| ((r, c), v.to_bits())).collect();
        let b: BTreeMap<(usize, usize), u64> = csc.iter().map(|(r, c, v)| ((r, c), v.to_bits())).collect();
        prop_assert_eq!(a, b);
        prop_assert_eq!(csc.nnz(), m.nnz());
    }

    #[test]
    fn convert_round_trip_keeps_half_values(coo in coo_strategy()) {
        let m = coo_to_csr(&coo, ValuePrecision::Half, IndexWidth::U16).unwrap();
        let back = m.convert(ValuePrecision::Double, IndexWidth::U32).unwrap()
            .convert(ValuePrecision::Half, IndexWidth::U16).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn traffic_terms_add_up(d in dims_strategy(), l in layout_strategy()) {
        let t = traffic(d, l);
        let (nr, nc, nnz) = (d.nr as u128, d.nc as u128, d.nnz as u128);
        let expected = (l.value_bytes + l.col_index_bytes) as u128 * nnz
            + (l.row_ptr_bytes + l.out_bytes) as u128 * nr
            + l.in_bytes as u128 * nc;
        prop_assert_eq!(t.total_bytes(), expected);
        prop_assert_eq!(t.flops, 2 * nnz);
        prop_assert!(storage_size(d, l) <= t.total_bytes() + l.row_ptr_bytes as u128);
    }

    #[test]
    fn intensity_falls_as_any_field_widens(d in dims_strategy(), l in layout_strategy(), field in 0usize..5) {
        prop_assume!(d.nnz > 0);
        let mut wider = l;
        let slot = match field {
            0 => &mut wider.value_bytes,
            1 => &mut wider.col_index_bytes,
            2 => &mut wider.row_ptr_bytes,
            3 => &mut wider.out_bytes,
            _ => &mut wider.in_bytes,
        };
        let next = match *slot { 2 => 4, 4 => 8, _ => 8 };
        *slot = next;
        let a = operational_intensity(&traffic(d, l)).unwrap();
        let b = operational_intensity(&traffic(d, wider)).unwrap();
        prop_assert!(b <= a);
    }

    #[test]
    fn half_double_beats_single_when_nnz_dominates(nr in 1u64..1_000_000, nc in 1u64..100_000, extra in 1u64..1_000_000) {
        let nnz = 2 * (nr + nc) + extra;
        let d = MatrixDims::new(nr, nc, nnz).unwrap();
        let half = operational_intensity(&traffic(d, LayoutBytes::HALF_DOUBLE)).unwrap();
        let single = operational_intensity(&traffic(d, LayoutBytes::SINGLE)).unwrap();
        prop_assert!(half > single);
    }

    #[test]
    fn roofline_is_monotone(a in 1e-3f64..100.0, b in 1e-3f64..100.0, bw in 1e9f64..1e13) {
        let m = MachineSpec::new("m", 9.4e12, bw).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (x, y) = (roofline_bound(lo, &m).unwrap(), roofline_bound(hi, &m).unwrap());
        prop_assert!(x <= y);
        prop_assert!(y <= m.peak_flops);
    }
}

#[test]
fn small_dims_favour_single() {
    let d = MatrixDims::new(1, 1, 1).unwrap();
    let half = operational_intensity(&traffic(d, LayoutBytes::HALF_DOUBLE)).unwrap();
    let single = operational_intensity(&traffic(d, LayoutBytes::SINGLE)).unwrap();
    assert_eq!(half, 2.0 / 26.0);
    assert_eq!(single, 2.0 / 20.0);
}

#[test]
fn generator_stats_match_direct_recount() {
    let profile = MatrixProfile::prostate_desk().with_seed(11);
    let m = generate(&profile).unwrap();
    assert!(m.validate().is_valid());
    assert_eq!(m, generate(&profile).unwrap());
    assert_ne!(m, generate(&profile.clone().with_seed(12)).unwrap());

    let coo = csr_to_coo(&m);
    let mut lengths = vec![0usize; coo.rows()];
    for &(r, _, v) in coo.entries() {
        lengths[r] += 1;
        assert!((2f64.powi(-14)..=1.0).contains(&v));
    }
    let nonempty: Vec<usize> = lengths.iter().copied().filter(|&l| l > 0).collect();
    let s = compute_stats(&m);
    assert_eq!(s.nnz, coo.nnz());
    assert_eq!(s.nonempty_rows(), nonempty.len());
    assert_eq!(
        s.empty_row_fraction,
        (lengths.len() - nonempty.len()) as f64 / lengths.len() as f64
    );
    let below = nonempty.iter().filter(|&&l| l < 32).count() as f64 / nonempty.len() as f64;
    assert_eq!(s.frac_nonempty_below_32, Some(below));
    let mean = coo.nnz() as f64 / nonempty.len() as f64;
    assert_eq!(s.mean_nnz_per_nonempty_row, Some(mean));
    assert_eq!(s.cumulative.last().map(|&(_, f)| f), Some(1.0));
    let hist_total: usize = s.row_length_histogram.values().sum();
    assert_eq!(hist_total, coo.rows());
}
