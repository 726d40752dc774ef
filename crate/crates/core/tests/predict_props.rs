use std::collections::BTreeSet;

use hyperdisp_core::classify::{analyze, AnalysisOptions, ZoneReport};
use hyperdisp_core::predict::{
    combine, interpolated_kappa, predict, rat, strichartz_pair, table_rows, Exponent, KFactor, Kappa,
    LebesguePair, TableRow,
};
use hyperdisp_core::roots::FrequencyGrid;
use hyperdisp_core::symbols::corpus;
use proptest::prelude::*;

/// `(c, lambda, exponential, row)`: `K = <t>^(lambda - c g / 4)` at gap `g`,
/// or `<t>^lambda e^(-t/4)`.
type RowSpec = (i64, i64, bool, usize);

fn row_at(spec: &RowSpec, index: usize, gap: Exponent) -> KFactor {
    let (c, lambda, exponential, row) = *spec;
    let mut k = if exponential {
        KFactor::exponential(0.25, lambda, TableRow::ALL[row])
    } else {
        KFactor::polynomial(-rat(c, 4) * gap, lambda, TableRow::ALL[row])
    };
    k.zone = Some(index);
    k
}

fn rows_at(specs: &[RowSpec], gap: Exponent) -> Vec<KFactor> {
    specs.iter().enumerate().map(|(i, s)| row_at(s, i, gap)).collect()
}

fn row_specs() -> impl Strategy<Value = Vec<RowSpec>> {
    prop::collection::vec((0i64..12, 0i64..3, prop::bool::weighted(0.2), 0usize..12), 1..8)
}

proptest! {
    #[test]
    fn combine_ignores_row_order(
        (specs, order) in row_specs().prop_flat_map(|v| {
            let n = v.len();
            (Just(v), Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
        }),
        k in 6i64..=12,
    ) {
        let gap = rat(2 * k - 12, 12);
        let rows = rows_at(&specs, gap);
        let shuffled: Vec<KFactor> = order.iter().map(|&i| rows[i].clone()).collect();
        prop_assert_eq!(combine(&rows).unwrap(), combine(&shuffled).unwrap());
    }

    #[test]
    fn rate_is_nondecreasing_in_the_gap(specs in row_specs(), a in 0i64..=12, b in 0i64..=12) {
        let (lo, hi) = (a.min(b), a.max(b));
        let k_lo = combine(&rows_at(&specs, rat(lo, 12))).unwrap().kappa();
        let k_hi = combine(&rows_at(&specs, rat(hi, 12))).unwrap().kappa();
        prop_assert!(k_lo <= k_hi);
    }

    #[test]
    fn direct_rate_dominates_interpolation(specs in row_specs(), k in 6i64..=12) {
        let pair = LebesguePair::dual(rat(k, 12)).unwrap();
        let k22 = combine(&rows_at(&specs, Exponent::from_integer(0))).unwrap();
        let k1 = combine(&rows_at(&specs, Exponent::from_integer(1))).unwrap();
        let direct = combine(&rows_at(&specs, pair.gap())).unwrap();
        let interpolated = interpolated_kappa(k22.kappa(), k1.kappa(), &pair).unwrap();
        prop_assert!(direct.kappa() >= interpolated);
        if k22.zone == k1.zone {
            prop_assert_eq!(direct.kappa(), interpolated);
        }
    }
}

fn report(name: &str) -> ZoneReport {
    let s = corpus::symbol(name).unwrap();
    let grid = match s.dimension() {
        1 => FrequencyGrid::cube(1, 8.0, 1601),
        _ => FrequencyGrid::cube(s.dimension(), 3.0, 41),
    }
    .unwrap();
    analyze(&s, &grid, &AnalysisOptions::default()).unwrap().1
}

#[test]
fn corpus_rates_interpolate_between_endpoints() {
    for name in ["wave_2d", "wave_3d", "kg_1d", "kg_2d", "dissipative_wave_1d", "fp_1_1"] {
        let r = report(name);
        let k22 = predict(&r, LebesguePair::l2_l2(), 0, 0).unwrap();
        let k1 = predict(&r, LebesguePair::l1_linf(), 0, 0).unwrap();
        let mut previous = k22.kappa;
        for k in 7..=12 {
            let pair = LebesguePair::dual(rat(k, 12)).unwrap();
            let direct = predict(&r, pair, 0, 0).unwrap();
            let interpolated = interpolated_kappa(k22.kappa, k1.kappa, &pair).unwrap();
            assert!(direct.kappa >= interpolated, "{name} {pair:?}");
            if k22.k.row == k1.k.row && k22.k.zone == k1.k.zone && k22.k.label == k1.k.label {
                assert_eq!(direct.kappa, interpolated, "{name} {pair:?}");
            }
            assert!(direct.kappa >= previous, "{name} {pair:?}");
            previous = direct.kappa;
        }
    }
}

#[test]
fn table_inventory() {
    let formulas: BTreeSet<&str> = TableRow::ALL.iter().map(|r| r.formula()).collect();
    assert!(formulas.iter().all(|f| !f.is_empty()));
    assert_eq!(TableRow::ALL.iter().filter(|r| r.large_frequency()).count(), 5);
    for row in TableRow::ALL {
        let json = serde_json::to_string(&row).unwrap();
        assert_eq!(serde_json::from_str::<TableRow>(&json).unwrap(), row);
    }
    let mut seen = BTreeSet::new();
    for name in corpus::names() {
        let r = report(name);
        if !r.stable() {
            continue;
        }
        if let Ok(rows) = table_rows(&r, &LebesguePair::l1_linf()) {
            seen.extend(rows.iter().map(|k| k.row));
        }
    }
    for row in [
        TableRow::LargeNonDegenerate,
        TableRow::LargeNonConvex,
        TableRow::OnAxisMultiplicity,
        TableRow::FiniteOrder,
        TableRow::BoundedCoinciding,
    ] {
        assert!(seen.contains(&row), "{row:?} not produced by any corpus symbol");
    }
}

#[test]
fn strichartz_pair_at_one_half() {
    let s = strichartz_pair(LebesguePair::l1_linf(), Kappa::Finite(rat(1, 2)));
    assert_eq!(s.q.as_deref(), Some("4/3"));
    assert_eq!(s.q_prime.as_deref(), Some("4"));
}
