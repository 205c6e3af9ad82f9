use otcap::channel::{Dmc, InputDistribution};
use otcap::typicality::{enumerate_cond_typical, is_cond_typical, is_typical, restrict};
use proptest::collection::vec;
use proptest::prelude::*;

fn bsc() -> Dmc<f64> {
    Dmc::binary_symmetric(0.2)
}

proptest! {
    #[test]
    fn typicality_is_monotone_in_eps(x in vec(0usize..3, 1..80), e1 in 0.0f64..0.5, e2 in 0.0f64..0.5) {
        let p = InputDistribution::new(vec![0.5, 0.3, 0.2]).unwrap();
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        if is_typical(&x, &p, lo) {
            prop_assert!(is_typical(&x, &p, hi));
        }
    }

    #[test]
    fn cond_typicality_is_monotone_in_eps(
        xy in vec((0usize..2, 0usize..2), 1..80),
        e1 in 0.0f64..0.5,
        e2 in 0.0f64..0.5,
    ) {
        let (x, y): (Vec<usize>, Vec<usize>) = xy.into_iter().unzip();
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        if is_cond_typical(&y, &x, &bsc(), lo).unwrap() {
            prop_assert!(is_cond_typical(&y, &x, &bsc(), hi).unwrap());
        }
    }

    /// Enumeration agrees with checking every input string.
    #[test]
    fn enumeration_matches_brute_force(y in vec(0usize..2, 1..11), eps in 0.0f64..0.4) {
        let n = y.len();
        let w = bsc();
        let brute: Vec<Vec<usize>> = (0..1u32 << n)
            .map(|v| (0..n).map(|i| (v >> (n - 1 - i) & 1) as usize).collect::<Vec<_>>())
            .filter(|x| is_cond_typical(&y, x, &w, eps).unwrap())
            .collect();
        let found = enumerate_cond_typical(&y, &w, None, eps, usize::MAX).unwrap();
        prop_assert!(!found.truncated);
        prop_assert_eq!(found.strings, brute);
    }

    #[test]
    fn restriction_picks_positions(x in vec(0usize..5, 1..50), picks in vec(any::<prop::sample::Index>(), 0..20)) {
        let positions: Vec<usize> = picks.iter().map(|i| i.index(x.len())).collect();
        let r = restrict(&x, &positions);
        prop_assert_eq!(r.len(), positions.len());
        prop_assert!(positions.iter().zip(&r).all(|(&p, &v)| x[p] == v));
    }
}

#[test]
fn zero_probability_symbols_are_never_typical() {
    let p = InputDistribution::new(vec![1.0, 0.0]).unwrap();
    assert!(is_typical(&[0, 0, 0], &p, 0.5));
    assert!(!is_typical(&[0, 0, 1], &p, 0.5));
    let w = Dmc::identity(2);
    assert!(!is_cond_typical(&[1], &[0], &w, 0.9).unwrap());
    assert!(is_cond_typical(&[0, 1], &[0], &w, 0.1).is_err());
}
